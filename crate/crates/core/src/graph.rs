//! Undirected simple graphs with sorted adjacency, and intersection-graph
//! construction from geometry.

use rustc_hash::FxHashMap;

use crate::geom::{diameter, intersects, GeomObject};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionGraph {
    adj: Vec<Vec<usize>>,
    edge_count: usize,
    /// `origin[v]` is the id of `v` in the structure this graph was derived
    /// from: an object id for [`build_graph`], a parent vertex for
    /// [`induced_subgraph`].
    origin: Vec<usize>,
}

impl IntersectionGraph {
    pub fn empty(n: usize) -> Self {
        IntersectionGraph {
            adj: vec![Vec::new(); n],
            edge_count: 0,
            origin: (0..n).collect(),
        }
    }

    /// Builds from an edge list; duplicates and self-loops are dropped.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            assert!(u < n && v < n, "edge ({u},{v}) out of range");
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        Self::from_adjacency(adj)
    }

    fn from_adjacency(mut adj: Vec<Vec<usize>>) -> Self {
        let mut deg_sum = 0;
        for a in adj.iter_mut() {
            a.sort_unstable();
            a.dedup();
            deg_sum += a.len();
        }
        let n = adj.len();
        IntersectionGraph {
            adj,
            edge_count: deg_sum / 2,
            origin: (0..n).collect(),
        }
    }

    pub fn with_origin(mut self, origin: Vec<usize>) -> Self {
        assert_eq!(origin.len(), self.n());
        self.origin = origin;
        self
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn origin(&self) -> &[usize] {
        &self.origin
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, a)| a.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// `u v` per line, 0-based, `u < v`.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for (u, v) in self.edges() {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }
}

/// Hierarchical-grid broad phase. Each object sits at level
/// `ceil(log2 diam)` in the cell of side `2^level` containing its anchor.
/// Two intersecting objects have anchors within the larger one's diameter,
/// so at the coarser level their cells are equal or adjacent.
pub fn build_graph(objects: &[GeomObject]) -> IntersectionGraph {
    let n = objects.len();
    let level_of = |o: &GeomObject| -> i32 { diameter(o).log2().ceil() as i32 };
    let levels: Vec<i32> = objects.iter().map(level_of).collect();
    let mut distinct: Vec<i32> = levels.clone();
    distinct.sort_unstable();
    distinct.dedup();

    let cell_of = |o: &GeomObject, lvl: i32| -> (i64, i64) {
        let side = (lvl as f64).exp2();
        let a = o.anchor();
        ((a.x / side).floor() as i64, (a.y / side).floor() as i64)
    };

    let mut adj = vec![Vec::new(); n];
    for &lvl in &distinct {
        let mut cells: FxHashMap<(i64, i64), Vec<usize>> = FxHashMap::default();
        for (i, o) in objects.iter().enumerate() {
            if levels[i] == lvl {
                cells.entry(cell_of(o, lvl)).or_default().push(i);
            }
        }
        for (i, o) in objects.iter().enumerate() {
            if levels[i] > lvl {
                continue;
            }
            let (cx, cy) = cell_of(o, lvl);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    let Some(bucket) = cells.get(&(cx + dx, cy + dy)) else { continue };
                    for &j in bucket {
                        // Same-level pairs are seen from both sides; keep one.
                        if (levels[i] == lvl && j <= i) || j == i {
                            continue;
                        }
                        if intersects(o, &objects[j]) {
                            adj[i].push(j);
                            adj[j].push(i);
                        }
                    }
                }
            }
        }
    }
    IntersectionGraph::from_adjacency(adj)
}

/// All-pairs construction; quadratic, used as a cross-check.
pub fn build_graph_all_pairs(objects: &[GeomObject]) -> IntersectionGraph {
    let mut edges = Vec::new();
    for i in 0..objects.len() {
        for j in i + 1..objects.len() {
            if intersects(&objects[i], &objects[j]) {
                edges.push((i, j));
            }
        }
    }
    IntersectionGraph::from_edges(objects.len(), &edges)
}

/// Subgraph induced by `keep` (any order, duplicates ignored). Vertices are
/// relabeled densely in increasing order of their id in `g`; `origin` maps
/// back to `g`.
pub fn induced_subgraph(g: &IntersectionGraph, keep: &[usize]) -> IntersectionGraph {
    let mut ids: Vec<usize> = keep.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in ids.iter().enumerate() {
        local[v] = i;
    }
    let adj: Vec<Vec<usize>> = ids
        .iter()
        .map(|&v| {
            g.neighbors(v)
                .iter()
                .filter_map(|&u| (local[u] != usize::MAX).then_some(local[u]))
                .collect()
        })
        .collect();
    IntersectionGraph::from_adjacency(adj).with_origin(ids)
}

/// Keeps exactly the edges whose endpoints have different colors.
pub fn bipartite_restrict(g: &IntersectionGraph, color: &[u8]) -> IntersectionGraph {
    assert_eq!(color.len(), g.n());
    let adj: Vec<Vec<usize>> = (0..g.n())
        .map(|v| {
            g.neighbors(v)
                .iter()
                .copied()
                .filter(|&u| color[u] != color[v])
                .collect()
        })
        .collect();
    IntersectionGraph::from_adjacency(adj).with_origin(g.origin().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::density_exhaustive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_disks(rng: &mut ChaCha8Rng, n: usize, side: f64, rmax: f64) -> Vec<GeomObject> {
        (0..n)
            .map(|i| {
                GeomObject::disk(
                    i,
                    rng.gen_range(0.0..side),
                    rng.gen_range(0.0..side),
                    rng.gen_range(0.5..rmax),
                )
            })
            .collect()
    }

    #[test]
    fn tangent_triangle() {
        let objs = vec![
            GeomObject::unit_disk(0, 0.0, 0.0),
            GeomObject::unit_disk(1, 2.0, 0.0),
            GeomObject::unit_disk(2, 1.0, 3f64.sqrt()),
        ];
        let g = build_graph(&objs);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn concentric_is_complete() {
        let objs: Vec<_> = (0..9).map(|i| GeomObject::disk(i, 0.0, 0.0, 1.0 + i as f64)).collect();
        let g = build_graph(&objs);
        assert_eq!(g.edge_count(), 36);
    }

    #[test]
    fn grid_matches_all_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for t in 0..10 {
            let mut objs = random_disks(&mut rng, 200, 30.0, 0.6 + t as f64);
            for (i, o) in objs.iter_mut().enumerate().skip(150) {
                let x = rng.gen_range(0.0..30.0);
                let y = rng.gen_range(0.0..30.0);
                *o = GeomObject::rect(i, x, y, x + rng.gen_range(0.1..4.0), y + rng.gen_range(0.1..9.0));
            }
            assert_eq!(build_graph(&objs), build_graph_all_pairs(&objs));
        }
    }

    #[test]
    fn order_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let objs = random_disks(&mut rng, 80, 15.0, 2.0);
        let g = build_graph(&objs);
        let perm: Vec<usize> = (0..80).rev().collect();
        let rev: Vec<_> = perm.iter().map(|&i| objs[i]).collect();
        let h = build_graph(&rev);
        for (u, v) in g.edges() {
            assert!(h.has_edge(79 - u, 79 - v));
        }
        assert_eq!(g.edge_count(), h.edge_count());
    }

    #[test]
    fn induced_examples() {
        let tri = IntersectionGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let e = induced_subgraph(&tri, &[2, 0]);
        assert_eq!(e.edge_count(), 1);
        assert_eq!(e.origin(), &[0, 2]);
        let all = induced_subgraph(&tri, &[0, 1, 2]);
        assert_eq!(all.edges().collect::<Vec<_>>(), tri.edges().collect::<Vec<_>>());
    }

    #[test]
    fn induced_matches_definition_and_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let objs = random_disks(&mut rng, 60, 10.0, 1.5);
        let g = build_graph(&objs);
        for _ in 0..20 {
            let keep: Vec<usize> = (0..60).filter(|_| rng.gen_bool(0.6)).collect();
            let h = induced_subgraph(&g, &keep);
            for a in 0..h.n() {
                for b in 0..h.n() {
                    assert_eq!(h.has_edge(a, b), g.has_edge(keep[a], keep[b]));
                }
            }
            let keep2: Vec<usize> = (0..h.n()).filter(|_| rng.gen_bool(0.5)).collect();
            let twice = induced_subgraph(&h, &keep2);
            let composed: Vec<usize> = keep2.iter().map(|&i| keep[i]).collect();
            let once = induced_subgraph(&g, &composed);
            assert_eq!(twice.edges().collect::<Vec<_>>(), once.edges().collect::<Vec<_>>());
        }
    }

    #[test]
    fn bipartite_examples() {
        let tri = IntersectionGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let b = bipartite_restrict(&tri, &[0, 0, 1]);
        assert_eq!(b.edges().collect::<Vec<_>>(), vec![(0, 2), (1, 2)]);
        assert_eq!(bipartite_restrict(&tri, &[1, 1, 1]).edge_count(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = build_graph(&random_disks(&mut rng, 50, 8.0, 1.2));
        let col: Vec<u8> = (0..50).map(|_| rng.gen_range(0..2)).collect();
        let b = bipartite_restrict(&g, &col);
        let want: Vec<_> = g.edges().filter(|&(u, v)| col[u] != col[v]).collect();
        assert_eq!(b.edges().collect::<Vec<_>>(), want);
    }

    #[test]
    fn edge_count_within_density_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..30 {
            let objs = random_disks(&mut rng, 40, 8.0, 2.0);
            let g = build_graph(&objs);
            let rho = density_exhaustive(&objs);
            assert!(g.edge_count() <= (rho - 1) * objs.len());
        }
    }

    #[test]
    fn edge_list_text() {
        let g = IntersectionGraph::from_edges(3, &[(2, 1), (0, 1)]);
        assert_eq!(g.to_edge_list(), "0 1\n1 2\n");
    }
}

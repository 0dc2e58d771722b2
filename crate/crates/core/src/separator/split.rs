use serde::Serialize;

use super::Separation;
use crate::error::{Error, Result};
use crate::graph::IntersectionGraph;
use crate::matching::Matching;

const NONE: usize = usize::MAX;

/// One step of growing the split graph. Each record raises the matching
/// number by exactly one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum SplitRecord {
    /// Path `v - v1 - v2` added; `v2` took over some of `v`'s edges.
    /// With no edges moved this is a pendant 2-path at `v`.
    Split { v: usize, v1: usize, v2: usize },
    /// Isolated edge `a - b` added.
    Seed { a: usize, b: usize },
}

/// A graph obtained from an intersection graph by vertex splits, with the
/// provenance needed to map matchings back.
#[derive(Clone, Debug)]
pub struct SplitGraph {
    adj: Vec<Vec<usize>>,
    object_of: Vec<usize>,
    records: Vec<SplitRecord>,
    original_n: usize,
    /// Scratch side labels used while applying gadgets.
    pub(crate) mark: Vec<u8>,
}

pub(crate) const MARK_NONE: u8 = 0;
pub(crate) const MARK_X: u8 = 1;
pub(crate) const MARK_Y: u8 = 2;
pub(crate) const MARK_Z: u8 = 3;

impl SplitGraph {
    /// Starts from `g` unchanged; vertex `v` carries object `g.origin()[v]`.
    pub fn new(g: &IntersectionGraph) -> Self {
        let adj = (0..g.n()).map(|v| g.neighbors(v).to_vec()).collect();
        SplitGraph {
            adj,
            object_of: g.origin().to_vec(),
            records: Vec::new(),
            original_n: g.n(),
            mark: vec![MARK_NONE; g.n()],
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn original_n(&self) -> usize {
        self.original_n
    }

    /// Number of records, i.e. the amount by which the matching number grew.
    pub fn split_count(&self) -> usize {
        self.records.len()
    }

    pub fn records(&self) -> &[SplitRecord] {
        &self.records
    }

    /// Object whose copy vertex `v` is.
    pub fn object_of(&self, v: usize) -> usize {
        self.object_of[v]
    }

    pub fn objects(&self) -> &[usize] {
        &self.object_of
    }

    pub(crate) fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Snapshot as an immutable graph; `origin` holds object ids.
    pub fn graph(&self) -> IntersectionGraph {
        let mut edges = Vec::new();
        for (u, a) in self.adj.iter().enumerate() {
            edges.extend(a.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        IntersectionGraph::from_edges(self.n(), &edges).with_origin(self.object_of.clone())
    }

    fn add_vertex(&mut self, object: usize) -> usize {
        self.adj.push(Vec::new());
        self.object_of.push(object);
        self.mark.push(MARK_NONE);
        self.adj.len() - 1
    }

    /// Splits `v` into the path `v - v1 - v2`, moving the edges to `moved`
    /// (a subset of `v`'s neighbors) onto `v2`.
    pub(crate) fn split(&mut self, v: usize, moved: &[usize]) -> (usize, usize) {
        let obj = self.object_of[v];
        let v1 = self.add_vertex(obj);
        let v2 = self.add_vertex(obj);
        if !moved.is_empty() {
            let mut sorted = moved.to_vec();
            sorted.sort_unstable();
            self.adj[v].retain(|u| sorted.binary_search(u).is_err());
            for &u in moved {
                for w in self.adj[u].iter_mut() {
                    if *w == v {
                        *w = v2;
                    }
                }
            }
            self.adj[v2].extend_from_slice(moved);
        }
        self.adj[v].push(v1);
        self.adj[v1].push(v);
        self.adj[v1].push(v2);
        self.adj[v2].push(v1);
        self.records.push(SplitRecord::Split { v, v1, v2 });
        (v1, v2)
    }

    /// Adds an isolated edge whose endpoints carry copies of `object`.
    pub(crate) fn seed(&mut self, object: usize) -> (usize, usize) {
        let a = self.add_vertex(object);
        let b = self.add_vertex(object);
        self.adj[a].push(b);
        self.adj[b].push(a);
        self.records.push(SplitRecord::Seed { a, b });
        (a, b)
    }

    /// Turns `v` into a chain whose even positions take consecutive groups
    /// of its edges. Returns the chain, `v` first.
    pub(crate) fn chain_split(&mut self, v: usize, slots: &[Vec<usize>]) -> Vec<usize> {
        let mut chain = vec![v];
        let mut cur = v;
        for j in 1..slots.len() {
            let moved: Vec<usize> = slots[j..].iter().flatten().copied().collect();
            let (v1, v2) = self.split(cur, &moved);
            chain.push(v1);
            chain.push(v2);
            cur = v2;
        }
        chain
    }

    /// Splits `v` until every chain vertex has degree at most 4. Returns the
    /// new vertices.
    pub(crate) fn reduce_degree(&mut self, v: usize) -> Vec<usize> {
        let d = self.adj[v].len();
        if d <= 4 {
            return Vec::new();
        }
        let mut nbrs = self.adj[v].clone();
        nbrs.sort_unstable();
        let mut slots = vec![nbrs[..3].to_vec()];
        let mut rest = &nbrs[3..];
        while rest.len() > 3 {
            slots.push(rest[..2].to_vec());
            rest = &rest[2..];
        }
        slots.push(rest.to_vec());
        let chain = self.chain_split(v, &slots);
        chain[1..].to_vec()
    }

    /// Applies the separator gadget to every vertex of `sep.z`.
    ///
    /// Each `z` gets one slot for its neighbors in `x` and its edges leaving
    /// the current vertex set, one slot per edge inside the separator, and
    /// one slot for its neighbors in `y`. With two or more slots `z` becomes
    /// a chain whose even positions are the slots; the `x` slot joins `x`,
    /// the `y` slot joins `y`, and every other chain vertex lands in the new
    /// separator, where degrees are at most 3.
    ///
    /// `sep` holds vertex ids of this graph. Returns `(x*, y*, z*)`.
    pub(crate) fn apply_gadgets(&mut self, sep: &Separation) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        for &v in &sep.x {
            self.mark[v] = MARK_X;
        }
        for &v in &sep.y {
            self.mark[v] = MARK_Y;
        }
        for &v in &sep.z {
            self.mark[v] = MARK_Z;
        }
        let mut xs = sep.x.clone();
        let mut ys = sep.y.clone();
        let mut zs = Vec::new();
        for &z in &sep.z {
            let mut xn = Vec::new();
            let mut yn = Vec::new();
            let mut zn = Vec::new();
            for &u in &self.adj[z] {
                match self.mark[u] {
                    MARK_Y => yn.push(u),
                    MARK_Z => zn.push(u),
                    _ => xn.push(u),
                }
            }
            zn.sort_unstable();
            let has_x = !xn.is_empty();
            let has_y = !yn.is_empty();
            let mut slots = Vec::new();
            if has_x {
                slots.push(xn);
            }
            slots.extend(zn.into_iter().map(|u| vec![u]));
            if has_y {
                slots.push(yn);
            }
            if slots.len() <= 1 {
                if has_x {
                    self.mark[z] = MARK_X;
                    xs.push(z);
                } else if has_y {
                    self.mark[z] = MARK_Y;
                    ys.push(z);
                } else {
                    zs.push(z);
                }
                continue;
            }
            let chain = self.chain_split(z, &slots);
            let last = chain.len() - 1;
            for (pos, &c) in chain.iter().enumerate() {
                if pos == 0 && has_x {
                    self.mark[c] = MARK_X;
                    xs.push(c);
                } else if pos == last && has_y {
                    self.mark[c] = MARK_Y;
                    ys.push(c);
                } else {
                    self.mark[c] = MARK_Z;
                    zs.push(c);
                }
            }
        }
        for &v in xs.iter().chain(&ys).chain(&zs) {
            self.mark[v] = MARK_NONE;
        }
        (xs, ys, zs)
    }
}

/// Output of splitting a separator in a whole graph.
#[derive(Clone, Debug)]
pub struct SplitResult {
    pub graph: SplitGraph,
    pub x_star: Vec<usize>,
    pub y_star: Vec<usize>,
    pub z_star: Vec<usize>,
}

/// Applies the separator gadget to `sep.z` in a copy of `g`. Vertices not
/// listed in `sep` are treated like `x`.
pub fn split_separator_vertices(g: &IntersectionGraph, sep: &Separation) -> SplitResult {
    let mut sg = SplitGraph::new(g);
    let (x_star, y_star, z_star) = sg.apply_gadgets(sep);
    SplitResult {
        graph: sg,
        x_star,
        y_star,
        z_star,
    }
}

/// Maps a matching of the split graph back to the original graph by undoing
/// the records in reverse. Each undo loses at most one pair; a maximum
/// matching loses exactly one per record.
pub fn unsplit_matching(m: &Matching, sg: &SplitGraph) -> Result<Matching> {
    let g = sg.graph();
    m.validate(&g)?;
    let mut mate = m.mates(sg.n());
    let unmatch = |mate: &mut Vec<usize>, a: usize| {
        let b = mate[a];
        if b != NONE {
            mate[a] = NONE;
            mate[b] = NONE;
        }
    };
    for rec in sg.records.iter().rev() {
        match *rec {
            SplitRecord::Seed { a, .. } => unmatch(&mut mate, a),
            SplitRecord::Split { v, v1, v2 } => {
                if mate[v1] == v2 {
                    unmatch(&mut mate, v1);
                } else {
                    let v_free = mate[v1] == v || mate[v] == NONE;
                    unmatch(&mut mate, v1);
                    let u = mate[v2];
                    if u != NONE {
                        unmatch(&mut mate, v2);
                        if v_free {
                            mate[v] = u;
                            mate[u] = v;
                        }
                    }
                }
            }
        }
    }
    let pairs = (0..sg.original_n)
        .filter(|&v| mate[v] != NONE && v < mate[v])
        .map(|v| {
            if mate[v] >= sg.original_n {
                Err(Error::InvalidMatching(format!("vertex {v} left matched to a split vertex")))
            } else {
                Ok((v, mate[v]))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Matching::new(pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{blossom_maximum_matching, exhaustive_matching_size};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn nu(g: &IntersectionGraph) -> usize {
        blossom_maximum_matching(g).len()
    }

    #[test]
    fn empty_separator_is_identity() {
        let g = IntersectionGraph::from_edges(4, &[(0, 1), (2, 3)]);
        let r = split_separator_vertices(&g, &Separation { x: vec![0, 1], y: vec![2, 3], z: vec![] });
        assert_eq!(r.graph.split_count(), 0);
        assert_eq!(r.graph.graph().edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
    }

    #[test]
    fn degree_two_separator_vertex() {
        // 0 - 1 - 2 with 1 separating.
        let g = IntersectionGraph::from_edges(3, &[(0, 1), (1, 2)]);
        let r = split_separator_vertices(&g, &Separation { x: vec![0], y: vec![2], z: vec![1] });
        assert_eq!(r.graph.split_count(), 1);
        let h = r.graph.graph();
        assert_eq!(nu(&h), nu(&g) + 1);
        assert_eq!(exhaustive_matching_size(&h).unwrap(), 2);
        // The x slot is vertex 1 itself, the y slot the far end of the path.
        assert!(r.x_star.contains(&1));
        assert_eq!(r.z_star.len(), 1);
        for &z in &r.z_star {
            assert!(h.degree(z) <= 3);
        }
    }

    #[test]
    fn triangle_separator_size_bound() {
        let g = IntersectionGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let r = split_separator_vertices(&g, &Separation { x: vec![], y: vec![], z: vec![0, 1, 2] });
        assert!(r.z_star.len() <= 4 * 3 + 6 * 3);
        let h = r.graph.graph();
        assert!(r.z_star.iter().all(|&z| h.degree(z) <= 3));
        assert_eq!(nu(&h), nu(&g) + r.graph.split_count());
    }

    fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> IntersectionGraph {
        let mut e = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(p) {
                    e.push((i, j));
                }
            }
        }
        IntersectionGraph::from_edges(n, &e)
    }

    #[test]
    fn gadget_properties_on_random_separations() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let n = rng.gen_range(3..30);
            let g0 = random_graph(&mut rng, n, 0.25);
            // Force a valid separation by deleting x-y edges.
            let side: Vec<u8> = (0..n).map(|_| rng.gen_range(0..3)).collect();
            let keep: Vec<_> = g0
                .edges()
                .filter(|&(u, v)| !((side[u] == 0 && side[v] == 1) || (side[u] == 1 && side[v] == 0)))
                .collect();
            let g = IntersectionGraph::from_edges(n, &keep);
            let sep = Separation {
                x: (0..n).filter(|&v| side[v] == 0).collect(),
                y: (0..n).filter(|&v| side[v] == 1).collect(),
                z: (0..n).filter(|&v| side[v] == 2).collect(),
            };
            let ez = g.edges().filter(|&(u, v)| side[u] == 2 && side[v] == 2).count();
            let r = split_separator_vertices(&g, &sep);
            let h = r.graph.graph();
            assert!(r.z_star.len() <= 4 * sep.z.len() + 6 * ez);
            assert!(r.z_star.iter().all(|&z| h.degree(z) <= 3));
            // no edge between the new sides
            let mut s = vec![0u8; h.n()];
            r.x_star.iter().for_each(|&v| s[v] = 1);
            r.y_star.iter().for_each(|&v| s[v] = 2);
            r.z_star.iter().for_each(|&v| s[v] = 3);
            assert!(s.iter().all(|&c| c != 0));
            assert!(h.edges().all(|(u, v)| s[u] + s[v] != 3 || s[u] == 3 || s[v] == 3));
            assert_eq!(nu(&h), nu(&g) + r.graph.split_count());
            let back = unsplit_matching(&blossom_maximum_matching(&h), &r.graph).unwrap();
            back.validate(&g).unwrap();
            assert_eq!(back.len(), nu(&g));
        }
    }

    #[test]
    fn degree_reduction_and_pads() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.gen_range(5..25);
            let g = random_graph(&mut rng, n, 0.5);
            let mut sg = SplitGraph::new(&g);
            for v in 0..n {
                sg.reduce_degree(v);
            }
            let (_, b) = sg.seed(0);
            sg.split(b, &[]);
            assert!(sg.max_degree() <= 4);
            let h = sg.graph();
            assert_eq!(nu(&h), nu(&g) + sg.split_count());
            let back = unsplit_matching(&blossom_maximum_matching(&h), &sg).unwrap();
            back.validate(&g).unwrap();
            assert_eq!(back.len(), nu(&g));
        }
    }

    #[test]
    fn unsplit_rejects_non_edges() {
        let g = IntersectionGraph::from_edges(3, &[(0, 1)]);
        let sg = SplitGraph::new(&g);
        assert!(unsplit_matching(&Matching::new(vec![(1, 2)]), &sg).is_err());
        assert_eq!(unsplit_matching(&Matching::new(vec![(0, 1)]), &sg).unwrap().len(), 1);
    }
}

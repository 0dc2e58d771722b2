//! Grid-cluster sparsification.
//!
//! Every object is assigned to the lexicographically smallest lattice point
//! it contains, so each cluster is a clique. Clusters whose points are
//! within L∞ distance `2ψ` are joined in the pattern graph. For each pattern
//! edge a bounded number of objects is kept, enough to preserve the maximum
//! matching size, and what is left of each cluster is paired off inside the
//! cluster.
//!
//! Object ids throughout are positions in the input slice.

mod query;
mod union;

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{min_pierce_point, GeomObject, GridPoint, Shape};
use crate::matching::Matching;

pub use query::{ClusterQuery, NaiveQuery, UnitDiskQuery};
pub use union::{union_pierced, UnionBoundary};

/// Clusters keyed by their piercing point; member lists ascend.
pub type ClusterMap = BTreeMap<GridPoint, Vec<usize>>;

pub fn assign_clusters(objects: &[GeomObject]) -> Result<ClusterMap> {
    let mut map = ClusterMap::new();
    for (i, o) in objects.iter().enumerate() {
        map.entry(min_pierce_point(o)?).or_default().push(i);
    }
    Ok(map)
}

/// Graph on the occupied lattice points, with an edge between points at L∞
/// distance at most `2ψ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternGraph {
    /// Occupied points, ascending.
    pub points: Vec<GridPoint>,
    pub adj: Vec<Vec<usize>>,
    /// Maximum degree.
    pub lambda: usize,
}

impl PatternGraph {
    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    /// Edges `(i, j)` with `i < j`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().filter(move |&&j| i < j).map(move |&j| (i, j)))
    }

    pub fn index_of(&self, p: GridPoint) -> Option<usize> {
        self.points.binary_search(&p).ok()
    }
}

pub fn build_pattern_graph(clusters: &ClusterMap, psi: f64) -> Result<PatternGraph> {
    if !(psi >= 1.0) {
        return Err(Error::InvalidParams(format!("psi must be >= 1, got {psi}")));
    }
    let points: Vec<GridPoint> = clusters.keys().copied().collect();
    let index: FxHashMap<GridPoint, usize> = points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let reach = (2.0 * psi).floor() as i64;
    let window = ((2 * reach + 1) * (2 * reach + 1)) as usize;
    let mut adj = vec![Vec::new(); points.len()];
    for (i, &p) in points.iter().enumerate() {
        if window <= points.len() {
            for dx in -reach..=reach {
                for dy in -reach..=reach {
                    if (dx, dy) == (0, 0) {
                        continue;
                    }
                    if let Some(&j) = index.get(&GridPoint::new(p.x + dx, p.y + dy)) {
                        adj[i].push(j);
                    }
                }
            }
            adj[i].sort_unstable();
        } else {
            adj[i] = (0..points.len()).filter(|&j| j != i && p.linf(points[j]) <= reach).collect();
        }
    }
    let lambda = adj.iter().map(Vec::len).max().unwrap_or(0);
    Ok(PatternGraph { points, adj, lambda })
}

/// Query structure used for the clusters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureChoice {
    #[default]
    Naive,
    /// Radius-2 envelope tree; unit-disk instances only.
    UnitDisk,
}

/// Objects kept for pattern edge `pq`. `up` and `uq` are the member lists
/// of the two clusters, ascending, and `qs_p`, `qs_q` hold them in the same
/// order. Both structures are left with no deletions.
pub fn sparsify_one_edge(
    objects: &[GeomObject],
    up: &[usize],
    uq: &[usize],
    lambda: usize,
    qs_p: &mut dyn ClusterQuery,
    qs_q: &mut dyn ClusterQuery,
) -> Vec<usize> {
    let cap = 2 * lambda + 1;
    let mut ends: Vec<(bool, usize)> = Vec::new();
    for &u in up {
        if ends.len() == 2 * cap {
            break;
        }
        if let Some(j) = qs_q.query(&objects[u]) {
            qs_q.delete(j);
            ends.push((true, u));
            ends.push((false, uq[j]));
        }
    }
    qs_q.rollback_all();
    let mut kept: Vec<usize> = ends.iter().map(|e| e.1).collect();
    if ends.len() < 2 * cap {
        for &(in_p, w) in &ends {
            let (qs, other): (&mut dyn ClusterQuery, &[usize]) = if in_p { (&mut *qs_q, uq) } else { (&mut *qs_p, up) };
            for _ in 0..lambda {
                match qs.query(&objects[w]) {
                    Some(j) => {
                        qs.delete(j);
                        kept.push(other[j]);
                    }
                    None => break,
                }
            }
            qs.rollback_all();
        }
    }
    kept.sort_unstable();
    kept.dedup();
    kept
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClusterStat {
    pub point: GridPoint,
    pub size: usize,
    /// Degree in the pattern graph.
    pub degree: usize,
    /// Members kept, including a parity element.
    pub kept: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparsifierResult {
    /// Kept object ids, ascending.
    pub kept: Vec<usize>,
    /// Even-sized leftovers per cluster, ascending; empty lists omitted.
    pub residuals: Vec<(GridPoint, Vec<usize>)>,
    pub psi: f64,
    pub lambda: usize,
    pub clusters: Vec<ClusterStat>,
}

impl SparsifierResult {
    /// Clusters keeping more than `deg·2(2λ+1)(λ+1) + 1` members.
    pub fn bound_violations(&self) -> Vec<GridPoint> {
        self.clusters
            .iter()
            .filter(|c| c.kept > cluster_bound(c.degree, self.lambda))
            .map(|c| c.point)
            .collect()
    }

    pub fn residual_len(&self) -> usize {
        self.residuals.iter().map(|r| r.1.len()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sparsifier result serializes")
    }
}

/// Most members a cluster of pattern degree `deg` can keep.
pub fn cluster_bound(deg: usize, lambda: usize) -> usize {
    deg * 2 * (2 * lambda + 1) * (lambda + 1) + 1
}

/// Upper bound on the depth of the kept family for a given `psi`: the
/// clusters able to reach a point, times the worst per-cluster count.
pub fn depth_bound_for(psi: f64) -> usize {
    let reach = (2.0 * psi).floor() as usize;
    let lambda = (2 * reach + 1) * (2 * reach + 1) - 1;
    let near = 2 * psi.floor() as usize + 1;
    near * near * cluster_bound(lambda, lambda)
}

/// `depth(W) ≤ DEPTH_CONSTANT · ψ⁸` for every `ψ ≥ 1`; the ratio
/// `depth_bound_for(ψ) / ψ⁸` peaks at `ψ = 1`.
pub const DEPTH_CONSTANT: f64 = 529_209.0;

pub fn sparsify(objects: &[GeomObject], psi: f64, structure: StructureChoice) -> Result<SparsifierResult> {
    if !(psi >= 1.0) {
        return Err(Error::InvalidParams(format!("psi must be >= 1, got {psi}")));
    }
    for o in objects {
        o.validate()?;
        if !o.fits_psi(psi) {
            return Err(Error::PsiBoundViolated { id: o.id, psi });
        }
    }
    let clusters = assign_clusters(objects)?;
    let h = build_pattern_graph(&clusters, psi)?;
    let members: Vec<&Vec<usize>> = clusters.values().collect();
    let mut structures: Vec<Option<Box<dyn ClusterQuery>>> = (0..members.len()).map(|_| None).collect();
    let make = |i: usize| -> Result<Box<dyn ClusterQuery>> {
        let objs: Vec<GeomObject> = members[i].iter().map(|&v| objects[v]).collect();
        Ok(match structure {
            StructureChoice::Naive => Box::new(NaiveQuery::new(&objs)),
            StructureChoice::UnitDisk => Box::new(UnitDiskQuery::new(&objs, h.points[i])?),
        })
    };
    let mut kept = vec![false; objects.len()];
    for (i, j) in h.edges().collect::<Vec<_>>() {
        for t in [i, j] {
            if structures[t].is_none() {
                structures[t] = Some(make(t)?);
            }
        }
        let (left, right) = structures.split_at_mut(j);
        let qs_p = left[i].as_deref_mut().expect("built above");
        let qs_q = right[0].as_deref_mut().expect("built above");
        for v in sparsify_one_edge(objects, members[i], members[j], h.lambda, qs_p, qs_q) {
            kept[v] = true;
        }
    }
    let mut residuals = Vec::new();
    let mut stats = Vec::with_capacity(members.len());
    for (i, m) in members.iter().enumerate() {
        let mut rest: Vec<usize> = m.iter().copied().filter(|&v| !kept[v]).collect();
        if rest.len() % 2 == 1 {
            kept[rest.remove(0)] = true;
        }
        stats.push(ClusterStat {
            point: h.points[i],
            size: m.len(),
            degree: h.degree(i),
            kept: m.len() - rest.len(),
        });
        if !rest.is_empty() {
            residuals.push((h.points[i], rest));
        }
    }
    Ok(SparsifierResult {
        kept: (0..objects.len()).filter(|&v| kept[v]).collect(),
        residuals,
        psi,
        lambda: h.lambda,
        clusters: stats,
    })
}

/// Adds consecutive pairs from each residual list to `mw`. `mw` must be a
/// matching on the kept ids, which are disjoint from the residuals.
pub fn combine_matchings(mw: &Matching, residuals: &[(GridPoint, Vec<usize>)]) -> Matching {
    let mut pairs = mw.pairs().to_vec();
    for (_, r) in residuals {
        pairs.extend(r.chunks_exact(2).map(|c| (c[0], c[1])));
    }
    Matching::new(pairs)
}

/// Is every object a disk of radius exactly one?
pub fn all_unit_disks(objects: &[GeomObject]) -> bool {
    objects
        .iter()
        .all(|o| matches!(o.shape, Shape::Disk { radius, .. } if radius == 1.0))
}

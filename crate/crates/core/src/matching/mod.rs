//! Matchings and the algebraic matching pipeline.

mod recursion;
mod tutte;

pub use recursion::{
    algebraic_maximum_matching, algebraic_matching_on_graph, AlgebraicConfig, AlgebraicOutcome,
};
pub use tutte::{
    allowed_edge, corner_inverse, extract_matchable_subset, matching_size, maximal_allowed_submatching,
    rabin_vazirani_perfect_matching, tutte_matrix, CornerInverse, TutteMatrix,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::IntersectionGraph;

/// A set of vertex-disjoint pairs, stored as `(min, max)` sorted
/// lexicographically.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Matching {
    pairs: Vec<(usize, usize)>,
}

impl Matching {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        let mut pairs: Vec<(usize, usize)> = pairs.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        pairs.sort_unstable();
        Matching { pairs }
    }

    /// From a mate array where `mate[v] == usize::MAX` marks an exposed
    /// vertex.
    pub fn from_mates(mate: &[usize]) -> Self {
        let pairs = mate
            .iter()
            .enumerate()
            .filter(|&(v, &u)| u != usize::MAX && v < u)
            .map(|(v, &u)| (v, u))
            .collect();
        Matching { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn mates(&self, n: usize) -> Vec<usize> {
        let mut mate = vec![usize::MAX; n];
        for &(a, b) in &self.pairs {
            mate[a] = b;
            mate[b] = a;
        }
        mate
    }

    /// Checks edge validity and vertex-disjointness against `g`.
    pub fn validate(&self, g: &IntersectionGraph) -> Result<()> {
        let mut used = vec![false; g.n()];
        for &(a, b) in &self.pairs {
            if a >= g.n() || b >= g.n() || !g.has_edge(a, b) {
                return Err(Error::InvalidMatching(format!("({a},{b}) is not an edge")));
            }
            if used[a] || used[b] {
                return Err(Error::InvalidMatching(format!("({a},{b}) reuses a vertex")));
            }
            used[a] = true;
            used[b] = true;
        }
        Ok(())
    }

    /// Relabels through `map` (e.g. an induced subgraph's origin).
    pub fn mapped(&self, map: &[usize]) -> Matching {
        Matching::new(self.pairs.iter().map(|&(a, b)| (map[a], map[b])).collect())
    }

    pub fn extend(&mut self, other: &Matching) {
        self.pairs.extend_from_slice(&other.pairs);
        self.pairs.sort_unstable();
    }
}

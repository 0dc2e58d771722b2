//! Circle separators, vertex splitting, and separator trees.

mod circle;
mod split;
mod tree;

pub use circle::{circle_separator, Circle, CircleSeparator};
pub use split::{split_separator_vertices, unsplit_matching, SplitGraph, SplitRecord, SplitResult};
pub use tree::{build_separator_tree, build_separator_tree_on, SeparatorTree, TreeBuild, TreeNode, TreeParams};

/// Tuning knobs for separator search and tree construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparatorParams {
    /// Accept a separator when `|Z| <= c * sqrt(rho * n)`.
    pub c: f64,
    /// Balance: both `|X ∪ Z|` and `|Y ∪ Z|` at most `alpha * n`.
    pub alpha: f64,
    /// Leaves hold at most `max(leaf_factor * rho, min_leaf)` objects.
    pub leaf_factor: f64,
    pub min_leaf: usize,
    pub max_retries: usize,
    /// Sampled candidate centers per attempt.
    pub candidates: usize,
}

impl Default for SeparatorParams {
    fn default() -> Self {
        SeparatorParams {
            c: 4.0,
            alpha: 0.96,
            leaf_factor: 8.0,
            min_leaf: 64,
            max_retries: 200,
            candidates: 16,
        }
    }
}

impl SeparatorParams {
    pub fn leaf_cap(&self, rho: usize) -> usize {
        ((self.leaf_factor * rho as f64).ceil() as usize).max(self.min_leaf)
    }
}

/// Vertex tripartition with no edge between `x` and `y`. Entries are
/// positions in the separated list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Separation {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub z: Vec<usize>,
}

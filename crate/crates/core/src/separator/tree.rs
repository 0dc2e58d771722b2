use rand::Rng;
use serde::Serialize;

use super::split::{SplitGraph, MARK_NONE, MARK_X};
use super::{circle_separator, SeparatorParams, Separation};
use crate::error::{Error, Result};
use crate::geom::{density_estimate, GeomObject};
use crate::graph::{build_graph, IntersectionGraph};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeNode {
    pub z: Vec<usize>,
    pub parent: Option<usize>,
    /// Either empty (leaf) or two children.
    pub children: Vec<usize>,
    /// Number of object copies handed to this node when it was built.
    pub objects: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TreeParams {
    /// Realized maximum of `|Z_t| / sqrt(|V_t|)` over internal nodes.
    pub gamma: f64,
    pub beta: f64,
    pub alpha: f64,
    pub leaf_cap: usize,
}

/// Rooted binary tree whose node sets `z` partition the vertices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparatorTree {
    pub nodes: Vec<TreeNode>,
    pub root: usize,
    pub params: TreeParams,
}

impl SeparatorTree {
    /// A single leaf holding all `n` vertices.
    pub fn single(n: usize) -> Self {
        SeparatorTree {
            nodes: vec![TreeNode {
                z: (0..n).collect(),
                parent: None,
                children: Vec::new(),
                objects: n,
            }],
            root: 0,
            params: TreeParams {
                gamma: 0.0,
                beta: 0.5,
                alpha: 1.0,
                leaf_cap: n,
            },
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.nodes.iter().map(|t| t.z.len()).sum()
    }

    pub fn is_leaf(&self, t: usize) -> bool {
        self.nodes[t].children.is_empty()
    }

    /// Nodes in post-order: children left to right, then the node.
    pub fn post_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((t, expanded)) = stack.pop() {
            if expanded {
                out.push(t);
            } else {
                stack.push((t, true));
                for &c in self.nodes[t].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    /// Nodes in pre-order.
    pub fn pre_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(t) = stack.pop() {
            out.push(t);
            for &c in self.nodes[t].children.iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Elimination order: each `z` set is consecutive and every node comes
    /// after all of its descendants. `order[i]` is the vertex in position `i`.
    pub fn post_order_permutation(&self) -> Vec<usize> {
        self.post_order()
            .into_iter()
            .flat_map(|t| self.nodes[t].z.iter().copied())
            .collect()
    }

    /// `node_of[v]` for every vertex, or an error if the sets overlap or
    /// miss a vertex of `0..n`.
    pub fn node_of(&self, n: usize) -> Result<Vec<usize>> {
        let mut node_of = vec![usize::MAX; n];
        for (t, node) in self.nodes.iter().enumerate() {
            for &v in &node.z {
                if v >= n {
                    return Err(Error::InvalidTree(format!("vertex {v} out of range")));
                }
                if node_of[v] != usize::MAX {
                    return Err(Error::InvalidTree(format!("vertex {v} in two nodes")));
                }
                node_of[v] = t;
            }
        }
        if let Some(v) = node_of.iter().position(|&t| t == usize::MAX) {
            return Err(Error::InvalidTree(format!("vertex {v} in no node")));
        }
        Ok(node_of)
    }

    /// Entry/exit times of a depth-first walk; `a` is an ancestor of `b`
    /// (or equal) iff `tin[a] <= tin[b] && tout[b] <= tout[a]`.
    pub fn euler_times(&self) -> (Vec<usize>, Vec<usize>) {
        let k = self.nodes.len();
        let mut tin = vec![0; k];
        let mut tout = vec![0; k];
        let mut clock = 0;
        let mut stack = vec![(self.root, false)];
        while let Some((t, done)) = stack.pop() {
            if done {
                tout[t] = clock;
                clock += 1;
            } else {
                tin[t] = clock;
                clock += 1;
                stack.push((t, true));
                for &c in self.nodes[t].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        (tin, tout)
    }

    /// Number of vertices in each node's subtree.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut size = vec![0; self.nodes.len()];
        for t in self.post_order() {
            size[t] = self.nodes[t].z.len() + self.nodes[t].children.iter().map(|&c| size[c]).sum::<usize>();
        }
        size
    }

    /// Every edge must join nodes in ancestor-descendant relation.
    pub fn check_edge_locality(&self, g: &IntersectionGraph) -> Result<()> {
        let node_of = self.node_of(g.n())?;
        let (tin, tout) = self.euler_times();
        let related = |a: usize, b: usize| {
            (tin[a] <= tin[b] && tout[b] <= tout[a]) || (tin[b] <= tin[a] && tout[a] <= tout[b])
        };
        for (u, v) in g.edges() {
            if !related(node_of[u], node_of[v]) {
                return Err(Error::InvalidTree(format!(
                    "edge ({u},{v}) joins unrelated nodes {} and {}",
                    node_of[u], node_of[v]
                )));
            }
        }
        Ok(())
    }

    /// Structural check: partition, shape, edge locality, balance,
    /// separator size against the recorded `gamma`, and leaf capacity.
    pub fn validate(&self, g: &IntersectionGraph) -> Result<()> {
        self.check_edge_locality(g)?;
        for (t, node) in self.nodes.iter().enumerate() {
            if !(node.children.is_empty() || node.children.len() == 2) {
                return Err(Error::InvalidTree(format!("node {t} has {} children", node.children.len())));
            }
            for &c in &node.children {
                if self.nodes[c].parent != Some(t) {
                    return Err(Error::InvalidTree(format!("child {c} of {t} has wrong parent")));
                }
            }
        }
        let size = self.subtree_sizes();
        let slack = 1e-9;
        for (t, node) in self.nodes.iter().enumerate() {
            if node.children.is_empty() {
                if node.objects > self.params.leaf_cap {
                    return Err(Error::InvalidTree(format!(
                        "leaf {t} holds {} objects, cap {}",
                        node.objects, self.params.leaf_cap
                    )));
                }
                continue;
            }
            let vt = size[t] as f64;
            for &c in &node.children {
                if size[c] as f64 > self.params.alpha * vt + slack {
                    return Err(Error::InvalidTree(format!("child {c} of {t} is unbalanced")));
                }
            }
            if node.z.len() as f64 > self.params.gamma * vt.sqrt() + slack {
                return Err(Error::InvalidTree(format!("separator of node {t} exceeds gamma")));
            }
        }
        Ok(())
    }

    /// Checks that `order` is a permutation in which each node's vertices
    /// precede those of all its proper ancestors.
    pub fn check_order(&self, order: &[usize]) -> Result<()> {
        let n = self.vertex_count();
        if order.len() != n {
            return Err(Error::InconsistentOrder(format!("order has {} entries for {n} vertices", order.len())));
        }
        let node_of = self.node_of(n).map_err(|e| Error::InconsistentOrder(e.to_string()))?;
        let mut pos = vec![usize::MAX; n];
        for (i, &v) in order.iter().enumerate() {
            if v >= n || pos[v] != usize::MAX {
                return Err(Error::InconsistentOrder(format!("entry {v} repeated or out of range")));
            }
            pos[v] = i;
        }
        let k = self.nodes.len();
        let mut min_pos = vec![usize::MAX; k];
        let mut max_pos = vec![0usize; k];
        let mut has = vec![false; k];
        for v in 0..n {
            let t = node_of[v];
            min_pos[t] = min_pos[t].min(pos[v]);
            max_pos[t] = max_pos[t].max(pos[v]);
            has[t] = true;
        }
        // Latest position in each subtree.
        let mut sub_max = vec![0usize; k];
        let mut sub_has = vec![false; k];
        for t in self.post_order() {
            sub_max[t] = max_pos[t];
            sub_has[t] = has[t];
            for &c in &self.nodes[t].children {
                if sub_has[c] {
                    sub_max[t] = if sub_has[t] { sub_max[t].max(sub_max[c]) } else { sub_max[c] };
                    sub_has[t] = true;
                }
            }
        }
        for t in self.pre_order() {
            if !has[t] {
                continue;
            }
            for &c in &self.nodes[t].children {
                if sub_has[c] && sub_max[c] > min_pos[t] {
                    return Err(Error::InconsistentOrder(format!(
                        "a vertex below node {t} comes after one of its own"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Tree for the matrix `A A^T` when this tree fits the graph of `A`.
    ///
    /// Walking top-down, each node also takes every not yet claimed vertex
    /// of its subtree adjacent to one of its own original vertices. Two
    /// vertices with a common neighbor `k` then both end on the root path
    /// of `k`'s original node, so the two-step graph stays local.
    pub fn gram_tree(&self, g: &IntersectionGraph) -> Result<SeparatorTree> {
        let node_of = self.node_of(g.n())?;
        let (tin, tout) = self.euler_times();
        let mut claimed = vec![false; g.n()];
        let mut out = self.clone();
        for t in self.pre_order() {
            let mut z = Vec::new();
            for &v in &self.nodes[t].z {
                if !claimed[v] {
                    claimed[v] = true;
                    z.push(v);
                }
            }
            for &v in &self.nodes[t].z {
                for &u in g.neighbors(v) {
                    let s = node_of[u];
                    if !claimed[u] && tin[t] <= tin[s] && tout[s] <= tout[t] {
                        claimed[u] = true;
                        z.push(u);
                    }
                }
            }
            out.nodes[t].z = z;
        }
        Ok(out)
    }

    /// Same nodes over the vertex subset `keep`, where new vertex `i` is old
    /// vertex `keep[i]`. Nodes may become empty.
    pub fn restrict(&self, keep: &[usize]) -> SeparatorTree {
        let n = self.vertex_count();
        let mut slot = vec![usize::MAX; n];
        for (i, &v) in keep.iter().enumerate() {
            slot[v] = i;
        }
        let mut out = self.clone();
        for node in &mut out.nodes {
            node.z = node.z.iter().filter(|&&v| slot[v] != usize::MAX).map(|&v| slot[v]).collect();
        }
        out
    }

    /// Moves `last` out of its nodes into a new root above the old one, so
    /// any consistent order eliminates `last` after everything else. The
    /// new root has a single child.
    pub fn with_last(&self, last: &[usize]) -> SeparatorTree {
        let n = self.vertex_count();
        let mut held = vec![false; n];
        for &v in last {
            held[v] = true;
        }
        let mut out = self.clone();
        for node in &mut out.nodes {
            node.z.retain(|&v| !held[v]);
        }
        let top = out.nodes.len();
        out.nodes[self.root].parent = Some(top);
        out.nodes.push(TreeNode {
            z: last.to_vec(),
            parent: None,
            children: vec![self.root],
            objects: 0,
        });
        out.root = top;
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tree serializes")
    }
}

/// A split graph with a separator tree over its vertices.
#[derive(Clone, Debug)]
pub struct TreeBuild {
    pub split: SplitGraph,
    pub tree: SeparatorTree,
    /// Rejected separator attempts at each internal node.
    pub retries: Vec<usize>,
    pub rho: usize,
}

impl TreeBuild {
    pub fn graph(&self) -> IntersectionGraph {
        self.split.graph()
    }
}

struct Builder<'a, R: Rng> {
    objects: &'a [GeomObject],
    params: &'a SeparatorParams,
    rng: &'a mut R,
    rho: usize,
    leaf_cap: usize,
    sg: SplitGraph,
    nodes: Vec<TreeNode>,
    retries: Vec<usize>,
    gamma: f64,
}

impl<R: Rng> Builder<'_, R> {
    /// Builds the subtree over `verts`; returns its node and vertex count.
    fn build(&mut self, verts: Vec<usize>, parent: Option<usize>) -> Result<(usize, usize)> {
        let id = self.nodes.len();
        self.nodes.push(TreeNode {
            z: Vec::new(),
            parent,
            children: Vec::new(),
            objects: verts.len(),
        });
        if verts.len() <= self.leaf_cap {
            let mut z = verts.clone();
            for &v in &verts {
                z.extend(self.sg.reduce_degree(v));
            }
            let size = z.len();
            self.nodes[id].z = z;
            return Ok((id, size));
        }

        let local: Vec<GeomObject> = verts
            .iter()
            .enumerate()
            .map(|(i, &v)| GeomObject {
                id: i,
                ..self.objects[self.sg.object_of(v)]
            })
            .collect();
        let cs = circle_separator(&local, Some(self.rho), self.params, self.rng)?;
        self.retries.push(cs.retries);
        let mut sep = Separation {
            x: cs.separation.x.iter().map(|&i| verts[i]).collect(),
            y: Vec::new(),
            z: cs.separation.z.iter().map(|&i| verts[i]).collect(),
        };
        // Geometric classification leaves a safety margin; still, never
        // trust it with an x-y edge.
        for &v in &sep.x {
            self.sg.mark[v] = MARK_X;
        }
        for &i in &cs.separation.y {
            let v = verts[i];
            if self.sg.neighbors(v).iter().any(|&u| self.sg.mark[u] == MARK_X) {
                sep.z.push(v);
            } else {
                sep.y.push(v);
            }
        }
        for &v in &sep.x {
            self.sg.mark[v] = MARK_NONE;
        }

        let (xs, ys, mut zs) = self.sg.apply_gadgets(&sep);
        let (left, sl) = self.build(xs, Some(id))?;
        let (right, sr) = self.build(ys, Some(id))?;

        let alpha = self.params.alpha;
        let big = sl.max(sr) as f64;
        let total = zs.len() + sl + sr;
        if big > alpha * total as f64 {
            let need = (big / alpha).ceil() as usize - total;
            let mut pairs = need.div_ceil(2);
            let mut anchor = match zs.last() {
                Some(&v) => v,
                None => {
                    let (a, b) = self.sg.seed(self.sg.object_of(verts[0]));
                    zs.push(a);
                    zs.push(b);
                    pairs = pairs.saturating_sub(1);
                    b
                }
            };
            for _ in 0..pairs {
                let (v1, v2) = self.sg.split(anchor, &[]);
                zs.push(v1);
                zs.push(v2);
                anchor = v2;
            }
        }
        let size = zs.len() + sl + sr;
        self.gamma = self.gamma.max(zs.len() as f64 / (size as f64).sqrt());
        self.nodes[id].z = zs;
        self.nodes[id].children = vec![left, right];
        Ok((id, size))
    }
}

/// Builds the intersection graph of `objects`, splits separator vertices
/// recursively, and returns the split graph with its separator tree.
///
/// Leaves hold at most `max(leaf_factor * rho, min_leaf)` object copies,
/// with `rho` the density estimate of the whole family; leaf vertices of
/// degree above 4 are split into chains so the final graph has maximum
/// degree 4. When splitting leaves a child too heavy, the separator is
/// padded with pendant 2-paths until the balance bound holds again.
pub fn build_separator_tree<R: Rng>(
    objects: &[GeomObject],
    params: &SeparatorParams,
    rng: &mut R,
) -> Result<TreeBuild> {
    let g = build_graph(objects);
    build_separator_tree_on(objects, &g, params, rng)
}

/// As [`build_separator_tree`] with a prebuilt intersection graph whose
/// vertex `v` is `objects[g.origin()[v]]`.
pub fn build_separator_tree_on<R: Rng>(
    objects: &[GeomObject],
    g: &IntersectionGraph,
    params: &SeparatorParams,
    rng: &mut R,
) -> Result<TreeBuild> {
    let rho = density_estimate(objects).max(1);
    let leaf_cap = params.leaf_cap(rho);
    let mut b = Builder {
        objects,
        params,
        rng,
        rho,
        leaf_cap,
        sg: SplitGraph::new(g),
        nodes: Vec::new(),
        retries: Vec::new(),
        gamma: 0.0,
    };
    let (root, _) = b.build((0..g.n()).collect(), None)?;
    let tree = SeparatorTree {
        nodes: b.nodes,
        root,
        params: TreeParams {
            gamma: b.gamma,
            beta: 0.5,
            alpha: params.alpha,
            leaf_cap,
        },
    };
    Ok(TreeBuild {
        split: b.sg,
        tree,
        retries: b.retries,
        rho,
    })
}

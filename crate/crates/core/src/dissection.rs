//! Nested-dissection elimination driven by a separator tree.
//!
//! Each tree node owns a dense front over its own vertices and the
//! not-yet-eliminated vertices they reach through fill (its boundary).
//! Original entries are assembled into the front of whichever endpoint is
//! eliminated first, children's trailing Schur blocks are added in, and
//! the node's vertices are eliminated without pivoting. Only the boundary
//! block travels up to the parent.

use crate::error::{Error, Result};
use crate::matrix::{axpy_row, FieldMatrix, LUFactors};
use crate::separator::SeparatorTree;
use crate::sparse::SparseMatrix;

/// What to do when a pivot vanishes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroPivotPolicy {
    /// Fail with [`Error::ZeroPivot`] carrying the pivot's position.
    Fail,
    /// Drop the vertex if its remaining row and column are zero, otherwise
    /// fail with [`Error::RankMismatch`] carrying the vertex.
    DropNull,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DissectionStats {
    /// Front indices outside `Z_t ∪ B_t`, where `B_t` holds the vertices of
    /// proper ancestors adjacent to the subtree of `t`.
    pub locality_violations: usize,
    /// Front size per node, indexed by node.
    pub front_sizes: Vec<usize>,
    pub max_front: usize,
}

/// Result of [`eliminate`].
#[derive(Clone, Debug, Default)]
pub struct Elimination {
    /// Vertices dropped under [`ZeroPivotPolicy::DropNull`], in elimination
    /// order.
    pub dropped: Vec<usize>,
    /// When the root was held back: its vertices, in elimination order, and
    /// the Schur complement over them.
    pub schur: Option<(Vec<usize>, FieldMatrix)>,
    /// Per eliminated vertex: the `U` row as `(vertex, value)` including the
    /// pivot, and the `L` column below the pivot as `(vertex, multiplier)`.
    pub factors: Option<Vec<(usize, Vec<(usize, u64)>, Vec<(usize, u64)>)>>,
    pub stats: DissectionStats,
}

#[derive(Clone, Copy, Debug)]
pub struct EliminationOptions {
    pub policy: ZeroPivotPolicy,
    /// Assemble the root front but do not eliminate it.
    pub hold_root: bool,
    pub record_factors: bool,
    pub check_locality: bool,
}

impl Default for EliminationOptions {
    fn default() -> Self {
        EliminationOptions {
            policy: ZeroPivotPolicy::Fail,
            hold_root: false,
            record_factors: false,
            check_locality: false,
        }
    }
}

struct Update {
    idx: Vec<usize>,
    data: Vec<u64>,
}

/// Ancestor test from Euler times.
fn is_ancestor(tin: &[usize], tout: &[usize], a: usize, b: usize) -> bool {
    tin[a] <= tin[b] && tout[b] <= tout[a]
}

/// Eliminates `a` in the order given by `pos` (`pos[v]` is the elimination
/// position of vertex `v`), which must be consistent with `tree`. Every
/// nonzero `a_ij` must join nodes in ancestor-descendant relation.
pub fn eliminate(a: &SparseMatrix, tree: &SeparatorTree, pos: &[usize], opts: EliminationOptions) -> Result<Elimination> {
    let n = a.n();
    let f = a.field();
    if pos.len() != n {
        return Err(Error::DimensionMismatch(format!("{} positions for {n} rows", pos.len())));
    }
    let node_of = tree.node_of(n)?;
    let (tin, tout) = tree.euler_times();
    let at = a.transpose();
    for i in 0..n {
        for &(j, _) in a.row(i) {
            let (s, t) = (node_of[i], node_of[j]);
            if !is_ancestor(&tin, &tout, s, t) && !is_ancestor(&tin, &tout, t, s) {
                return Err(Error::InvalidTree(format!("entry ({i},{j}) joins unrelated nodes {s} and {t}")));
            }
        }
    }

    let k = tree.nodes.len();
    let post = tree.post_order();
    // Declared boundaries, only for the locality counter.
    let declared: Vec<Vec<usize>> = if opts.check_locality {
        let mut declared: Vec<Vec<usize>> = vec![Vec::new(); k];
        for &t in &post {
            let mut b: Vec<usize> = Vec::new();
            for &c in &tree.nodes[t].children {
                b.extend(declared[c].iter().copied());
            }
            for &v in &tree.nodes[t].z {
                b.extend(a.row(v).iter().map(|&(j, _)| j));
                b.extend(at.row(v).iter().map(|&(j, _)| j));
            }
            b.retain(|&w| node_of[w] != t && is_ancestor(&tin, &tout, node_of[w], t));
            b.sort_unstable();
            b.dedup();
            declared[t] = b;
        }
        declared
    } else {
        Vec::new()
    };

    let mut out = Elimination {
        stats: DissectionStats {
            front_sizes: vec![0; k],
            ..Default::default()
        },
        factors: opts.record_factors.then(Vec::new),
        ..Default::default()
    };
    let mut updates: Vec<Option<Update>> = (0..k).map(|_| None).collect();
    let mut slot = vec![usize::MAX; n];
    let mut in_declared = vec![false; n];

    for &t in &post {
        let node = &tree.nodes[t];
        let mut elim: Vec<usize> = node.z.clone();
        elim.sort_unstable_by_key(|&v| pos[v]);
        for (i, &v) in elim.iter().enumerate() {
            slot[v] = i;
        }
        let mut bound: Vec<usize> = Vec::new();
        let mark = |w: usize, bound: &mut Vec<usize>, slot: &mut Vec<usize>| {
            if slot[w] == usize::MAX {
                slot[w] = usize::MAX - 1;
                bound.push(w);
            }
        };
        for &v in &elim {
            for &(j, _) in a.row(v).iter().chain(at.row(v)) {
                if pos[j] > pos[v] {
                    mark(j, &mut bound, &mut slot);
                }
            }
        }
        let children: Vec<Update> = node.children.iter().filter_map(|&c| updates[c].take()).collect();
        for u in &children {
            for &w in &u.idx {
                mark(w, &mut bound, &mut slot);
            }
        }
        bound.sort_unstable_by_key(|&v| pos[v]);
        let e = elim.len();
        let front: Vec<usize> = elim.iter().chain(&bound).copied().collect();
        let m = front.len();
        for (i, &v) in front.iter().enumerate() {
            slot[v] = i;
        }
        out.stats.front_sizes[t] = m;
        out.stats.max_front = out.stats.max_front.max(m);
        if opts.check_locality {
            for &w in &declared[t] {
                in_declared[w] = true;
            }
            out.stats.locality_violations += bound.iter().filter(|&&w| !in_declared[w]).count();
            for &w in &declared[t] {
                in_declared[w] = false;
            }
        }

        // Assemble.
        let mut d = vec![0u64; m * m];
        for (s, &v) in elim.iter().enumerate() {
            for &(j, x) in a.row(v) {
                if pos[j] >= pos[v] {
                    let c = slot[j];
                    d[s * m + c] = f.add(d[s * m + c], x);
                }
            }
            for &(j, x) in at.row(v) {
                if pos[j] > pos[v] {
                    let r = slot[j];
                    d[r * m + s] = f.add(d[r * m + s], x);
                }
            }
        }
        for u in &children {
            let map: Vec<usize> = u.idx.iter().map(|&w| slot[w]).collect();
            let q = map.len();
            for (ii, &r) in map.iter().enumerate() {
                let src = &u.data[ii * q..(ii + 1) * q];
                let dst = &mut d[r * m..(r + 1) * m];
                for (jj, &c) in map.iter().enumerate() {
                    if src[jj] != 0 {
                        dst[c] = f.add(dst[c], src[jj]);
                    }
                }
            }
        }

        if opts.hold_root && t == tree.root {
            for &v in &front {
                slot[v] = usize::MAX;
            }
            let mut s = FieldMatrix::zeros(m, m, f);
            for i in 0..m {
                for j in 0..m {
                    s.set(i, j, d[i * m + j]);
                }
            }
            out.schur = Some((front, s));
            return Ok(out);
        }

        // Eliminate the node's own vertices.
        for s in 0..e {
            let piv = d[s * m + s];
            if piv == 0 {
                let null = (s + 1..m).all(|j| d[s * m + j] == 0) && (s + 1..m).all(|i| d[i * m + s] == 0);
                match opts.policy {
                    ZeroPivotPolicy::Fail => return Err(Error::ZeroPivot(pos[front[s]])),
                    ZeroPivotPolicy::DropNull if null => {
                        out.dropped.push(front[s]);
                        continue;
                    }
                    ZeroPivotPolicy::DropNull => return Err(Error::RankMismatch(front[s])),
                }
            }
            let inv = f.inv(piv);
            let (top, bottom) = d.split_at_mut((s + 1) * m);
            let prow = &top[s * m + s + 1..s * m + m];
            let mut lcol = Vec::new();
            for i in 0..(m - s - 1) {
                let row = &mut bottom[i * m..(i + 1) * m];
                if row[s] == 0 {
                    continue;
                }
                let factor = f.mul(row[s], inv);
                row[s] = factor;
                if opts.record_factors {
                    lcol.push((front[s + 1 + i], factor));
                }
                axpy_row(f, factor, prow, &mut row[s + 1..]);
            }
            if let Some(fs) = out.factors.as_mut() {
                let urow: Vec<(usize, u64)> = (s..m)
                    .filter(|&j| top[s * m + j] != 0)
                    .map(|j| (front[j], top[s * m + j]))
                    .collect();
                fs.push((front[s], urow, lcol));
            }
        }

        let b = m - e;
        if b > 0 {
            let mut data = vec![0u64; b * b];
            for i in 0..b {
                data[i * b..(i + 1) * b].copy_from_slice(&d[(e + i) * m + e..(e + i + 1) * m]);
            }
            match node.parent {
                Some(_) => updates[t] = Some(Update { idx: bound, data }),
                None => {
                    return Err(Error::InvalidTree(format!("root front keeps {b} uneliminated vertices")));
                }
            }
        }
        for &v in &front {
            slot[v] = usize::MAX;
        }
    }
    Ok(out)
}

fn positions(order: &[usize]) -> Vec<usize> {
    let mut pos = vec![0; order.len()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    pos
}

/// LU of `P A P^T` for the row order `order` (`order[i]` is the row taken
/// `i`-th), computed node by node along `tree`. Returns the same factors as
/// [`crate::matrix::lu`] on `a.permute(order)`, plus locality statistics.
pub fn nested_dissection_lu_with_stats(
    a: &FieldMatrix,
    tree: &SeparatorTree,
    order: &[usize],
) -> Result<(LUFactors, DissectionStats)> {
    if a.rows() != a.cols() {
        return Err(Error::DimensionMismatch("LU of a non-square matrix".into()));
    }
    let n = a.rows();
    if tree.vertex_count() != n {
        return Err(Error::InconsistentOrder(format!(
            "tree covers {} vertices, matrix has {n}",
            tree.vertex_count()
        )));
    }
    tree.check_order(order)?;
    let pos = positions(order);
    let sp = SparseMatrix::from_dense(a);
    let opts = EliminationOptions {
        record_factors: true,
        check_locality: true,
        ..Default::default()
    };
    let el = eliminate(&sp, tree, &pos, opts)?;
    let f = a.field();
    let mut l = FieldMatrix::identity(n, f);
    let mut u = FieldMatrix::zeros(n, n, f);
    for (v, urow, lcol) in el.factors.expect("factors recorded") {
        for (j, x) in urow {
            u.set(pos[v], pos[j], x);
        }
        for (i, x) in lcol {
            l.set(pos[i], pos[v], x);
        }
    }
    Ok((LUFactors { l, u, rank_prefix: n }, el.stats))
}

/// See [`nested_dissection_lu_with_stats`].
pub fn nested_dissection_lu(a: &FieldMatrix, tree: &SeparatorTree, order: &[usize]) -> Result<LUFactors> {
    nested_dissection_lu_with_stats(a, tree, order).map(|(lu, _)| lu)
}

/// Schur complement of `a` onto `last` after eliminating every other
/// vertex along `tree`. Rows and columns follow the order of `last`.
pub fn schur_onto(a: &SparseMatrix, tree: &SeparatorTree, last: &[usize]) -> Result<FieldMatrix> {
    let held = tree.with_last(last);
    let pos = positions(&held.post_order_permutation());
    let el = eliminate(
        a,
        &held,
        &pos,
        EliminationOptions {
            hold_root: true,
            ..Default::default()
        },
    )?;
    let (front, s) = el.schur.expect("root held");
    // The held front is `last` sorted by position, which is `last` itself.
    debug_assert_eq!(front, last);
    Ok(s)
}

/// Vertices whose pivots vanish with an all-zero remaining row and column
/// when eliminating `a` along `tree` in post-order.
pub fn null_pivots(a: &SparseMatrix, tree: &SeparatorTree) -> Result<Vec<usize>> {
    let pos = positions(&tree.post_order_permutation());
    let el = eliminate(
        a,
        tree,
        &pos,
        EliminationOptions {
            policy: ZeroPivotPolicy::DropNull,
            ..Default::default()
        },
    )?;
    Ok(el.dropped)
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Matching;
use crate::dissection::{null_pivots, schur_onto};
use crate::error::{Error, Result};
use crate::field::{gen_prime, Field};
use crate::graph::IntersectionGraph;
use crate::matrix::{axpy_row, gauss_rank, inverse, FieldMatrix};
use crate::separator::SeparatorTree;
use crate::sparse::SparseMatrix;

/// Random substitution into the Tutte matrix of a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TutteMatrix {
    pub a: SparseMatrix,
    /// `((u, v), x)` with `u < v`, `a[u][v] = x`, `a[v][u] = -x`.
    pub edge_vars: Vec<((usize, usize), u64)>,
    pub seed: u64,
}

impl TutteMatrix {
    pub fn field(&self) -> Field {
        self.a.field()
    }

    pub fn to_dense(&self) -> FieldMatrix {
        self.a.to_dense()
    }
}

/// Skew-symmetric matrix with one uniform residue per edge, drawn in
/// increasing edge order.
pub(crate) fn tutte_sparse<R: Rng + ?Sized>(g: &IntersectionGraph, field: Field, rng: &mut R) -> (SparseMatrix, Vec<((usize, usize), u64)>) {
    let mut vars = Vec::with_capacity(g.edge_count());
    let mut entries = Vec::with_capacity(2 * g.edge_count());
    for (u, v) in g.edges() {
        let x = field.random(rng);
        vars.push(((u, v), x));
        entries.push((u, v, x));
        entries.push((v, u, field.neg(x)));
    }
    (SparseMatrix::from_triplets(g.n(), field, entries), vars)
}

/// Tutte matrix over the field of [`gen_prime`] for `g.n()`.
pub fn tutte_matrix(g: &IntersectionGraph, seed: u64) -> TutteMatrix {
    let field = gen_prime(g.n().max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, edge_vars) = tutte_sparse(g, field, &mut rng);
    TutteMatrix { a, edge_vars, seed }
}

/// Maximum matching size as half the rank of a random Tutte matrix. May
/// undercount with probability at most `n^2 / p`, never overcounts.
pub fn matching_size(g: &IntersectionGraph, seed: u64) -> usize {
    gauss_rank(&tutte_matrix(g, seed).to_dense()) / 2
}

/// Rows kept after dropping null pivots of `A A^T` eliminated along the
/// tree for `A A^T`. Falls back to a single front if that tree does not fit.
pub(crate) fn matchable_rows(a: &SparseMatrix, g: &IntersectionGraph, tree: &SeparatorTree) -> Result<Vec<usize>> {
    let b = a.gram();
    let tb = tree.gram_tree(g)?;
    let dropped = match null_pivots(&b, &tb) {
        Err(Error::InvalidTree(_)) => null_pivots(&b, &SeparatorTree::single(a.n()))?,
        r => r?,
    };
    let mut keep = vec![true; a.n()];
    for v in dropped {
        keep[v] = false;
    }
    Ok((0..a.n()).filter(|&v| keep[v]).collect())
}

/// Vertex set `W` with `|W| = 2 ν(g)` whose induced graph has a perfect
/// matching, both with high probability. `tree` must fit `g`.
pub fn extract_matchable_subset(g: &IntersectionGraph, tree: &SeparatorTree, seed: u64) -> Result<Vec<usize>> {
    let t = tutte_matrix(g, seed);
    matchable_rows(&t.a, g, tree)
}

/// A square block of an inverse over sorted global indices, kept current
/// while matched pairs are removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CornerInverse {
    idx: Vec<usize>,
    m: FieldMatrix,
    alive: Vec<bool>,
}

impl CornerInverse {
    /// `m[i][j]` is the inverse entry for `(idx[i], idx[j])`; `idx` sorted.
    pub fn new(idx: Vec<usize>, m: FieldMatrix) -> Self {
        assert!(idx.windows(2).all(|w| w[0] < w[1]), "indices must be sorted");
        assert_eq!(m.rows(), idx.len());
        let alive = vec![true; idx.len()];
        CornerInverse { idx, m, alive }
    }

    pub fn indices(&self) -> &[usize] {
        &self.idx
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.m
    }

    fn local(&self, v: usize) -> Option<usize> {
        self.idx.binary_search(&v).ok()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.local(v).is_some_and(|i| self.alive[i])
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        match (self.local(i), self.local(j)) {
            (Some(a), Some(b)) => self.m.get(a, b),
            _ => 0,
        }
    }

    /// Removes the rows and columns of `u` and `v`, turning the block into
    /// the matching block of the inverse with `u` and `v` deleted. Fails if
    /// that inverse does not exist, i.e. the edge is not allowed.
    pub fn remove_pair(&mut self, u: usize, v: usize) -> Result<()> {
        let (Some(a), Some(b)) = (self.local(u), self.local(v)) else {
            return Err(Error::InvalidMatching(format!("({u},{v}) outside the corner")));
        };
        if !self.alive[a] || !self.alive[b] {
            return Err(Error::InvalidMatching(format!("({u},{v}) already removed")));
        }
        let f = self.m.field();
        let (mab, mba) = (self.m.get(a, b), self.m.get(b, a));
        if mab == 0 || mba == 0 {
            return Err(Error::Singular);
        }
        let k = self.idx.len();
        // m[r][c] -= m[r][b] m[a][c] / m[a][b] + m[r][a] m[b][c] / m[b][a]
        let ia = f.inv(mab);
        let ib = f.inv(mba);
        let row_a: Vec<u64> = self.m.row(a).iter().map(|&x| f.mul(x, ia)).collect();
        let row_b: Vec<u64> = self.m.row(b).iter().map(|&x| f.mul(x, ib)).collect();
        let col_a: Vec<u64> = (0..k).map(|r| self.m.get(r, a)).collect();
        let col_b: Vec<u64> = (0..k).map(|r| self.m.get(r, b)).collect();
        let data = self.m.data_mut();
        for r in 0..k {
            if !self.alive[r] {
                continue;
            }
            let row = &mut data[r * k..(r + 1) * k];
            axpy_row(f, col_b[r], &row_a, row);
            axpy_row(f, col_a[r], &row_b, row);
        }
        self.alive[a] = false;
        self.alive[b] = false;
        for r in 0..k {
            for x in [a, b] {
                data[r * k + x] = 0;
                data[x * k + r] = 0;
            }
        }
        Ok(())
    }
}

/// Whether edge `ij` lies in some perfect matching of the graph whose
/// inverse Tutte block is `corner`, with high probability.
pub fn allowed_edge(corner: &CornerInverse, i: usize, j: usize) -> bool {
    corner.contains(i) && corner.contains(j) && corner.get(j, i) != 0
}

/// Block of `A^{-1}` over `n_set` for a nonsingular Tutte matrix `a` on `g`,
/// using `A^{-1} = A^T (A A^T)^{-1}`. `(A A^T)^{-1}` is needed only on
/// `S = N ∪ Γ(N)`, where it is the inverse of the Schur complement onto `S`
/// after eliminating the rest along the tree for `A A^T`.
pub(crate) fn corner_inverse_on(a: &SparseMatrix, g: &IntersectionGraph, n_set: &[usize], tree: &SeparatorTree) -> Result<CornerInverse> {
    let mut idx = n_set.to_vec();
    idx.sort_unstable();
    idx.dedup();
    let mut s: Vec<usize> = idx.clone();
    for &v in &idx {
        s.extend_from_slice(g.neighbors(v));
    }
    s.sort_unstable();
    s.dedup();
    let b = a.gram();
    let tb = tree.gram_tree(g)?;
    let schur = match schur_onto(&b, &tb, &s) {
        Err(Error::InvalidTree(_)) => schur_onto(&b, &SeparatorTree::single(a.n()), &s),
        r => r,
    }
    .map_err(|e| match e {
        Error::ZeroPivot(_) => Error::Singular,
        e => e,
    })?;
    let binv = inverse(&schur)?;
    let f = a.field();
    let at = a.transpose();
    let k = idx.len();
    let sl = |v: usize| s.binary_search(&v).expect("S contains N and its neighbors");
    let cols: Vec<usize> = idx.iter().map(|&v| sl(v)).collect();
    let mut m = FieldMatrix::zeros(k, k, f);
    for (li, &i) in idx.iter().enumerate() {
        let mut acc = vec![0u64; k];
        for &(kk, x) in at.row(i) {
            let r = sl(kk);
            let sx = f.shoup(x);
            for (lj, &c) in cols.iter().enumerate() {
                acc[lj] = f.add(acc[lj], sx.mul(binv.get(r, c)));
            }
        }
        for (lj, &val) in acc.iter().enumerate() {
            m.set(li, lj, val);
        }
    }
    Ok(CornerInverse::new(idx, m))
}

/// Block of `A^{-1}` over `n_set`; `tree` must fit the pattern of `a`.
pub fn corner_inverse(a: &SparseMatrix, n_set: &[usize], tree: &SeparatorTree) -> Result<CornerInverse> {
    corner_inverse_on(a, &a.pattern(), n_set, tree)
}

/// Keeps each candidate edge, in order, whose pivot in the current corner
/// is nonzero, and removes it from the corner. The kept edges extend to a
/// common perfect matching, and no skipped candidate can be added.
pub fn maximal_allowed_submatching(cand: &Matching, corner: &mut CornerInverse) -> Matching {
    let mut kept = Vec::new();
    for &(u, v) in cand.pairs() {
        if allowed_edge(corner, u, v) && corner.remove_pair(u, v).is_ok() {
            kept.push((u, v));
        }
    }
    Matching::new(kept)
}

/// Perfect matching of `g` from the full inverse of a Tutte matrix `a`:
/// repeatedly match the lowest free vertex along an allowed edge.
pub fn rabin_vazirani_perfect_matching(g: &IntersectionGraph, a: &SparseMatrix) -> Result<Matching> {
    let n = g.n();
    if n % 2 == 1 {
        return Err(Error::Singular);
    }
    let inv = inverse(&a.to_dense())?;
    let mut corner = CornerInverse::new((0..n).collect(), inv);
    let mut pairs = Vec::with_capacity(n / 2);
    for u in 0..n {
        if !corner.contains(u) {
            continue;
        }
        let v = g
            .neighbors(u)
            .iter()
            .copied()
            .find(|&v| allowed_edge(&corner, u, v))
            .ok_or(Error::RankMismatch(u))?;
        corner.remove_pair(u, v)?;
        pairs.push((u, v));
    }
    Ok(Matching::new(pairs))
}

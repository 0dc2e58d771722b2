//! Dense matrices over Z_p and the elimination kernels shared with the
//! sparse nested-dissection engine.

use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    field: Field,
    data: Vec<u64>,
}

impl FieldMatrix {
    pub fn zeros(rows: usize, cols: usize, field: Field) -> Self {
        FieldMatrix {
            rows,
            cols,
            field,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, field: Field) -> Self {
        let mut m = Self::zeros(n, n, field);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds from rows of residues; entries are reduced mod p.
    pub fn from_rows(rows: &[Vec<u64>], field: Field) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c, field);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v % field.p());
            }
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, field: Field, mut f: impl FnMut(usize, usize) -> u64) -> Self {
        let mut m = Self::zeros(rows, cols, field);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j) % field.p());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> Field {
        self.field
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        debug_assert!(v < self.field.p());
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [u64] {
        &mut self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.field, |i, j| self.get(j, i))
    }

    /// Submatrix with the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), self.field, |i, j| self.get(rows[i], cols[j]))
    }

    /// Symmetric permutation `P A P^T` with new index `i` holding old index
    /// `order[i]`.
    pub fn permute(&self, order: &[usize]) -> Self {
        self.select(order, order)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// Text dump: header `rows cols p`, then one row per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.rows, self.cols, self.field.p());
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(u64::to_string).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}

fn check_same_field(a: &FieldMatrix, b: &FieldMatrix) -> Result<()> {
    if a.field != b.field {
        return Err(Error::DimensionMismatch("operands use different moduli".into()));
    }
    Ok(())
}

/// Product mod p. Blocked over the inner dimension; inner products are
/// accumulated in `u128` and reduced once per block.
pub fn mat_mul(a: &FieldMatrix, b: &FieldMatrix) -> Result<FieldMatrix> {
    check_same_field(a, b)?;
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let f = a.field;
    let p = f.p() as u128;
    let (n, m) = (a.rows, b.cols);
    let bt = b.transpose();
    let mut out = FieldMatrix::zeros(n, m, f);
    // Each product is below 2^124, so 16 of them fit in a u128 accumulator.
    const BLOCK: usize = 16;
    for i in 0..n {
        let ar = a.row(i);
        for j in 0..m {
            let br = bt.row(j);
            let mut total: u128 = 0;
            for (ca, cb) in ar.chunks(BLOCK).zip(br.chunks(BLOCK)) {
                let mut acc: u128 = 0;
                for (&x, &y) in ca.iter().zip(cb) {
                    acc += x as u128 * y as u128;
                }
                total = (total + acc % p) % p;
            }
            out.data[i * m + j] = total as u64;
        }
    }
    Ok(out)
}

pub fn mat_add(a: &FieldMatrix, b: &FieldMatrix) -> Result<FieldMatrix> {
    check_same_field(a, b)?;
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::DimensionMismatch("addition of unequal shapes".into()));
    }
    let f = a.field;
    let mut out = a.clone();
    for (o, &v) in out.data.iter_mut().zip(&b.data) {
        *o = f.add(*o, v);
    }
    Ok(out)
}

/// `dst -= factor * src`, elementwise mod p.
#[inline]
pub(crate) fn axpy_row(field: Field, factor: u64, src: &[u64], dst: &mut [u64]) {
    if factor == 0 {
        return;
    }
    let s = field.shoup(factor);
    for (d, &x) in dst.iter_mut().zip(src) {
        if x != 0 {
            *d = s.mul_sub_from(*d, x);
        }
    }
}

/// Rank with full row and column pivoting.
pub fn gauss_rank(a: &FieldMatrix) -> usize {
    let f = a.field;
    let (n, m) = (a.rows, a.cols);
    let mut d = a.data.clone();
    let mut rank = 0;
    let mut col_order: Vec<usize> = (0..m).collect();
    for step in 0..n.min(m) {
        let mut piv = None;
        'search: for i in step..n {
            for (jj, &j) in col_order.iter().enumerate().skip(step) {
                if d[i * m + j] != 0 {
                    piv = Some((i, jj));
                    break 'search;
                }
            }
        }
        let Some((pi, pjj)) = piv else { break };
        col_order.swap(step, pjj);
        if pi != step {
            for j in 0..m {
                d.swap(pi * m + j, step * m + j);
            }
        }
        let pc = col_order[step];
        let inv = f.inv(d[step * m + pc]);
        let (top, bottom) = d.split_at_mut((step + 1) * m);
        let prow = &top[step * m..];
        for i in 0..(n - step - 1) {
            let row = &mut bottom[i * m..(i + 1) * m];
            let factor = f.mul(row[pc], inv);
            axpy_row(f, factor, prow, row);
        }
        rank += 1;
    }
    rank
}

/// Unit lower triangular `l`, upper triangular `u`. `rank_prefix` counts the
/// leading pivots eliminated before elimination stopped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LUFactors {
    pub l: FieldMatrix,
    pub u: FieldMatrix,
    pub rank_prefix: usize,
}

/// In-place no-pivot elimination of the leading `k` pivots of a row-major
/// `n x m` buffer. On return the strict lower part of the first `k` columns
/// holds the multipliers of `L`, the rest holds `U` rows and the Schur
/// complement. Fails with the index of the first vanishing pivot.
pub(crate) fn eliminate_prefix(field: Field, d: &mut [u64], n: usize, m: usize, k: usize) -> std::result::Result<(), usize> {
    for s in 0..k {
        let piv = d[s * m + s];
        if piv == 0 {
            return Err(s);
        }
        let inv = field.inv(piv);
        let (top, bottom) = d.split_at_mut((s + 1) * m);
        let prow = &top[s * m + s + 1..s * m + m];
        for i in 0..(n - s - 1) {
            let row = &mut bottom[i * m..(i + 1) * m];
            if row[s] == 0 {
                continue;
            }
            let factor = field.mul(row[s], inv);
            row[s] = factor;
            axpy_row(field, factor, prow, &mut row[s + 1..]);
        }
    }
    Ok(())
}

/// No-pivot LU of a square matrix.
pub fn lu(a: &FieldMatrix) -> Result<LUFactors> {
    if a.rows != a.cols {
        return Err(Error::DimensionMismatch("LU of a non-square matrix".into()));
    }
    let n = a.rows;
    let f = a.field;
    let mut d = a.data.clone();
    eliminate_prefix(f, &mut d, n, n, n).map_err(Error::ZeroPivot)?;
    let mut l = FieldMatrix::identity(n, f);
    let mut u = FieldMatrix::zeros(n, n, f);
    for i in 0..n {
        for j in 0..n {
            if j < i {
                l.set(i, j, d[i * n + j]);
            } else {
                u.set(i, j, d[i * n + j]);
            }
        }
    }
    Ok(LUFactors { l, u, rank_prefix: n })
}

/// Factors of eliminating the leading `k x k` block:
///
/// ```text
/// [A11 A12]   [L          0] [U  L^-1 A12]
/// [A21 A22] = [A21 U^-1   I] [0  S       ]
/// ```
///
/// with `S = A22 - A21 A11^-1 A12`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialElimination {
    pub l: FieldMatrix,
    pub u: FieldMatrix,
    pub a21_uinv: FieldMatrix,
    pub linv_a12: FieldMatrix,
    pub schur: FieldMatrix,
}

impl PartialElimination {
    /// Multiplies the two block factors back together.
    pub fn recompose(&self) -> Result<FieldMatrix> {
        let f = self.l.field;
        let k = self.l.rows;
        let r = self.schur.rows;
        let n = k + r;
        let mut lower = FieldMatrix::zeros(n, n, f);
        let mut upper = FieldMatrix::zeros(n, n, f);
        for i in 0..k {
            for j in 0..k {
                lower.set(i, j, self.l.get(i, j));
                upper.set(i, j, self.u.get(i, j));
            }
            for j in 0..r {
                upper.set(i, k + j, self.linv_a12.get(i, j));
            }
        }
        for i in 0..r {
            for j in 0..k {
                lower.set(k + i, j, self.a21_uinv.get(i, j));
            }
            lower.set(k + i, k + i, 1);
            for j in 0..r {
                upper.set(k + i, k + j, self.schur.get(i, j));
            }
        }
        mat_mul(&lower, &upper)
    }
}

/// Block elimination of the leading `k` pivots without pivoting.
pub fn partial_eliminate(a: &FieldMatrix, k: usize) -> Result<PartialElimination> {
    if a.rows != a.cols || k > a.rows {
        return Err(Error::DimensionMismatch(format!("k = {k} for a {}x{} matrix", a.rows, a.cols)));
    }
    let n = a.rows;
    let r = n - k;
    let f = a.field;
    let mut d = a.data.clone();
    eliminate_prefix(f, &mut d, n, n, k).map_err(Error::ZeroPivot)?;
    let mut l = FieldMatrix::identity(k, f);
    let mut u = FieldMatrix::zeros(k, k, f);
    let mut linv_a12 = FieldMatrix::zeros(k, r, f);
    for i in 0..k {
        for j in 0..k {
            if j < i {
                l.set(i, j, d[i * n + j]);
            } else {
                u.set(i, j, d[i * n + j]);
            }
        }
        for j in 0..r {
            linv_a12.set(i, j, d[i * n + k + j]);
        }
    }
    let mut a21_uinv = FieldMatrix::zeros(r, k, f);
    let mut schur = FieldMatrix::zeros(r, r, f);
    for i in 0..r {
        for j in 0..k {
            a21_uinv.set(i, j, d[(k + i) * n + j]);
        }
        for j in 0..r {
            schur.set(i, j, d[(k + i) * n + k + j]);
        }
    }
    Ok(PartialElimination {
        l,
        u,
        a21_uinv,
        linv_a12,
        schur,
    })
}

/// Inverse by Gauss-Jordan with row pivoting.
pub fn inverse(a: &FieldMatrix) -> Result<FieldMatrix> {
    if a.rows != a.cols {
        return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
    }
    let n = a.rows;
    let f = a.field;
    let w = 2 * n;
    let mut d = vec![0u64; n * w];
    for i in 0..n {
        d[i * w..i * w + n].copy_from_slice(a.row(i));
        d[i * w + n + i] = 1;
    }
    for c in 0..n {
        let pr = (c..n).find(|&i| d[i * w + c] != 0).ok_or(Error::Singular)?;
        if pr != c {
            for j in 0..w {
                d.swap(pr * w + j, c * w + j);
            }
        }
        let inv = f.inv(d[c * w + c]);
        let s = f.shoup(inv);
        for j in c..w {
            d[c * w + j] = s.mul(d[c * w + j]);
        }
        let prow: Vec<u64> = d[c * w + c..(c + 1) * w].to_vec();
        for i in 0..n {
            if i == c {
                continue;
            }
            let factor = d[i * w + c];
            if factor != 0 {
                axpy_row(f, factor, &prow, &mut d[i * w + c..(i + 1) * w]);
            }
        }
    }
    let mut out = FieldMatrix::zeros(n, n, f);
    for i in 0..n {
        out.data[i * n..(i + 1) * n].copy_from_slice(&d[i * w + n..(i + 1) * w]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::gen_prime;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize, f: Field) -> FieldMatrix {
        FieldMatrix::from_fn(r, c, f, |_, _| f.random(rng))
    }

    fn naive_mul(a: &FieldMatrix, b: &FieldMatrix) -> FieldMatrix {
        let f = a.field();
        FieldMatrix::from_fn(a.rows(), b.cols(), f, |i, j| {
            (0..a.cols()).fold(0, |acc, t| f.add(acc, f.mul(a.get(i, t), b.get(t, j))))
        })
    }

    #[test]
    fn multiply_examples() {
        let f = gen_prime(5);
        let p = f.p();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = random_matrix(&mut rng, 7, 7, f);
        assert_eq!(mat_mul(&a, &FieldMatrix::identity(7, f)).unwrap(), a);
        let rot = FieldMatrix::from_rows(&[vec![0, 1], vec![p - 1, 0]], f);
        let sq = mat_mul(&rot, &rot).unwrap();
        assert_eq!(sq, FieldMatrix::from_rows(&[vec![p - 1, 0], vec![0, p - 1]], f));
        let x = random_matrix(&mut rng, 30, 30, f);
        let y = random_matrix(&mut rng, 30, 30, f);
        assert_eq!(mat_mul(&x, &y).unwrap(), naive_mul(&x, &y));
        let z = random_matrix(&mut rng, 3, 4, f);
        assert!(mat_mul(&z, &z).is_err());
    }

    #[test]
    fn rank_examples() {
        let f = gen_prime(5);
        assert_eq!(gauss_rank(&FieldMatrix::identity(5, f)), 5);
        assert_eq!(gauss_rank(&FieldMatrix::from_rows(&[vec![1, 1], vec![1, 1]], f)), 1);
        assert_eq!(gauss_rank(&FieldMatrix::zeros(3, 4, f)), 0);
    }

    /// Rank by plain row echelon form scanning columns left to right, a
    /// different pivot order from the full-pivoting routine.
    fn echelon_rank(a: &FieldMatrix) -> usize {
        let f = a.field();
        let mut rows: Vec<Vec<u64>> = (0..a.rows()).map(|i| a.row(i).to_vec()).collect();
        let mut r = 0;
        for c in 0..a.cols() {
            let Some(pi) = (r..rows.len()).rev().find(|&i| rows[i][c] != 0) else { continue };
            rows.swap(r, pi);
            let inv = f.inv(rows[r][c]);
            for i in 0..rows.len() {
                if i != r && rows[i][c] != 0 {
                    let fac = f.mul(rows[i][c], inv);
                    let src = rows[r].clone();
                    for j in 0..a.cols() {
                        rows[i][j] = f.sub(rows[i][j], f.mul(fac, src[j]));
                    }
                }
            }
            r += 1;
        }
        r
    }

    #[test]
    fn rank_matches_echelon_oracle() {
        let f = gen_prime(20);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for t in 0..40 {
            let k = 1 + t % 20;
            let left = random_matrix(&mut rng, 20, k, f);
            let right = random_matrix(&mut rng, k, 20, f);
            let a = mat_mul(&left, &right).unwrap();
            let r = gauss_rank(&a);
            assert_eq!(r, echelon_rank(&a));
            assert_eq!(r, k);
        }
    }

    #[test]
    fn lu_recomposes() {
        let f = gen_prime(40);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 1..25 {
            let a = random_matrix(&mut rng, n, n, f);
            let fac = lu(&a).unwrap();
            assert_eq!(mat_mul(&fac.l, &fac.u).unwrap(), a);
        }
        let z = FieldMatrix::from_rows(&[vec![0, 1], vec![1, 0]], f);
        assert!(matches!(lu(&z), Err(Error::ZeroPivot(0))));
    }

    fn naive_schur(a: &FieldMatrix, k: usize) -> FieldMatrix {
        let f = a.field();
        let n = a.rows();
        let mut m: Vec<Vec<u64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
        for s in 0..k {
            let inv = f.inv(m[s][s]);
            for i in s + 1..n {
                let fac = f.mul(m[i][s], inv);
                for j in 0..n {
                    m[i][j] = f.sub(m[i][j], f.mul(fac, m[s][j]));
                }
            }
        }
        FieldMatrix::from_fn(n - k, n - k, f, |i, j| m[k + i][k + j])
    }

    #[test]
    fn partial_elimination_examples() {
        let f = gen_prime(16);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = random_matrix(&mut rng, 16, 16, f);
        let pe = partial_eliminate(&a, 6).unwrap();
        assert_eq!(pe.schur, naive_schur(&a, 6));
        assert_eq!(pe.recompose().unwrap(), a);

        let full = partial_eliminate(&a, 16).unwrap();
        let fac = lu(&a).unwrap();
        assert_eq!(full.l, fac.l);
        assert_eq!(full.u, fac.u);

        let mut bd = FieldMatrix::zeros(8, 8, f);
        for i in 0..8 {
            for j in 0..8 {
                if (i < 3) == (j < 3) {
                    bd.set(i, j, f.random_nonzero(&mut rng));
                }
            }
        }
        let pe = partial_eliminate(&bd, 3).unwrap();
        assert_eq!(pe.schur, bd.select(&[3, 4, 5, 6, 7], &[3, 4, 5, 6, 7]));
    }

    #[test]
    fn inverse_roundtrip() {
        let f = gen_prime(30);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 30, 30, f);
        let inv = inverse(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv).unwrap(), FieldMatrix::identity(30, f));
        let sing = FieldMatrix::from_rows(&[vec![1, 2], vec![2, 4]], f);
        assert!(matches!(inverse(&sing), Err(Error::Singular)));
    }
}

//! Square sparse matrices over a prime field, stored as sorted rows.

use crate::field::Field;
use crate::graph::IntersectionGraph;
use crate::matrix::FieldMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    n: usize,
    field: Field,
    /// Row `i` holds `(column, value)` with strictly increasing columns and
    /// nonzero values.
    rows: Vec<Vec<(usize, u64)>>,
}

impl SparseMatrix {
    pub fn zeros(n: usize, field: Field) -> Self {
        SparseMatrix {
            n,
            field,
            rows: vec![Vec::new(); n],
        }
    }

    /// Sums duplicate entries and drops zeros.
    pub fn from_triplets(n: usize, field: Field, mut entries: Vec<(usize, usize, u64)>) -> Self {
        entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut rows = vec![Vec::new(); n];
        let mut it = entries.into_iter().peekable();
        while let Some((i, j, mut v)) = it.next() {
            while let Some(&(i2, j2, v2)) = it.peek() {
                if (i2, j2) != (i, j) {
                    break;
                }
                v = field.add(v, v2);
                it.next();
            }
            if v != 0 {
                rows[i].push((j, v));
            }
        }
        SparseMatrix { n, field, rows }
    }

    pub fn from_dense(a: &FieldMatrix) -> Self {
        assert_eq!(a.rows(), a.cols(), "sparse matrices are square");
        let rows = (0..a.rows())
            .map(|i| {
                a.row(i)
                    .iter()
                    .enumerate()
                    .filter(|&(_, &v)| v != 0)
                    .map(|(j, &v)| (j, v))
                    .collect()
            })
            .collect();
        SparseMatrix {
            n: a.rows(),
            field: a.field(),
            rows,
        }
    }

    pub fn to_dense(&self) -> FieldMatrix {
        let mut out = FieldMatrix::zeros(self.n, self.n, self.field);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                out.set(i, j, v);
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn row(&self, i: usize) -> &[(usize, u64)] {
        &self.rows[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        let row = &self.rows[i];
        match row.binary_search_by_key(&j, |&(c, _)| c) {
            Ok(k) => row[k].1,
            Err(_) => 0,
        }
    }

    pub fn transpose(&self) -> Self {
        let mut rows = vec![Vec::new(); self.n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                rows[j].push((i, v));
            }
        }
        SparseMatrix {
            n: self.n,
            field: self.field,
            rows,
        }
    }

    /// Row-by-row product with a dense accumulator.
    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.n, other.n);
        assert_eq!(self.field, other.field);
        let f = self.field;
        let mut acc = vec![0u64; self.n];
        let mut hit = vec![false; self.n];
        let mut cols = Vec::new();
        let mut rows = Vec::with_capacity(self.n);
        for row in &self.rows {
            for &(k, a) in row {
                let s = f.shoup(a);
                for &(j, b) in &other.rows[k] {
                    if !hit[j] {
                        hit[j] = true;
                        cols.push(j);
                    }
                    acc[j] = f.add(acc[j], s.mul(b));
                }
            }
            cols.sort_unstable();
            let mut out = Vec::with_capacity(cols.len());
            for &j in &cols {
                if acc[j] != 0 {
                    out.push((j, acc[j]));
                }
                acc[j] = 0;
                hit[j] = false;
            }
            cols.clear();
            rows.push(out);
        }
        SparseMatrix {
            n: self.n,
            field: f,
            rows,
        }
    }

    /// `A A^T`.
    pub fn gram(&self) -> SparseMatrix {
        self.mul(&self.transpose())
    }

    /// Principal submatrix on `keep`; new index `i` is old index `keep[i]`.
    pub fn principal(&self, keep: &[usize]) -> SparseMatrix {
        let mut slot = vec![usize::MAX; self.n];
        for (i, &v) in keep.iter().enumerate() {
            slot[v] = i;
        }
        let rows = keep
            .iter()
            .map(|&v| {
                let mut r: Vec<(usize, u64)> = self.rows[v]
                    .iter()
                    .filter(|&&(j, _)| slot[j] != usize::MAX)
                    .map(|&(j, x)| (slot[j], x))
                    .collect();
                r.sort_unstable_by_key(|&(j, _)| j);
                r
            })
            .collect();
        SparseMatrix {
            n: keep.len(),
            field: self.field,
            rows,
        }
    }

    /// Graph with an edge `ij` whenever `a_ij` or `a_ji` is nonzero, `i != j`.
    pub fn pattern(&self) -> IntersectionGraph {
        let edges: Vec<(usize, usize)> = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().filter(move |&&(j, _)| j != i).map(move |&(j, _)| (i.min(j), i.max(j))))
            .collect();
        IntersectionGraph::from_edges(self.n, &edges)
    }
}

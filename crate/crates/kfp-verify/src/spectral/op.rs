//! Compressed-sparse-row matrices sized for desk-scale spectral work:
//! triplet assembly, sums, Kronecker products, and matrix-market export.

use serde::Serialize;

use crate::error::{Error, Result};

use super::grid::DiscreteGrid;

#[derive(Debug, Clone, Serialize)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Assemble from (row, col, value) triplets; duplicates accumulate and
    /// exact zeros are dropped.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        for &(i, j, _) in triplets {
            if i >= n_rows || j >= n_cols {
                return Err(Error::InvalidInput(format!(
                    "triplet ({i}, {j}) outside a {n_rows}×{n_cols} matrix"
                )));
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut iter = sorted.into_iter().peekable();
        while let Some((i, j, mut v)) = iter.next() {
            while let Some(&(i2, j2, v2)) = iter.peek() {
                if i2 == i && j2 == j {
                    v += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if v != 0.0 {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
            }
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Square diagonal matrix from its diagonal entries (zeros kept so the
    /// structure stays predictable).
    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entry (i, j), zero when absent from the sparsity pattern.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols, "matvec dimension mismatch");
        let mut y = vec![0.0; self.n_rows];
        for i in 0..self.n_rows {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
        y
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        let mut cursor = counts;
        for i in 0..self.n_rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let pos = cursor[j];
                cursor[j] += 1;
                col_idx[pos] = i;
                values[pos] = self.values[k];
            }
        }
        CsrMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// alpha·self + beta·other, merged row by row.
    pub fn add(&self, other: &CsrMatrix, alpha: f64, beta: f64) -> Result<CsrMatrix> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot add {}×{} and {}×{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut row_ptr = vec![0usize; self.n_rows + 1];
        let mut col_idx = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n_rows {
            let (mut a, enda) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let (mut b, endb) = (other.row_ptr[i], other.row_ptr[i + 1]);
            while a < enda || b < endb {
                let (j, v) = if b >= endb
                    || (a < enda && self.col_idx[a] < other.col_idx[b])
                {
                    let e = (self.col_idx[a], alpha * self.values[a]);
                    a += 1;
                    e
                } else if a >= enda || other.col_idx[b] < self.col_idx[a] {
                    let e = (other.col_idx[b], beta * other.values[b]);
                    b += 1;
                    e
                } else {
                    let e = (
                        self.col_idx[a],
                        alpha * self.values[a] + beta * other.values[b],
                    );
                    a += 1;
                    b += 1;
                    e
                };
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                    row_ptr[i + 1] += 1;
                }
            }
        }
        for i in 0..self.n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Kronecker (tensor) product: (self ⊗ other)[(i·p + k), (j·q + l)] =
    /// self[i,j]·other[k,l].
    pub fn kron(&self, other: &CsrMatrix) -> CsrMatrix {
        let n_rows = self.n_rows * other.n_rows;
        let n_cols = self.n_cols * other.n_cols;
        let nnz = self.nnz() * other.nnz();
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for i in 0..self.n_rows {
            for k in 0..other.n_rows {
                for ka in self.row_ptr[i]..self.row_ptr[i + 1] {
                    let j = self.col_idx[ka];
                    let va = self.values[ka];
                    for kb in other.row_ptr[k]..other.row_ptr[k + 1] {
                        col_idx.push(j * other.n_cols + other.col_idx[kb]);
                        values.push(va * other.values[kb]);
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Largest |A − Aᵀ| entry.
    pub fn max_asymmetry(&self) -> f64 {
        let t = self.transpose();
        match self.add(&t, 1.0, -1.0) {
            Ok(diff) => diff.values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            Err(_) => f64::INFINITY,
        }
    }

    pub fn frobenius(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Dense copy for small-cutoff oracle comparisons.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_cols]; self.n_rows];
        for i in 0..self.n_rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[i][self.col_idx[k]] = self.values[k];
            }
        }
        out
    }

    /// Matrix-market coordinate text (1-based indices).
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::with_capacity(32 + 24 * self.nnz());
        s.push_str("%%MatrixMarket matrix coordinate real general\n");
        s.push_str(&format!("{} {} {}\n", self.n_rows, self.n_cols, self.nnz()));
        for i in 0..self.n_rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s.push_str(&format!(
                    "{} {} {:.17e}\n",
                    i + 1,
                    self.col_idx[k] + 1,
                    self.values[k]
                ));
            }
        }
        s
    }
}

/// What an assembled operator represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OperatorKind {
    Kfp,
    Witten,
    OscillatorP,
    Multiplier,
}

/// A sparse operator tied to the grid it was assembled on.
#[derive(Debug, Clone, Serialize)]
pub struct DiscreteOperator {
    pub matrix: CsrMatrix,
    pub grid: DiscreteGrid,
    pub kind: OperatorKind,
    pub symmetric: bool,
}

impl DiscreteOperator {
    pub fn dim(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn to_matrix_market(&self) -> String {
        self.matrix.to_matrix_market()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplet_assembly_accumulates_and_sorts() {
        let m = CsrMatrix::from_triplets(
            2,
            3,
            &[(1, 2, 4.0), (0, 0, 1.0), (1, 2, -1.0), (0, 2, 2.0), (1, 1, 0.0)],
        )
        .unwrap();
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(0, 2), 2.0);
        assert_eq!(m.get(1, 2), 3.0);
        assert_eq!(m.get(1, 1), 0.0);
        let y = m.matvec(&[1.0, 10.0, 100.0]);
        assert_eq!(y, vec![201.0, 300.0]);
    }

    #[test]
    fn transpose_add_and_kron_agree_with_dense() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, -3.0)])
            .unwrap();
        let b = CsrMatrix::from_triplets(2, 2, &[(0, 1, 5.0), (1, 1, 7.0)]).unwrap();
        let t = a.transpose();
        assert_eq!(t.get(1, 0), 2.0);
        assert_eq!(t.get(0, 1), -3.0);
        let s = a.add(&b, 2.0, -1.0).unwrap();
        assert_eq!(s.get(0, 0), 2.0);
        assert_eq!(s.get(0, 1), -1.0);
        assert_eq!(s.get(1, 1), -7.0);
        let k = a.kron(&b);
        assert_eq!(k.n_rows(), 4);
        // (a⊗b)[0·2+0, 0·2+1] = a[0,0]·b[0,1] = 5; [0·2+1, 1·2+1] = a[0,1]·b[1,1] = 14.
        assert_eq!(k.get(0, 1), 5.0);
        assert_eq!(k.get(1, 3), 14.0);
        // [1·2+0, 0·2+1] = a[1,0]·b[0,1] = −15.
        assert_eq!(k.get(2, 1), -15.0);
    }

    #[test]
    fn matrix_market_round_trips_by_eye() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 0.5), (1, 0, -1.0)]).unwrap();
        let text = a.to_matrix_market();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n2 2 2\n"));
        assert!(text.contains("1 1 5"));
        assert!(text.contains("2 1 -1"));
    }
}

//! Small dense symmetric linear algebra.
//!
//! Provides a row-major square matrix type, Frobenius norms, and a
//! cyclic-Jacobi eigensolver with eigenvectors. This is sized for the
//! matrices the toolkit actually produces — Hessians in dimension ≤ 3 and
//! Lanczos tridiagonal projections with a few dozen rows — so an O(n³)
//! sweep method with excellent accuracy beats anything fancier.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense square matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMat {
    n: usize,
    data: Vec<f64>,
}

impl Serialize for DenseMat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[f64]> = self.data.chunks(self.n.max(1)).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DenseMat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        DenseMat::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

impl DenseMat {
    pub fn zeros(n: usize) -> Self {
        DenseMat {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has length {} in a {n}x{n} matrix",
                    row.len()
                )));
            }
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Frobenius norm sqrt(Σ a_ij²).
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest |a_ij − a_ji|.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.at(i, j) - self.at(j, i)).abs());
            }
        }
        worst
    }

    /// Sum of diagonal entries.
    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.at(i, i)).sum()
    }

    /// Matrix-vector product.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "matvec length mismatch");
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        y
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.at(i, j)).collect()
    }
}

/// Eigendecomposition of a symmetric matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMat,
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.
///
/// Rejects matrices whose asymmetry exceeds `1e-12 · max(1, ‖A‖_F)`.
/// Converges when the off-diagonal Frobenius mass drops below
/// `1e-14 · max(1, ‖A‖_F)`; for matrices of the sizes used here this takes
/// a handful of sweeps.
pub fn jacobi_eigen(a: &DenseMat) -> Result<SymmetricEigen> {
    let n = a.n;
    let fro = a.frobenius().max(1.0);
    if a.max_asymmetry() > 1e-12 * fro {
        return Err(Error::InvalidInput(format!(
            "matrix is not symmetric: max asymmetry {:.3e} exceeds 1e-12 * {:.3e}",
            a.max_asymmetry(),
            fro
        )));
    }
    let mut m = a.clone();
    // Exact symmetrization guards against harmless representation noise.
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (m.at(i, j) + m.at(j, i));
            m.set(i, j, s);
            m.set(j, i, s);
        }
    }
    let mut v = DenseMat::identity(n);
    let tol = 1e-14 * fro;
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * m.at(i, j) * m.at(i, j);
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = m.at(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = m.at(p, p);
                let aqq = m.at(q, q);
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Update rows/columns p and q of m (symmetric rotation).
                for k in 0..n {
                    if k != p && k != q {
                        let akp = m.at(k, p);
                        let akq = m.at(k, q);
                        let new_kp = c * akp - s * akq;
                        let new_kq = s * akp + c * akq;
                        m.set(k, p, new_kp);
                        m.set(p, k, new_kp);
                        m.set(k, q, new_kq);
                        m.set(q, k, new_kq);
                    }
                }
                m.set(p, p, app - t * apq);
                m.set(q, q, aqq + t * apq);
                m.set(p, q, 0.0);
                m.set(q, p, 0.0);
                // Accumulate the rotation into the eigenvector matrix.
                for k in 0..n {
                    let vkp = v.at(k, p);
                    let vkq = v.at(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.at(i, i).partial_cmp(&m.at(j, j)).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m.at(i, i)).collect();
    let mut vectors = DenseMat::zeros(n);
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, new_j, v.at(i, old_j));
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn symmetric_eigenvalues(a: &DenseMat) -> Result<Vec<f64>> {
    Ok(jacobi_eigen(a)?.values)
}

/// Euclidean norm of a vector.
pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Dot product.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonal_matrix_is_fixed_point() {
        let m = DenseMat::from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, -1.0, 0.0],
            vec![0.0, 0.0, 7.0],
        ])
        .unwrap();
        let e = jacobi_eigen(&m).unwrap();
        assert_eq!(e.values, vec![-1.0, 3.0, 7.0]);
    }

    #[test]
    fn jacobi_matches_closed_form_2x2() {
        // [[-2,-4],[-4,-2]] has eigenvalues -2±4 = {-6, 2}.
        let m = DenseMat::from_rows(&[vec![-2.0, -4.0], vec![-4.0, -2.0]]).unwrap();
        let e = jacobi_eigen(&m).unwrap();
        assert!((e.values[0] + 6.0).abs() < 1e-12, "got {:?}", e.values);
        assert!((e.values[1] - 2.0).abs() < 1e-12, "got {:?}", e.values);
        // Residual check ‖Av - λv‖.
        for (k, &lam) in e.values.iter().enumerate() {
            let v = e.vectors.column(k);
            let av = m.matvec(&v);
            let r: Vec<f64> = av.iter().zip(&v).map(|(a, b)| a - lam * b).collect();
            assert!(norm2(&r) < 1e-12, "eigenpair {k} residual {}", norm2(&r));
        }
    }

    #[test]
    fn jacobi_rejects_asymmetric() {
        let m = DenseMat::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(jacobi_eigen(&m).is_err());
    }

    #[test]
    fn jacobi_random_symmetric_reconstructs() {
        // Deterministic pseudo-random symmetric matrix; check A = V diag(w) V^T.
        let n = 12;
        let mut m = DenseMat::zeros(n);
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for i in 0..n {
            for j in i..n {
                let v = next();
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        let e = jacobi_eigen(&m).unwrap();
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += e.vectors.at(i, k) * e.values[k] * e.vectors.at(j, k);
                }
                assert!(
                    (s - m.at(i, j)).abs() < 1e-10,
                    "reconstruction off at ({i},{j}): {s} vs {}",
                    m.at(i, j)
                );
            }
        }
        // Eigenvalues ascending.
        for k in 1..n {
            assert!(e.values[k] >= e.values[k - 1]);
        }
    }
}

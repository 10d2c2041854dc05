//! Low-spectrum solver: symmetric Lanczos with full reorthogonalization
//! and a QL-with-implicit-shifts tridiagonal eigensolver. Nonsymmetric
//! operators are handled through their Gram operator AᵀA, whose lowest
//! eigenvalues give the smallest singular values of A.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

use super::op::{CsrMatrix, DiscreteOperator};

/// Seed for the deterministic Lanczos start vectors.
const LANCZOS_SEED: u64 = 0x1a9c_705e_ed;

/// Relative residual tolerance declaring a Ritz value converged.
const RESIDUAL_TOL: f64 = 1e-8;

/// Hard cap on stored basis vectors (full reorthogonalization keeps the
/// whole basis in memory, so the cap shrinks with the problem size).
fn basis_cap(n: usize) -> usize {
    n.min(60.max(40_000_000 / n.max(1)))
}

/// Eigenvalues (ascending) and eigenvectors of a symmetric tridiagonal
/// matrix with diagonal `diag` and off-diagonal `offdiag` (where
/// `offdiag[i]` couples rows i and i+1), by the implicit-shift QL sweep.
/// Returns (values, z) with z[i][j] the i-th component of eigenvector j.
pub fn tridiagonal_eigen(diag: &[f64], offdiag: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty tridiagonal matrix".into()));
    }
    if offdiag.len() + 1 != n {
        return Err(Error::DimensionMismatch(format!(
            "{} off-diagonal entries do not fit a tridiagonal of size {n}",
            offdiag.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(offdiag);
    let mut z = vec![vec![0.0; n]; n];
    for (i, row) in z.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let eps = f64::EPSILON / 2.0;
    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::NoConvergence(format!(
                        "tridiagonal QL stalled at row {l} after {iter} sweeps"
                    )));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0f64;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0f64;
                let mut s2 = 0.0f64;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let gg = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * gg;
                    d[i + 1] = h + s * (c * gg + s * d[i]);
                    for row in z.iter_mut() {
                        let hk = row[i + 1];
                        row[i + 1] = s * row[i] + c * hk;
                        row[i] = c * row[i] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Selection sort ascending, carrying eigenvector columns along.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        for j in i + 1..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            for row in z.iter_mut() {
                row.swap(i, k);
            }
        }
    }
    Ok((d, z))
}

/// The lowest part of an operator's spectrum with residual bounds.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    /// Requested number of lowest values, ascending. For nonsymmetric
    /// operators these are the smallest singular values.
    pub values: Vec<f64>,
    /// Residual bound per value, in the scale of the operator actually
    /// iterated (the Gram operator AᵀA on the nonsymmetric route).
    pub residuals: Vec<f64>,
    /// Lanczos steps taken.
    pub iterations: usize,
    /// Whether every reported value met the residual tolerance.
    pub converged: bool,
    /// True when the nonsymmetric Gram route was used and `values` are
    /// singular values.
    pub singular_values: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Symmetric Lanczos with full (two-pass) reorthogonalization against the
/// stored basis. `apply` must be a symmetric operator on ℝⁿ. Every basis
/// vector is additionally kept orthogonal to `constraints` (orthonormal),
/// confining the whole Krylov space to their complement.
fn lanczos_lowest(
    apply: &dyn Fn(&[f64]) -> Vec<f64>,
    n: usize,
    k: usize,
    seed: u64,
    constraints: &[Vec<f64>],
) -> Result<SpectrumReport> {
    let max_m = basis_cap(n);
    if k > max_m {
        return Err(Error::InvalidInput(format!(
            "cannot resolve {k} values with a basis capped at {max_m} vectors"
        )));
    }
    if constraints.len() >= n {
        return Err(Error::InvalidInput(
            "deflation removes the whole space".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_unit = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        loop {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            project(&mut v, constraints);
            let nn = norm2(&v);
            if nn > 1e-8 {
                return v.into_iter().map(|x| x / nn).collect();
            }
        }
    };

    let mut basis: Vec<Vec<f64>> = vec![random_unit(&mut rng)];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut v_prev: Option<Vec<f64>> = None;
    let mut next_check = max_m.min((2 * k + 10).max(30));
    let mut norm_est = 0.0f64;

    let finish = |alphas: &[f64], betas: &[f64], beta_last: f64, k: usize| -> Result<(Vec<f64>, Vec<f64>, bool)> {
        let m = alphas.len();
        let (vals, z) = tridiagonal_eigen(alphas, &betas[..m - 1])?;
        let scale = vals
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
            .max(1e-300);
        let mut values = Vec::with_capacity(k);
        let mut residuals = Vec::with_capacity(k);
        let mut ok = true;
        for i in 0..k.min(m) {
            values.push(vals[i]);
            let res = (beta_last * z[m - 1][i]).abs();
            residuals.push(res);
            if res > RESIDUAL_TOL * scale {
                ok = false;
            }
        }
        if m < k {
            ok = false;
        }
        Ok((values, residuals, ok))
    };

    loop {
        let j = alphas.len();
        let v = basis.last().expect("basis never empty").clone();
        let mut w = apply(&v);
        if let Some(prev) = &v_prev {
            let b = betas[j - 1];
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= b * pi;
            }
        }
        let alpha = dot(&w, &v);
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi -= alpha * vi;
        }
        // Full reorthogonalization, two passes of modified Gram–Schmidt,
        // sweeping the deflation constraints along with the basis.
        for _ in 0..2 {
            project(&mut w, constraints);
            for b in &basis {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        alphas.push(alpha);
        norm_est = norm_est.max(alpha.abs());
        let beta = norm2(&w);
        betas.push(beta);
        let m = alphas.len();

        let saturated = m >= max_m;
        let breakdown = beta <= 1e-13 * norm_est.max(1.0);
        let exhausted = basis.len() + constraints.len() >= n;
        if m >= next_check || saturated || breakdown {
            let (values, residuals, ok) = finish(&alphas, &betas, beta, k)?;
            if (ok && m >= k) || saturated || (breakdown && exhausted) {
                return Ok(SpectrumReport {
                    values,
                    residuals,
                    iterations: m,
                    converged: ok,
                    singular_values: false,
                });
            }
            next_check = max_m.min(((m as f64 * 1.4) as usize).max(m + 8));
        }

        if breakdown {
            // Invariant subspace found but more values are needed:
            // restart with a fresh direction orthogonal to the basis.
            let mut fresh = random_unit(&mut rng);
            for _ in 0..2 {
                project(&mut fresh, constraints);
                for b in &basis {
                    let c = dot(&fresh, b);
                    for (fi, bi) in fresh.iter_mut().zip(b) {
                        *fi -= c * bi;
                    }
                }
            }
            let nn = norm2(&fresh);
            if nn < 1e-10 {
                // The basis spans the whole space; the last checkpoint
                // above was exact.
                let (values, residuals, ok) = finish(&alphas, &betas, 0.0, k)?;
                return Ok(SpectrumReport {
                    values,
                    residuals,
                    iterations: m,
                    converged: ok,
                    singular_values: false,
                });
            }
            *betas.last_mut().expect("just pushed") = 0.0;
            v_prev = None;
            basis.push(fresh.into_iter().map(|x| x / nn).collect());
        } else {
            v_prev = Some(v);
            basis.push(w.into_iter().map(|x| x / beta).collect());
        }
    }
}

/// Build an orthonormal projector basis out of raw deflation vectors.
fn orthonormalize(vectors: &[Vec<f64>], n: usize) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        if v.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "deflation vector of length {} on a space of dimension {n}",
                v.len()
            )));
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &out {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let nn = norm2(&w);
        if nn < 1e-12 {
            return Err(Error::InvalidInput(
                "deflation vectors are linearly dependent".into(),
            ));
        }
        out.push(w.into_iter().map(|x| x / nn).collect());
    }
    Ok(out)
}

fn project(x: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let c = dot(x, b);
        for (xi, bi) in x.iter_mut().zip(b) {
            *xi -= c * bi;
        }
    }
}

fn low_spectrum_impl(
    op: &DiscreteOperator,
    k: usize,
    deflate: &[Vec<f64>],
) -> Result<SpectrumReport> {
    if k == 0 || k > 20 {
        return Err(Error::InvalidInput(format!(
            "requested {k} lowest values; between 1 and 20 are supported"
        )));
    }
    let n = op.dim();
    if k > n {
        return Err(Error::InvalidInput(format!(
            "requested {k} values from an operator of dimension {n}"
        )));
    }
    let ortho = orthonormalize(deflate, n)?;
    // The Krylov basis is confined to the complement of `ortho`, so the
    // apply closure only needs to project its output back.
    if op.symmetric {
        let m = op.matrix.clone();
        let ortho2 = ortho.clone();
        let apply = move |x: &[f64]| -> Vec<f64> {
            let mut y = m.matvec(x);
            project(&mut y, &ortho2);
            y
        };
        lanczos_lowest(&apply, n, k, LANCZOS_SEED, &ortho)
    } else {
        let a: CsrMatrix = op.matrix.clone();
        let at = a.transpose();
        let ortho2 = ortho.clone();
        let apply = move |x: &[f64]| -> Vec<f64> {
            let mut y = at.matvec(&a.matvec(x));
            project(&mut y, &ortho2);
            y
        };
        let mut report = lanczos_lowest(&apply, n, k, LANCZOS_SEED, &ortho)?;
        for v in report.values.iter_mut() {
            *v = v.max(0.0).sqrt();
        }
        report.singular_values = true;
        Ok(report)
    }
}

/// The `k` lowest eigenvalues of a symmetric operator, or the `k`
/// smallest singular values of a nonsymmetric one (via its Gram
/// operator), with residual bounds.
pub fn low_spectrum(op: &DiscreteOperator, k: usize) -> Result<SpectrumReport> {
    low_spectrum_impl(op, k, &[])
}

/// Same as [`low_spectrum`], restricted to the orthogonal complement of
/// the given vectors (used to step over an approximate kernel).
pub fn low_spectrum_deflated(
    op: &DiscreteOperator,
    k: usize,
    deflate: &[Vec<f64>],
) -> Result<SpectrumReport> {
    low_spectrum_impl(op, k, deflate)
}

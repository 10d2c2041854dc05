//! Quasimode counting along the degenerate channel of the double-well
//! family V = q₁⁴ − 2q₁²q₂ + (1+ε)q₂² at the threshold coupling ε = −1,
//! where V degenerates along the parabola q₂ = q₁² and the associated
//! scalar operator accumulates low quasimodes.
//!
//! The family u_n = χ((q₂ + n²)/n)·e^{−V} concentrates near q₂ ≈ −n²;
//! its Rayleigh quotient against the quadratic form ∫|∇φ|²e^{−2V}
//! collapses to
//!
//!   Q_n = (1/n²) · ∫χ′(t)² w dt dq₁ / ∫χ(t)² w dt dq₁,
//!   w = exp(−2q₁⁴ + 4q₁²q₂),  q₂ = −n² + n·t,
//!
//! which decays like n^{−2}: arbitrarily many almost-orthogonal states
//! with energies sliding to zero, the signature of a non-compact
//! resolvent at this coupling. The supports in q₂ are pairwise disjoint
//! for geometrically growing n, which keeps the states independent.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::localization::theta_profile;

/// One member of the quasimode family.
#[derive(Debug, Clone, Serialize)]
pub struct WeylPoint {
    pub n: u32,
    /// Rayleigh quotient Q_n.
    pub quotient: f64,
    /// Numerator and denominator integrals (before the 1/n² factor).
    pub num: f64,
    pub den: f64,
    /// Simpson points per axis at convergence.
    pub quad_points: usize,
}

/// The measured decay of the quasimode quotients.
#[derive(Debug, Clone, Serialize)]
pub struct WeylReport {
    pub points: Vec<WeylPoint>,
    /// Least-squares slope of ln Q against ln n (expected ≈ −2).
    pub exponent: f64,
    /// exp(intercept) of the same fit.
    pub amplitude: f64,
}

/// Cutoff profile in the sliding variable: 1 on |t| ≤ 1/2, 0 for
/// |t| ≥ 1, C² in between.
fn chi(t: f64) -> f64 {
    theta_profile(t.abs(), 0.5).0
}

fn chi_prime(t: f64) -> f64 {
    let (_, d1, _) = theta_profile(t.abs(), 0.5);
    if t >= 0.0 {
        d1
    } else {
        -d1
    }
}

/// Composite Simpson over a tensor square, `m` points per axis (odd).
fn simpson_2d(f: impl Fn(f64, f64) -> f64, t_lim: (f64, f64), x_lim: (f64, f64), m: usize) -> f64 {
    debug_assert!(m % 2 == 1 && m >= 3);
    let (t0, t1) = t_lim;
    let (x0, x1) = x_lim;
    let ht = (t1 - t0) / (m - 1) as f64;
    let hx = (x1 - x0) / (m - 1) as f64;
    let w = |i: usize| -> f64 {
        if i == 0 || i == m - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut acc = 0.0;
    for i in 0..m {
        let t = t0 + i as f64 * ht;
        let wi = w(i);
        let mut row = 0.0;
        for j in 0..m {
            let x = x0 + j as f64 * hx;
            row += w(j) * f(t, x);
        }
        acc += wi * row;
    }
    acc * ht * hx / 9.0
}

/// The q₂-support interval of the n-th quasimode.
pub fn support_interval(n: u32) -> (f64, f64) {
    let nf = n as f64;
    (-nf * nf - nf, -nf * nf + nf)
}

/// Length of the overlap of two quasimode supports (0 when disjoint).
pub fn support_overlap(n1: u32, n2: u32) -> f64 {
    let (lo1, hi1) = support_interval(n1);
    let (lo2, hi2) = support_interval(n2);
    (hi1.min(hi2) - lo1.max(lo2)).max(0.0)
}

fn quotient_for(n: u32) -> Result<WeylPoint> {
    let nf = n as f64;
    let x_half = 5.0 / nf;
    let weight = move |t: f64, x: f64| -> f64 {
        let q2 = -nf * nf + nf * t;
        // q₂ < 0 keeps the exponent negative: no overflow possible.
        (-2.0 * x.powi(4) + 4.0 * x * x * q2).exp()
    };
    let mut m = 33usize;
    let mut prev: Option<(f64, f64)> = None;
    for _ in 0..=8 {
        let num = simpson_2d(
            |t, x| {
                let c = chi_prime(t);
                c * c * weight(t, x)
            },
            (-1.0, 1.0),
            (-x_half, x_half),
            m,
        );
        let den = simpson_2d(
            |t, x| {
                let c = chi(t);
                c * c * weight(t, x)
            },
            (-1.0, 1.0),
            (-x_half, x_half),
            m,
        );
        if den <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "quasimode mass vanished for n = {n}"
            )));
        }
        if let Some((pn, pd)) = prev {
            let rel = ((num - pn).abs() / num.abs().max(1e-300))
                .max((den - pd).abs() / den.abs().max(1e-300));
            if rel <= 1e-6 {
                return Ok(WeylPoint {
                    n,
                    quotient: num / den / (nf * nf),
                    num,
                    den,
                    quad_points: m,
                });
            }
        }
        prev = Some((num, den));
        m = 2 * m - 1;
    }
    Err(Error::NoConvergence(format!(
        "quadrature for n = {n} still moving at {m} points per axis"
    )))
}

/// Evaluate the quasimode quotients for the threshold coupling and fit
/// their decay. `epsilon` must be the threshold value −1; the cutoff
/// family is built specifically for the degenerate channel it opens.
pub fn weyl_rayleigh(epsilon: f64, n_list: &[u32]) -> Result<WeylReport> {
    if (epsilon + 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "the quasimode family probes the threshold coupling -1, got {epsilon}"
        )));
    }
    if n_list.len() < 2 {
        return Err(Error::InvalidInput(
            "need at least two scales to fit a decay".into(),
        ));
    }
    for w in n_list.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidInput(
                "scales must be strictly increasing".into(),
            ));
        }
    }
    if n_list[0] < 2 {
        return Err(Error::InvalidInput("scales must be at least 2".into()));
    }
    let mut points = Vec::with_capacity(n_list.len());
    for &n in n_list {
        points.push(quotient_for(n)?);
    }
    // Ordinary least squares on (ln n, ln Q).
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.quotient.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / xs.len() as f64;
    let ybar = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let exponent = sxy / sxx;
    let amplitude = (ybar - exponent * xbar).exp();
    Ok(WeylReport {
        points,
        exponent,
        amplitude,
    })
}

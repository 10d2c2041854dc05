//! Sparse multivariate polynomials and pointwise derivative analytics.
//!
//! A potential V: R^d → R is stored as a map from exponent multi-indices to
//! coefficients. Everything downstream — gradients, Hessians, the positive
//! and negative eigenvalue traces `Tr±`, and the derivative indicators
//!
//! ```text
//! R_geq(n, q) = Σ_{n ≤ |α| ≤ r} |∂^α V(q)|^{1/|α|}      (distinct multi-indices α)
//! R_eq(n, q)  = Σ_{|α| = n}     |∂^α V(q)|^{1/n}
//! ```
//!
//! is computed from exact term-by-term differentiation (integer falling
//! factorials), so the only error source is binary64 rounding.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, DenseMat};

/// Sparse real polynomial on R^d: exponent multi-index → coefficient.
///
/// Invariants: `d ≥ 1`, no zero coefficients stored, at least one term
/// (the identically-zero polynomial is rejected), `degree` = max |α|.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    d: usize,
    terms: BTreeMap<Vec<u32>, f64>,
    degree: u32,
}

/// Serialized form: `{"d": 2, "terms": [{"alpha": [2,2], "c": -1.0}]}`.
#[derive(Serialize, Deserialize)]
struct PolyRepr {
    d: usize,
    terms: Vec<TermRepr>,
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    alpha: Vec<u32>,
    c: f64,
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = PolyRepr {
            d: self.d,
            terms: self
                .terms
                .iter()
                .map(|(alpha, &c)| TermRepr {
                    alpha: alpha.clone(),
                    c,
                })
                .collect(),
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(d)?;
        Polynomial::new(
            repr.d,
            repr.terms.into_iter().map(|t| (t.alpha, t.c)),
        )
        .map_err(|e| {
            serde::de::Error::custom(match e {
                crate::error::Error::InvalidInput(m) => m,
                other => other.to_string(),
            })
        })
    }
}

impl Polynomial {
    /// Build a polynomial from `(multi-index, coefficient)` pairs.
    ///
    /// Duplicate multi-indices are merged by summing coefficients; exact
    /// zero coefficients are dropped after merging. Rejects `d < 1`,
    /// multi-indices of the wrong length, non-finite coefficients, and the
    /// zero polynomial.
    pub fn new(d: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidInput("dimension d must be >= 1".into()));
        }
        let mut map: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (alpha, c) in terms {
            if alpha.len() != d {
                return Err(Error::DimensionMismatch(format!(
                    "multi-index {alpha:?} has length {} but d = {d}",
                    alpha.len()
                )));
            }
            if !c.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite coefficient {c} for multi-index {alpha:?}"
                )));
            }
            *map.entry(alpha).or_insert(0.0) += c;
        }
        map.retain(|_, c| *c != 0.0);
        if map.is_empty() {
            return Err(Error::InvalidInput(
                "zero polynomial rejected: at least one nonzero term is required".into(),
            ));
        }
        let degree = map.keys().map(|a| a.iter().sum::<u32>()).max().unwrap();
        Ok(Polynomial {
            d,
            terms: map,
            degree,
        })
    }

    /// Parse the JSON potential format `{"d":…, "terms":[{"alpha":…, "c":…}]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("polynomial serialization cannot fail")
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Iterate stored `(multi-index, coefficient)` pairs in lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(a, &c)| (a.as_slice(), c))
    }

    fn check_point(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "point has length {} but polynomial dimension is {}",
                q.len(),
                self.d
            )));
        }
        Ok(())
    }

    /// Evaluate V(q).
    pub fn eval(&self, q: &[f64]) -> Result<f64> {
        self.check_point(q)?;
        let mut acc = 0.0;
        for (alpha, &c) in &self.terms {
            let mut m = c;
            for (qi, &e) in q.iter().zip(alpha) {
                m *= qi.powi(e as i32);
            }
            acc += m;
        }
        Ok(acc)
    }

    /// Evaluate the partial derivative ∂^α V at q.
    ///
    /// Differentiation is term-by-term with exact integer falling factorials
    /// (β_i)(β_i−1)···(β_i−α_i+1), so the result is exact for integer data
    /// up to floating rounding. Orders beyond the degree give exactly 0.
    pub fn eval_derivative(&self, alpha: &[u32], q: &[f64]) -> Result<f64> {
        self.check_point(q)?;
        if alpha.len() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "derivative multi-index has length {} but polynomial dimension is {}",
                alpha.len(),
                self.d
            )));
        }
        let mut acc = 0.0;
        'terms: for (beta, &c) in &self.terms {
            let mut m = c;
            for i in 0..self.d {
                let (b, a) = (beta[i], alpha[i]);
                if b < a {
                    continue 'terms;
                }
                m *= falling_factorial(b, a);
                m *= q[i].powi((b - a) as i32);
            }
            acc += m;
        }
        Ok(acc)
    }

    /// The polynomial ∂^α V, or `None` when it is identically zero.
    ///
    /// Useful for hot loops: differentiate once, evaluate many times.
    pub fn derivative_poly(&self, alpha: &[u32]) -> Result<Option<Polynomial>> {
        if alpha.len() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "derivative multi-index has length {} but polynomial dimension is {}",
                alpha.len(),
                self.d
            )));
        }
        let mut out: Vec<(Vec<u32>, f64)> = Vec::new();
        'terms: for (beta, &c) in &self.terms {
            let mut coeff = c;
            let mut new_alpha = Vec::with_capacity(self.d);
            for i in 0..self.d {
                let (b, a) = (beta[i], alpha[i]);
                if b < a {
                    continue 'terms;
                }
                coeff *= falling_factorial(b, a);
                new_alpha.push(b - a);
            }
            out.push((new_alpha, coeff));
        }
        if out.is_empty() {
            return Ok(None);
        }
        match Polynomial::new(self.d, out) {
            Ok(p) => Ok(Some(p)),
            // All terms cancelled to zero after merging.
            Err(Error::InvalidInput(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// ∂_k V as a polynomial (`None` if identically zero).
    pub fn partial(&self, k: usize) -> Result<Option<Polynomial>> {
        let mut alpha = vec![0u32; self.d];
        alpha[k] = 1;
        self.derivative_poly(&alpha)
    }

    /// Gradient ∇V(q).
    pub fn gradient(&self, q: &[f64]) -> Result<Vec<f64>> {
        self.check_point(q)?;
        let mut g = vec![0.0; self.d];
        let mut alpha = vec![0u32; self.d];
        for k in 0..self.d {
            alpha[k] = 1;
            g[k] = self.eval_derivative(&alpha, q)?;
            alpha[k] = 0;
        }
        Ok(g)
    }

    /// Hessian matrix of V at q (exactly symmetric by construction).
    pub fn hessian(&self, q: &[f64]) -> Result<DenseMat> {
        self.check_point(q)?;
        let mut h = DenseMat::zeros(self.d);
        let mut alpha = vec![0u32; self.d];
        for i in 0..self.d {
            for j in i..self.d {
                alpha[i] += 1;
                alpha[j] += 1;
                let v = self.eval_derivative(&alpha, q)?;
                alpha[i] = 0;
                alpha[j] = 0;
                h.set(i, j, v);
                h.set(j, i, v);
            }
        }
        Ok(h)
    }

    /// Derivative indicator R_eq(n, q) = Σ_{|α| = n} |∂^α V(q)|^{1/n}.
    ///
    /// Enumerates the exact-order multi-indices by recursive composition of
    /// the total order n into d parts. This is deliberately a different
    /// enumeration strategy from [`Polynomial::r_geq`] so the two can
    /// cross-check each other.
    pub fn r_eq(&self, n: u32, q: &[f64]) -> Result<f64> {
        self.check_point(q)?;
        if n == 0 {
            return Err(Error::InvalidInput(
                "derivative indicator order n must be >= 1".into(),
            ));
        }
        let mut sum = 0.0;
        for alpha in compositions(n, self.d) {
            let v = self.eval_derivative(&alpha, q)?;
            if v != 0.0 {
                sum += v.abs().powf(1.0 / n as f64);
            }
        }
        Ok(sum)
    }

    /// Derivative indicator R_geq(n, q) = Σ_{n ≤ |α| ≤ r} |∂^α V(q)|^{1/|α|},
    /// summed over distinct multi-indices α.
    ///
    /// Enumerates candidates with a mixed-radix odometer over all α with
    /// α_i ≤ r, filtering by total order — independent of the
    /// composition-based enumeration in [`Polynomial::r_eq`].
    pub fn r_geq(&self, n: u32, q: &[f64]) -> Result<f64> {
        self.check_point(q)?;
        if n == 0 {
            return Err(Error::InvalidInput(
                "derivative indicator order n must be >= 1".into(),
            ));
        }
        if n > self.degree {
            return Ok(0.0);
        }
        let r = self.degree;
        let mut sum = 0.0;
        let mut alpha = vec![0u32; self.d];
        loop {
            let total: u32 = alpha.iter().sum();
            if total >= n && total <= r {
                let v = self.eval_derivative(&alpha, q)?;
                if v != 0.0 {
                    sum += v.abs().powf(1.0 / total as f64);
                }
            }
            // Odometer increment with per-digit cap r.
            let mut i = 0;
            loop {
                if i == self.d {
                    return Ok(sum);
                }
                if alpha[i] < r {
                    alpha[i] += 1;
                    break;
                }
                alpha[i] = 0;
                i += 1;
            }
        }
    }

    /// Per-multi-index contributions to the indicators: every α with
    /// `n_min ≤ |α| ≤ n_max` whose derivative is nonzero at q, with its
    /// contribution |∂^α V(q)|^{1/|α|}.
    ///
    /// This is the verbose view: summing a subset of these rows reproduces
    /// any counting convention a reader may prefer.
    pub fn r_contributions(
        &self,
        n_min: u32,
        n_max: u32,
        q: &[f64],
    ) -> Result<Vec<(Vec<u32>, f64)>> {
        self.check_point(q)?;
        if n_min == 0 {
            return Err(Error::InvalidInput(
                "derivative indicator order n must be >= 1".into(),
            ));
        }
        let mut rows = Vec::new();
        for n in n_min..=n_max.min(self.degree) {
            for alpha in compositions(n, self.d) {
                let v = self.eval_derivative(&alpha, q)?;
                if v != 0.0 {
                    rows.push((alpha, v.abs().powf(1.0 / n as f64)));
                }
            }
        }
        Ok(rows)
    }
}

/// Exact integer falling factorial b·(b−1)···(b−a+1) as f64 (1 when a = 0).
fn falling_factorial(b: u32, a: u32) -> f64 {
    debug_assert!(b >= a);
    let mut prod: u64 = 1;
    for k in 0..a {
        prod *= (b - k) as u64;
    }
    prod as f64
}

/// All multi-indices α ∈ N^d with |α| = n, in lexicographic order.
pub fn compositions(n: u32, d: usize) -> Vec<Vec<u32>> {
    fn rec(n: u32, d: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if d == 1 {
            prefix.push(n);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=n {
            prefix.push(first);
            rec(n - first, d - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d, &mut Vec::new(), &mut out);
    out
}

/// Split the spectrum of a symmetric matrix into positive and nonpositive
/// trace parts: `tr_plus = Σ_{ν>0} ν`, `tr_minus = −Σ_{ν≤0} ν`.
///
/// Eigenvalues with |ν| ≤ 1e−12·‖H‖_F are treated as exactly 0 and land in
/// the nonpositive bucket (contributing 0 to both sums), so both outputs
/// are nonnegative and `tr_plus − tr_minus` recovers the matrix trace.
/// Rejects matrices with relative asymmetry above 1e−12.
pub fn hessian_trace_split(h: &DenseMat) -> Result<(f64, f64)> {
    let eig = jacobi_eigen(h)?;
    Ok(trace_split_of_eigenvalues(&eig.values, h.frobenius()))
}

/// Trace split from an already-computed eigenvalue list.
pub fn trace_split_of_eigenvalues(values: &[f64], frobenius: f64) -> (f64, f64) {
    let thr = 1e-12 * frobenius;
    let mut tr_plus = 0.0;
    let mut tr_minus = 0.0;
    for &v in values {
        if v > thr {
            tr_plus += v;
        } else if v < -thr {
            tr_minus -= v;
        }
    }
    (tr_plus, tr_minus)
}

/// The logarithmic weight L(s) = (s+1)/log(s+1) for s ≥ 1.
///
/// L is minimized at s = e−1 (value e) and grows like s/log s.
pub fn log_weight(s: f64) -> Result<f64> {
    if !(s >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "log weight requires s >= 1, got {s}"
        )));
    }
    Ok(log_weight_ext(s))
}

/// The same formula (s+1)/log(s+1) extended to all s > 0.
///
/// Operator multipliers apply the weight to spectra that may start below 1
/// (e.g. the oscillator bottom 1/2 in one variable); the formula is
/// positive and finite there, so the extension is provided separately from
/// the checked public entry point.
pub fn log_weight_ext(s: f64) -> f64 {
    debug_assert!(s > 0.0, "log weight formula needs s > 0, got {s}");
    (s + 1.0) / (s + 1.0).ln()
}

/// One coercive-region membership verdict at fixed κ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SigmaMembership {
    pub kappa: f64,
    /// |∇V(q)|^{4/3}
    pub lhs: f64,
    /// κ·(‖Hess V(q)‖_F + R_geq(3,q)⁴ + 1)
    pub rhs: f64,
    /// Ties count as members: lhs ≥ rhs.
    pub member: bool,
}

/// Everything the toolkit derives from V at a single point.
#[derive(Debug, Clone, Serialize)]
pub struct PointAnalysis {
    pub q: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    /// Euclidean norm |∇V(q)|.
    pub gradient_norm: f64,
    #[serde(skip)]
    pub hessian: DenseMat,
    /// Frobenius norm of the Hessian.
    pub hessian_frobenius: f64,
    /// Hessian eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Sum of positive Hessian eigenvalues.
    pub tr_plus: f64,
    /// Minus the sum of nonpositive Hessian eigenvalues.
    pub tr_minus: f64,
    /// n → R_geq(n, q) for n = 1..=degree.
    pub r_geq: BTreeMap<u32, f64>,
    /// n → R_eq(n, q) for n = 1..=degree.
    pub r_eq: BTreeMap<u32, f64>,
    /// Coercive-region verdicts for each requested κ.
    pub sigma: Vec<SigmaMembership>,
}

impl PointAnalysis {
    /// R_geq(n, q) with the empty-sum convention (0 beyond the degree).
    pub fn r_geq_at(&self, n: u32) -> f64 {
        self.r_geq.get(&n).copied().unwrap_or(0.0)
    }
}

/// The two sides of the coercive-region inequality at κ:
/// lhs = |∇V|^{4/3}, rhs = κ·(‖Hess‖_F + R₃⁴ + 1).
pub fn sigma_parts(gradient_norm: f64, hessian_frobenius: f64, r3: f64, kappa: f64) -> (f64, f64) {
    let lhs = gradient_norm.powf(4.0 / 3.0);
    let rhs = kappa * (hessian_frobenius + r3.powi(4) + 1.0);
    (lhs, rhs)
}

/// Full pointwise analysis of V at q: gradient, Hessian, eigenvalue trace
/// split, derivative indicators for every order, and coercive-region
/// membership for each κ in `kappa_list`.
pub fn analyze_point(poly: &Polynomial, q: &[f64], kappa_list: &[f64]) -> Result<PointAnalysis> {
    let value = poly.eval(q)?;
    let gradient = poly.gradient(q)?;
    let gradient_norm = crate::linalg::norm2(&gradient);
    let hessian = poly.hessian(q)?;
    let hessian_frobenius = hessian.frobenius();
    let eig = jacobi_eigen(&hessian)?;
    let (tr_plus, tr_minus) = trace_split_of_eigenvalues(&eig.values, hessian_frobenius);
    let mut r_geq = BTreeMap::new();
    let mut r_eq = BTreeMap::new();
    for n in 1..=poly.degree() {
        r_geq.insert(n, poly.r_geq(n, q)?);
        r_eq.insert(n, poly.r_eq(n, q)?);
    }
    let r3 = r_geq.get(&3).copied().unwrap_or(0.0);
    let mut sigma = Vec::new();
    for &kappa in kappa_list {
        if !(kappa > 0.0) {
            return Err(Error::InvalidInput(format!(
                "kappa must be positive, got {kappa}"
            )));
        }
        let (lhs, rhs) = sigma_parts(gradient_norm, hessian_frobenius, r3, kappa);
        sigma.push(SigmaMembership {
            kappa,
            lhs,
            rhs,
            member: lhs >= rhs,
        });
    }
    Ok(PointAnalysis {
        q: q.to_vec(),
        value,
        gradient,
        gradient_norm,
        hessian,
        hessian_frobenius,
        eigenvalues: eig.values,
        tr_plus,
        tr_minus,
        r_geq,
        r_eq,
        sigma,
    })
}

/// The double-well family used throughout the examples:
/// `example1()` = −q1²q2², `example2(n)` = −q1²(q1²+q2²)^n,
/// `example3(eps)` = (q1²−q2)² + ε·q2².
pub mod examples {
    use super::Polynomial;

    /// V(q) = −q1²·q2² on R².
    pub fn example1() -> Polynomial {
        Polynomial::new(2, vec![(vec![2, 2], -1.0)]).unwrap()
    }

    /// V(q) = −q1²·(q1²+q2²)^n on R².
    pub fn example2(n: u32) -> Polynomial {
        assert!(n >= 1, "example2 needs n >= 1");
        // Binomial expansion of (q1²+q2²)^n, then multiply by −q1².
        let mut terms = Vec::new();
        let mut binom = 1.0f64;
        for k in 0..=n {
            terms.push((vec![2 + 2 * (n - k), 2 * k], -binom));
            binom = binom * (n - k) as f64 / (k + 1) as f64;
        }
        Polynomial::new(2, terms).unwrap()
    }

    /// V(q) = (q1²−q2)² + ε·q2² = q1⁴ − 2q1²q2 + (1+ε)q2² on R².
    ///
    /// At ε = −1 the q2² terms cancel and the potential degenerates to
    /// q1⁴ − 2q1²q2.
    pub fn example3(eps: f64) -> Polynomial {
        Polynomial::new(
            2,
            vec![
                (vec![4, 0], 1.0),
                (vec![2, 1], -2.0),
                (vec![0, 2], 1.0 + eps),
            ],
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1() -> Polynomial {
        examples::example1()
    }

    #[test]
    fn constructor_rejects_zero_polynomial() {
        assert!(Polynomial::new(2, vec![(vec![1, 0], 1.0), (vec![1, 0], -1.0)]).is_err());
        assert!(Polynomial::new(2, Vec::new()).is_err());
        assert!(Polynomial::new(0, vec![(vec![], 1.0)]).is_err());
    }

    #[test]
    fn constructor_merges_duplicates() {
        let p = Polynomial::new(1, vec![(vec![2], 1.0), (vec![2], 2.5), (vec![0], 1.0)]).unwrap();
        assert_eq!(p.terms.get(&vec![2u32]).copied(), Some(3.5));
        assert_eq!(p.degree(), 2);
    }

    #[test]
    fn derivative_closed_forms() {
        let p = ex1();
        // ∂q1 V = −2 q1 q2² at (1,1) → −2.
        assert_eq!(p.eval_derivative(&[1, 0], &[1.0, 1.0]).unwrap(), -2.0);
        // ∂q1²∂q2² V = −4 everywhere.
        assert_eq!(p.eval_derivative(&[2, 2], &[3.0, -7.0]).unwrap(), -4.0);
        // Order beyond the degree is exactly zero.
        assert_eq!(p.eval_derivative(&[5, 0], &[1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn gradient_and_hessian_closed_forms() {
        // |∇V| = 2|q1 q2||q| and ‖Hess‖_F = 2√(|q|⁴+6q1²q2²) for V = −q1²q2².
        let p = ex1();
        let pts = [[1.0, 1.0], [2.0, -3.0], [0.5, 0.25], [-1.5, 2.5]];
        for q in pts {
            let g = p.gradient(&q).unwrap();
            let gn = crate::linalg::norm2(&g);
            let expect = 2.0 * (q[0] * q[1]).abs() * (q[0] * q[0] + q[1] * q[1]).sqrt();
            assert!(
                (gn - expect).abs() <= 1e-10 * expect.max(1.0),
                "gradient norm at {q:?}: {gn} vs {expect}"
            );
            let h = p.hessian(&q).unwrap();
            let q2 = q[0] * q[0] + q[1] * q[1];
            let hf_expect = 2.0 * (q2 * q2 + 6.0 * q[0] * q[0] * q[1] * q[1]).sqrt();
            assert!(
                (h.frobenius() - hf_expect).abs() <= 1e-10 * hf_expect.max(1.0),
                "hessian frobenius at {q:?}: {} vs {hf_expect}",
                h.frobenius()
            );
        }
    }

    #[test]
    fn analyze_point_example_values() {
        let p = ex1();
        let a = analyze_point(&p, &[1.0, 1.0], &[1.0]).unwrap();
        assert!((a.gradient_norm - 2.0 * 2.0f64.sqrt()).abs() < 1e-12);
        assert!((a.hessian_frobenius - 2.0 * 10.0f64.sqrt()).abs() < 1e-12);
        assert!((a.eigenvalues[0] + 6.0).abs() < 1e-12, "{:?}", a.eigenvalues);
        assert!((a.eigenvalues[1] - 2.0).abs() < 1e-12);
        assert!((a.tr_plus - 2.0).abs() < 1e-12);
        assert!((a.tr_minus - 6.0).abs() < 1e-12);
        // R_geq(3) at (1,1): |∂(1,2)V|^{1/3} + |∂(2,1)V|^{1/3} + |∂(2,2)V|^{1/4}
        //                  = 4^{1/3} + 4^{1/3} + 4^{1/4}.
        let expect = 2.0 * 4.0f64.powf(1.0 / 3.0) + 4.0f64.powf(0.25);
        assert!(
            (a.r_geq_at(3) - expect).abs() < 1e-12,
            "R_geq(3) = {} vs {expect}",
            a.r_geq_at(3)
        );
    }

    #[test]
    fn r_identity_links_independent_enumerations() {
        // R_geq(n) = R_eq(n) + R_geq(n+1), computed by two different
        // enumeration strategies.
        let polys = [
            ex1(),
            examples::example2(2),
            examples::example3(0.5),
            Polynomial::new(3, vec![(vec![2, 1, 3], 0.7), (vec![0, 4, 0], -2.0)]).unwrap(),
        ];
        for p in &polys {
            let q: Vec<f64> = (0..p.dimension()).map(|i| 0.3 * (i as f64 + 1.0)).collect();
            for n in 1..p.degree() {
                let lhs = p.r_geq(n, &q).unwrap();
                let rhs = p.r_eq(n, &q).unwrap() + p.r_geq(n + 1, &q).unwrap();
                assert!(
                    (lhs - rhs).abs() <= 1e-10 * lhs.max(1.0),
                    "identity at n={n}: {lhs} vs {rhs}"
                );
            }
            let r = p.degree();
            let top_geq = p.r_geq(r, &q).unwrap();
            let top_eq = p.r_eq(r, &q).unwrap();
            assert!((top_geq - top_eq).abs() <= 1e-12 * top_geq.max(1.0));
        }
    }

    #[test]
    fn top_order_indicator_is_constant_in_q() {
        let p = examples::example3(-0.25);
        let r = p.degree();
        let v0 = p.r_eq(r, &[0.0, 0.0]).unwrap();
        for q in [[3.0, -1.0], [10.0, 10.0], [-0.1, 7.3]] {
            let v = p.r_eq(r, &q).unwrap();
            assert!((v - v0).abs() < 1e-12, "top-order value moved: {v} vs {v0}");
        }
        assert!(v0 > 0.0);
    }

    #[test]
    fn log_weight_values() {
        assert!((log_weight(1.0).unwrap() - 2.0 / 2.0f64.ln()).abs() < 1e-15);
        let e = std::f64::consts::E;
        assert!((log_weight(e - 1.0).unwrap() - e).abs() < 1e-15);
        // Independent evaluation of L(100) = 101/ln(101).
        let expect = 101.0 / 101.0f64.ln();
        assert!((log_weight(100.0).unwrap() - expect).abs() < 1e-12);
        assert!(log_weight(0.99).is_err());
        // Minimum of L on [1, ∞) is at s = e−1.
        for s in [1.0, 1.5, 2.0, 5.0, 50.0] {
            assert!(log_weight(s).unwrap() >= e - 1e-12);
        }
    }

    #[test]
    fn trace_split_examples() {
        let h = DenseMat::from_rows(&[vec![3.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert_eq!(hessian_trace_split(&h).unwrap(), (3.0, 1.0));
        let z = DenseMat::zeros(3);
        assert_eq!(hessian_trace_split(&z).unwrap(), (0.0, 0.0));
        let m = DenseMat::from_rows(&[vec![-2.0, -4.0], vec![-4.0, -2.0]]).unwrap();
        let (p, q) = hessian_trace_split(&m).unwrap();
        assert!((p - 2.0).abs() < 1e-12 && (q - 6.0).abs() < 1e-12, "({p},{q})");
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let p = examples::example3(0.5);
        let text = p.to_json();
        let back = Polynomial::from_json(&text).unwrap();
        assert_eq!(p, back);
        assert_eq!(text, back.to_json(), "serialization must be deterministic");
    }

    #[test]
    fn json_rejects_zero_and_reports_position() {
        let err = Polynomial::from_json("{\"d\": 2, \"terms\": []}").unwrap_err();
        assert!(format!("{err}").contains("zero polynomial"));
        let err = Polynomial::from_json("{\"d\": 2, ").unwrap_err();
        match err {
            crate::error::Error::Json { line, column, .. } => {
                assert!(line >= 1 && column >= 1);
            }
            other => panic!("expected Json error, got {other:?}"),
        }
    }

    #[test]
    fn example2_matches_direct_evaluation() {
        // −q1²(q1²+q2²)^n expanded vs evaluated directly.
        for n in 1..=3u32 {
            let p = examples::example2(n);
            for q in [[0.7f64, -1.3], [2.0, 0.5], [-1.0, -1.0]] {
                let direct = -q[0] * q[0] * (q[0] * q[0] + q[1] * q[1]).powi(n as i32);
                let v = p.eval(&q).unwrap();
                assert!(
                    (v - direct).abs() <= 1e-12 * direct.abs().max(1.0),
                    "n={n} q={q:?}: {v} vs {direct}"
                );
            }
        }
    }
}

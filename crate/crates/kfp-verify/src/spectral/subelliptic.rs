//! Empirical subellipticity study. For the discretized operator K and
//! the four logarithmically tempered multipliers
//!
//!   Λ₁ = L(O_p),      Λ₂ = L(⟨∇V(q)⟩^{2/3}),
//!   Λ₃ = L(⟨‖Hess V(q)‖_F⟩^{1/2}),   Λ₄ = L(⟨D_q⟩^{2/3}),
//!
//! with L(s) = (s+1)/ln(s+1), each test vector u yields the smallest
//! constant c(u) with Σ_i ‖Λ_i u‖² ≤ c(u)·(‖Ku‖² + c(u)·‖u‖²); the
//! report keeps the worst constant over a deterministic family. A sound
//! discretization should produce constants that stay bounded as the
//! resolution grows.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{log_weight_ext, Polynomial};

use super::assemble::assemble_kfp;
use super::grid::DiscreteGrid;
use super::testfn::{random_family, structured_family};

/// Seed for the random part of the estimate family.
const SUBELLIPTIC_SEED: u64 = 0x5_0be1_1ed;

/// One test vector's contribution.
#[derive(Debug, Clone, Serialize)]
pub struct TestFunctionRatio {
    pub label: String,
    pub c: f64,
}

/// Empirical subellipticity constants on one grid.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    /// Worst (largest) constant over the family.
    pub c: f64,
    /// Share of each multiplier in Σ‖Λ_i u‖² at the worst vector.
    pub multiplier_shares: [f64; 4],
    /// The top ratios, largest first (at most eight kept).
    pub ratios: Vec<TestFunctionRatio>,
    pub grid: DiscreteGrid,
    pub trials: usize,
    pub seed: u64,
}

/// Momentum-side multiplier: L at the oscillator level, diagonal over
/// the Hermite basis, extended over position blocks.
fn oscillator_weights(grid: &DiscreteGrid) -> Vec<f64> {
    grid.p_levels()
        .into_iter()
        .map(|lvl| log_weight_ext(lvl as f64 + grid.d as f64 / 2.0))
        .collect()
}

/// Position-side diagonal multipliers: L(⟨∇V⟩^{2/3}) and
/// L(⟨‖Hess‖_F⟩^{1/2}) sampled at the grid nodes.
fn potential_weights(poly: &Polynomial, grid: &DiscreteGrid) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut grad_w = Vec::with_capacity(grid.q_dim());
    let mut hess_w = Vec::with_capacity(grid.q_dim());
    for q in grid.q_points() {
        let g = poly.gradient(&q)?;
        let h = poly.hessian(&q)?;
        let g2: f64 = g.iter().map(|v| v * v).sum();
        let f2 = h.frobenius().powi(2);
        // ⟨x⟩^{2/3} = (1+|x|²)^{1/3}; ⟨x⟩^{1/2} = (1+|x|²)^{1/4}. Both
        // arguments are ≥ 1, comfortably inside the weight's domain.
        grad_w.push(log_weight_ext((1.0 + g2).powf(1.0 / 3.0)));
        hess_w.push(log_weight_ext((1.0 + f2).powf(0.25)));
    }
    Ok((grad_w, hess_w))
}

/// Spectral multiplier L(⟨D_q⟩^{2/3}) in the Dirichlet sine basis:
/// mode (k₁, …) carries frequency ξ_k = (k+1)π/(2L_q) per axis.
pub struct SineMultiplier {
    /// Dense symmetric orthogonal transform, nq × nq, row-major.
    s: Vec<f64>,
    /// L-weight per flat position-grid mode index.
    weight: Vec<f64>,
    nq: usize,
    d: usize,
    p_dim: usize,
}

impl SineMultiplier {
    pub fn new(grid: &DiscreteGrid) -> Self {
        let nq = grid.nq;
        let norm = (2.0 / (nq as f64 + 1.0)).sqrt();
        let mut s = vec![0.0; nq * nq];
        for k in 0..nq {
            for j in 0..nq {
                s[k * nq + j] = norm
                    * (std::f64::consts::PI * (k as f64 + 1.0) * (j as f64 + 1.0)
                        / (nq as f64 + 1.0))
                        .sin();
            }
        }
        let xi: Vec<f64> = (0..nq)
            .map(|k| (k as f64 + 1.0) * std::f64::consts::PI / (2.0 * grid.lq))
            .collect();
        let mut weight = Vec::with_capacity(grid.q_dim());
        match grid.d {
            1 => {
                for &x in &xi {
                    weight.push(log_weight_ext((1.0 + x * x).powf(1.0 / 3.0)));
                }
            }
            _ => {
                for &x1 in &xi {
                    for &x2 in &xi {
                        weight
                            .push(log_weight_ext((1.0 + x1 * x1 + x2 * x2).powf(1.0 / 3.0)));
                    }
                }
            }
        }
        SineMultiplier {
            s,
            weight,
            nq,
            d: grid.d,
            p_dim: grid.p_dim(),
        }
    }

    /// Apply the sine transform along one position axis of the tensor
    /// u[(q₁…q_d) slow, p fast].
    fn transform_axis(&self, u: &[f64], axis: usize) -> Vec<f64> {
        let nq = self.nq;
        let mut out = vec![0.0; u.len()];
        match (self.d, axis) {
            (1, _) => {
                // u is (nq × p_dim): out = S · U.
                let cols = self.p_dim;
                for k in 0..nq {
                    let srow = &self.s[k * nq..(k + 1) * nq];
                    let orow = &mut out[k * cols..(k + 1) * cols];
                    for (j, &sv) in srow.iter().enumerate() {
                        if sv == 0.0 {
                            continue;
                        }
                        let urow = &u[j * cols..(j + 1) * cols];
                        for (o, &uv) in orow.iter_mut().zip(urow) {
                            *o += sv * uv;
                        }
                    }
                }
            }
            (2, 0) => {
                // u is (nq × (nq·p_dim)): contract the first index.
                let cols = nq * self.p_dim;
                for k in 0..nq {
                    let srow = &self.s[k * nq..(k + 1) * nq];
                    for (j, &sv) in srow.iter().enumerate() {
                        let urow = &u[j * cols..(j + 1) * cols];
                        let orow = &mut out[k * cols..(k + 1) * cols];
                        for (o, &uv) in orow.iter_mut().zip(urow) {
                            *o += sv * uv;
                        }
                    }
                }
            }
            (2, _) => {
                // Contract the middle index, block by block.
                let cols = self.p_dim;
                for i in 0..nq {
                    let block = &u[i * nq * cols..(i + 1) * nq * cols];
                    let oblock = &mut out[i * nq * cols..(i + 1) * nq * cols];
                    for k in 0..nq {
                        let srow = &self.s[k * nq..(k + 1) * nq];
                        for (j, &sv) in srow.iter().enumerate() {
                            let urow = &block[j * cols..(j + 1) * cols];
                            let orow = &mut oblock[k * cols..(k + 1) * cols];
                            for (o, &uv) in orow.iter_mut().zip(urow) {
                                *o += sv * uv;
                            }
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        out
    }

    /// ‖Λ₄ u‖²: transform to the sine basis, weight, and sum (the
    /// transform is orthogonal, so no back-transform is needed for the
    /// norm).
    pub fn weighted_norm_sq(&self, u: &[f64]) -> f64 {
        let mut v = self.transform_axis(u, 0);
        if self.d == 2 {
            v = self.transform_axis(&v, 1);
        }
        let mut acc = 0.0;
        for (iq, &w) in self.weight.iter().enumerate() {
            let seg = &v[iq * self.p_dim..(iq + 1) * self.p_dim];
            let block: f64 = seg.iter().map(|x| x * x).sum();
            acc += w * w * block;
        }
        acc
    }
}

fn diag_block_norm_sq(weights_q: &[f64], u: &[f64], p_dim: usize) -> f64 {
    let mut acc = 0.0;
    for (iq, &w) in weights_q.iter().enumerate() {
        let seg = &u[iq * p_dim..(iq + 1) * p_dim];
        let block: f64 = seg.iter().map(|x| x * x).sum();
        acc += w * w * block;
    }
    acc
}

fn p_diag_norm_sq(weights_p: &[f64], u: &[f64], q_dim: usize) -> f64 {
    let p_dim = weights_p.len();
    let mut acc = 0.0;
    for iq in 0..q_dim {
        let seg = &u[iq * p_dim..(iq + 1) * p_dim];
        for (x, &w) in seg.iter().zip(weights_p) {
            acc += w * w * x * x;
        }
    }
    acc
}

/// The smallest c with rhs ≤ c·lhs + c²·n (positive root of the
/// quadratic), where lhs = ‖Ku‖², n = ‖u‖², rhs = Σ‖Λ_i u‖².
fn constant_for(lhs: f64, n: f64, rhs: f64) -> f64 {
    if rhs <= 0.0 {
        return 0.0;
    }
    (-lhs + (lhs * lhs + 4.0 * n * rhs).sqrt()) / (2.0 * n)
}

struct Multipliers {
    osc: Vec<f64>,
    grad: Vec<f64>,
    hess: Vec<f64>,
    sine: SineMultiplier,
    q_dim: usize,
    p_dim: usize,
}

impl Multipliers {
    fn norms_sq(&self, u: &[f64]) -> [f64; 4] {
        [
            p_diag_norm_sq(&self.osc, u, self.q_dim),
            diag_block_norm_sq(&self.grad, u, self.p_dim),
            diag_block_norm_sq(&self.hess, u, self.p_dim),
            self.sine.weighted_norm_sq(u),
        ]
    }
}

fn build_multipliers(poly: &Polynomial, grid: &DiscreteGrid) -> Result<Multipliers> {
    let (grad, hess) = potential_weights(poly, grid)?;
    Ok(Multipliers {
        osc: oscillator_weights(grid),
        grad,
        hess,
        sine: SineMultiplier::new(grid),
        q_dim: grid.q_dim(),
        p_dim: grid.p_dim(),
    })
}

/// Measure the empirical subellipticity constant for a potential on a
/// grid, over the structured family plus `random_trials` seeded vectors.
pub fn subelliptic_report(
    poly: &Polynomial,
    grid: &DiscreteGrid,
    random_trials: usize,
) -> Result<EstimateReport> {
    subelliptic_report_seeded(poly, grid, random_trials, SUBELLIPTIC_SEED)
}

/// Same as [`subelliptic_report`] with the random family reseeded.
pub fn subelliptic_report_seeded(
    poly: &Polynomial,
    grid: &DiscreteGrid,
    random_trials: usize,
    seed: u64,
) -> Result<EstimateReport> {
    if poly.dimension() != grid.d {
        return Err(Error::DimensionMismatch(format!(
            "potential dimension {} does not match grid dimension {}",
            poly.dimension(),
            grid.d
        )));
    }
    let op = assemble_kfp(poly, grid)?;
    let mults = build_multipliers(poly, grid)?;

    let mut family = structured_family(grid)?;
    family.extend(random_family(grid, random_trials, seed));
    let trials = family.len();

    let mut ratios: Vec<TestFunctionRatio> = Vec::with_capacity(trials);
    let mut worst_shares = [0.0f64; 4];
    let mut worst_c = 0.0f64;
    for tv in &family {
        let u = &tv.vector;
        let ku = op.matrix.matvec(u);
        let lhs: f64 = ku.iter().map(|x| x * x).sum();
        let n: f64 = u.iter().map(|x| x * x).sum();
        let parts = mults.norms_sq(u);
        let rhs: f64 = parts.iter().sum();
        let c = constant_for(lhs, n, rhs);
        if c > worst_c {
            worst_c = c;
            for (w, p) in worst_shares.iter_mut().zip(&parts) {
                *w = p / rhs.max(1e-300);
            }
        }
        ratios.push(TestFunctionRatio {
            label: tv.label.clone(),
            c,
        });
    }
    ratios.sort_by(|a, b| b.c.partial_cmp(&a.c).expect("finite constants"));
    ratios.truncate(8);

    Ok(EstimateReport {
        c: worst_c,
        multiplier_shares: worst_shares,
        ratios,
        grid: *grid,
        trials,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::testfn::{gaussian_q_profile, momentum_unit, product_state};

    /// Composite Simpson on [a, b] with an odd number of points.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, points: usize) -> f64 {
        assert!(points >= 3 && points % 2 == 1);
        let n = points - 1;
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn multipliers_agree_with_quadrature_oracles() {
        // V = q²/2, u = e^{−q²/4} ⊗ (ground momentum level). Every piece
        // has an independent closed-form or quadrature value.
        let poly = Polynomial::new(1, vec![(vec![2], 0.5)]).unwrap();
        let grid = DiscreteGrid::new(1, 10.0, 256, 6).unwrap();
        let g = gaussian_q_profile(&grid, &[0.0], 2.0f64.sqrt()).unwrap();
        let p0 = momentum_unit(&grid, &[0]).unwrap();
        let u = product_state(&grid, &g, &p0).unwrap();
        let op = assemble_kfp(&poly, &grid).unwrap();
        let mults = build_multipliers(&poly, &grid).unwrap();

        // Transport: K u = ½ u ⊗ … + (1/√2)(g′ + qg) ⊗ (level 1), and
        // with g = e^{−q²/4}, g′ + qg = (q/2)g, so ‖Ku‖²/‖u‖² =
        // 1/4 + (1/8)·⟨q²⟩ = 3/8 with ⟨q²⟩ = 1 under g² = e^{−q²/2}.
        let ku = op.matrix.matvec(&u);
        let lhs: f64 = ku.iter().map(|x| x * x).sum();
        assert!((lhs - 0.375).abs() < 5e-5, "transport ratio {lhs}");

        let [m_osc, m_grad, m_hess, m_sine] = mults.norms_sq(&u);
        // Oscillator: level 0 + d/2 → the weight is the constant L(1/2).
        let l_half = log_weight_ext(0.5);
        assert!((m_osc - l_half * l_half).abs() < 1e-12);
        // Hessian: ‖Hess‖_F ≡ 1 → constant weight L(2^{1/4}).
        let l_h = log_weight_ext(2.0f64.powf(0.25));
        assert!((m_hess - l_h * l_h).abs() < 1e-12);
        // Gradient: Simpson quadrature of L((1+q²)^{1/3})² g² / ∫g².
        let w = |q: f64| {
            let l = log_weight_ext((1.0 + q * q).powf(1.0 / 3.0));
            l * l * (-q * q / 2.0).exp()
        };
        let num = simpson(&w, -10.0, 10.0, 4001);
        let den = simpson(|q| (-q * q / 2.0).exp(), -10.0, 10.0, 4001);
        assert!(
            (m_grad - num / den).abs() < 1e-6 * (num / den),
            "gradient multiplier {m_grad} vs {}",
            num / den
        );
        // Frequency: sine coefficients of g by quadrature (independent of
        // the matrix transform), then the same weighted sum.
        let lq = 10.0f64;
        let nq = 256usize;
        let mut num4 = 0.0;
        let mut den4 = 0.0;
        for k in 0..nq {
            let xi = (k as f64 + 1.0) * std::f64::consts::PI / (2.0 * lq);
            let coeff = simpson(
                |x| {
                    (-x * x / 4.0).exp()
                        * ((k as f64 + 1.0) * std::f64::consts::PI * (x + lq) / (2.0 * lq)).sin()
                },
                -lq,
                lq,
                8193,
            );
            let l = log_weight_ext((1.0 + xi * xi).powf(1.0 / 3.0));
            num4 += l * l * coeff * coeff;
            den4 += coeff * coeff;
        }
        let oracle4 = num4 / den4;
        assert!(
            (m_sine - oracle4).abs() < 1e-5 * oracle4,
            "frequency multiplier {m_sine} vs {oracle4}"
        );
    }

    #[test]
    fn sine_transform_is_orthogonal() {
        let grid = DiscreteGrid::new(2, 3.0, 12, 4).unwrap();
        let sm = SineMultiplier::new(&grid);
        let fam = random_family(&grid, 3, 5);
        for tv in &fam {
            let mut v = sm.transform_axis(&tv.vector, 0);
            v = sm.transform_axis(&v, 1);
            let n1: f64 = tv.vector.iter().map(|x| x * x).sum();
            let n2: f64 = v.iter().map(|x| x * x).sum();
            assert!((n1 - n2).abs() < 1e-10 * n1);
            // Applying twice returns the original (the transform is
            // involutory).
            let mut back = sm.transform_axis(&v, 1);
            back = sm.transform_axis(&back, 0);
            for (a, b) in tv.vector.iter().zip(&back) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn estimate_is_stable_under_refinement() {
        let poly = Polynomial::new(1, vec![(vec![2], 0.5)]).unwrap();
        let coarse = subelliptic_report(
            &poly,
            &DiscreteGrid::new(1, 8.0, 32, 8).unwrap(),
            6,
        )
        .unwrap();
        let fine = subelliptic_report(
            &poly,
            &DiscreteGrid::new(1, 8.0, 48, 12).unwrap(),
            6,
        )
        .unwrap();
        assert!(coarse.c.is_finite() && coarse.c > 0.0);
        assert!(fine.c.is_finite() && fine.c > 0.0);
        assert!(
            fine.c <= 1.5 * coarse.c,
            "constant jumped {} -> {}",
            coarse.c,
            fine.c
        );
        println!("c(32x8) = {:.4}, c(48x12) = {:.4}", coarse.c, fine.c);
        let shares_sum: f64 = coarse.multiplier_shares.iter().sum();
        assert!((shares_sum - 1.0).abs() < 1e-9);
        assert!(coarse.ratios.len() <= 8);
        assert!(coarse.ratios[0].c == coarse.c);
    }

    #[test]
    fn reports_are_deterministic() {
        let poly = crate::poly::examples::example1();
        let grid = DiscreteGrid::new(2, 4.0, 12, 4).unwrap();
        let a = subelliptic_report(&poly, &grid, 4).unwrap();
        let b = subelliptic_report(&poly, &grid, 4).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}

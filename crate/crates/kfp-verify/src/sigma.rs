//! The coercive region Σ(κ) and its complement.
//!
//! A point q belongs to Σ(κ) when
//!
//! ```text
//! |∇V(q)|^{4/3}  ≥  κ · ( ‖Hess V(q)‖_F + R_geq(3,q)⁴ + 1 )
//! ```
//!
//! (ties count as members). On Σ(κ) the gradient term alone is strong
//! enough to control the operator; everything interesting happens on the
//! complement. This module answers, numerically, the questions one asks
//! about that complement:
//!
//! * which sampled points fall in it ([`scan_complement`]),
//! * does it look bounded or does it escape to infinity (radial rays plus
//!   an angular continuation tracker that follows thin complement channels
//!   — e.g. a parabola's neighborhood — far beyond the sampling box),
//! * do the two asymptotic growth conditions hold on it
//!   ([`check_assumption`]): negative-trace domination and decay of
//!   R_geq(3,q)⁴/‖Hess V(q)‖_F,
//! * how fast does the coercivity witness f_δ grow along rays
//!   ([`coercivity_witness`]),
//! * and what power law best fits a sampled radial profile
//!   ([`power_law_fit`]).
//!
//! Boundedness of a semialgebraic set is not decidable by sampling; the
//! verdicts here are explicitly labeled as probes with the scanned radius
//! recorded.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::poly::{
    analyze_point, compositions, sigma_parts, Polynomial, SigmaMembership,
};

/// One membership query result, with the point attached.
#[derive(Debug, Clone, Serialize)]
pub struct SigmaQuery {
    pub q: Vec<f64>,
    pub kappa: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub member: bool,
}

/// Decide whether q ∈ Σ(κ); ties (lhs = rhs) count as members.
pub fn sigma_membership(poly: &Polynomial, kappa: f64, q: &[f64]) -> Result<SigmaQuery> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidInput(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    let a = analyze_point(poly, q, &[kappa])?;
    let SigmaMembership {
        lhs, rhs, member, ..
    } = a.sigma[0];
    Ok(SigmaQuery {
        q: q.to_vec(),
        kappa,
        lhs,
        rhs,
        member,
    })
}

/// Precomputed derivative polynomials for fast repeated membership tests.
///
/// Differentiates V once up front (gradient, Hessian upper triangle, and
/// every nonzero derivative of order ≥ 3), then each query is a handful of
/// polynomial evaluations. Counts evaluations for reporting.
pub struct SigmaEvaluator<'a> {
    poly: &'a Polynomial,
    grad: Vec<Option<Polynomial>>,
    hess: Vec<(usize, usize, Option<Polynomial>)>,
    /// (order |α|, ∂^α V) for 3 ≤ |α| ≤ degree, nonzero derivatives only.
    high: Vec<(u32, Polynomial)>,
    evals: Cell<u64>,
}

impl<'a> SigmaEvaluator<'a> {
    pub fn new(poly: &'a Polynomial) -> Result<Self> {
        let d = poly.dimension();
        let mut grad = Vec::with_capacity(d);
        for k in 0..d {
            grad.push(poly.partial(k)?);
        }
        let mut hess = Vec::new();
        let mut alpha = vec![0u32; d];
        for i in 0..d {
            for j in i..d {
                alpha[i] += 1;
                alpha[j] += 1;
                hess.push((i, j, poly.derivative_poly(&alpha)?));
                alpha[i] = 0;
                alpha[j] = 0;
            }
        }
        let mut high = Vec::new();
        for n in 3..=poly.degree() {
            for a in compositions(n, d) {
                if let Some(p) = poly.derivative_poly(&a)? {
                    high.push((n, p));
                }
            }
        }
        Ok(SigmaEvaluator {
            poly,
            grad,
            hess,
            high,
            evals: Cell::new(0),
        })
    }

    pub fn dimension(&self) -> usize {
        self.poly.dimension()
    }

    pub fn evaluations(&self) -> u64 {
        self.evals.get()
    }

    fn bump(&self) {
        self.evals.set(self.evals.get() + 1);
    }

    pub fn gradient_norm(&self, q: &[f64]) -> f64 {
        let mut s = 0.0;
        for g in &self.grad {
            if let Some(p) = g {
                let v = p.eval(q).expect("dimension checked at construction");
                s += v * v;
            }
        }
        s.sqrt()
    }

    pub fn hessian_frobenius(&self, q: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, j, p) in &self.hess {
            if let Some(p) = p {
                let v = p.eval(q).expect("dimension checked at construction");
                // Off-diagonal entries appear twice in the Frobenius sum.
                s += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        s.sqrt()
    }

    /// R_geq(3, q): the order-≥3 derivative indicator.
    pub fn r3(&self, q: &[f64]) -> f64 {
        let mut s = 0.0;
        for (n, p) in &self.high {
            let v = p.eval(q).expect("dimension checked at construction");
            if v != 0.0 {
                s += v.abs().powf(1.0 / *n as f64);
            }
        }
        s
    }

    /// lhs − rhs of the membership inequality; negative means complement.
    pub fn margin(&self, q: &[f64], kappa: f64) -> f64 {
        self.bump();
        let (lhs, rhs) = sigma_parts(
            self.gradient_norm(q),
            self.hessian_frobenius(q),
            self.r3(q),
            kappa,
        );
        lhs - rhs
    }

    pub fn is_member(&self, q: &[f64], kappa: f64) -> bool {
        self.margin(q, kappa) >= 0.0
    }

    /// The decay ratio R_geq(3,q)⁴ / ‖Hess V(q)‖_F (∞ where the Hessian vanishes).
    pub fn indicator_ratio(&self, q: &[f64]) -> f64 {
        self.bump();
        let hf = self.hessian_frobenius(q);
        let r3 = self.r3(q);
        if hf == 0.0 {
            f64::INFINITY
        } else {
            r3.powi(4) / hf
        }
    }
}

/// Scan-complement configuration. `Default` gives a 2-d friendly setup:
/// box radius 20, 64 grid points per axis, 8 rays, continuation cap 1e5.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Half-width of the sampling box [−box_radius, box_radius]^d.
    pub box_radius: f64,
    /// Grid resolution per axis for the in-box complement sample (d ≤ 3).
    pub grid_per_axis: usize,
    /// Number of deterministic ray directions for the radial probe.
    pub radial_probes: usize,
    /// Largest radius the angular continuation tracker may reach.
    pub track_radius_cap: f64,
    /// Geometric step between consecutive tracked radii (> 1).
    pub radial_step: f64,
    /// Angles per full turn in the coarse complement sweep (d = 2).
    pub coarse_angles: usize,
    /// Maximum simultaneous continuation tracks.
    pub max_tracks: usize,
    /// Collect in-box grid complement points (must be false for d > 3).
    pub collect_grid: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            box_radius: 20.0,
            grid_per_axis: 64,
            radial_probes: 8,
            track_radius_cap: 1e5,
            radial_step: 1.05,
            coarse_angles: 256,
            max_tracks: 64,
            collect_grid: true,
        }
    }
}

/// A complement point seen beyond the sampling box, with its membership
/// margin and decay ratio at that point.
#[derive(Debug, Clone, Serialize)]
pub struct FarSample {
    pub q: Vec<f64>,
    pub radius: f64,
    pub margin: f64,
    /// R_geq(3,q)⁴ / ‖Hess V(q)‖_F at the sample.
    pub ratio: f64,
}

/// Where the scan found evidence that the complement is unbounded.
#[derive(Debug, Clone, Serialize)]
pub struct UnboundedWitness {
    /// A continuation track survived to the radius cap: its final point.
    pub point: Vec<f64>,
    pub radius: f64,
}

/// Boundedness verdict. Sampling cannot certify boundedness, so the
/// negative verdict is a probe: "no complement found beyond
/// `last_complement_radius` up to `scanned_to`".
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind")]
pub enum BoundednessVerdict {
    BoundedProbe {
        scanned_to: f64,
        last_complement_radius: Option<f64>,
    },
    Unbounded {
        witness: UnboundedWitness,
    },
}

impl BoundednessVerdict {
    pub fn is_bounded_probe(&self) -> bool {
        matches!(self, BoundednessVerdict::BoundedProbe { .. })
    }
}

/// Per-ray radial probe outcome.
#[derive(Debug, Clone, Serialize)]
pub struct RayProbe {
    pub direction: Vec<f64>,
    /// Complement hits at the probed radii between box_radius/2 and 4·box_radius.
    pub dirty_radii: Vec<f64>,
    /// True when every probed radius on this ray was in the complement.
    pub dirty_at_all_radii: bool,
}

/// Result of [`scan_complement`].
#[derive(Debug, Clone, Serialize)]
pub struct ComplementScan {
    pub kappa: f64,
    pub config: ScanConfig,
    /// Grid points inside the box that fail membership (empty when
    /// `collect_grid` is off).
    pub grid_complement: Vec<Vec<f64>>,
    pub rays: Vec<RayProbe>,
    /// Complement points recorded beyond the box by rays and tracks,
    /// sorted by radius.
    pub far_samples: Vec<FarSample>,
    pub verdict: BoundednessVerdict,
    /// Number of membership evaluations spent.
    pub samples_used: u64,
}

/// Deterministic ray directions: ±1 in d=1, uniform angles in d=2, a
/// Fibonacci sphere in d=3.
pub fn ray_directions(d: usize, n: usize) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one ray".into()));
    }
    match d {
        1 => Ok(vec![vec![1.0], vec![-1.0]]),
        2 => Ok((0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()),
        3 => {
            // Fibonacci sphere: evenly distributed deterministic points.
            let phi = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
            Ok((0..n)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = phi * k as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect())
        }
        _ => Err(Error::InvalidInput(format!(
            "ray directions are defined for d ≤ 3, got d = {d}"
        ))),
    }
}

/// Golden-section minimizer for a scalar function on [a, b].
fn golden_min(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[derive(Debug, Clone)]
struct Track {
    theta: f64,
    prev_theta: Option<f64>,
    /// Consecutive radii at which the channel was not re-found (die at 2).
    misses: u8,
}

/// Find a negative-margin angle near the predicted channel center.
///
/// The complement channel can be orders of magnitude narrower than the
/// prediction window (a parabola neighborhood at radius 10⁵ subtends
/// microradians), and the window may contain several channels separated by
/// local maxima, so a single golden-section search is not reliable. This
/// runs centered scans at geometrically shrinking scales — every scan
/// samples the prediction itself — and takes the negative sample *nearest
/// to the prediction* (not the most negative one, which would let a track
/// jump onto a neighboring channel), refined by golden section at that
/// scale. The widest scale is tried last, as a recovery fallback.
fn locate_channel(
    mut margin: impl FnMut(f64) -> f64,
    pred: f64,
    base_w: f64,
) -> Option<(f64, f64)> {
    for j in [0i32, 1, 2, 3, 4, 5, 6, 7, -1] {
        let s = base_w / 4.0f64.powi(j);
        let mut best: Option<(f64, f64)> = None;
        for k in -8i32..=8 {
            let x = pred + s * k as f64 / 8.0;
            let m = margin(x);
            if m < 0.0
                && best.map_or(true, |(bx, _)| (x - pred).abs() < (bx - pred).abs())
            {
                best = Some((x, m));
            }
        }
        if let Some((x0, m0)) = best {
            let (x, m) = golden_min(&mut margin, x0 - s / 8.0, x0 + s / 8.0, 40);
            return Some(if m < m0 { (x, m) } else { (x0, m0) });
        }
    }
    None
}

/// Sample the complement of Σ(κ) and probe its boundedness.
///
/// Three phases:
/// 1. **Grid** (d ≤ 3): every grid point of the box failing membership is
///    collected.
/// 2. **Rays**: deterministic directions, geometric radii from
///    box_radius/2 to 4·box_radius; a ray that is dirty at every radius is
///    strong escape evidence and is reported per ray.
/// 3. **Continuation tracker** (d ≤ 2): walks radii geometrically up to
///    `track_radius_cap`, maintaining the set of dirty angular windows: a
///    coarse sweep spawns tracks, each track re-locates the local margin
///    minimum at the next radius by extrapolating its angle and running a
///    golden-section search. This follows complement channels that curve
///    (a parabola neighborhood) or become far narrower than any fixed
///    angular grid.
///
/// Verdict: when the tracker runs (d ≤ 2), the complement is declared
/// unbounded exactly when a track survives to the cap — rays alone stop at
/// 4·box_radius, where thin channels that eventually close (e.g. an axis
/// that rejoins Σ(κ) at radius ~10³) would be misread as escapes. For
/// d = 3 the ray evidence decides.
pub fn scan_complement(
    poly: &Polynomial,
    kappa: f64,
    config: &ScanConfig,
) -> Result<ComplementScan> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidInput(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    if !(config.box_radius > 0.0) {
        return Err(Error::InvalidInput("box_radius must be positive".into()));
    }
    if !(config.radial_step > 1.0) {
        return Err(Error::InvalidInput("radial_step must exceed 1".into()));
    }
    if config.track_radius_cap < 4.0 * config.box_radius {
        return Err(Error::InvalidInput(
            "track_radius_cap must reach at least 4×box_radius".into(),
        ));
    }
    let d = poly.dimension();
    let ev = SigmaEvaluator::new(poly)?;

    // Phase 1: grid.
    let mut grid_complement = Vec::new();
    if config.collect_grid {
        if d > 3 {
            return Err(Error::InvalidInput(
                "grid scanning is limited to d ≤ 3; disable collect_grid for higher dimensions"
                    .into(),
            ));
        }
        if config.grid_per_axis < 16 {
            return Err(Error::InvalidInput(format!(
                "grid_per_axis must be ≥ 16, got {}",
                config.grid_per_axis
            )));
        }
        let m = config.grid_per_axis;
        let mut idx = vec![0usize; d];
        loop {
            let q: Vec<f64> = idx
                .iter()
                .map(|&i| {
                    -config.box_radius
                        + 2.0 * config.box_radius * i as f64 / (m as f64 - 1.0)
                })
                .collect();
            if !ev.is_member(&q, kappa) {
                grid_complement.push(q);
            }
            let mut k = 0;
            loop {
                if k == d {
                    break;
                }
                idx[k] += 1;
                if idx[k] < m {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == d {
                break;
            }
        }
    }

    // Phase 2: rays.
    let dirs = ray_directions(d, config.radial_probes)?;
    let ray_radii: Vec<f64> = geometric_radii(config.box_radius / 2.0, 4.0 * config.box_radius, 25);
    let mut rays = Vec::new();
    let mut far_samples: Vec<FarSample> = Vec::new();
    for dir in &dirs {
        let mut dirty = Vec::new();
        for &r in &ray_radii {
            let q: Vec<f64> = dir.iter().map(|u| u * r).collect();
            let m = ev.margin(&q, kappa);
            if m < 0.0 {
                dirty.push(r);
                if r > config.box_radius {
                    far_samples.push(FarSample {
                        ratio: ev.indicator_ratio(&q),
                        q,
                        radius: r,
                        margin: m,
                    });
                }
            }
        }
        rays.push(RayProbe {
            direction: dir.clone(),
            dirty_at_all_radii: dirty.len() == ray_radii.len(),
            dirty_radii: dirty,
        });
    }

    // Phase 3: angular continuation (d ≤ 2).
    let mut last_complement_radius: Option<f64> = grid_complement
        .iter()
        .map(|q| norm2(q))
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
    let mut witness: Option<UnboundedWitness> = None;
    let mut scanned_to = 4.0 * config.box_radius;

    if d <= 2 {
        let track_radii = geometric_schedule(
            config.box_radius / 2.0,
            config.track_radius_cap,
            config.radial_step,
        );
        scanned_to = *track_radii.last().unwrap();
        if d == 1 {
            // Two fixed directions; a "track" is a direction that has been
            // dirty at every radius so far (once it clears, the escape
            // evidence along that direction is gone).
            for sgn in [1.0f64, -1.0] {
                let mut alive = true;
                for &r in &track_radii {
                    let q = vec![sgn * r];
                    let m = ev.margin(&q, kappa);
                    if m < 0.0 {
                        last_complement_radius =
                            Some(last_complement_radius.map_or(r, |a| a.max(r)));
                        if r > config.box_radius {
                            far_samples.push(FarSample {
                                ratio: ev.indicator_ratio(&q),
                                q: q.clone(),
                                radius: r,
                                margin: m,
                            });
                        }
                    } else {
                        alive = false;
                    }
                    if alive && r == *track_radii.last().unwrap() {
                        witness = Some(UnboundedWitness {
                            point: q.clone(),
                            radius: r,
                        });
                    }
                }
            }
        } else {
            let tau = 2.0 * std::f64::consts::PI;
            let coarse_step = tau / config.coarse_angles as f64;
            let margin_at = |rho: f64, theta: f64| -> f64 {
                ev.margin(&[rho * theta.cos(), rho * theta.sin()], kappa)
            };
            let mut tracks: Vec<Track> = Vec::new();
            for &rho in &track_radii {
                // Coarse sweep: spawn tracks on dirty angles not already covered.
                let mut dirty_angles = Vec::new();
                for a in 0..config.coarse_angles {
                    let theta = a as f64 * coarse_step;
                    if margin_at(rho, theta) < 0.0 {
                        dirty_angles.push(theta);
                    }
                }
                for &theta in &dirty_angles {
                    let covered = tracks
                        .iter()
                        .any(|t| angle_dist(t.theta, theta) < 2.0 * coarse_step);
                    if !covered && tracks.len() < config.max_tracks {
                        if let Some((best, _)) =
                            locate_channel(|t| margin_at(rho, t), theta, coarse_step)
                        {
                            tracks.push(Track {
                                theta: normalize_angle(best),
                                prev_theta: None,
                                misses: 0,
                            });
                        }
                    }
                }
                // Advance existing tracks to this radius.
                let mut survivors: Vec<Track> = Vec::new();
                for tr in &tracks {
                    let step = tr.prev_theta.map_or(0.0, |p| tr.theta - p);
                    let pred = tr.theta + step;
                    let base_w = (4.0 * step.abs()).max(1e-4).max(coarse_step);
                    let found = locate_channel(|t| margin_at(rho, t), pred, base_w)
                        // Recovery: retry without the extrapolated step, in
                        // case the last advance produced a spurious jump.
                        .or_else(|| locate_channel(|t| margin_at(rho, t), tr.theta, base_w));
                    if let Some((best, m)) = found {
                        let q = vec![rho * best.cos(), rho * best.sin()];
                        last_complement_radius =
                            Some(last_complement_radius.map_or(rho, |a| a.max(rho)));
                        if rho > config.box_radius {
                            far_samples.push(FarSample {
                                ratio: ev.indicator_ratio(&q),
                                q,
                                radius: rho,
                                margin: m,
                            });
                        }
                        survivors.push(Track {
                            theta: normalize_angle(best),
                            prev_theta: Some(normalize_angle(tr.theta)),
                            misses: 0,
                        });
                    } else if tr.misses == 0 {
                        // Grace period: hold position for one radius so a
                        // single failed search does not kill the track.
                        survivors.push(Track {
                            theta: tr.theta,
                            prev_theta: Some(tr.theta),
                            misses: 1,
                        });
                    }
                }
                // Deduplicate tracks that refined onto the same channel.
                // The tolerance is tiny on purpose: distinct channels may
                // pass arbitrarily close in angle (mirror channels straddling
                // an axis at large radius) and must keep separate tracks.
                let dedup_tol = 1e-6;
                survivors.sort_by(|a, b| a.theta.partial_cmp(&b.theta).unwrap());
                let mut merged: Vec<Track> = Vec::new();
                for t in survivors {
                    if let Some(last) = merged.last() {
                        if angle_dist(last.theta, t.theta) < dedup_tol {
                            continue;
                        }
                    }
                    merged.push(t);
                }
                // Circular wrap: first and last may be the same channel.
                if merged.len() >= 2 {
                    let first = merged.first().unwrap().theta;
                    let last = merged.last().unwrap().theta;
                    if angle_dist(first, last) < dedup_tol {
                        merged.pop();
                    }
                }
                tracks = merged;
                if rho == *track_radii.last().unwrap() {
                    // Witness only from a track that re-found the channel at
                    // the final radius (not one merely holding on grace).
                    if let Some(t) = tracks.iter().find(|t| t.misses == 0) {
                        witness = Some(UnboundedWitness {
                            point: vec![rho * t.theta.cos(), rho * t.theta.sin()],
                            radius: rho,
                        });
                    }
                }
            }
        }
    } else {
        // d = 3: the ray evidence decides.
        if let Some(rp) = rays.iter().find(|r| r.dirty_at_all_radii) {
            let r = *rp.dirty_radii.last().unwrap();
            witness = Some(UnboundedWitness {
                point: rp.direction.iter().map(|u| u * r).collect(),
                radius: r,
            });
        }
        for rp in &rays {
            if let Some(&r) = rp.dirty_radii.last() {
                last_complement_radius = Some(last_complement_radius.map_or(r, |a| a.max(r)));
            }
        }
    }

    far_samples.sort_by(|a, b| a.radius.partial_cmp(&b.radius).unwrap());
    let verdict = match witness {
        Some(w) => BoundednessVerdict::Unbounded { witness: w },
        None => BoundednessVerdict::BoundedProbe {
            scanned_to,
            last_complement_radius,
        },
    };
    Ok(ComplementScan {
        kappa,
        config: config.clone(),
        grid_complement,
        rays,
        far_samples,
        verdict,
        samples_used: ev.evaluations(),
    })
}

fn normalize_angle(t: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    t.rem_euclid(tau)
}

/// Circular distance between two angles.
fn angle_dist(a: f64, b: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let d = (a - b).rem_euclid(tau);
    d.min(tau - d)
}

/// `count` geometric radii from lo to hi inclusive.
fn geometric_radii(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let ratio = (hi / lo).powf(1.0 / (count as f64 - 1.0));
    (0..count).map(|k| lo * ratio.powi(k as i32)).collect()
}

/// Radii lo, lo·step, lo·step², … capped at hi (hi always included last).
fn geometric_schedule(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = lo;
    while r < hi {
        out.push(r);
        r *= step;
    }
    out.push(hi);
    out
}

/// Least-squares power-law fit f(ρ) ≈ A·ρ^a.
#[derive(Debug, Clone, Serialize)]
pub struct PowerLawFit {
    pub amplitude: f64,
    pub exponent: f64,
    /// RMS of the log-log residuals.
    pub residual: f64,
    pub sample_range: (f64, f64),
    pub samples_used: usize,
}

/// Ordinary least squares on (log ρ, log f). Requires ≥ 5 samples with
/// strictly increasing positive ρ and positive f.
pub fn power_law_fit(samples: &[(f64, f64)]) -> Result<PowerLawFit> {
    if samples.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "power-law fit needs at least 5 samples, got {}",
            samples.len()
        )));
    }
    for (i, &(rho, f)) in samples.iter().enumerate() {
        if !(rho > 0.0) || !(f > 0.0) || !rho.is_finite() || !f.is_finite() {
            return Err(Error::InvalidInput(format!(
                "sample {i} = ({rho}, {f}) must be positive and finite"
            )));
        }
        if i > 0 && rho <= samples[i - 1].0 {
            return Err(Error::InvalidInput(
                "sample abscissas must be strictly increasing".into(),
            ));
        }
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|&(r, _)| r.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|&(_, f)| f.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let e = y - (slope * x + intercept);
        ss += e * e;
    }
    Ok(PowerLawFit {
        amplitude: intercept.exp(),
        exponent: slope,
        residual: (ss / n).sqrt(),
        sample_range: (samples[0].0, samples[samples.len() - 1].0),
        samples_used: samples.len(),
    })
}

/// Trace-domination condition: at every sampled complement point with
/// |q| ≥ c1, the negative-eigenvalue trace dominates (c1·Tr− ≥ Tr+).
#[derive(Debug, Clone, Serialize)]
pub struct TraceDominationCheck {
    pub pass: bool,
    /// Largest Tr+/Tr− seen (∞ when Tr− = 0 < Tr+; 0 when no points).
    pub worst_ratio: f64,
    pub worst_point: Option<Vec<f64>>,
    pub points_checked: usize,
}

/// Indicator-decay condition: R_geq(3,q)⁴/‖Hess V(q)‖_F → 0 along the
/// complement, verified by a power-law fit over the outermost two decades
/// of complement samples plus a decade-max halving check.
#[derive(Debug, Clone, Serialize)]
pub struct IndicatorDecayCheck {
    pub pass: bool,
    /// True when the complement scan found nothing to fit (bounded case).
    pub vacuous: bool,
    pub fit: Option<PowerLawFit>,
    /// Max ratio over the innermost decade of the sampled radius range.
    pub inner_decade_max: f64,
    /// Max ratio over the outermost decade.
    pub outer_decade_max: f64,
}

/// Empirical verdict on the two asymptotic growth conditions.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub kappa: f64,
    pub c1: f64,
    pub trace_domination: TraceDominationCheck,
    pub indicator_decay: IndicatorDecayCheck,
    pub complement_bounded: bool,
    pub samples_used: u64,
}

/// Check the asymptotic growth conditions on the complement of Σ(κ).
///
/// * Trace domination: c1·Tr−(q) ≥ Tr+(q) at every sampled complement
///   point with |q| ≥ c1.
/// * Indicator decay: fit R_geq(3,q)⁴/‖Hess V(q)‖_F against |q| on the
///   far complement samples; pass requires fitted exponent < −0.05 **and**
///   the outermost-decade max below half the innermost-decade max. The fit
///   window is the outermost two decades of sampled radii: the ratio is an
///   asymptotic quantity and its pre-asymptotic transient at box scale
///   (additive lower-order terms in the indicator) would otherwise bias
///   the slope.
///
/// A bounded complement makes the decay condition vacuous; if the scan
/// finds no complement points at all, both conditions pass vacuously.
pub fn check_assumption(
    poly: &Polynomial,
    kappa: f64,
    c1: f64,
    config: &ScanConfig,
) -> Result<AssumptionReport> {
    if !(kappa >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "kappa must be ≥ 1, got {kappa}"
        )));
    }
    if !(c1 >= 1.0) {
        return Err(Error::InvalidInput(format!("c1 must be ≥ 1, got {c1}")));
    }
    let scan = scan_complement(poly, kappa, config)?;
    let complement_bounded = scan.verdict.is_bounded_probe();

    // Trace domination over every sampled complement point with |q| ≥ c1.
    let mut worst_ratio = 0.0f64;
    let mut worst_point = None;
    let mut points_checked = 0usize;
    let mut pass14 = true;
    {
        let mut check = |q: &[f64]| -> Result<()> {
            if norm2(q) < c1 {
                return Ok(());
            }
            let a = analyze_point(poly, q, &[])?;
            points_checked += 1;
            let ratio = if a.tr_minus > 0.0 {
                a.tr_plus / a.tr_minus
            } else if a.tr_plus > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            if ratio > worst_ratio {
                worst_ratio = ratio;
                worst_point = Some(q.to_vec());
            }
            if !(c1 * a.tr_minus >= a.tr_plus) {
                pass14 = false;
            }
            Ok(())
        };
        for q in &scan.grid_complement {
            check(q)?;
        }
        for s in &scan.far_samples {
            check(&s.q)?;
        }
    }
    if points_checked == 0 {
        pass14 = true;
    }
    let trace_domination = TraceDominationCheck {
        pass: pass14,
        worst_ratio,
        worst_point,
        points_checked,
    };

    // Indicator decay along the far complement samples.
    let indicator_decay = if complement_bounded {
        IndicatorDecayCheck {
            pass: true,
            vacuous: true,
            fit: None,
            inner_decade_max: 0.0,
            outer_decade_max: 0.0,
        }
    } else {
        // One representative ratio per radius: the max over samples there.
        let mut per_radius: Vec<(f64, f64)> = Vec::new();
        for s in &scan.far_samples {
            if !s.ratio.is_finite() || s.ratio <= 0.0 {
                continue;
            }
            match per_radius.last_mut() {
                Some(last) if (last.0 - s.radius).abs() < 1e-9 * s.radius => {
                    last.1 = last.1.max(s.ratio);
                }
                _ => per_radius.push((s.radius, s.ratio)),
            }
        }
        if per_radius.len() < 5 {
            IndicatorDecayCheck {
                pass: false,
                vacuous: false,
                fit: None,
                inner_decade_max: 0.0,
                outer_decade_max: 0.0,
            }
        } else {
            let rho_min = per_radius.first().unwrap().0;
            let rho_max = per_radius.last().unwrap().0;
            let inner_decade_max = per_radius
                .iter()
                .filter(|(r, _)| *r <= 10.0 * rho_min)
                .map(|&(_, f)| f)
                .fold(0.0f64, f64::max);
            let outer_decade_max = per_radius
                .iter()
                .filter(|(r, _)| *r >= rho_max / 10.0)
                .map(|&(_, f)| f)
                .fold(0.0f64, f64::max);
            let window: Vec<(f64, f64)> = per_radius
                .iter()
                .filter(|(r, _)| *r >= rho_max / 100.0)
                .copied()
                .collect();
            let fit = power_law_fit(&window)?;
            let pass = fit.exponent < -0.05 && outer_decade_max < 0.5 * inner_decade_max;
            IndicatorDecayCheck {
                pass,
                vacuous: false,
                fit: Some(fit),
                inner_decade_max,
                outer_decade_max,
            }
        }
    };

    Ok(AssumptionReport {
        kappa,
        c1,
        trace_domination,
        indicator_decay,
        complement_bounded,
        samples_used: scan.samples_used,
    })
}

/// Growth onset for one requested threshold: the smallest tested radius
/// from which min_over_directions stays ≥ threshold.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdOnset {
    pub threshold: f64,
    pub radius: Option<f64>,
}

/// Radial growth report for the coercivity witness
/// f_δ(q) = |∇V(q)|^{4(1−δ)/3} + ‖Hess V(q)‖_F^{1−δ}.
#[derive(Debug, Clone, Serialize)]
pub struct CoercivityReport {
    pub delta: f64,
    pub radii: Vec<f64>,
    /// min over ray directions of f_δ at each radius.
    pub min_over_directions: Vec<f64>,
    /// Weak monotonicity of the min over the last quarter of tested radii.
    pub tail_nondecreasing: bool,
    /// min at the largest radius strictly exceeds min at the smallest.
    pub grew: bool,
    pub threshold_onsets: Vec<ThresholdOnset>,
}

/// Evaluate the coercivity witness f_δ along deterministic rays.
///
/// The witness bounds the potential's contribution to resolvent
/// compactness: if min_directions f_δ → ∞ along rays, the sampled
/// evidence supports coercive growth at rate read off the report.
pub fn coercivity_witness(
    poly: &Polynomial,
    delta: f64,
    n_rays: usize,
    radii: &[f64],
    thresholds: &[f64],
) -> Result<CoercivityReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInput(format!(
            "delta must lie in (0,1), got {delta}"
        )));
    }
    if radii.is_empty() {
        return Err(Error::InvalidInput("empty radii schedule".into()));
    }
    for (i, &r) in radii.iter().enumerate() {
        if !(r > 0.0) {
            return Err(Error::InvalidInput(format!("radius {r} must be positive")));
        }
        if i > 0 && r <= radii[i - 1] {
            return Err(Error::InvalidInput(
                "radii schedule must be strictly increasing".into(),
            ));
        }
    }
    let ev = SigmaEvaluator::new(poly)?;
    let dirs = ray_directions(poly.dimension(), n_rays)?;
    let g_exp = 4.0 * (1.0 - delta) / 3.0;
    let h_exp = 1.0 - delta;
    let mut min_over_directions = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut best = f64::INFINITY;
        for dir in &dirs {
            let q: Vec<f64> = dir.iter().map(|u| u * r).collect();
            let f = ev.gradient_norm(&q).powf(g_exp) + ev.hessian_frobenius(&q).powf(h_exp);
            best = best.min(f);
        }
        min_over_directions.push(best);
    }
    let tail_start = radii.len() - (radii.len() / 4).max(1);
    let tail_nondecreasing = min_over_directions[tail_start..]
        .windows(2)
        .all(|w| w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0));
    let first = min_over_directions[0];
    let last = *min_over_directions.last().unwrap();
    let grew = last > first * (1.0 + 1e-9) + 1e-12;
    let mut threshold_onsets = Vec::new();
    for &a in thresholds {
        // Smallest radius from which the min stays ≥ a.
        let mut onset = None;
        for i in (0..radii.len()).rev() {
            if min_over_directions[i] >= a {
                onset = Some(radii[i]);
            } else {
                break;
            }
        }
        threshold_onsets.push(ThresholdOnset {
            threshold: a,
            radius: onset,
        });
    }
    Ok(CoercivityReport {
        delta,
        radii: radii.to_vec(),
        min_over_directions,
        tail_nondecreasing,
        grew,
        threshold_onsets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::examples::{example1, example3};

    #[test]
    fn membership_examples() {
        let p = example1();
        // On the q2-axis the gradient vanishes: never a member.
        assert!(!sigma_membership(&p, 800.0, &[0.0, 5.0]).unwrap().member);
        // Far out along the diagonal the gradient term wins.
        assert!(sigma_membership(&p, 800.0, &[100.0, 100.0]).unwrap().member);
        // Any point with nonzero gradient is a member for small enough κ.
        let q = [1.0, 1.0];
        assert!(sigma_membership(&p, 1e-9, &q).unwrap().member);
    }

    #[test]
    fn membership_monotone_in_kappa() {
        let p = example3(0.5);
        let pts = [[3.0, 1.0], [5.0, 20.0], [0.5, -2.0], [8.0, 8.0]];
        let kappas = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
        for q in pts {
            let mut prev_member = true;
            for &k in &kappas {
                let m = sigma_membership(&p, k, &q).unwrap().member;
                // member at larger κ implies member at every smaller κ,
                // i.e. membership can only switch off as κ grows.
                assert!(
                    prev_member || !m,
                    "membership regained at larger κ={k} for q={q:?}"
                );
                prev_member = m;
            }
        }
    }

    #[test]
    fn diagonal_membership_scaling() {
        // Along (t,t) the lhs grows like t⁴ against t² and t^{4/3} on the
        // rhs, so membership holds from some T(κ) on; double t up to 16T.
        let p = example1();
        let kappa = 800.0;
        let mut t = 1.0f64;
        while !sigma_membership(&p, kappa, &[t, t]).unwrap().member {
            t *= 2.0;
            assert!(t < 1e7, "no membership onset found along the diagonal");
        }
        for mult in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let s = t * mult;
            assert!(
                sigma_membership(&p, kappa, &[s, s]).unwrap().member,
                "membership lost at t={s}"
            );
        }
    }

    #[test]
    fn evaluator_matches_analyze_point() {
        let p = example3(-0.3);
        let ev = SigmaEvaluator::new(&p).unwrap();
        for q in [[1.2, -0.7], [4.0, 16.2], [-2.0, 3.9]] {
            let a = analyze_point(&p, &q, &[]).unwrap();
            assert!((ev.gradient_norm(&q) - a.gradient_norm).abs() < 1e-10);
            assert!((ev.hessian_frobenius(&q) - a.hessian_frobenius).abs() < 1e-10);
            assert!((ev.r3(&q) - a.r_geq_at(3)).abs() < 1e-10);
        }
    }

    #[test]
    fn power_law_exact_and_constant() {
        let s: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|&r: &f64| (r, 5.0 * r.powi(-2)))
            .collect();
        let fit = power_law_fit(&s).unwrap();
        assert!((fit.amplitude - 5.0).abs() < 1e-10, "A = {}", fit.amplitude);
        assert!((fit.exponent + 2.0).abs() < 1e-10, "a = {}", fit.exponent);
        assert!(fit.residual < 1e-12);

        let c: Vec<(f64, f64)> = (1..=6).map(|k| (k as f64, 3.25)).collect();
        let fit = power_law_fit(&c).unwrap();
        assert!((fit.amplitude - 3.25).abs() < 1e-10);
        assert!(fit.exponent.abs() < 1e-12);
    }

    #[test]
    fn power_law_with_subleading_term() {
        // f(ρ) = ρ^{−2/3}(1 + 1/ρ) on log-spaced ρ ∈ [10, 10⁴].
        let n = 40;
        let samples: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let rho = 10.0f64 * 1000.0f64.powf(k as f64 / (n - 1) as f64);
                (rho, rho.powf(-2.0 / 3.0) * (1.0 + 1.0 / rho))
            })
            .collect();
        let fit = power_law_fit(&samples).unwrap();
        assert!(
            (fit.exponent + 2.0 / 3.0).abs() < 0.05,
            "exponent {} should be −2/3 ± 0.05",
            fit.exponent
        );
    }

    #[test]
    fn power_law_rejects_bad_input() {
        assert!(power_law_fit(&[(1.0, 1.0); 4]).is_err());
        assert!(power_law_fit(&[(1.0, 1.0), (2.0, 1.0), (2.0, 1.0), (3.0, 1.0), (4.0, 1.0)]).is_err());
        assert!(power_law_fit(&[(1.0, 1.0), (2.0, -1.0), (3.0, 1.0), (4.0, 1.0), (5.0, 1.0)]).is_err());
    }

    #[test]
    fn coercivity_linear_potential_reports_non_growth() {
        let p = Polynomial::new(1, vec![(vec![1], 1.0)]).unwrap();
        let radii: Vec<f64> = (1..=20).map(|k| k as f64).collect();
        let rep = coercivity_witness(&p, 0.5, 2, &radii, &[2.0]).unwrap();
        for &m in &rep.min_over_directions {
            assert!((m - 1.0).abs() < 1e-12, "f_δ should be constant 1, got {m}");
        }
        assert!(!rep.grew);
        assert!(rep.threshold_onsets[0].radius.is_none());
    }

    #[test]
    fn coercivity_quadratic_grows_like_gradient_power() {
        let p = Polynomial::new(2, vec![(vec![2, 0], 1.0), (vec![0, 2], 1.0)]).unwrap();
        let radii: Vec<f64> = (1..=30).map(|k| k as f64).collect();
        let rep = coercivity_witness(&p, 0.5, 16, &radii, &[]).unwrap();
        for (i, &r) in radii.iter().enumerate() {
            let lower = (2.0 * r).powf(2.0 / 3.0);
            assert!(
                rep.min_over_directions[i] >= lower - 1e-9,
                "f_δ({r}) = {} below |2q|^{{2/3}} = {lower}",
                rep.min_over_directions[i]
            );
        }
        assert!(rep.grew && rep.tail_nondecreasing);
    }

    #[test]
    fn coercivity_example1_grows_via_hessian_on_axes() {
        // On the axes ∇V = 0 and ‖Hess‖_F = 2·max(q1²,q2²)·(axes), so
        // f_{1/2} = ‖Hess‖^{1/2} ≈ √2·|q| there; the min over directions
        // still grows.
        let p = example1();
        let radii: Vec<f64> = (1..=25).map(|k| 4.0 * k as f64).collect();
        let rep = coercivity_witness(&p, 0.5, 64, &radii, &[10.0]).unwrap();
        assert!(rep.grew, "Example 1 witness must grow");
        // Axis value check at radius 100: f = (2·100²)^{1/2} = 100√2.
        let ev = SigmaEvaluator::new(&p).unwrap();
        let f_axis = ev.gradient_norm(&[0.0, 100.0]).powf(2.0 / 3.0)
            + ev.hessian_frobenius(&[0.0, 100.0]).powf(0.5);
        assert!(
            (f_axis - (2.0f64 * 1e4).sqrt()).abs() < 1e-9,
            "axis witness {f_axis}"
        );
        assert!(rep.threshold_onsets[0].radius.is_some());
    }

    #[test]
    fn ray_directions_shapes() {
        assert_eq!(ray_directions(1, 5).unwrap().len(), 2);
        let d2 = ray_directions(2, 8).unwrap();
        assert_eq!(d2.len(), 8);
        for u in &d2 {
            assert!((norm2(u) - 1.0).abs() < 1e-12);
        }
        let d3 = ray_directions(3, 33).unwrap();
        assert_eq!(d3.len(), 33);
        for u in &d3 {
            assert!((norm2(u) - 1.0).abs() < 1e-12);
        }
        assert!(ray_directions(4, 8).is_err());
    }

    #[test]
    fn scan_example1_unbounded_along_axes() {
        let p = example1();
        let cfg = ScanConfig {
            grid_per_axis: 24,
            track_radius_cap: 2e3,
            ..ScanConfig::default()
        };
        let scan = scan_complement(&p, 800.0, &cfg).unwrap();
        match &scan.verdict {
            BoundednessVerdict::Unbounded { witness } => {
                assert!(witness.radius >= cfg.track_radius_cap * 0.99);
            }
            v => panic!("Example 1 complement must be unbounded, got {v:?}"),
        }
        // The q2-axis ray (0,1) is dirty at every probed radius.
        let axis_ray = scan
            .rays
            .iter()
            .find(|r| (r.direction[0]).abs() < 1e-12 && r.direction[1] > 0.0)
            .expect("axis ray present among 8 uniform angles");
        assert!(axis_ray.dirty_at_all_radii);
    }

    #[test]
    fn scan_rejects_bad_config() {
        let p = example1();
        let cfg = ScanConfig {
            grid_per_axis: 8,
            ..ScanConfig::default()
        };
        assert!(scan_complement(&p, 2.0, &cfg).is_err());
        let p4 = Polynomial::new(4, vec![(vec![2, 0, 0, 0], 1.0)]).unwrap();
        assert!(scan_complement(&p4, 2.0, &ScanConfig::default()).is_err());
    }
}

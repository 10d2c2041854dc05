//! Localization machinery for the derivative-scale metric.
//!
//! The scale function R^{≥n}(q) = Σ_{n≤|α|≤r} |∂^α V(q)|^{1/|α|} induces a
//! metric R^{≥n}(q)²·dq² that varies slowly: moving by less than a fixed
//! fraction of the local scale changes the scale by a bounded factor. This
//! module measures those slowness constants empirically, builds greedy ball
//! coverings with C² partitions of unity subordinate to the metric, forms
//! quadratic Taylor models at partition base points, and checks the
//! explicit remainder and factor-two comparison bounds that make the models
//! usable in place of the full potential.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, norm2, DenseMat};
use crate::poly::{compositions, trace_split_of_eigenvalues, Polynomial};
use crate::sigma::SigmaEvaluator;

const SLOW_METRIC_SEED: u64 = 0x510_4e57_a11e;
const REMAINDER_SEED: u64 = 0x7a_1708_bead;
const COMPARISON_SEED: u64 = 0xc0_4ba7_e5;
/// Trial pairs used when an operation needs a slowness constant internally.
const INTERNAL_PROBE_PAIRS: usize = 2000;

// ---------------------------------------------------------------------------
// Scale evaluation
// ---------------------------------------------------------------------------

/// Cached evaluator for R^{≥n}: all nonzero partial-derivative polynomials
/// of order n through the degree, differentiated once up front so repeated
/// point evaluations stay cheap.
#[derive(Debug, Clone)]
pub struct ScaleTable {
    d: usize,
    n_min: u32,
    entries: Vec<(u32, Polynomial)>,
}

impl ScaleTable {
    pub fn new(poly: &Polynomial, n_min: u32) -> Result<Self> {
        if n_min == 0 {
            return Err(Error::InvalidInput(
                "derivative order n must be ≥ 1".into(),
            ));
        }
        let r = poly.degree();
        if n_min > r {
            return Err(Error::InvalidInput(format!(
                "every derivative of order ≥ {n_min} vanishes identically \
                 (degree {r}): the derivative-scale metric would be zero"
            )));
        }
        let d = poly.dimension();
        let mut entries = Vec::new();
        for ord in n_min..=r {
            for alpha in compositions(ord, d) {
                if let Some(p) = poly.derivative_poly(&alpha)? {
                    entries.push((ord, p));
                }
            }
        }
        // Unreachable in practice: the top-degree derivatives are nonzero
        // constants, so the entry list cannot be empty when n_min ≤ r.
        if entries.is_empty() {
            return Err(Error::InvalidInput(
                "all derivative polynomials vanished".into(),
            ));
        }
        Ok(ScaleTable { d, n_min, entries })
    }

    pub fn order(&self) -> u32 {
        self.n_min
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    /// R^{≥n}(q).
    pub fn value(&self, q: &[f64]) -> Result<f64> {
        if q.len() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "point has length {}, expected {}",
                q.len(),
                self.d
            )));
        }
        let mut sum = 0.0;
        for (ord, p) in &self.entries {
            let v = p.eval(q)?.abs();
            if v > 0.0 {
                sum += v.powf(1.0 / f64::from(*ord));
            }
        }
        Ok(sum)
    }
}

// ---------------------------------------------------------------------------
// Slow-metric probe
// ---------------------------------------------------------------------------

/// Empirical slowness constants for the metric R^{≥n}(q)²·dq².
#[derive(Debug, Clone, Serialize)]
pub struct SlowMetricReport {
    pub n: u32,
    pub trial_pairs: usize,
    /// Smallest ladder constant C with: R^{≥n}(q)|q−q'| ≤ 1/C forces the
    /// scale ratio (either way up) below C, over all sampled pairs.
    pub c: f64,
    /// Largest ratio observed at the accepted C.
    pub max_ratio: f64,
    /// Same game, but the ratio is measured in R^{≥n−1} while the pair
    /// constraint stays in R^{≥n}. Undefined for n = 1 (there is no
    /// order-zero scale), hence optional.
    pub c_prime: Option<f64>,
    pub max_ratio_prime: Option<f64>,
}

struct TrialPair {
    q: Vec<f64>,
    r_q: f64,
    dir: Vec<f64>,
    frac: f64,
}

fn unit_direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let n = norm2(&v);
        if n > 1e-3 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Geometric ladder of candidate slowness constants.
fn constant_ladder() -> Vec<f64> {
    let mut ladder = Vec::new();
    let mut c = 1.02;
    while c < 2.0e4 {
        ladder.push(c);
        c *= 1.07;
    }
    ladder
}

/// Find the smallest ladder constant C such that every sampled pair obeys
/// the ratio bound, and the largest ratio seen at that C.
fn smallest_constant(
    pairs: &[TrialPair],
    ratio_table: &ScaleTable,
) -> Result<(f64, f64)> {
    'ladder: for &c in &constant_ladder() {
        let mut max_ratio = 1.0f64;
        for p in pairs {
            let step = p.frac / (c * p.r_q);
            let q2: Vec<f64> = p
                .q
                .iter()
                .zip(&p.dir)
                .map(|(x, u)| x + u * step)
                .collect();
            let num = ratio_table.value(&p.q)?;
            let den = ratio_table.value(&q2)?;
            if !(num > 0.0) || !(den > 0.0) {
                continue 'ladder;
            }
            let ratio = (num / den).max(den / num);
            if ratio > c {
                continue 'ladder;
            }
            max_ratio = max_ratio.max(ratio);
        }
        return Ok((c, max_ratio));
    }
    Err(Error::NoConvergence(
        "no slowness constant found below 2e4: the scale varies too fast \
         across its own unit balls"
            .into(),
    ))
}

/// Measure the slowness constants of the derivative-scale metric by random
/// pair sampling over a logarithmic range of magnitudes.
///
/// Returns the smallest constant C from a geometric ladder for which every
/// sampled pair (q, q') with R^{≥n}(q)·|q−q'| ≤ 1/C has scale ratio within
/// [1/C, C], plus the analogous constant C' with the ratio measured in the
/// order-(n−1) scale (for n ≥ 2). Sampling is seeded, so repeated calls
/// with the same arguments give identical reports.
pub fn slow_metric_probe(
    poly: &Polynomial,
    n: u32,
    trial_pairs: usize,
) -> Result<SlowMetricReport> {
    if trial_pairs < 1000 {
        return Err(Error::InvalidInput(format!(
            "need at least 1000 trial pairs, got {trial_pairs}"
        )));
    }
    let table = ScaleTable::new(poly, n)?;
    let d = poly.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(SLOW_METRIC_SEED);
    let mut pairs = Vec::with_capacity(trial_pairs);
    for _ in 0..trial_pairs {
        // Magnitudes span the near-origin regime (where the scale bottoms
        // out and relative variation peaks) through the growth regime; the
        // worst pairs concentrate at the small end, so the range must
        // reach well below 1 for the supremum to saturate quickly.
        let mag = 10.0f64.powf(rng.gen_range(-3.0..2.0));
        let pos = unit_direction(&mut rng, d);
        let q: Vec<f64> = pos.iter().map(|u| u * mag).collect();
        let r_q = table.value(&q)?;
        pairs.push(TrialPair {
            q,
            r_q,
            dir: unit_direction(&mut rng, d),
            frac: rng.gen_range(0.0..1.0f64).max(1e-6),
        });
    }
    let (c, max_ratio) = smallest_constant(&pairs, &table)?;
    let (c_prime, max_ratio_prime) = if n >= 2 {
        let prev = ScaleTable::new(poly, n - 1)?;
        let (cp, mp) = smallest_constant(&pairs, &prev)?;
        (Some(cp), Some(mp))
    } else {
        (None, None)
    };
    Ok(SlowMetricReport {
        n,
        trial_pairs,
        c,
        max_ratio,
        c_prime,
        max_ratio_prime,
    })
}

// ---------------------------------------------------------------------------
// Domain boxes and the covering grid
// ---------------------------------------------------------------------------

/// Axis-aligned box [lo₁, hi₁] × … × [lo_d, hi_d].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidInput(
                "box needs matching nonempty lo/hi vectors".into(),
            ));
        }
        for (l, h) in lo.iter().zip(&hi) {
            if !l.is_finite() || !h.is_finite() || l >= h {
                return Err(Error::InvalidInput(format!(
                    "empty or invalid box axis [{l}, {h}]"
                )));
            }
        }
        Ok(DomainBox { lo, hi })
    }

    /// The cube [−half, half]^d.
    pub fn centered(half: f64, d: usize) -> Result<Self> {
        if !(half > 0.0) || d == 0 {
            return Err(Error::InvalidInput(format!(
                "need a positive half-width and dimension, got {half}, {d}"
            )));
        }
        DomainBox::new(vec![-half; d], vec![half; d])
    }

    pub fn dimension(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        q.len() == self.lo.len()
            && q.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (l, h))| *l <= *x && *x <= *h)
    }
}

/// Iterate all index vectors in [0, dims_0) × … × [0, dims_{d−1}) in
/// lexicographic order (axis 0 slowest).
fn for_each_index(dims: &[usize], mut f: impl FnMut(&[usize])) {
    let d = dims.len();
    if dims.iter().any(|&n| n == 0) {
        return;
    }
    let mut idx = vec![0usize; d];
    loop {
        f(&idx);
        let mut axis = d;
        while axis > 0 {
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < dims[axis] {
                break;
            }
            idx[axis] = 0;
            if axis == 0 {
                return;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Partition of unity
// ---------------------------------------------------------------------------

/// C² cutoff profile: 1 on [0, t0], 0 on [1, ∞), quintic smoothstep in
/// between. Returns (θ, θ', θ'').
pub fn theta_profile(t: f64, t0: f64) -> (f64, f64, f64) {
    if t <= t0 {
        return (1.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let w = 1.0 - t0;
    let s = (t - t0) / w;
    let theta = 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
    let d1 = -30.0 * s * s * (1.0 - s) * (1.0 - s) / w;
    let d2 = -60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (w * w);
    (theta, d1, d2)
}

/// Spatial bucket index over the ball centers for O(1) active-set queries.
#[derive(Debug, Clone, Default)]
struct Buckets {
    cell: f64,
    map: HashMap<Vec<i64>, Vec<usize>>,
}

impl Buckets {
    fn build(centers: &[Vec<f64>], radii: &[f64]) -> Buckets {
        let cell = radii.iter().cloned().fold(0.0f64, f64::max).max(1e-300);
        let mut map: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (j, c) in centers.iter().enumerate() {
            let key: Vec<i64> = c.iter().map(|x| (x / cell).floor() as i64).collect();
            map.entry(key).or_default().push(j);
        }
        Buckets { cell, map }
    }

    /// Ids of all centers whose support could contain q, in ascending order.
    fn near(&self, q: &[f64]) -> Vec<usize> {
        let d = q.len();
        let base: Vec<i64> = q.iter().map(|x| (x / self.cell).floor() as i64).collect();
        let mut out = Vec::new();
        let dims = vec![3usize; d];
        for_each_index(&dims, |off| {
            let key: Vec<i64> = base
                .iter()
                .zip(off)
                .map(|(b, o)| b + *o as i64 - 1)
                .collect();
            if let Some(ids) = self.map.get(&key) {
                out.extend_from_slice(ids);
            }
        });
        out.sort_unstable();
        out
    }
}

/// A ball covering with a subordinate C² partition of unity.
///
/// Center j carries the bump φ_j(q) = θ(|q−q_j| / radii[j]) with θ ≡ 1 on
/// the inner fraction and θ ≡ 0 from 1 on; the normalized cutoffs are
/// ψ_j = φ_j / √(Σ_k φ_k²), so Σ_j ψ_j² = 1 identically on the covered
/// domain. Every point of the domain box lies in the *inner* ball of some
/// center, which keeps the normalization bounded away from zero.
#[derive(Debug, Clone, Serialize)]
pub struct PartitionSpec {
    d: usize,
    /// Outer ball scale: support radius is a / R^{≥3}(q_j).
    pub a: f64,
    /// Inner ball scale: ψ_j ≡ const region ends at b / R^{≥3}(q_j).
    pub b: f64,
    pub centers: Vec<Vec<f64>>,
    /// Support radii a·R^{≥3}(q_j)^{−1}.
    pub radii: Vec<f64>,
    /// The scale R^{≥3}(q_j) at each center.
    pub scales: Vec<f64>,
    /// Cutoff profile knots: θ ≡ 1 up to b/a, θ ≡ 0 from 1.
    pub inner_factor: f64,
    /// Packing bound on how many supports can share a point.
    pub overlap_bound: usize,
    /// Slowness constant of the probe that validated the ball scale.
    pub metric_constant: f64,
    pub domain: DomainBox,
    /// Covering grid pitch (the grid that drove the greedy construction and
    /// that base-point selection refers to).
    pub grid_step: f64,
    pub grid_dims: Vec<usize>,
    #[serde(skip)]
    index: Buckets,
}

#[derive(Deserialize)]
struct PartitionRepr {
    a: f64,
    b: f64,
    centers: Vec<Vec<f64>>,
    radii: Vec<f64>,
    scales: Vec<f64>,
    inner_factor: f64,
    overlap_bound: usize,
    metric_constant: f64,
    domain: DomainBox,
    grid_step: f64,
    grid_dims: Vec<usize>,
}

impl<'de> Deserialize<'de> for PartitionSpec {
    fn deserialize<D: serde::Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<Self, D::Error> {
        let r = PartitionRepr::deserialize(de)?;
        let d = r.domain.lo.len();
        if r.centers.is_empty()
            || r.centers.len() != r.radii.len()
            || r.centers.len() != r.scales.len()
            || r.centers.iter().any(|c| c.len() != d)
            || r.grid_dims.len() != d
        {
            return Err(serde::de::Error::custom(
                "inconsistent partition field lengths",
            ));
        }
        let index = Buckets::build(&r.centers, &r.radii);
        Ok(PartitionSpec {
            d,
            a: r.a,
            b: r.b,
            centers: r.centers,
            radii: r.radii,
            scales: r.scales,
            inner_factor: r.inner_factor,
            overlap_bound: r.overlap_bound,
            metric_constant: r.metric_constant,
            domain: r.domain,
            grid_step: r.grid_step,
            grid_dims: r.grid_dims,
            index,
        })
    }
}

/// Build a partition of unity over the box with ball scales (a, b),
/// checking the slow-metric admissibility condition a ≤ 1/C first.
///
/// The covering is greedy and deterministic: scan a fine grid of the box
/// in lexicographic order; each time an uncovered point appears, plant a
/// center there with support radius a·R^{≥3}(center)^{−1}, and mark as
/// covered everything within the center's inner radius less a grid margin.
/// The margin guarantees that the *continuum* box, not just the grid, is
/// covered by the inner balls.
pub fn build_partition(
    poly: &Polynomial,
    domain: &DomainBox,
    a: f64,
    b: f64,
) -> Result<PartitionSpec> {
    let d = poly.dimension();
    if domain.dimension() != d {
        return Err(Error::DimensionMismatch(format!(
            "box dimension {} does not match the potential's {}",
            domain.dimension(),
            d
        )));
    }
    if poly.degree() <= 2 {
        return Err(Error::InvalidInput(
            "a potential of degree ≤ 2 needs no localization: its quadratic \
             model is globally exact"
                .into(),
        ));
    }
    if !(a.is_finite() && b.is_finite() && 0.0 < b && b < a) {
        return Err(Error::InvalidInput(format!(
            "ball scales must satisfy 0 < b < a, got a = {a}, b = {b}"
        )));
    }
    let probe = slow_metric_probe(poly, 3, INTERNAL_PROBE_PAIRS)?;
    if a > 1.0 / probe.c {
        return Err(Error::InvalidInput(format!(
            "ball scale a = {a} violates the slow-metric admissibility \
             a ≤ 1/C = {:.6}",
            1.0 / probe.c
        )));
    }
    let table = ScaleTable::new(poly, 3)?;

    // Estimate the largest scale over the box on a coarse lattice, with
    // headroom; the build loop re-checks every accepted center against the
    // chosen pitch and fails loudly if the estimate was beaten.
    let est_dims = vec![33usize; d];
    let mut max_scale = 0.0f64;
    let mut est_err = None;
    for_each_index(&est_dims, |idx| {
        let q: Vec<f64> = idx
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                domain.lo[k] + (domain.hi[k] - domain.lo[k]) * i as f64 / 32.0
            })
            .collect();
        match table.value(&q) {
            Ok(v) => max_scale = max_scale.max(v),
            Err(e) => est_err = Some(e),
        }
    });
    if let Some(e) = est_err {
        return Err(e);
    }
    let max_scale_est = 1.5 * max_scale;
    let sqrt_d = (d as f64).sqrt();
    let step = b / (max_scale_est * 4.0 * sqrt_d);
    let margin = step * sqrt_d;

    let mut grid_dims = Vec::with_capacity(d);
    let mut total: u128 = 1;
    for k in 0..d {
        let n = ((domain.hi[k] - domain.lo[k]) / step).floor() as usize + 1;
        total = total.saturating_mul(n as u128);
        grid_dims.push(n);
    }
    if total > 300_000_000 {
        return Err(Error::BudgetExceeded(format!(
            "covering grid needs {total} points; shrink the box or coarsen \
             the ball scales"
        )));
    }
    let total = total as usize;

    let mut covered = vec![0u64; total.div_ceil(64)];
    let is_covered = |bits: &[u64], i: usize| bits[i / 64] >> (i % 64) & 1 == 1;

    // Row-major strides, axis 0 slowest: lexicographic flat order.
    let mut strides = vec![1usize; d];
    for k in (0..d.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * grid_dims[k + 1];
    }

    let mut centers: Vec<Vec<f64>> = Vec::new();
    let mut radii: Vec<f64> = Vec::new();
    let mut scales: Vec<f64> = Vec::new();

    let mut idx = vec![0usize; d];
    let mut flat = 0usize;
    loop {
        if !is_covered(&covered, flat) {
            let q_j: Vec<f64> = idx
                .iter()
                .enumerate()
                .map(|(k, &i)| domain.lo[k] + i as f64 * step)
                .collect();
            let scale = table.value(&q_j)?;
            let r_in = b / scale;
            if r_in < 2.0 * margin {
                return Err(Error::InvalidInput(format!(
                    "covering grid too coarse for the metric: inner radius \
                     {r_in:.3e} at {q_j:?} vs margin {margin:.3e}"
                )));
            }
            let r_mark = r_in - margin;
            // Stamp the shrunk inner ball onto the grid.
            let mut lo_i = Vec::with_capacity(d);
            let mut span = Vec::with_capacity(d);
            for k in 0..d {
                let lo = ((q_j[k] - r_mark - domain.lo[k]) / step).ceil().max(0.0) as usize;
                let hi = (((q_j[k] + r_mark - domain.lo[k]) / step).floor() as usize)
                    .min(grid_dims[k] - 1);
                lo_i.push(lo);
                span.push(hi + 1 - lo.min(hi + 1));
            }
            let r2 = r_mark * r_mark;
            for_each_index(&span, |off| {
                let mut dist2 = 0.0;
                let mut f = 0usize;
                for k in 0..d {
                    let i = lo_i[k] + off[k];
                    let x = domain.lo[k] + i as f64 * step;
                    let dx = x - q_j[k];
                    dist2 += dx * dx;
                    f += i * strides[k];
                }
                if dist2 <= r2 {
                    covered[f / 64] |= 1 << (f % 64);
                }
            });
            centers.push(q_j);
            radii.push(a / scale);
            scales.push(scale);
        }
        // Lexicographic advance.
        let mut axis = d;
        let mut done = true;
        while axis > 0 {
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < grid_dims[axis] {
                done = false;
                break;
            }
            idx[axis] = 0;
        }
        if done {
            break;
        }
        flat = idx
            .iter()
            .zip(&strides)
            .map(|(i, s)| i * s)
            .sum();
    }

    let n_bound = (4.0 * probe.c.powi(3) + 1.0).powi(d as i32).floor() as usize;
    let index = Buckets::build(&centers, &radii);
    Ok(PartitionSpec {
        d,
        a,
        b,
        centers,
        radii,
        scales,
        inner_factor: b / a,
        overlap_bound: n_bound,
        metric_constant: probe.c,
        domain: domain.clone(),
        grid_step: step,
        grid_dims,
        index,
    })
}

/// Build a partition with the admissible default scales a = 1/(2C),
/// b = a/2, where C is the probed slowness constant.
pub fn build_partition_default(
    poly: &Polynomial,
    domain: &DomainBox,
) -> Result<PartitionSpec> {
    if poly.degree() <= 2 {
        return Err(Error::InvalidInput(
            "a potential of degree ≤ 2 needs no localization: its quadratic \
             model is globally exact"
                .into(),
        ));
    }
    let probe = slow_metric_probe(poly, 3, INTERNAL_PROBE_PAIRS)?;
    let a = 1.0 / (2.0 * probe.c);
    build_partition(poly, domain, a, a / 2.0)
}

impl PartitionSpec {
    /// Hand-assembled variant for tests and small studies: given centers
    /// and their scales, validate that the inner balls cover the box on a
    /// dense sample, then assemble the same normalized cutoff structure the
    /// greedy builder produces.
    pub fn from_parts(
        domain: DomainBox,
        a: f64,
        b: f64,
        centers: Vec<Vec<f64>>,
        scales: Vec<f64>,
        metric_constant: f64,
    ) -> Result<Self> {
        let d = domain.dimension();
        if centers.is_empty() || centers.len() != scales.len() {
            return Err(Error::InvalidInput(
                "need matching nonempty centers and scales".into(),
            ));
        }
        if centers.iter().any(|c| c.len() != d) {
            return Err(Error::DimensionMismatch(
                "center dimension does not match the box".into(),
            ));
        }
        if !(0.0 < b && b < a) || scales.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidInput(
                "need 0 < b < a and positive scales".into(),
            ));
        }
        let radii: Vec<f64> = scales.iter().map(|s| a / s).collect();
        // Dense sampled coverage check by the inner balls.
        let per_axis = match d {
            1 => 4097,
            2 => 129,
            _ => 33,
        };
        let dims = vec![per_axis; d];
        let mut covered = true;
        for_each_index(&dims, |idx| {
            let q: Vec<f64> = idx
                .iter()
                .enumerate()
                .map(|(k, &i)| {
                    domain.lo[k]
                        + (domain.hi[k] - domain.lo[k]) * i as f64 / (per_axis - 1) as f64
                })
                .collect();
            let inside = centers.iter().zip(&scales).any(|(c, s)| {
                let dist2: f64 = q.iter().zip(c).map(|(x, y)| (x - y) * (x - y)).sum();
                dist2.sqrt() <= b / s
            });
            covered &= inside;
        });
        if !covered {
            return Err(Error::InvalidInput(
                "inner balls do not cover the box".into(),
            ));
        }
        let min_rin = radii
            .iter()
            .map(|r| r * (b / a))
            .fold(f64::INFINITY, f64::min);
        let sqrt_d = (d as f64).sqrt();
        let step = min_rin / (4.0 * sqrt_d);
        let grid_dims: Vec<usize> = (0..d)
            .map(|k| ((domain.hi[k] - domain.lo[k]) / step).floor() as usize + 1)
            .collect();
        let index = Buckets::build(&centers, &radii);
        let n = centers.len();
        Ok(PartitionSpec {
            d,
            a,
            b,
            centers,
            radii,
            scales,
            inner_factor: b / a,
            overlap_bound: n,
            metric_constant,
            domain,
            grid_step: step,
            grid_dims,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("partition serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn check_point(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "point has length {}, expected {}",
                q.len(),
                self.d
            )));
        }
        Ok(())
    }

    /// Indices of the cutoffs whose support contains q, ascending.
    pub fn active(&self, q: &[f64]) -> Result<Vec<usize>> {
        self.check_point(q)?;
        Ok(self
            .index
            .near(q)
            .into_iter()
            .filter(|&j| {
                let dist2: f64 = q
                    .iter()
                    .zip(&self.centers[j])
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                dist2 < self.radii[j] * self.radii[j]
            })
            .collect())
    }

    /// Unnormalized bump value φ_j(q).
    pub fn phi(&self, j: usize, q: &[f64]) -> Result<f64> {
        self.check_point(q)?;
        self.check_index(j)?;
        Ok(self.bump(j, q).0)
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.centers.len() {
            return Err(Error::InvalidInput(format!(
                "cutoff index {j} out of range ({} cutoffs)",
                self.centers.len()
            )));
        }
        Ok(())
    }

    /// (φ_j, ∇φ_j, Hess φ_j) at q.
    fn bump(&self, j: usize, q: &[f64]) -> (f64, Vec<f64>, DenseMat) {
        let d = self.d;
        let c = &self.centers[j];
        let r = self.radii[j];
        let diff: Vec<f64> = q.iter().zip(c).map(|(x, y)| x - y).collect();
        let dist = norm2(&diff);
        let u = dist / r;
        let t0 = self.inner_factor;
        let (th, th1, th2) = theta_profile(u, t0);
        if th1 == 0.0 && th2 == 0.0 {
            // Flat region (inside the plateau or outside the support).
            return (th, vec![0.0; d], DenseMat::zeros(d));
        }
        // Here t0 < u < 1, so dist > 0.
        let mut grad = vec![0.0; d];
        for i in 0..d {
            grad[i] = th1 * diff[i] / (dist * r);
        }
        let mut hess = DenseMat::zeros(d);
        for i in 0..d {
            for l in 0..d {
                let du_i = diff[i] / (dist * r);
                let du_l = diff[l] / (dist * r);
                let kron = if i == l { 1.0 } else { 0.0 };
                let d2u = kron / (dist * r) - diff[i] * diff[l] / (dist * dist * dist * r);
                hess.set(i, l, th2 * du_i * du_l + th1 * d2u);
            }
        }
        (th, grad, hess)
    }

    /// All nonzero normalized cutoffs at q: (j, ψ_j(q)). Errors when q lies
    /// outside every support (the partition does not cover it).
    pub fn psi_values(&self, q: &[f64]) -> Result<Vec<(usize, f64)>> {
        let active = self.active(q)?;
        let mut sum_sq = 0.0;
        let mut vals = Vec::with_capacity(active.len());
        for &j in &active {
            let phi = self.bump(j, q).0;
            sum_sq += phi * phi;
            vals.push((j, phi));
        }
        if !(sum_sq > 0.0) {
            return Err(Error::InvalidInput(format!(
                "point {q:?} is outside the covered domain"
            )));
        }
        let norm = sum_sq.sqrt();
        for v in &mut vals {
            v.1 /= norm;
        }
        Ok(vals)
    }

    /// ψ_j(q); zero when q is outside cutoff j's support.
    pub fn psi(&self, j: usize, q: &[f64]) -> Result<f64> {
        self.check_index(j)?;
        Ok(self
            .psi_values(q)?
            .into_iter()
            .find(|(k, _)| *k == j)
            .map_or(0.0, |(_, v)| v))
    }

    /// Normalization data at q shared by the derivative evaluators:
    /// (active ids, bumps, S² = Σφ², G = Σφ∇φ, M = Σ(∇φ∇φᵀ + φ·Hessφ)).
    #[allow(clippy::type_complexity)]
    fn norm_parts(
        &self,
        q: &[f64],
    ) -> Result<(Vec<usize>, Vec<(f64, Vec<f64>, DenseMat)>, f64, Vec<f64>, DenseMat)> {
        let active = self.active(q)?;
        let d = self.d;
        let mut bumps = Vec::with_capacity(active.len());
        let mut s2 = 0.0;
        let mut g = vec![0.0; d];
        let mut m = DenseMat::zeros(d);
        for &k in &active {
            let (phi, grad, hess) = self.bump(k, q);
            s2 += phi * phi;
            for i in 0..d {
                g[i] += phi * grad[i];
                for l in 0..d {
                    m.set(
                        i,
                        l,
                        m.at(i, l) + grad[i] * grad[l] + phi * hess.at(i, l),
                    );
                }
            }
            bumps.push((phi, grad, hess));
        }
        if !(s2 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "point {q:?} is outside the covered domain"
            )));
        }
        Ok((active, bumps, s2, g, m))
    }

    /// ∇ψ_j(q).
    pub fn psi_gradient(&self, j: usize, q: &[f64]) -> Result<Vec<f64>> {
        self.check_index(j)?;
        let (active, bumps, s2, g, _) = self.norm_parts(q)?;
        let d = self.d;
        let pos = match active.iter().position(|&k| k == j) {
            Some(p) => p,
            None => return Ok(vec![0.0; d]),
        };
        let (phi, grad, _) = &bumps[pos];
        let s = s2.sqrt();
        let s3 = s2 * s;
        Ok((0..d)
            .map(|i| grad[i] / s - phi * g[i] / s3)
            .collect())
    }

    /// Hess ψ_j(q).
    pub fn psi_hessian(&self, j: usize, q: &[f64]) -> Result<DenseMat> {
        self.check_index(j)?;
        let (active, bumps, s2, g, m) = self.norm_parts(q)?;
        let d = self.d;
        let pos = match active.iter().position(|&k| k == j) {
            Some(p) => p,
            None => return Ok(DenseMat::zeros(d)),
        };
        let (phi, grad, hess) = &bumps[pos];
        let s = s2.sqrt();
        let s3 = s2 * s;
        let s5 = s2 * s3;
        let mut out = DenseMat::zeros(d);
        for i in 0..d {
            for l in 0..d {
                let v = hess.at(i, l) / s
                    - (grad[i] * g[l] + grad[l] * g[i]) / s3
                    - phi * m.at(i, l) / s3
                    + 3.0 * phi * g[i] * g[l] / s5;
                out.set(i, l, v);
            }
        }
        Ok(out)
    }

    /// Σ_j |∇ψ_j(q)|².
    pub fn gradient_sum_sq(&self, q: &[f64]) -> Result<f64> {
        let (_, bumps, s2, g, _) = self.norm_parts(q)?;
        let d = self.d;
        let s = s2.sqrt();
        let s3 = s2 * s;
        let mut total = 0.0;
        for (phi, grad, _) in &bumps {
            for i in 0..d {
                let gi = grad[i] / s - phi * g[i] / s3;
                total += gi * gi;
            }
        }
        Ok(total)
    }

    /// Number of supports containing q.
    pub fn overlap_count(&self, q: &[f64]) -> Result<usize> {
        Ok(self.active(q)?.len())
    }

    /// Whether q lies inside the *inner* ball of some center (the covering
    /// guarantee; implies the normalization stays away from zero at q).
    /// Indexed: any inner ball containing q has its center within one
    /// bucket cell, since cells are at least an outer radius wide.
    pub fn covered_by_inner_ball(&self, q: &[f64]) -> Result<bool> {
        self.check_point(q)?;
        Ok(self.index.near(q).into_iter().any(|j| {
            let dist2: f64 = q
                .iter()
                .zip(&self.centers[j])
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            let r_in = self.radii[j] * self.inner_factor;
            dist2 <= r_in * r_in
        }))
    }

    /// Coordinates of covering-grid point i along axis k.
    fn grid_coord(&self, k: usize, i: usize) -> f64 {
        self.domain.lo[k] + i as f64 * self.grid_step
    }
}

// ---------------------------------------------------------------------------
// Quadratic Taylor models
// ---------------------------------------------------------------------------

/// Second-order Taylor model of the potential at a base point, with the
/// localized spectral constants evaluated there.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadraticModel {
    /// Base point q'_j.
    pub base: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: DenseMat,
    /// Whether the model's ball was judged inside Σ(κ); absent for a model
    /// built without a partition/κ context.
    pub in_j_kappa: Option<bool>,
    /// 2·(1 + ‖Hess‖_F²)^{1/8} — the quadratic-case time parameter.
    pub t_j: f64,
    /// max{(1 + Tr₊)^{2/3}, 1 + Tr₋}.
    pub a_const: f64,
    /// max{min_q |∇model(q)|^{4/3}, (1 + Tr₋)/ln(2 + Tr₋)²}.
    pub b_const: f64,
}

impl QuadraticModel {
    pub fn eval(&self, q: &[f64]) -> Result<f64> {
        let diff = self.diff(q)?;
        let hd = self.hessian.matvec(&diff);
        let mut v = self.value;
        for i in 0..diff.len() {
            v += self.gradient[i] * diff[i] + 0.5 * diff[i] * hd[i];
        }
        Ok(v)
    }

    pub fn grad(&self, q: &[f64]) -> Result<Vec<f64>> {
        let diff = self.diff(q)?;
        let hd = self.hessian.matvec(&diff);
        Ok(self
            .gradient
            .iter()
            .zip(&hd)
            .map(|(g, h)| g + h)
            .collect())
    }

    fn diff(&self, q: &[f64]) -> Result<Vec<f64>> {
        if q.len() != self.base.len() {
            return Err(Error::DimensionMismatch(format!(
                "point has length {}, expected {}",
                q.len(),
                self.base.len()
            )));
        }
        Ok(q.iter().zip(&self.base).map(|(x, y)| x - y).collect())
    }

    /// Exact minimum of |∇model| over all of space: the norm of the
    /// gradient component orthogonal to the Hessian's range.
    pub fn min_gradient_norm(&self) -> Result<f64> {
        let fro = self.hessian.frobenius();
        if fro == 0.0 {
            return Ok(norm2(&self.gradient));
        }
        let eig = jacobi_eigen(&self.hessian)?;
        let tol = 1e-12 * fro;
        let mut null_part = 0.0;
        for (i, nu) in eig.values.iter().enumerate() {
            if nu.abs() <= tol {
                let v = eig.vectors.column(i);
                let proj: f64 = v.iter().zip(&self.gradient).map(|(a, b)| a * b).sum();
                null_part += proj * proj;
            }
        }
        Ok(null_part.sqrt())
    }
}

/// Exact second-order Taylor model of the potential at `base`, with the
/// spectral constants (t, A, B) evaluated from the Hessian there.
pub fn taylor_quadratic(poly: &Polynomial, base: &[f64]) -> Result<QuadraticModel> {
    let value = poly.eval(base)?;
    let gradient = poly.gradient(base)?;
    let hessian = poly.hessian(base)?;
    let fro = hessian.frobenius();
    let eig = jacobi_eigen(&hessian)?;
    let (tr_plus, tr_minus) = trace_split_of_eigenvalues(&eig.values, fro);
    let a_const = (1.0 + tr_plus).powf(2.0 / 3.0).max(1.0 + tr_minus);
    let mut model = QuadraticModel {
        base: base.to_vec(),
        value,
        gradient,
        hessian,
        in_j_kappa: None,
        t_j: 2.0 * (1.0 + fro * fro).powf(0.125),
        a_const,
        b_const: 0.0,
    };
    let min_grad = model.min_gradient_norm()?;
    let log_term = (1.0 + tr_minus) / (2.0 + tr_minus).ln().powi(2);
    model.b_const = min_grad.powf(4.0 / 3.0).max(log_term);
    Ok(model)
}

/// Build one quadratic model per partition cutoff, choosing the base point
/// by the region rule: the center itself when the support is inside Σ(κ),
/// otherwise the complement point of smallest covering-grid index inside
/// the support.
pub fn models_for_partition(
    poly: &Polynomial,
    partition: &PartitionSpec,
    kappa: f64,
) -> Result<Vec<QuadraticModel>> {
    if !(kappa >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "kappa must be ≥ 1, got {kappa}"
        )));
    }
    if poly.dimension() != partition.dimension() {
        return Err(Error::DimensionMismatch(
            "partition dimension does not match the potential".into(),
        ));
    }
    let ev = SigmaEvaluator::new(poly)?;
    let d = poly.dimension();
    let mut models = Vec::with_capacity(partition.len());
    for j in 0..partition.len() {
        let c = &partition.centers[j];
        let r = partition.radii[j];
        // Covering-grid points inside the support, in flat (lexicographic)
        // order; track the first complement point.
        let mut lo_i = Vec::with_capacity(d);
        let mut span = Vec::with_capacity(d);
        for k in 0..d {
            let lo = ((c[k] - r - partition.domain.lo[k]) / partition.grid_step)
                .ceil()
                .max(0.0) as usize;
            let hi = (((c[k] + r - partition.domain.lo[k]) / partition.grid_step).floor()
                as usize)
                .min(partition.grid_dims[k] - 1);
            lo_i.push(lo);
            span.push((hi + 1).saturating_sub(lo));
        }
        // The scan runs in lexicographic order, so the first complement
        // point found is the one of smallest flat grid index.
        let mut first_bad: Option<Vec<f64>> = None;
        for_each_index(&span, |off| {
            if first_bad.is_some() {
                return;
            }
            let q: Vec<f64> = (0..d)
                .map(|k| partition.grid_coord(k, lo_i[k] + off[k]))
                .collect();
            let dist2: f64 = q.iter().zip(c).map(|(x, y)| (x - y) * (x - y)).sum();
            if dist2 > r * r {
                return;
            }
            if !ev.is_member(&q, kappa) {
                first_bad = Some(q);
            }
        });
        let (base, inside) = match first_bad {
            None => (c.clone(), true),
            Some(bad) => (bad, false),
        };
        let mut model = taylor_quadratic(poly, &base)?;
        model.in_j_kappa = Some(inside);
        models.push(model);
    }
    Ok(models)
}

// ---------------------------------------------------------------------------
// Remainder and comparison checks
// ---------------------------------------------------------------------------

/// Outcome of sampling the Taylor-remainder bound on a model ball.
#[derive(Debug, Clone, Serialize)]
pub struct RemainderReport {
    pub samples: usize,
    pub ball_radius: f64,
    /// Explicit constant for first-derivative remainders.
    pub constant_order1: f64,
    /// Explicit constant for second-derivative remainders.
    pub constant_order2: f64,
    /// Largest |∂^α V − ∂^α model| / (c_{|α|}·R^{≥3}(base)^{|α|}) seen.
    pub max_ratio: f64,
    /// Largest absolute defect; for a degree ≤ 2 potential the model is
    /// exact and this is the whole story (the constants are then zero).
    pub max_abs_defect: f64,
    pub pass: bool,
}

/// Explicit remainder constant: Σ over all multi-indices 3 ≤ |β| ≤ r of
/// β!·a^{|α|−|β|}.
fn remainder_constant(d: usize, r: u32, a: f64, alpha_order: u32) -> f64 {
    let mut c = 0.0;
    for ord in 3..=r {
        for beta in compositions(ord, d) {
            let fact: f64 = beta
                .iter()
                .map(|&k| (1..=u64::from(k)).product::<u64>() as f64)
                .product();
            c += fact * a.powi(alpha_order as i32 - ord as i32);
        }
    }
    c
}

fn ball_sample(rng: &mut ChaCha8Rng, center: &[f64], radius: f64) -> Vec<f64> {
    let d = center.len();
    let dir = unit_direction(rng, d);
    let u: f64 = rng.gen_range(0.0..1.0f64);
    let rad = radius * u.powf(1.0 / d as f64);
    center.iter().zip(&dir).map(|(c, v)| c + v * rad).collect()
}

/// Multi-indices of order 1 and 2 paired with the model's exact derivative
/// extractor: (alpha, |alpha|, model ∂^α as a function of (grad, hess)).
fn second_order_indices(d: usize) -> Vec<(Vec<u32>, u32, usize, usize)> {
    // Encoded as (alpha, order, i, l): order 1 uses i only; order 2 is the
    // (i, l) Hessian entry.
    let mut out = Vec::new();
    for alpha in compositions(1, d) {
        let i = alpha.iter().position(|&k| k == 1).unwrap();
        out.push((alpha, 1, i, 0));
    }
    for alpha in compositions(2, d) {
        let (i, l) = match alpha.iter().position(|&k| k == 2) {
            Some(i) => (i, i),
            None => {
                let mut it = alpha.iter().enumerate().filter(|(_, &k)| k == 1);
                let i = it.next().unwrap().0;
                let l = it.next().unwrap().0;
                (i, l)
            }
        };
        out.push((alpha, 2, i, l));
    }
    out
}

/// Sample the explicit Taylor-remainder bound for first and second
/// derivatives on the model's ball: |∂^α V − ∂^α model| must stay below
/// c_{α}·R^{≥3}(base)^{|α|} at every sample (ratio ≤ 1).
///
/// The ball is B(base, a·R^{≥3}(base)^{−1}). For a potential of degree ≤ 2
/// the model is exact; the constants degenerate to zero and the check
/// asserts the defect itself vanishes to rounding.
pub fn remainder_check(
    poly: &Polynomial,
    model: &QuadraticModel,
    a: f64,
    samples: usize,
) -> Result<RemainderReport> {
    let d = poly.dimension();
    if model.base.len() != d {
        return Err(Error::DimensionMismatch(
            "model dimension does not match the potential".into(),
        ));
    }
    if !(a > 0.0) || samples == 0 {
        return Err(Error::InvalidInput(format!(
            "need a > 0 and samples ≥ 1, got a = {a}, samples = {samples}"
        )));
    }
    let r = poly.degree();
    let exact = r <= 2;
    let (radius, scale3, c1, c2) = if exact {
        (1.0, 0.0, 0.0, 0.0)
    } else {
        let scale = ScaleTable::new(poly, 3)?.value(&model.base)?;
        (
            a / scale,
            scale,
            remainder_constant(d, r, a, 1),
            remainder_constant(d, r, a, 2),
        )
    };
    let indices = second_order_indices(d);
    let mut rng = ChaCha8Rng::seed_from_u64(REMAINDER_SEED);
    let mut max_ratio = 0.0f64;
    let mut max_abs = 0.0f64;
    for _ in 0..samples {
        let q = ball_sample(&mut rng, &model.base, radius);
        let mg = model.grad(&q)?;
        for (alpha, order, i, l) in &indices {
            let dv = poly.eval_derivative(alpha, &q)?;
            let dm = match order {
                1 => mg[*i],
                _ => model.hessian.at(*i, *l),
            };
            let defect = (dv - dm).abs();
            max_abs = max_abs.max(defect);
            if !exact {
                let denom = match order {
                    1 => c1 * scale3,
                    _ => c2 * scale3 * scale3,
                };
                max_ratio = max_ratio.max(defect / denom);
            }
        }
    }
    let pass = if exact {
        // The quadratic model of a quadratic is exact; allow rounding noise
        // relative to the derivative magnitudes.
        let scale = 1.0 + norm2(&model.gradient) + model.hessian.frobenius();
        max_abs <= 1e-10 * scale
    } else {
        max_ratio <= 1.0
    };
    Ok(RemainderReport {
        samples,
        ball_radius: radius,
        constant_order1: c1,
        constant_order2: c2,
        max_ratio,
        max_abs_defect: max_abs,
        pass,
    })
}

/// Ratio statistics comparing a derivative magnitude of the potential
/// against the model's, over samples of the model ball.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub samples_used: usize,
    /// Samples where both magnitudes were negligible and no ratio exists.
    pub skipped: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// min ≥ 1/2 and max ≤ 2.
    pub within_factor_two: bool,
}

fn comparison_ball(poly: &Polynomial, model: &QuadraticModel, a: f64) -> Result<f64> {
    if poly.degree() <= 2 {
        // Model is globally exact; any ball works.
        return Ok(1.0);
    }
    let table = ScaleTable::new(poly, 3)?;
    Ok(a / table.value(&model.base)?)
}

fn comparison_run(
    samples: usize,
    center: &[f64],
    radius: f64,
    mut pair: impl FnMut(&[f64]) -> Result<(f64, f64)>,
) -> Result<ComparisonReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(COMPARISON_SEED);
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for _ in 0..samples {
        let q = ball_sample(&mut rng, center, radius);
        let (num, den) = pair(&q)?;
        if num <= 1e-300 && den <= 1e-300 {
            skipped += 1;
            continue;
        }
        let ratio = if den > 0.0 { num / den } else { f64::INFINITY };
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
        used += 1;
    }
    if used == 0 {
        return Err(Error::InvalidInput(
            "every sample was degenerate (both magnitudes zero)".into(),
        ));
    }
    Ok(ComparisonReport {
        samples_used: used,
        skipped,
        min_ratio,
        max_ratio,
        within_factor_two: min_ratio >= 0.5 && max_ratio <= 2.0,
    })
}

/// Compare |∇V| against |∇model| on the model ball.
pub fn gradient_comparison(
    poly: &Polynomial,
    model: &QuadraticModel,
    a: f64,
    samples: usize,
) -> Result<ComparisonReport> {
    if !(a > 0.0) || samples == 0 {
        return Err(Error::InvalidInput(format!(
            "need a > 0 and samples ≥ 1, got a = {a}, samples = {samples}"
        )));
    }
    let radius = comparison_ball(poly, model, a)?;
    comparison_run(samples, &model.base, radius, |q| {
        Ok((norm2(&poly.gradient(q)?), norm2(&model.grad(q)?)))
    })
}

/// Compare ‖Hess V‖_F against ‖Hess model‖_F (constant) on the model ball.
pub fn hessian_comparison(
    poly: &Polynomial,
    model: &QuadraticModel,
    a: f64,
    samples: usize,
) -> Result<ComparisonReport> {
    if !(a > 0.0) || samples == 0 {
        return Err(Error::InvalidInput(format!(
            "need a > 0 and samples ≥ 1, got a = {a}, samples = {samples}"
        )));
    }
    let radius = comparison_ball(poly, model, a)?;
    let model_fro = model.hessian.frobenius();
    comparison_run(samples, &model.base, radius, |q| {
        Ok((poly.hessian(q)?.frobenius(), model_fro))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::examples::{example1, example3};

    fn poly_1d_quartic() -> Polynomial {
        // V = q⁴ in one variable.
        Polynomial::new(1, vec![(vec![4], 1.0)]).unwrap()
    }

    #[test]
    fn scale_table_matches_direct_route() {
        let cases = vec![example1(), example3(0.5)];
        let points: [&[f64]; 3] = [&[0.3, -1.7], &[2.0, 1.0], &[-4.0, 0.25]];
        for poly in &cases {
            for n in 1..=poly.degree() {
                let table = ScaleTable::new(poly, n).unwrap();
                for q in points {
                    let direct = poly.r_geq(n, q).unwrap();
                    let cached = table.value(q).unwrap();
                    assert!(
                        (direct - cached).abs() <= 1e-12 * (1.0 + direct.abs()),
                        "n={n} q={q:?}: {direct} vs {cached}"
                    );
                }
            }
        }
    }

    #[test]
    fn scale_table_rejects_exhausted_orders() {
        let quad = Polynomial::new(1, vec![(vec![2], 0.5)]).unwrap();
        let err = ScaleTable::new(&quad, 3).unwrap_err().to_string();
        assert!(err.contains("vanishes identically"), "{err}");
    }

    /// Closed-form check for V = q⁴: R^{≥3}(q) = |24q|^{1/3} + 24^{1/4},
    /// and the probed constant really delivers ratio ≤ 2 on a dense
    /// deterministic pair family (the densest the 1-d case affords).
    #[test]
    fn slow_metric_quartic_obeys_factor_two() {
        let poly = poly_1d_quartic();
        let table = ScaleTable::new(&poly, 3).unwrap();
        let oracle = |q: f64| (24.0 * q.abs()).powf(1.0 / 3.0) + 24.0f64.powf(0.25);
        for q in [-7.0, -0.4, 0.0, 0.03, 1.0, 55.0] {
            let got = table.value(&[q]).unwrap();
            assert!((got - oracle(q)).abs() <= 1e-12 * oracle(q));
        }
        let rep = slow_metric_probe(&poly, 3, 2000).unwrap();
        assert!(rep.c >= 1.0 && rep.c < 100.0, "c = {}", rep.c);
        assert!(rep.max_ratio <= rep.c);
        // Dense sweep: magnitudes across six decades, both signs, and the
        // maximal admissible separation for the probed constant.
        for k in -30i32..=30 {
            let q = if k == 0 {
                0.0
            } else {
                f64::from(k).signum() * 10.0f64.powf(f64::from(k.abs()) / 5.0 - 3.0)
            };
            let r_q = oracle(q);
            for sign in [-1.0, 1.0] {
                let q2 = q + sign / (rep.c * r_q);
                let ratio = (r_q / oracle(q2)).max(oracle(q2) / r_q);
                assert!(ratio <= 2.0, "q={q} q'={q2} ratio={ratio}");
            }
        }
        // n = 3 has an order-2 companion scale.
        assert!(rep.c_prime.is_some());
        assert!(rep.max_ratio_prime.unwrap() <= rep.c_prime.unwrap());
    }

    #[test]
    fn slow_metric_probe_rejects_bad_inputs() {
        let poly = poly_1d_quartic();
        assert!(slow_metric_probe(&poly, 0, 2000).is_err());
        assert!(slow_metric_probe(&poly, 5, 2000).is_err());
        assert!(slow_metric_probe(&poly, 3, 999).is_err());
        let quad = Polynomial::new(1, vec![(vec![2], 1.0)]).unwrap();
        let msg = slow_metric_probe(&quad, 3, 1000)
            .unwrap_err()
            .to_string();
        assert!(msg.contains("vanishes identically"), "{msg}");
    }

    #[test]
    fn slow_metric_probe_is_resampling_stable() {
        let rep1 = slow_metric_probe(&example1(), 3, 1000).unwrap();
        let rep2 = slow_metric_probe(&example1(), 3, 2000).unwrap();
        assert!(rep1.c.is_finite() && rep2.c.is_finite());
        let rel = (rep1.c - rep2.c).abs() / rep1.c;
        assert!(rel <= 0.10, "c moved {rel:.3} under doubling");
    }

    #[test]
    fn single_center_partition_is_identically_one() {
        let poly = poly_1d_quartic();
        let domain = DomainBox::new(vec![-0.01], vec![0.01]).unwrap();
        let part = build_partition_default(&poly, &domain).unwrap();
        assert_eq!(part.len(), 1);
        for i in 0..=20 {
            let q = [-0.01 + 0.001 * i as f64];
            assert!((part.psi(0, &q).unwrap() - 1.0).abs() < 1e-14);
            assert!(norm2(&part.psi_gradient(0, &q).unwrap()) < 1e-14);
            assert!(part.psi_hessian(0, &q).unwrap().frobenius() < 1e-14);
        }
    }

    #[test]
    fn partition_invariants_hold_on_samples() {
        let poly = example1();
        let domain = DomainBox::centered(2.0, 2).unwrap();
        let part = build_partition(&poly, &domain, 0.25, 0.125).unwrap();
        assert!(part.len() > 10);
        assert!((part.inner_factor - 0.5).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut worst_norm = 0.0f64;
        let mut worst_overlap = 0usize;
        for _ in 0..300 {
            let q = [rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0)];
            let vals = part.psi_values(&q).unwrap();
            let sum_sq: f64 = vals.iter().map(|(_, v)| v * v).sum();
            worst_norm = worst_norm.max((sum_sq - 1.0).abs());
            let overlap = part.overlap_count(&q).unwrap();
            worst_overlap = worst_overlap.max(overlap);
            assert!(overlap >= 1);
            assert!(part.covered_by_inner_ball(&q).unwrap());
        }
        assert!(worst_norm <= 1e-10, "Σψ² off by {worst_norm:.2e}");
        assert!(
            worst_overlap <= part.overlap_bound,
            "overlap {worst_overlap} exceeds bound {}",
            part.overlap_bound
        );
    }

    #[test]
    fn partition_derivatives_match_finite_differences() {
        let poly = example1();
        let domain = DomainBox::centered(1.0, 2).unwrap();
        let part = build_partition(&poly, &domain, 0.25, 0.125).unwrap();
        let q = [0.31, -0.42];
        let js = part.active(&q).unwrap();
        assert!(!js.is_empty());
        let h = 1e-5;
        for &j in js.iter().take(3) {
            let grad = part.psi_gradient(j, &q).unwrap();
            let hess = part.psi_hessian(j, &q).unwrap();
            for i in 0..2 {
                let mut qp = q;
                let mut qm = q;
                qp[i] += h;
                qm[i] -= h;
                let fd = (part.psi(j, &qp).unwrap() - part.psi(j, &qm).unwrap()) / (2.0 * h);
                assert!(
                    (fd - grad[i]).abs() <= 1e-6 + 1e-4 * grad[i].abs(),
                    "∂{i}ψ_{j}: fd {fd} vs {g}",
                    g = grad[i]
                );
                let gp = part.psi_gradient(j, &qp).unwrap();
                let gm = part.psi_gradient(j, &qm).unwrap();
                for l in 0..2 {
                    let fd2 = (gp[l] - gm[l]) / (2.0 * h);
                    assert!(
                        (fd2 - hess.at(i, l)).abs() <= 1e-5 + 1e-3 * hess.at(i, l).abs(),
                        "∂{i}∂{l}ψ_{j}: fd {fd2} vs {v}",
                        v = hess.at(i, l)
                    );
                }
            }
        }
    }

    #[test]
    fn partition_round_trips_through_json() {
        let poly = example1();
        let domain = DomainBox::centered(1.0, 2).unwrap();
        let part = build_partition(&poly, &domain, 0.25, 0.125).unwrap();
        let back = PartitionSpec::from_json(&part.to_json()).unwrap();
        assert_eq!(part.len(), back.len());
        let q = [0.4, -0.9];
        let a = part.psi_values(&q).unwrap();
        let b = back.psi_values(&q).unwrap();
        assert_eq!(a.len(), b.len());
        for ((ja, va), (jb, vb)) in a.iter().zip(&b) {
            assert_eq!(ja, jb);
            assert!((va - vb).abs() < 1e-15);
        }
    }

    #[test]
    fn partition_rejects_bad_scales() {
        let poly = example1();
        let domain = DomainBox::centered(1.0, 2).unwrap();
        assert!(build_partition(&poly, &domain, 0.125, 0.25).is_err());
        // An inadmissibly large ball scale trips the slow-metric check.
        let err = build_partition(&poly, &domain, 10.0, 5.0)
            .unwrap_err()
            .to_string();
        assert!(err.contains("slow-metric"), "{err}");
        let quad = Polynomial::new(2, vec![(vec![2, 0], 1.0), (vec![0, 2], 1.0)]).unwrap();
        let err = build_partition(&quad, &domain, 0.25, 0.125)
            .unwrap_err()
            .to_string();
        assert!(err.contains("needs no localization"), "{err}");
    }

    #[test]
    fn quadratic_model_constants_match_closed_forms() {
        // V = q²/2 at 0: Tr₊ = 1, Tr₋ = 0, singular-free Hessian.
        let half_sq = Polynomial::new(1, vec![(vec![2], 0.5)]).unwrap();
        let m = taylor_quadratic(&half_sq, &[0.0]).unwrap();
        assert!((m.a_const - 2.0f64.powf(2.0 / 3.0)).abs() < 1e-14);
        assert!(m.min_gradient_norm().unwrap() < 1e-14);
        let b_expect = 1.0 / 2.0f64.ln().powi(2);
        assert!((m.b_const - b_expect).abs() < 1e-12);
        assert!((b_expect - 2.0814).abs() < 1e-4);
        assert!(m.t_j >= 2.0);

        // The two-variable example at (1, 1): eigenvalues {2, −6}.
        let m = taylor_quadratic(&example1(), &[1.0, 1.0]).unwrap();
        assert_eq!(m.gradient, vec![-2.0, -2.0]);
        assert_eq!(m.hessian.at(0, 1), -4.0);
        let b_expect = 7.0 / 8.0f64.ln().powi(2);
        assert!((m.b_const - b_expect).abs() < 1e-12);
        assert!((b_expect - 1.6188).abs() < 1e-4);
        assert!(m.in_j_kappa.is_none());

        // Linear potential: zero Hessian leaves the whole gradient.
        let lin = Polynomial::new(2, vec![(vec![1, 0], 3.0), (vec![0, 1], -2.0)]).unwrap();
        let m = taylor_quadratic(&lin, &[5.0, -4.0]).unwrap();
        let g = 13.0f64.sqrt();
        assert!((m.min_gradient_norm().unwrap() - g).abs() < 1e-14);
        let b_expect = g.powf(4.0 / 3.0).max(1.0 / 2.0f64.ln().powi(2));
        assert!((m.b_const - b_expect).abs() < 1e-12);
    }

    #[test]
    fn quadratic_model_is_exact_at_base() {
        let poly = example3(0.7);
        let base = [1.3, -0.8];
        let m = taylor_quadratic(&poly, &base).unwrap();
        assert!((m.eval(&base).unwrap() - poly.eval(&base).unwrap()).abs() < 1e-13);
        let g = poly.gradient(&base).unwrap();
        for (a, b) in m.grad(&base).unwrap().iter().zip(&g) {
            assert!((a - b).abs() <= 1e-13 * (1.0 + b.abs()));
        }
        let h = poly.hessian(&base).unwrap();
        for i in 0..2 {
            for l in 0..2 {
                assert!((m.hessian.at(i, l) - h.at(i, l)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn remainder_holds_with_explicit_constant() {
        let poly = example1();
        let m = taylor_quadratic(&poly, &[1.0, 1.0]).unwrap();
        let rep = remainder_check(&poly, &m, 0.25, 2000).unwrap();
        assert!(rep.pass, "max ratio {}", rep.max_ratio);
        assert!(rep.max_ratio > 0.0 && rep.max_ratio <= 1.0);
        // Independent spot value: d = 2, r = 4 gives
        // c₁ = Σ_{|β|=3} β!·a⁻² + Σ_{|β|=4} β!·a⁻³ with a = 1/4:
        // orders 3: β! over (3,0),(2,1),(1,2),(0,3) = 6+2+2+6 = 16, ×16;
        // orders 4: (4,0),(3,1),(2,2),(1,3),(0,4) = 24+6+4+6+24 = 64, ×64.
        let c1_expect = 16.0 * 16.0 + 64.0 * 64.0;
        assert!((rep.constant_order1 - c1_expect).abs() < 1e-9);
        let c2_expect = 16.0 * 4.0 + 64.0 * 16.0;
        assert!((rep.constant_order2 - c2_expect).abs() < 1e-9);
    }

    #[test]
    fn remainder_is_zero_for_quadratic_potentials() {
        let quad = Polynomial::new(
            2,
            vec![(vec![2, 0], 1.5), (vec![1, 1], -0.5), (vec![0, 1], 2.0)],
        )
        .unwrap();
        let m = taylor_quadratic(&quad, &[0.7, -0.2]).unwrap();
        let rep = remainder_check(&quad, &m, 0.25, 500).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.max_ratio, 0.0);
        assert!(rep.max_abs_defect < 1e-12);
    }

    #[test]
    fn factor_two_comparisons_on_model_balls() {
        let poly = example1();
        // Deep inside the gradient-elliptic region: both comparisons hold.
        let deep = taylor_quadratic(&poly, &[60.0, 60.0]).unwrap();
        let g = gradient_comparison(&poly, &deep, 0.25, 1000).unwrap();
        assert!(g.within_factor_two, "grad ratios [{}, {}]", g.min_ratio, g.max_ratio);
        let h = hessian_comparison(&poly, &deep, 0.25, 1000).unwrap();
        assert!(h.within_factor_two, "hess ratios [{}, {}]", h.min_ratio, h.max_ratio);
        // Far out along the axis (outside the region): the Hessian
        // comparison still holds.
        let axis = taylor_quadratic(&poly, &[70.0, 0.0]).unwrap();
        let h = hessian_comparison(&poly, &axis, 0.25, 1000).unwrap();
        assert!(h.within_factor_two, "hess ratios [{}, {}]", h.min_ratio, h.max_ratio);
    }

    #[test]
    fn base_point_rule_follows_region_membership() {
        let poly = example1();
        // A box deep inside Σ(1): every ball stays inside, bases = centers.
        let domain = DomainBox::new(vec![50.0, 50.0], vec![50.3, 50.3]).unwrap();
        let part = build_partition(&poly, &domain, 0.25, 0.125).unwrap();
        let models = models_for_partition(&poly, &part, 1.0).unwrap();
        assert_eq!(models.len(), part.len());
        assert!(models.iter().all(|m| m.in_j_kappa == Some(true)));
        for (m, c) in models.iter().zip(&part.centers) {
            assert_eq!(&m.base, c);
        }
        // A box inside the complement: bases move to complement points.
        let domain = DomainBox::new(vec![1.0, 1.0], vec![1.2, 1.2]).unwrap();
        let part = build_partition(&poly, &domain, 0.25, 0.125).unwrap();
        let models = models_for_partition(&poly, &part, 1.0).unwrap();
        assert!(models.iter().all(|m| m.in_j_kappa == Some(false)));
        let ev = SigmaEvaluator::new(&poly).unwrap();
        for m in &models {
            assert!(!ev.is_member(&m.base, 1.0));
        }
    }
}

//! Deterministic test-function families for quadratic-form experiments:
//! product states of position-space Gaussian bumps with low momentum
//! levels, plus seeded random vectors. Structured states probe localized
//! behavior (bumps sitting on axes and diagonals of the box); random
//! vectors guard against families that flatter the estimate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::grid::DiscreteGrid;

/// Product Gaussian exp(−|q − center|²/(2σ²)) sampled on the position
/// grid (length `q_dim`), not normalized.
pub fn gaussian_q_profile(grid: &DiscreteGrid, center: &[f64], sigma: f64) -> Result<Vec<f64>> {
    if center.len() != grid.d {
        return Err(Error::DimensionMismatch(format!(
            "center of dimension {} on a grid of dimension {}",
            center.len(),
            grid.d
        )));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidInput(format!("bump width must be positive, got {sigma}")));
    }
    let out = grid
        .q_points()
        .into_iter()
        .map(|q| {
            let r2: f64 = q.iter().zip(center).map(|(x, c)| (x - c) * (x - c)).sum();
            (-r2 / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    Ok(out)
}

/// Unit vector of the momentum basis state with the given level on each
/// axis (length `p_dim`).
pub fn momentum_unit(grid: &DiscreteGrid, levels: &[usize]) -> Result<Vec<f64>> {
    if levels.len() != grid.d {
        return Err(Error::DimensionMismatch(format!(
            "{} momentum levels on a grid of dimension {}",
            levels.len(),
            grid.d
        )));
    }
    let mut flat = 0usize;
    for &l in levels {
        if l >= grid.np {
            return Err(Error::InvalidInput(format!(
                "momentum level {l} exceeds the basis cutoff {}",
                grid.np
            )));
        }
        flat = flat * grid.np + l;
    }
    let mut v = vec![0.0; grid.p_dim()];
    v[flat] = 1.0;
    Ok(v)
}

/// Tensor product u[iq·p_dim + ip] = q_profile[iq]·p_vector[ip],
/// normalized to unit length.
pub fn product_state(grid: &DiscreteGrid, q_profile: &[f64], p_vector: &[f64]) -> Result<Vec<f64>> {
    if q_profile.len() != grid.q_dim() || p_vector.len() != grid.p_dim() {
        return Err(Error::DimensionMismatch(format!(
            "product state needs factors of length {} and {}, got {} and {}",
            grid.q_dim(),
            grid.p_dim(),
            q_profile.len(),
            p_vector.len()
        )));
    }
    let p_dim = grid.p_dim();
    let mut u = vec![0.0; grid.total_dim()];
    for (iq, &g) in q_profile.iter().enumerate() {
        for (ip, &p) in p_vector.iter().enumerate() {
            u[iq * p_dim + ip] = g * p;
        }
    }
    let n: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n < 1e-300 {
        return Err(Error::InvalidInput(
            "product state vanishes identically on the grid".into(),
        ));
    }
    for x in u.iter_mut() {
        *x /= n;
    }
    Ok(u)
}

/// A labeled test vector on the full tensor space.
#[derive(Debug, Clone)]
pub struct TestVector {
    pub label: String,
    pub vector: Vec<f64>,
}

/// Deterministic structured family: Gaussian bumps of two widths placed
/// at the box center, on each axis at half radius, and deep along the
/// main diagonal, tensored with the ground and first-excited momentum
/// levels.
pub fn structured_family(grid: &DiscreteGrid) -> Result<Vec<TestVector>> {
    let lq = grid.lq;
    let mut centers: Vec<(String, Vec<f64>)> = Vec::new();
    match grid.d {
        1 => {
            centers.push(("origin".into(), vec![0.05]));
            centers.push(("mid-axis".into(), vec![0.5 * lq]));
            centers.push(("deep".into(), vec![-0.7 * lq]));
        }
        _ => {
            centers.push(("origin".into(), vec![0.05, 0.05]));
            centers.push(("axis-1".into(), vec![0.5 * lq, 0.05]));
            centers.push(("axis-2".into(), vec![0.05, 0.5 * lq]));
            centers.push(("diagonal".into(), vec![0.45 * lq, 0.45 * lq]));
        }
    }
    let sigmas = [0.5f64.min(lq / 8.0), 1.0f64.min(lq / 4.0)];
    let mut levels: Vec<(String, Vec<usize>)> = vec![("p0".into(), vec![0; grid.d])];
    let mut first = vec![0; grid.d];
    first[0] = 1;
    levels.push(("p1".into(), first));

    let mut out = Vec::new();
    for (cname, c) in &centers {
        for (si, sigma) in sigmas.iter().enumerate() {
            let g = gaussian_q_profile(grid, c, *sigma)?;
            for (lname, lv) in &levels {
                let p = momentum_unit(grid, lv)?;
                out.push(TestVector {
                    label: format!("bump:{cname}:w{si}:{lname}"),
                    vector: product_state(grid, &g, &p)?,
                });
            }
        }
    }
    Ok(out)
}

/// Seeded uniform random unit vectors on the full tensor space.
pub fn random_family(grid: &DiscreteGrid, count: usize, seed: u64) -> Vec<TestVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.total_dim();
    (0..count)
        .map(|i| {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let nn: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for x in v.iter_mut() {
                *x /= nn;
            }
            TestVector {
                label: format!("random:{i}"),
                vector: v,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_states_are_unit_and_laid_out_q_slow() {
        let grid = DiscreteGrid::new(1, 5.0, 8, 4).unwrap();
        let g = gaussian_q_profile(&grid, &[0.0], 1.0).unwrap();
        let p = momentum_unit(&grid, &[2]).unwrap();
        let u = product_state(&grid, &g, &p).unwrap();
        let n: f64 = u.iter().map(|x| x * x).sum();
        assert!((n - 1.0).abs() < 1e-12);
        // Only momentum slot 2 of each position block is populated.
        for iq in 0..grid.q_dim() {
            for ip in 0..grid.p_dim() {
                let v = u[iq * grid.p_dim() + ip];
                if ip == 2 {
                    assert!(v > 0.0);
                } else {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn families_are_deterministic_and_validated() {
        let grid = DiscreteGrid::new(2, 4.0, 8, 4).unwrap();
        let fam1 = structured_family(&grid).unwrap();
        let fam2 = structured_family(&grid).unwrap();
        assert_eq!(fam1.len(), 16);
        for (a, b) in fam1.iter().zip(&fam2) {
            assert_eq!(a.label, b.label);
            assert_eq!(a.vector, b.vector);
        }
        let r1 = random_family(&grid, 3, 42);
        let r2 = random_family(&grid, 3, 42);
        assert_eq!(r1[2].vector, r2[2].vector);
        assert!(momentum_unit(&grid, &[4, 0]).is_err());
        assert!(gaussian_q_profile(&grid, &[0.0], 1.0).is_err());
        assert!(gaussian_q_profile(&grid, &[0.0, 0.0], -1.0).is_err());
    }
}

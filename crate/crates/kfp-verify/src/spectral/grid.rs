//! Discretization bookkeeping: a Dirichlet-truncated uniform grid in the
//! position variables tensored with a Hermite-function cutoff in the
//! momentum variables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the total discretized dimension Nq^d·Np^d.
pub const DEFAULT_BUDGET: usize = 400_000;

/// Environment variable that overrides the dimension budget.
pub const BUDGET_ENV: &str = "KFP_VERIFY_BUDGET";

/// Tensor grid: position axis gets `nq` interior points on [−lq, lq] with
/// zero boundary values (Dirichlet truncation); each momentum axis keeps
/// the first `np` Hermite functions.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DiscreteGrid {
    pub d: usize,
    pub lq: f64,
    pub nq: usize,
    pub np: usize,
}

impl DiscreteGrid {
    pub fn new(d: usize, lq: f64, nq: usize, np: usize) -> Result<Self> {
        if !(d == 1 || d == 2) {
            return Err(Error::InvalidInput(format!(
                "phase-space dimension must be 1 or 2, got {d}"
            )));
        }
        if !(lq.is_finite() && lq > 0.0) {
            return Err(Error::InvalidInput(format!(
                "box half-width must be positive, got {lq}"
            )));
        }
        if nq < 8 {
            return Err(Error::InvalidInput(format!(
                "need at least 8 position points per axis, got {nq}"
            )));
        }
        if np < 4 {
            return Err(Error::InvalidInput(format!(
                "need at least 4 momentum modes per axis, got {np}"
            )));
        }
        let grid = DiscreteGrid { d, lq, nq, np };
        let budget = Self::budget();
        if grid.total_dim() > budget {
            return Err(Error::BudgetExceeded(format!(
                "grid dimension {} exceeds the budget {} (override with {})",
                grid.total_dim(),
                budget,
                BUDGET_ENV
            )));
        }
        Ok(grid)
    }

    /// The configured dimension cap (environment-overridable).
    pub fn budget() -> usize {
        std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(DEFAULT_BUDGET)
    }

    /// Grid spacing: interior points of [−lq, lq] with both endpoints held
    /// at zero.
    pub fn h(&self) -> f64 {
        2.0 * self.lq / (self.nq + 1) as f64
    }

    /// The interior nodes along one position axis.
    pub fn q_nodes(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.nq).map(|i| -self.lq + (i + 1) as f64 * h).collect()
    }

    pub fn q_dim(&self) -> usize {
        self.nq.pow(self.d as u32)
    }

    pub fn p_dim(&self) -> usize {
        self.np.pow(self.d as u32)
    }

    pub fn total_dim(&self) -> usize {
        self.q_dim() * self.p_dim()
    }

    /// All position points in row-major flat order (axis 0 slowest),
    /// matching the tensor-product operator layout.
    pub fn q_points(&self) -> Vec<Vec<f64>> {
        let nodes = self.q_nodes();
        match self.d {
            1 => nodes.iter().map(|&x| vec![x]).collect(),
            _ => {
                let mut out = Vec::with_capacity(self.q_dim());
                for &x0 in &nodes {
                    for &x1 in &nodes {
                        out.push(vec![x0, x1]);
                    }
                }
                out
            }
        }
    }

    /// Total oscillator level (sum of Hermite indices) for each flat
    /// momentum index, row-major.
    pub fn p_levels(&self) -> Vec<usize> {
        match self.d {
            1 => (0..self.np).collect(),
            _ => {
                let mut out = Vec::with_capacity(self.p_dim());
                for k0 in 0..self.np {
                    for k1 in 0..self.np {
                        out.push(k0 + k1);
                    }
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validates_and_reports_dimensions() {
        let g = DiscreteGrid::new(1, 10.0, 8, 4).unwrap();
        assert_eq!(g.total_dim(), 32);
        assert!((g.h() - 20.0 / 9.0).abs() < 1e-15);
        let nodes = g.q_nodes();
        assert_eq!(nodes.len(), 8);
        assert!((nodes[0] + 10.0 - g.h()).abs() < 1e-12);
        assert!((nodes[7] - (10.0 - g.h())).abs() < 1e-12);

        assert!(DiscreteGrid::new(3, 10.0, 8, 4).is_err());
        assert!(DiscreteGrid::new(1, 10.0, 7, 4).is_err());
        assert!(DiscreteGrid::new(1, 10.0, 8, 3).is_err());
        assert!(DiscreteGrid::new(1, -1.0, 8, 4).is_err());
        // 2-d budget: (nq·np)² must stay under the cap.
        assert!(DiscreteGrid::new(2, 10.0, 256, 16).is_err());
    }

    #[test]
    fn flat_orderings_match_tensor_layout() {
        let g = DiscreteGrid::new(2, 5.0, 8, 4).unwrap();
        let pts = g.q_points();
        assert_eq!(pts.len(), 64);
        // Row-major: axis 0 slowest.
        assert_eq!(pts[0][0], pts[7][0]);
        assert!(pts[8][0] > pts[7][0]);
        let levels = g.p_levels();
        assert_eq!(levels.len(), 16);
        assert_eq!(levels[0], 0);
        assert_eq!(levels[1], 1);
        assert_eq!(levels[4], 1);
        assert_eq!(levels[15], 6);
    }
}

//! Assembly of the discrete operators: the kinetic-transport operator on
//! position-grid × Hermite-momentum space, the scalar Schrödinger-form
//! operator −Δ_q + |∇V|² − ΔV on the position grid, and the momentum
//! oscillator alone.
//!
//! Position derivatives use fourth-order centered stencils with Dirichlet
//! truncation (values beyond the box are zero), which keeps the first
//! derivative exactly antisymmetric and the second exactly symmetric.
//! Momentum operators act in the Hermite-function basis, where the
//! oscillator is diagonal and multiplication/differentiation are
//! tridiagonal ladder combinations.

use crate::error::{Error, Result};
use crate::poly::Polynomial;

use super::grid::DiscreteGrid;
use super::op::{CsrMatrix, DiscreteOperator, OperatorKind};

/// Fourth-order centered first derivative on n Dirichlet interior points:
/// (u_{i−2} − 8u_{i−1} + 8u_{i+1} − u_{i+2})/(12h). Exactly antisymmetric.
pub fn diff1_4th(n: usize, h: f64) -> CsrMatrix {
    let c = 1.0 / (12.0 * h);
    let mut trip = Vec::with_capacity(4 * n);
    for i in 0..n {
        if i >= 2 {
            trip.push((i, i - 2, c));
        }
        if i >= 1 {
            trip.push((i, i - 1, -8.0 * c));
        }
        if i + 1 < n {
            trip.push((i, i + 1, 8.0 * c));
        }
        if i + 2 < n {
            trip.push((i, i + 2, -c));
        }
    }
    CsrMatrix::from_triplets(n, n, &trip).expect("stencil indices are in range")
}

/// Fourth-order centered second derivative on n Dirichlet interior points:
/// (−u_{i−2} + 16u_{i−1} − 30u_i + 16u_{i+1} − u_{i+2})/(12h²). Symmetric.
pub fn diff2_4th(n: usize, h: f64) -> CsrMatrix {
    let c = 1.0 / (12.0 * h * h);
    let mut trip = Vec::with_capacity(5 * n);
    for i in 0..n {
        if i >= 2 {
            trip.push((i, i - 2, -c));
        }
        if i >= 1 {
            trip.push((i, i - 1, 16.0 * c));
        }
        trip.push((i, i, -30.0 * c));
        if i + 1 < n {
            trip.push((i, i + 1, 16.0 * c));
        }
        if i + 2 < n {
            trip.push((i, i + 2, -c));
        }
    }
    CsrMatrix::from_triplets(n, n, &trip).expect("stencil indices are in range")
}

/// Oscillator block in the Hermite basis: diag(k + 1/2).
pub fn hermite_number(np: usize) -> CsrMatrix {
    CsrMatrix::diagonal(&(0..np).map(|k| k as f64 + 0.5).collect::<Vec<_>>())
}

/// Momentum multiplication in the Hermite basis: symmetric tridiagonal
/// with entries √((k+1)/2) on the off-diagonals.
pub fn hermite_p(np: usize) -> CsrMatrix {
    let mut trip = Vec::with_capacity(2 * np);
    for k in 0..np.saturating_sub(1) {
        let v = ((k as f64 + 1.0) / 2.0).sqrt();
        trip.push((k, k + 1, v));
        trip.push((k + 1, k, v));
    }
    CsrMatrix::from_triplets(np, np, &trip).expect("ladder indices are in range")
}

/// Momentum differentiation in the Hermite basis: antisymmetric
/// tridiagonal, +√((k+1)/2) above the diagonal, −√((k+1)/2) below.
pub fn hermite_dp(np: usize) -> CsrMatrix {
    let mut trip = Vec::with_capacity(2 * np);
    for k in 0..np.saturating_sub(1) {
        let v = ((k as f64 + 1.0) / 2.0).sqrt();
        trip.push((k, k + 1, v));
        trip.push((k + 1, k, -v));
    }
    CsrMatrix::from_triplets(np, np, &trip).expect("ladder indices are in range")
}

/// Extend a one-axis block to the full tensor space over `d` axes of size
/// `n`, acting on the given axis (axis 0 is the slowest index).
fn extend_axis(block: &CsrMatrix, axis: usize, d: usize, n: usize) -> CsrMatrix {
    match (d, axis) {
        (1, _) => block.clone(),
        (2, 0) => block.kron(&CsrMatrix::identity(n)),
        (2, _) => CsrMatrix::identity(n).kron(block),
        _ => unreachable!("grids are one- or two-dimensional"),
    }
}

/// Oscillator over all momentum axes, on the momentum space alone.
fn oscillator_p_space(grid: &DiscreteGrid) -> CsrMatrix {
    let one = hermite_number(grid.np);
    let mut total = extend_axis(&one, 0, grid.d, grid.np);
    for axis in 1..grid.d {
        total = total
            .add(&extend_axis(&one, axis, grid.d, grid.np), 1.0, 1.0)
            .expect("same shape");
    }
    total
}

/// The transport-plus-oscillator operator on position × momentum space:
/// K = Σ_a (momentum_a)·∂_{q_a} − Σ_a (∂_a V)(q)·∂_{p_a} + O_p,
/// with the transport part exactly skew-symmetric by construction.
pub fn assemble_kfp(poly: &Polynomial, grid: &DiscreteGrid) -> Result<DiscreteOperator> {
    if poly.dimension() != grid.d {
        return Err(Error::DimensionMismatch(format!(
            "potential dimension {} does not match grid dimension {}",
            poly.dimension(),
            grid.d
        )));
    }
    let d = grid.d;
    let nq = grid.nq;
    let np = grid.np;
    let h = grid.h();
    let q_dim = grid.q_dim();
    let iq = CsrMatrix::identity(q_dim);

    // Gradient of the potential sampled on the flat position grid.
    let points = grid.q_points();
    let mut grad_diag: Vec<Vec<f64>> = vec![Vec::with_capacity(q_dim); d];
    for q in &points {
        let g = poly.gradient(q)?;
        for (a, v) in g.into_iter().enumerate() {
            grad_diag[a].push(v);
        }
    }

    let dq1 = diff1_4th(nq, h);
    let p_mul = hermite_p(np);
    let dp = hermite_dp(np);

    let mut k = iq.kron(&oscillator_p_space(grid));
    for a in 0..d {
        let transport = extend_axis(&dq1, a, d, nq).kron(&extend_axis(&p_mul, a, d, np));
        k = k.add(&transport, 1.0, 1.0)?;
        let force = CsrMatrix::diagonal(&grad_diag[a]).kron(&extend_axis(&dp, a, d, np));
        k = k.add(&force, 1.0, -1.0)?;
    }
    Ok(DiscreteOperator {
        matrix: k,
        grid: *grid,
        kind: OperatorKind::Kfp,
        symmetric: false,
    })
}

/// The scalar operator −Δ_q + |∇V(q)|² − ΔV(q) on the position grid.
pub fn assemble_witten(poly: &Polynomial, grid: &DiscreteGrid) -> Result<DiscreteOperator> {
    if poly.dimension() != grid.d {
        return Err(Error::DimensionMismatch(format!(
            "potential dimension {} does not match grid dimension {}",
            poly.dimension(),
            grid.d
        )));
    }
    let d = grid.d;
    let nq = grid.nq;
    let h = grid.h();
    let points = grid.q_points();
    let mut pot = Vec::with_capacity(points.len());
    for q in &points {
        let grad = poly.gradient(q)?;
        let hess = poly.hessian(q)?;
        let g2: f64 = grad.iter().map(|v| v * v).sum();
        pot.push(g2 - hess.trace());
    }
    let d2 = diff2_4th(nq, h);
    let mut w = CsrMatrix::diagonal(&pot);
    for a in 0..d {
        w = w.add(&extend_axis(&d2, a, d, nq), 1.0, -1.0)?;
    }
    Ok(DiscreteOperator {
        matrix: w,
        grid: *grid,
        kind: OperatorKind::Witten,
        symmetric: true,
    })
}

/// Momentum multiplication along one axis, extended to the full momentum
/// space of the grid (block-diagonal over position indices when tensored
/// with a position-space diagonal).
pub fn momentum_multiplication_axis(grid: &DiscreteGrid, axis: usize) -> Result<CsrMatrix> {
    if axis >= grid.d {
        return Err(Error::InvalidInput(format!(
            "axis {axis} on a {}-dimensional grid",
            grid.d
        )));
    }
    Ok(extend_axis(&hermite_p(grid.np), axis, grid.d, grid.np))
}

/// The momentum oscillator alone, on momentum space.
pub fn assemble_oscillator(grid: &DiscreteGrid) -> Result<DiscreteOperator> {
    Ok(DiscreteOperator {
        matrix: oscillator_p_space(grid),
        grid: *grid,
        kind: OperatorKind::OscillatorP,
        symmetric: true,
    })
}

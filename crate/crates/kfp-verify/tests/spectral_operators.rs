//! Cross-checks of the assembled transport-plus-oscillator operator
//! against a dense complex eigensolver at small cutoffs: the bottom of
//! the real part of the spectrum must sit at the oscillator floor and
//! converge as the cutoff grows, and accretivity must hold for every
//! eigenvalue, not just for quadratic forms of test vectors.

use kfp_verify::poly::Polynomial;
use kfp_verify::spectral::{assemble_kfp, low_spectrum_deflated, DiscreteGrid};

fn dense_eigen_real_parts(op: &kfp_verify::spectral::DiscreteOperator) -> Vec<f64> {
    let n = op.dim();
    let rows = op.matrix.to_dense();
    let m = nalgebra::DMatrix::<f64>::from_fn(n, n, |i, j| rows[i][j]);
    let eig = m.complex_eigenvalues();
    let mut re: Vec<f64> = eig.iter().map(|z| z.re).collect();
    re.sort_by(|a, b| a.partial_cmp(b).expect("finite spectrum"));
    re
}

#[test]
fn quadratic_potential_spectrum_floor_converges_to_the_oscillator_bottom() {
    let poly = Polynomial::new(1, vec![(vec![2], 0.5)]).unwrap();
    let mut floors = Vec::new();
    for cutoff in [8usize, 12, 16, 24] {
        let grid = DiscreteGrid::new(1, 6.0, cutoff, cutoff).unwrap();
        let op = assemble_kfp(&poly, &grid).unwrap();
        let re = dense_eigen_real_parts(&op);
        // Accretivity at the spectral level: the symmetric part is the
        // oscillator, bounded below by 1/2, so every eigenvalue's real
        // part is at least 1/2 up to solver roundoff.
        assert!(
            re[0] >= 0.5 - 1e-8,
            "cutoff {cutoff}: eigenvalue with real part {} below the floor",
            re[0]
        );
        floors.push(re[0]);
        println!(
            "cutoff {cutoff:>2}: lowest real parts {:.6} {:.6} {:.6}",
            re[0], re[1], re[2]
        );
    }
    // The floor is attained by the steady state and settles at 1/2.
    let last = *floors.last().unwrap();
    assert!(
        (last - 0.5).abs() < 2e-3,
        "floor at the finest cutoff: {last}"
    );
    // Convergence: the finest two cutoffs agree better than the
    // coarsest two.
    let coarse_step = (floors[1] - floors[0]).abs();
    let fine_step = (floors[3] - floors[2]).abs();
    assert!(
        fine_step <= coarse_step.max(1e-12),
        "floor drift grew under refinement: {coarse_step} then {fine_step}"
    );
}

#[test]
fn lanczos_gap_agrees_with_the_dense_oracle() {
    // Smallest singular value on the complement of the steady state,
    // cross-checked against the dense spectrum route at one cutoff.
    let poly = Polynomial::new(1, vec![(vec![2], 0.5)]).unwrap();
    let grid = DiscreteGrid::new(1, 6.0, 16, 16).unwrap();
    let op = assemble_kfp(&poly, &grid).unwrap();
    let np = grid.p_dim();
    let mut steady = vec![0.0; op.dim()];
    for (i, q) in grid.q_nodes().iter().enumerate() {
        steady[i * np] = (-q * q / 2.0).exp();
    }
    let rep = low_spectrum_deflated(&op, 1, &[steady]).unwrap();
    assert!(rep.converged);
    // Dense oracle for the same quantity: singular values of the matrix
    // restricted to the complement. Build the projector P = I − vvᵀ and
    // take the two smallest singular values of K·P + v vᵀ (the rank-one
    // patch moves the deflated direction to singular value 1 exactly,
    // assuming the gap stays below 1).
    let n = op.dim();
    let nv: f64 = {
        let mut s = 0.0;
        for (i, q) in grid.q_nodes().iter().enumerate() {
            let g: f64 = (-q * q / 2.0).exp();
            s += g * g;
            let _ = i;
        }
        s.sqrt()
    };
    let rows = op.matrix.to_dense();
    let mut v = vec![0.0; n];
    for (i, q) in grid.q_nodes().iter().enumerate() {
        v[i * np] = (-q * q / 2.0).exp() / nv;
    }
    let m = nalgebra::DMatrix::<f64>::from_fn(n, n, |i, j| {
        let mut kp = rows[i][j] - rows[i].iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() * v[j];
        kp += v[i] * v[j];
        kp
    });
    let svd = m.svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    sv.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    assert!(
        (rep.values[0] - sv[0]).abs() < 1e-6 * (1.0 + sv[0]),
        "gap {} vs dense {}",
        rep.values[0],
        sv[0]
    );
}

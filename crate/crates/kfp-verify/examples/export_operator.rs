//! Assemble the kinetic operator K = X_V + O_p on a small tensor grid
//! and export it in Matrix Market coordinate format, ready for external
//! sparse solvers. Also assembles the companion operators (momentum
//! oscillator, position-side second-order operator with potential
//! weights) and prints their structural statistics.

use std::fs;

use kfp_verify::poly::examples::example1;
use kfp_verify::spectral::{assemble_kfp, assemble_oscillator, assemble_witten, DiscreteGrid};

fn main() {
    let poly = example1();
    let grid = DiscreteGrid::new(2, 6.0, 16, 4).unwrap();

    let kfp = assemble_kfp(&poly, &grid).unwrap();
    println!(
        "K on d = {} grid ({} position points/axis × {} Hermite levels/axis):",
        grid.d, grid.nq, grid.np
    );
    println!(
        "  dimension {} × {}, {} stored entries ({:.3}% fill)",
        kfp.matrix.n_rows(),
        kfp.matrix.n_cols(),
        kfp.matrix.nnz(),
        100.0 * kfp.matrix.nnz() as f64 / (kfp.dim() as f64).powi(2)
    );
    println!("  symmetric: {}", kfp.symmetric);

    let antisym = kfp
        .matrix
        .add(&kfp.matrix.transpose(), 0.5, -0.5)
        .unwrap();
    let sym = kfp.matrix.add(&kfp.matrix.transpose(), 0.5, 0.5).unwrap();
    println!(
        "  splitting ‖K‖_F = {:.3}: symmetric part {:.3}, transport part {:.3}",
        kfp.matrix.frobenius(),
        sym.frobenius(),
        antisym.frobenius()
    );

    let path = std::env::temp_dir().join("kfp_operator.mtx");
    fs::write(&path, kfp.to_matrix_market()).unwrap();
    println!("  wrote {}", path.display());
    println!();

    let osc = assemble_oscillator(&grid).unwrap();
    println!(
        "momentum oscillator O_p: {} × {}, {} entries, max asymmetry {:.1e}",
        osc.matrix.n_rows(),
        osc.matrix.n_cols(),
        osc.matrix.nnz(),
        osc.matrix.max_asymmetry()
    );

    let grid1 = DiscreteGrid::new(1, 8.0, 64, 4).unwrap();
    let quad = kfp_verify::poly::Polynomial::new(1, vec![(vec![2], 0.5)]).unwrap();
    let witten = assemble_witten(&quad, &grid1).unwrap();
    println!(
        "position-side comparison operator (V = q²/2, d = 1): {} × {}, {} entries, max asymmetry {:.1e}",
        witten.matrix.n_rows(),
        witten.matrix.n_cols(),
        witten.matrix.nnz(),
        witten.matrix.max_asymmetry()
    );
}

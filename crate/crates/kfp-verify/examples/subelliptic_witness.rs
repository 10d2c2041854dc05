//! Measure empirical subelliptic constants: the smallest c with
//!
//!   Σ_i ‖Λ_i u‖² ≤ c·(‖Ku‖² + c·‖u‖²)
//!
//! over a deterministic family of test vectors, where the Λ_i are the
//! four logarithmically tempered multipliers (oscillator level, ⟨∇V⟩^{2/3},
//! ⟨‖Hess V‖⟩^{1/2}, ⟨D_q⟩^{2/3}). A sound discretization keeps c
//! bounded as the grid is refined; blow-up would signal a lost estimate.

use kfp_verify::poly::Polynomial;
use kfp_verify::spectral::{subelliptic_report, DiscreteGrid, EstimateReport};

fn show(title: &str, rep: &EstimateReport) {
    println!("{title}");
    println!(
        "  grid: d = {}, L_q = {}, {} position points/axis, {} Hermite levels/axis",
        rep.grid.d, rep.grid.lq, rep.grid.nq, rep.grid.np
    );
    println!("  worst constant c = {:.6}", rep.c);
    let names = ["oscillator", "gradient", "hessian", "frequency"];
    print!("  multiplier shares at the worst vector:");
    for (name, share) in names.iter().zip(rep.multiplier_shares.iter()) {
        print!("  {name} {:.1}%", 100.0 * share);
    }
    println!();
    println!("  top ratios over {} test vectors:", rep.trials);
    for r in rep.ratios.iter().take(4) {
        println!("    {:<28} c(u) = {:.6}", r.label, r.c);
    }
    println!();
}

fn main() {
    // Quadratic well in one variable: fully solvable reference case.
    let osc = Polynomial::new(1, vec![(vec![2], 0.5)]).unwrap();

    let coarse = DiscreteGrid::new(1, 8.0, 32, 8).unwrap();
    let fine = DiscreteGrid::new(1, 8.0, 48, 12).unwrap();

    let rep_c = subelliptic_report(&osc, &coarse, 4).unwrap();
    let rep_f = subelliptic_report(&osc, &fine, 4).unwrap();

    show("V = q²/2 (d = 1), coarse grid", &rep_c);
    show("V = q²/2 (d = 1), refined grid (+50% resolution)", &rep_f);
    println!(
        "stability under refinement: c changes by {:+.2}%",
        100.0 * (rep_f.c - rep_c.c) / rep_c.c
    );
    println!();

    // The degenerate two-dimensional saddle family member V = −q1²q2²:
    // gradient and Hessian multipliers now vary over the grid.
    let saddle = Polynomial::new(2, vec![(vec![2, 2], -1.0)]).unwrap();
    let grid2 = DiscreteGrid::new(2, 6.0, 24, 6).unwrap();
    let rep2 = subelliptic_report(&saddle, &grid2, 2).unwrap();
    show("V = -q1²q2² (d = 2), coarse grid", &rep2);
}

//! Empirically discriminate the asymptotic growth conditions across the
//! family V = −q1²(q1² + q2²)ⁿ.
//!
//! For n = 1 the indicator ratio R(3,q)⁴/‖Hess V‖_F decays like |q|^{−2/3}
//! along the complement and both conditions hold; for n ≥ 2 the ratio
//! stops decaying and the decay condition fails. The check scans the
//! complement far beyond the sampling box so the fitted exponent reflects
//! the asymptotic regime, not the transient near the box.

use kfp_verify::poly::examples;
use kfp_verify::sigma::{check_assumption, ScanConfig};

fn main() {
    let cfg = ScanConfig {
        grid_per_axis: 32,
        track_radius_cap: 1e7,
        ..ScanConfig::default()
    };
    let (kappa, c1) = (2.0, 4.0);

    println!("growth conditions at kappa = {kappa}, c1 = {c1}:");
    println!();
    let cases = [
        ("example 1: -q1^2 q2^2    ", examples::example1()),
        ("example 2, n=1           ", examples::example2(1)),
        ("example 2, n=2           ", examples::example2(2)),
        ("example 2, n=3           ", examples::example2(3)),
    ];
    for (name, poly) in cases {
        let rep = check_assumption(&poly, kappa, c1, &cfg).unwrap();
        let exponent = rep
            .indicator_decay
            .fit
            .as_ref()
            .map(|f| format!("{:+.3}", f.exponent))
            .unwrap_or_else(|| "  (vacuous)".into());
        println!(
            "  {name} trace domination: {}   decay: {} (fitted exponent {exponent})   overall: {}",
            if rep.trace_domination.pass { "pass" } else { "FAIL" },
            if rep.indicator_decay.pass { "pass" } else { "FAIL" },
            if rep.trace_domination.pass && rep.indicator_decay.pass {
                "PASS"
            } else {
                "FAIL"
            }
        );
    }
}

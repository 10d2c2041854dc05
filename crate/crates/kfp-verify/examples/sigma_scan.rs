//! Map the complement of the coercive region Σ(κ) for V = −q1²q2² and
//! draw it as an ASCII grid ('#' = member of Σ(κ), '.' = complement).
//!
//! The gradient vanishes on both coordinate axes, so the complement hugs
//! them all the way out: the radial probe reports an unbounded complement
//! with a witness direction close to an axis.

use kfp_verify::poly::examples;
use kfp_verify::sigma::{scan_complement, sigma_membership, BoundednessVerdict, ScanConfig};

fn main() {
    let poly = examples::example1();
    let kappa = 2.0;
    let box_radius = 10.0;

    // ASCII membership map on a coarse grid.
    let m = 33usize;
    println!("membership on [-{box_radius}, {box_radius}]², kappa = {kappa}:");
    for i in 0..m {
        let q2 = box_radius - 2.0 * box_radius * i as f64 / (m - 1) as f64;
        let row: String = (0..m)
            .map(|j| {
                let q1 = -box_radius + 2.0 * box_radius * j as f64 / (m - 1) as f64;
                if sigma_membership(&poly, kappa, &[q1, q2]).unwrap().member {
                    '#'
                } else {
                    '.'
                }
            })
            .collect();
        println!("  {row}");
    }

    let cfg = ScanConfig {
        box_radius,
        grid_per_axis: 48,
        ..ScanConfig::default()
    };
    let scan = scan_complement(&poly, kappa, &cfg).unwrap();
    println!();
    println!(
        "grid complement points in the box: {}",
        scan.grid_complement.len()
    );
    println!("far complement samples: {}", scan.far_samples.len());
    match &scan.verdict {
        BoundednessVerdict::Unbounded { witness } => println!(
            "verdict: unbounded — complement followed to radius {:.3e} near {:?}",
            witness.radius, witness.point
        ),
        BoundednessVerdict::BoundedProbe {
            scanned_to,
            last_complement_radius,
        } => println!(
            "verdict: bounded probe — scanned to {scanned_to:.3e}, last complement at {last_complement_radius:?}"
        ),
    }
    println!("evaluations used: {}", scan.samples_used);
}

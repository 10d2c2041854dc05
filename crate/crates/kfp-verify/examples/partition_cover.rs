//! Build the scale-adapted quadratic partition for a quartic potential
//! and verify its defining properties pointwise: the normalized cutoffs
//! square-sum to one, only boundedly many overlap anywhere, and the
//! gradient sum stays controlled by the local derivative scale.

use kfp_verify::localization::{build_partition_default, DomainBox, ScaleTable};
use kfp_verify::poly::Polynomial;

fn main() {
    let poly = Polynomial::new(1, vec![(vec![4], 0.25)]).unwrap();
    let domain = DomainBox::centered(12.0, 1).unwrap();
    let part = build_partition_default(&poly, &domain).unwrap();

    println!("partition for V = q^4/4 on [-12, 12]:");
    println!("  centers: {}", part.centers.len());
    println!("  ball scales: a = {:.4}, b = {:.4}", part.a, part.b);
    println!(
        "  support radii: {:.4} (near 0) down to {:.4} (at the edge)",
        part.radii.iter().cloned().fold(0.0f64, f64::max),
        part.radii.iter().cloned().fold(f64::INFINITY, f64::min)
    );
    println!("  packing bound on overlaps: {}", part.overlap_bound);
    println!();

    // Pointwise checks on a dense sweep.
    let scale = ScaleTable::new(&poly, 3).unwrap();
    let m = 2001;
    let mut worst_sum = 0.0f64;
    let mut max_overlap = 0usize;
    let mut worst_grad_const = 0.0f64;
    for i in 0..m {
        let q = [-12.0 + 24.0 * i as f64 / (m - 1) as f64];
        let sum: f64 = part
            .psi_values(&q)
            .unwrap()
            .iter()
            .map(|(_, v)| v * v)
            .sum();
        worst_sum = worst_sum.max((sum - 1.0).abs());
        max_overlap = max_overlap.max(part.overlap_count(&q).unwrap());
        let g = part.gradient_sum_sq(&q).unwrap();
        let r = scale.value(&q).unwrap();
        worst_grad_const = worst_grad_const.max(g / (r * r));
    }
    println!("checked {m} points:");
    println!("  max |sum psi_j^2 - 1|          = {worst_sum:.3e}");
    println!(
        "  max simultaneous overlaps      = {max_overlap} (bound {})",
        part.overlap_bound
    );
    println!("  max sum|grad psi_j|^2 / R(q)^2 = {worst_grad_const:.4}");
}

//! Working-scale checks of the ball-covering partition of unity and the
//! quadratic-model remainder bound: a large box for the two-variable saddle
//! potential, ten thousand sample points, and every standard example
//! potential for the remainder.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kfp_verify::localization::{
    build_partition, remainder_check, taylor_quadratic, DomainBox, ScaleTable,
};
use kfp_verify::poly::examples::{example1, example2, example3};

#[test]
fn partition_of_unity_over_large_box() {
    let poly = example1();
    let domain = DomainBox::centered(10.0, 2).unwrap();
    let start = Instant::now();
    let part = build_partition(&poly, &domain, 0.25, 0.125).unwrap();
    let built = start.elapsed();

    // Normalization, covering, and overlap at ten thousand random points.
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_norm = 0.0f64;
    let mut worst_overlap = 0usize;
    for _ in 0..10_000 {
        let q = [rng.gen_range(-10.0..=10.0), rng.gen_range(-10.0..=10.0)];
        let vals = part.psi_values(&q).unwrap();
        let sum_sq: f64 = vals.iter().map(|(_, v)| v * v).sum();
        worst_norm = worst_norm.max((sum_sq - 1.0).abs());
        worst_overlap = worst_overlap.max(vals.len());
        assert!(part.covered_by_inner_ball(&q).unwrap());
    }
    assert!(worst_norm <= 1e-10, "Σψ² off by {worst_norm:.2e}");
    assert!(
        worst_overlap <= part.overlap_bound,
        "overlap {worst_overlap} exceeds the packing bound {}",
        part.overlap_bound
    );

    // The cutoff-gradient bound Σ|∇ψ_j|² ≤ c·R^{≥3}(q)²: the measured c
    // must be stable (±20%) when the measurement grid is doubled.
    let table = ScaleTable::new(&poly, 3).unwrap();
    let measure_c = |per_axis: usize| -> f64 {
        let mut c = 0.0f64;
        for i in 0..per_axis {
            for l in 0..per_axis {
                let q = [
                    -10.0 + 20.0 * i as f64 / (per_axis - 1) as f64,
                    -10.0 + 20.0 * l as f64 / (per_axis - 1) as f64,
                ];
                let g = part.gradient_sum_sq(&q).unwrap();
                let r = table.value(&q).unwrap();
                c = c.max(g / (r * r));
            }
        }
        c
    };
    let c_coarse = measure_c(64);
    let c_fine = measure_c(128);
    assert!(c_coarse.is_finite() && c_coarse > 0.0);
    let rel = (c_fine - c_coarse).abs() / c_coarse;
    assert!(
        rel <= 0.20,
        "gradient-bound constant moved {rel:.3} under grid doubling \
         ({c_coarse:.3} → {c_fine:.3})"
    );

    let total = start.elapsed();
    assert!(
        total.as_secs() < 60,
        "partition checks took {total:?} (build {built:?})"
    );
}

#[test]
fn remainder_bound_across_standard_potentials() {
    let cases: Vec<(kfp_verify::Polynomial, Vec<f64>)> = vec![
        (example1(), vec![1.0, 1.0]),
        (example2(2), vec![1.0, 1.0]),
        (example3(0.5), vec![1.3, -0.8]),
    ];
    for (poly, base) in &cases {
        let model = taylor_quadratic(poly, base).unwrap();
        let rep = remainder_check(poly, &model, 0.25, 10_000).unwrap();
        assert!(
            rep.pass && rep.max_ratio <= 1.0,
            "base {base:?}: max ratio {}",
            rep.max_ratio
        );
        assert!(rep.max_ratio > 0.0);
        assert!(rep.ball_radius > 0.0);
    }
}

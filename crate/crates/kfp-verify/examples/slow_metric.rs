//! Probe the slow-variation constant of the derivative scale R^{≥n}(q):
//! the smallest ladder constant C such that R^{≥n}(q)·|q−q'| ≤ 1/C keeps
//! R^{≥n}(q')/R^{≥n}(q) within [1/C, C] over sampled pairs.
//!
//! This constant drives the admissible ball scales of the quadratic
//! partition: supports of radius a/R^{≥3} with a = 1/(2C) stay inside the
//! region where the scale (hence the quadratic model) barely moves.

use kfp_verify::localization::slow_metric_probe;
use kfp_verify::poly::examples;

fn main() {
    let cases = [
        ("example 1: -q1^2 q2^2        ", examples::example1()),
        ("example 2, n=2               ", examples::example2(2)),
        ("example 3, eps=0.5           ", examples::example3(0.5)),
    ];
    for (name, poly) in cases {
        let rep = slow_metric_probe(&poly, 3, 20_000).unwrap();
        println!("{name}");
        println!(
            "  order n = {}, pairs = {}: C = {:.4} (worst ratio at acceptance {:.4})",
            rep.n, rep.trial_pairs, rep.c, rep.max_ratio
        );
        if let (Some(cp), Some(mp)) = (rep.c_prime, rep.max_ratio_prime) {
            println!(
                "  one order down (R^(>=2) under the same pair constraint): C' = {cp:.4} (worst {mp:.4})"
            );
        }
        println!(
            "  admissible partition scales: a = {:.4}, b = {:.4}",
            1.0 / (2.0 * rep.c),
            1.0 / (4.0 * rep.c)
        );
        println!();
    }
}

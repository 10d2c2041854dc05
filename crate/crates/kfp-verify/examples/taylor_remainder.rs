//! Quadratic models on partition balls, with certified Taylor remainders.
//!
//! Each cutoff gets the second-order Taylor model of V at a base point
//! chosen by the region rule: the center itself when the whole support
//! ball sits inside the coercive region Σ(κ), otherwise a complement
//! point found on the support. On the model ball, first- and
//! second-derivative remainders obey an explicit constant times the
//! local scale, and the model's gradient and Hessian magnitudes track
//! the true ones within a factor of two.

use kfp_verify::localization::{
    build_partition_default, gradient_comparison, hessian_comparison, models_for_partition,
    remainder_check, DomainBox, QuadraticModel,
};
use kfp_verify::poly::examples;
use kfp_verify::poly::Polynomial;

fn survey(poly: &Polynomial, models: &[QuadraticModel], a: f64, label: &str) {
    // Remainder sampling on every ball would be slow; a deterministic
    // stride keeps the survey representative and the run instant.
    let stride = models.len().div_ceil(150).max(1);
    let picked: Vec<&QuadraticModel> = models.iter().step_by(stride).collect();

    let mut worst_ratio = 0.0f64;
    let mut grad_spread = (f64::INFINITY, 0.0f64);
    let mut hess_spread = (f64::INFINITY, 0.0f64);
    for model in &picked {
        let rem = remainder_check(poly, model, a, 300).unwrap();
        assert!(rem.pass, "remainder bound failed at {:?}", model.base);
        worst_ratio = worst_ratio.max(rem.max_ratio);
        let g = gradient_comparison(poly, model, a, 300).unwrap();
        let h = hessian_comparison(poly, model, a, 300).unwrap();
        grad_spread = (grad_spread.0.min(g.min_ratio), grad_spread.1.max(g.max_ratio));
        hess_spread = (hess_spread.0.min(h.min_ratio), hess_spread.1.max(h.max_ratio));
    }
    let in_region = models
        .iter()
        .filter(|m| m.in_j_kappa == Some(true))
        .count();

    println!("{label}");
    println!(
        "  balls with support fully inside the region: {in_region} / {}",
        models.len()
    );
    println!(
        "  sampled {} balls, 300 points each: worst remainder / (constant * scale^order) = {:.2e}  (bound requires <= 1)",
        picked.len(),
        worst_ratio
    );
    println!(
        "  gradient magnitude ratio across sampled balls: [{:.4}, {:.4}]",
        grad_spread.0, grad_spread.1
    );
    println!(
        "  Hessian magnitude ratio across sampled balls:  [{:.4}, {:.4}]",
        hess_spread.0, hess_spread.1
    );
    println!();
}

fn main() {
    let poly = examples::example3(0.5);
    let kappa = 2.0;

    // A box straddling the origin, where the complement of Σ(κ) lives:
    // base points migrate off the centers.
    let near = DomainBox::centered(2.0, 2).unwrap();
    let part = build_partition_default(&poly, &near).unwrap();
    let models = models_for_partition(&poly, &part, kappa).unwrap();
    println!(
        "example 3 (eps = 0.5), kappa = {kappa}: scales a = {:.4}, b = {:.4}",
        part.a, part.b
    );
    println!();
    survey(
        &poly,
        &models,
        part.a,
        &format!("box [-2, 2]^2 around the degenerate set ({} cutoffs):", part.len()),
    );

    // A box well away from both parabolas: every support ball stays
    // inside Σ(κ) and the bases coincide with the centers.
    let far = DomainBox::new(vec![10.0, -0.5], vec![11.0, 0.5]).unwrap();
    let part_far = build_partition_default(&poly, &far).unwrap();
    let models_far = models_for_partition(&poly, &part_far, kappa).unwrap();
    survey(
        &poly,
        &models_far,
        part_far.a,
        &format!(
            "box [10, 11] x [-1/2, 1/2] in the coercive zone ({} cutoffs):",
            part_far.len()
        ),
    );
}

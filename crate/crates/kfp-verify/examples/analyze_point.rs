//! Evaluate a potential and everything derived from it at single points.
//!
//! Uses V = −q1²q2², whose gradient and Hessian norms have closed forms
//! (|∇V| = 2|q1·q2|·|q|, ‖Hess V‖_F = 2√(|q|⁴ + 6q1²q2²)), so the
//! printed values can be checked by hand.

use kfp_verify::poly::{analyze_point, examples};

fn main() {
    let poly = examples::example1();
    let kappa = 2.0;

    for q in [[1.0, 2.0], [3.0, 3.0], [0.1, 4.0], [-2.0, 0.5], [40.0, 40.0]] {
        let a = analyze_point(&poly, &q, &[kappa]).unwrap();
        let norm = (q[0] * q[0] + q[1] * q[1]).sqrt();
        let grad_closed = 2.0 * (q[0] * q[1]).abs() * norm;
        let hess_closed =
            2.0 * (norm.powi(4) + 6.0 * q[0] * q[0] * q[1] * q[1]).sqrt();

        println!("q = {q:?}");
        println!("  V(q)        = {:+.6}", a.value);
        println!(
            "  |grad V|    = {:.6}   (closed form {:.6})",
            a.gradient_norm, grad_closed
        );
        println!(
            "  |Hess V|_F  = {:.6}   (closed form {:.6})",
            a.hessian_frobenius, hess_closed
        );
        println!(
            "  Hess trace split: Tr+ = {:.6}, Tr- = {:.6}",
            a.tr_plus, a.tr_minus
        );
        println!(
            "  scales R(n,q), n=1..{}: {:?}",
            a.r_geq.len(),
            a.r_geq.values().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>()
        );
        let s = &a.sigma[0];
        println!(
            "  coercive region at kappa = {kappa}: member = {} (lhs {:.4} vs rhs {:.4})",
            s.member, s.lhs, s.rhs
        );
        println!();
    }
}

//! Numerical verification toolkit for kinetic Fokker–Planck operators with
//! polynomial potentials.
//!
//! Given a polynomial potential V on R^d, the crate computes the pointwise
//! derivative analytics that drive subelliptic estimates (gradients,
//! Hessian trace splits, derivative indicators), scans the coercive region
//! Σ(κ) and its complement, builds slow-metric partitions of unity with
//! quadratic local models, and probes discretized operators (the kinetic
//! operator K_V, the Witten Laplacian, harmonic-oscillator ladders) at desk
//! scale: IMS localization defects, logarithmic subelliptic estimates, Weyl
//! sequences, and low spectra.
//!
//! The primary interface is the `examples/` directory — one runnable
//! example per capability — plus a thin `kfp-verify` CLI binary for
//! scripted runs. Start with `examples/analyze_point.rs`.

pub mod error;
pub mod linalg;
pub mod localization;
pub mod poly;
pub mod report;
pub mod sigma;
pub mod spectral;

pub use error::{Error, Result};
pub use poly::Polynomial;

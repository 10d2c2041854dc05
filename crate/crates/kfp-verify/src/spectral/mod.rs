//! Discretization and spectral experiments: sparse operators on a
//! position-grid × Hermite-momentum tensor basis, low-spectrum solvers,
//! quadratic-form identities for localized cutoffs, and empirical
//! subellipticity and eigenvalue-counting studies.

pub mod assemble;
pub mod grid;
pub mod ims;
pub mod lanczos;
pub mod op;
pub mod subelliptic;
pub mod testfn;
pub mod weyl;

pub use assemble::{
    assemble_kfp, assemble_oscillator, assemble_witten, diff1_4th, diff2_4th, hermite_dp,
    hermite_number, hermite_p, momentum_multiplication_axis,
};
pub use grid::{DiscreteGrid, BUDGET_ENV, DEFAULT_BUDGET};
pub use ims::{ims_identity_check, ims_identity_check_seeded, trivial_partition, ImsReport};
pub use lanczos::{low_spectrum, low_spectrum_deflated, tridiagonal_eigen, SpectrumReport};
pub use op::{CsrMatrix, DiscreteOperator, OperatorKind};
pub use subelliptic::{
    subelliptic_report, subelliptic_report_seeded, EstimateReport, SineMultiplier,
    TestFunctionRatio,
};
pub use weyl::{support_interval, support_overlap, weyl_rayleigh, WeylPoint, WeylReport};

//! Phase retrieval by trace minimization over the positive semidefinite cone.
//!
//! Quadratic intensity measurements `b_i = |⟨x, z_i⟩|²` of an unknown signal are
//! linear in the lifted matrix `X = x x*`. This crate recovers `x` (up to a global
//! phase) by solving a trace-regularized least-squares problem over Hermitian PSD
//! matrices and extracting the leading rank-1 component.

pub mod analysis;
pub mod certificate;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod hermitian;
pub mod measurement;
pub mod recovery;
pub mod rng;
pub mod scalar;
pub mod solver;
pub mod tolerance;

pub use analysis::{f_complex, f_real, monte_carlo_xi, rip1_check, Rip1Report};
pub use certificate::{
    build_certificate, certificate_thresholds, expectation_check, verify_certificate, Certificate,
    CertificateReport, SOperator,
};
pub use error::{Error, Result};
pub use hermitian::{EigenDecomposition, HermitianMatrix, Norms, Signal, TangentSpace};
pub use measurement::{
    add_noise, add_noise_with_reference, gaussian_signal, Distribution, IntensityData, NoiseModel,
    SensingEnsemble, SnrReference,
};
pub use num_complex::Complex64;
pub use recovery::{
    debias, extract_rank1, optimal_phase, rel_mse, rel_rms, Rank1Extraction, RecoveryResult,
};
pub use scalar::{Field, Scalar};
pub use solver::{
    estimate_lipschitz, prox_psd_trace, solve_constrained, solve_regularized, LipschitzEstimate,
    PhaseLiftSolver, SolveReport, SolverOptions,
};

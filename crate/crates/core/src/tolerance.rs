//! Numerical tolerances shared across the crate.

/// One record holding every default tolerance the library checks against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute conjugate-symmetry slack for Hermitian matrices.
    pub hermitian: f64,
    /// Unit-norm slack for tangent-space anchors and certificate signals.
    pub unit_norm: f64,
    /// Unit-norm slack for unit-sphere sensing vectors.
    pub sphere_unit: f64,
    /// Norm slack for radius-√n sensing vectors.
    pub sphere_radius: f64,
    /// Relative size of the imaginary residue of z* X z that is tolerated.
    pub imag_residue: f64,
    /// Allowed negative eigenvalue, relative to ‖X‖_F, when extracting a rank-1 factor.
    pub psd_extraction: f64,
    /// Relative gap under which the top eigenvalue is considered repeated.
    pub eigen_tie: f64,
    /// Relative slack on the residual constraint ‖A(X) − b‖₂ ≤ ε.
    pub feasibility: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermitian: 1e-12,
        unit_norm: 1e-12,
        sphere_unit: 1e-12,
        sphere_radius: 1e-10,
        imag_residue: 1e-10,
        psd_extraction: 1e-6,
        eigen_tie: 1e-9,
        feasibility: 1e-6,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

pub const TOL: Tolerances = Tolerances::DEFAULT;

//! The expectation operator `S = E[z z* ⊗ z z*]`, its inverse, and the truncated
//! dual certificate `Y = (1/m) Σ_i ⟨S⁻¹(xx*), z_i z_i*⟩ 1_{E_i} z_i z_i*`.
//!
//! For Gaussian sensing vectors `S(X) = 2X + Tr(X)·I` (real) and
//! `S(X) = X + Tr(X)·I` (complex). A certificate `Y` in the range of `A*` with
//! `‖P_T(Y) − xx*‖_F` and `‖P_{T⊥}(Y)‖_op` below the field's thresholds certifies
//! that `xx*` is the unique trace minimizer.

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::hermitian::{HermitianMatrix, Signal, TangentSpace};
use crate::measurement::{Distribution, SensingEnsemble};
use crate::rng::{derive_seed, stream, Domain};
use crate::scalar::{Field, Scalar};
use crate::tolerance::TOL;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Default truncation parameter β.
pub const DEFAULT_BETA: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SOperator {
    field: Field,
    n: usize,
}

impl SOperator {
    pub fn new(field: Field, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("S operator needs n ≥ 1".into()));
        }
        Ok(Self { field, n })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check<T: Scalar>(&self, x: &HermitianMatrix<T>) -> Result<()> {
        if T::FIELD != self.field {
            return Err(Error::FieldMismatch {
                expected: self.field,
                found: T::FIELD,
            });
        }
        check_dim(self.n, x.n())
    }

    /// Multiplicity of the identity component: `S = c·I + I_n ⊗ I_n`.
    fn identity_weight(&self) -> f64 {
        match self.field {
            Field::Real => 2.0,
            Field::Complex => 1.0,
        }
    }

    pub fn apply<T: Scalar>(&self, x: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
        self.check(x)?;
        x.scaled(self.identity_weight())
            .add_scaled(&HermitianMatrix::identity(self.n), x.trace())
    }

    /// Real: `½(X − Tr(X)/(n+2)·I)`. Complex: `X − Tr(X)/(n+1)·I`.
    pub fn inverse<T: Scalar>(&self, x: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
        self.check(x)?;
        let c = self.identity_weight();
        let shift = -x.trace() / (self.n as f64 + c);
        x.add_scaled(&HermitianMatrix::identity(self.n), shift)
            .map(|h| h.scaled(1.0 / c))
    }
}

pub fn s_apply<T: Scalar>(op: &SOperator, x: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
    op.apply(x)
}

pub fn s_inverse<T: Scalar>(op: &SOperator, x: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
    op.inverse(x)
}

/// Number of fixed random test matrices used by [`expectation_check`].
pub const EXPECTATION_TEST_MATRICES: usize = 5;

/// Monte Carlo check of `E[⟨zz*, X⟩ zz*] = S(X)` over `samples` Gaussian vectors.
///
/// Returns the largest relative Frobenius deviation over five fixed random
/// Hermitian test matrices drawn from `seed`.
pub fn expectation_check(field: Field, n: usize, samples: usize, seed: u64) -> Result<f64> {
    match field {
        Field::Real => {
            let tests = expectation_test_matrices::<f64>(n, seed);
            expectation_deviation(n, samples, seed, &tests)
        }
        Field::Complex => {
            let tests = expectation_test_matrices::<Complex64>(n, seed);
            expectation_deviation(n, samples, seed, &tests)
        }
    }
}

pub fn expectation_test_matrices<T: Scalar>(n: usize, seed: u64) -> Vec<HermitianMatrix<T>> {
    (0..EXPECTATION_TEST_MATRICES as u64)
        .map(|k| {
            let mut rng = stream(seed, Domain::TestMatrix, k);
            HermitianMatrix::from_raw(DMatrix::from_fn(n, n, |_, _| T::standard_normal(&mut rng)))
        })
        .collect()
}

/// Max over `tests` of `‖(1/N) Σ ⟨z z*, X⟩ z z* − S(X)‖_F / ‖S(X)‖_F`
/// (absolute deviation when `S(X) = 0`).
pub fn expectation_deviation<T: Scalar>(
    n: usize,
    samples: usize,
    seed: u64,
    tests: &[HermitianMatrix<T>],
) -> Result<f64> {
    if samples < 1000 {
        return Err(Error::InvalidInput(format!(
            "expectation check needs at least 1000 samples, got {samples}"
        )));
    }
    let op = SOperator::new(T::FIELD, n)?;
    let ens = SensingEnsemble::<T>::sample(
        n,
        samples,
        Distribution::Gaussian,
        derive_seed(seed, &[0xE4]),
    )?;
    let mut worst = 0.0f64;
    for x in tests {
        let empirical = ens.adjoint(&ens.apply(x)?)?.scaled(1.0 / samples as f64);
        let exact = op.apply(x)?;
        let scale = exact.frobenius_norm();
        let dev = (&empirical - &exact).frobenius_norm();
        worst = worst.max(if scale > 0.0 { dev / scale } else { dev });
    }
    Ok(worst)
}

/// A (possibly truncated) certificate and the per-measurement weights it was built from.
#[derive(Debug, Clone)]
pub struct Certificate<T: Scalar> {
    pub y: HermitianMatrix<T>,
    /// `w_i · 1_{E_i}`, so that `Y = A*(weights) / m`.
    pub weights: Vec<f64>,
    /// Fraction of measurements removed by the truncation event.
    pub truncated_fraction: f64,
}

impl<T: Scalar> Certificate<T> {
    pub fn verify(&self, x: &Signal<T>) -> Result<CertificateReport> {
        let mut report = verify_certificate(&self.y, x)?;
        report.truncated_fraction = self.truncated_fraction;
        Ok(report)
    }
}

/// Builds `Y` for the unit signal `x` on a Gaussian ensemble.
///
/// Measurement `i` is kept when `|⟨x, z_i⟩| ≤ √(2β log n)` and `‖z_i‖₂ ≤ √(3n)`;
/// with `truncate = false` every term is kept.
pub fn build_certificate<T: Scalar>(
    ens: &SensingEnsemble<T>,
    x: &Signal<T>,
    beta: f64,
    truncate: bool,
) -> Result<Certificate<T>> {
    if ens.distribution() != Distribution::Gaussian {
        return Err(Error::InvalidInput(format!(
            "certificate weights assume Gaussian sensing vectors, got `{}`",
            ens.model_tag()
        )));
    }
    check_dim(ens.n(), x.len())?;
    let norm = x.norm();
    if (norm - 1.0).abs() > TOL.unit_norm {
        return Err(Error::NonUnitVector(norm));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "β must be positive, got {beta}"
        )));
    }
    let n = ens.n();
    let m = ens.m();
    let log_n = (n as f64).ln();
    if truncate && 2.0 * beta * log_n < 3.0 {
        log::warn!(
            "2β·log n = {:.3} < 3: truncation threshold below the analysed regime",
            2.0 * beta * log_n
        );
    }

    let op = SOperator::new(T::FIELD, n)?;
    let target = op.inverse(&x.outer())?;
    let mut weights = ens.apply(&target)?;
    let mut dropped = 0usize;
    if truncate {
        let overlaps = ens.intensities(x)?;
        let overlap_cap = 2.0 * beta * log_n;
        let norm_cap = 3.0 * n as f64;
        for (i, w) in weights.iter_mut().enumerate() {
            let keep = overlaps[i] <= overlap_cap && ens.vector(i).norm_squared() <= norm_cap;
            if !keep {
                *w = 0.0;
                dropped += 1;
            }
        }
    }
    let y = ens.adjoint(&weights)?.scaled(1.0 / m as f64);
    Ok(Certificate {
        y,
        weights,
        truncated_fraction: dropped as f64 / m as f64,
    })
}

/// `(‖P_T(Y) − xx*‖_F bound, ‖P_{T⊥}(Y)‖_op bound)`: (1/3, 1/2) real, (1/5, 1/2) complex.
pub fn certificate_thresholds(field: Field) -> (f64, f64) {
    match field {
        Field::Real => (1.0 / 3.0, 0.5),
        Field::Complex => (1.0 / 5.0, 0.5),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateReport {
    pub dist_t: f64,
    pub opnorm_tperp: f64,
    pub truncated_fraction: f64,
    pub thresholds: (f64, f64),
    pub pass: bool,
}

pub fn verify_certificate<T: Scalar>(
    y: &HermitianMatrix<T>,
    x: &Signal<T>,
) -> Result<CertificateReport> {
    let ts = TangentSpace::new(x.clone())?;
    let dist_t = (&ts.project(y)? - &x.outer()).frobenius_norm();
    let opnorm_tperp = ts.project_perp(y)?.norms()?.operator;
    let thresholds = certificate_thresholds(T::FIELD);
    Ok(CertificateReport {
        dist_t,
        opnorm_tperp,
        truncated_fraction: 0.0,
        thresholds,
        pass: dist_t <= thresholds.0 && opnorm_tperp <= thresholds.1,
    })
}

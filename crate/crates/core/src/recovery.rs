//! Rank-1 extraction, debiasing, and error metrics taken modulo a global phase.

use crate::error::{check_dim, Error, Result};
use crate::hermitian::{HermitianMatrix, Signal};
use crate::scalar::Scalar;
use crate::tolerance::TOL;

/// Leading eigenpair of a solver output and the spectrum it came from.
#[derive(Debug, Clone)]
pub struct Rank1Extraction<T: Scalar> {
    /// `√λ̂₁ · û₁`.
    pub x_hat: Signal<T>,
    pub lambda1: f64,
    /// All eigenvalues, descending.
    pub spectrum: Vec<f64>,
}

/// Extracts the leading rank-1 component of a (numerically) PSD matrix.
pub fn extract_rank1<T: Scalar>(x_hat: &HermitianMatrix<T>) -> Result<(Signal<T>, f64)> {
    let ext = extract_rank1_with_spectrum(x_hat)?;
    Ok((ext.x_hat, ext.lambda1))
}

pub fn extract_rank1_with_spectrum<T: Scalar>(
    x_hat: &HermitianMatrix<T>,
) -> Result<Rank1Extraction<T>> {
    let eig = x_hat.eig()?;
    let spectrum = eig.eigenvalues().to_vec();
    let n = spectrum.len();
    let min = spectrum[n - 1];
    let allowed = TOL.psd_extraction * x_hat.frobenius_norm();
    if min < -allowed {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
            allowed: -allowed,
        });
    }
    let lambda1 = spectrum[0].max(0.0);
    if lambda1 == 0.0 {
        return Ok(Rank1Extraction {
            x_hat: Signal::zeros(n),
            lambda1: 0.0,
            spectrum,
        });
    }
    if n > 1 && lambda1 - spectrum[1] <= TOL.eigen_tie * lambda1 {
        log::warn!("leading eigenvalue {lambda1:e} is repeated; rank-1 extraction is ill-posed");
    }
    Ok(Rank1Extraction {
        x_hat: eig.eigenvector(0).scaled_real(lambda1.sqrt()),
        lambda1,
        spectrum,
    })
}

/// Rescales `x̂` by `s = √(Σ_k max(λ̂_k, 0)) / ‖x̂‖₂` so that it carries the
/// energy of the whole spectrum. A zero `x̂` is returned unchanged.
pub fn debias<T: Scalar>(x_hat: &Signal<T>, spectrum: &[f64]) -> Signal<T> {
    let norm = x_hat.norm();
    if norm == 0.0 {
        return x_hat.clone();
    }
    let energy: f64 = spectrum.iter().map(|l| l.max(0.0)).sum();
    x_hat.scaled_real(energy.sqrt() / norm)
}

/// `min_{|c|=1} ‖c x − x̂‖₂² / ‖x‖₂²`, in closed form
/// `(‖x‖² + ‖x̂‖² − 2|⟨x̂, x⟩|) / ‖x‖²`.
pub fn rel_mse<T: Scalar>(x: &Signal<T>, x_hat: &Signal<T>) -> Result<f64> {
    check_dim(x.len(), x_hat.len())?;
    let nx = x.norm_squared();
    if nx == 0.0 {
        return Err(Error::InvalidInput(
            "reference signal must be nonzero".into(),
        ));
    }
    let overlap = x_hat.inner(x)?.modulus();
    Ok(((nx + x_hat.norm_squared() - 2.0 * overlap) / nx).max(0.0))
}

pub fn rel_rms<T: Scalar>(x: &Signal<T>, x_hat: &Signal<T>) -> Result<f64> {
    rel_mse(x, x_hat).map(f64::sqrt)
}

/// The unit scalar `c*` attaining the minimum in [`rel_mse`]:
/// `conj(⟨x̂, x⟩) / |⟨x̂, x⟩|` (a sign in the real field; 1 when orthogonal).
pub fn optimal_phase<T: Scalar>(x: &Signal<T>, x_hat: &Signal<T>) -> Result<T> {
    let ip = x_hat.inner(x)?;
    let modulus = ip.modulus();
    if modulus == 0.0 {
        return Ok(T::one());
    }
    Ok(ip.conjugate() * T::from_real(1.0 / modulus))
}

/// Estimates obtained from one solver output, with metrics when the truth is known.
#[derive(Debug, Clone)]
pub struct RecoveryResult<T: Scalar> {
    pub x_hat: Signal<T>,
    pub x_hat_debiased: Signal<T>,
    pub lambda1: f64,
    pub spectrum: Vec<f64>,
    pub rel_mse: Option<f64>,
    pub rel_rms: Option<f64>,
    pub rel_mse_debiased: Option<f64>,
    pub rel_rms_debiased: Option<f64>,
}

impl<T: Scalar> RecoveryResult<T> {
    pub fn from_solution(x_hat: &HermitianMatrix<T>, truth: Option<&Signal<T>>) -> Result<Self> {
        let ext = extract_rank1_with_spectrum(x_hat)?;
        let debiased = debias(&ext.x_hat, &ext.spectrum);
        let (mse, mse_d) = match truth {
            Some(x) => (Some(rel_mse(x, &ext.x_hat)?), Some(rel_mse(x, &debiased)?)),
            None => (None, None),
        };
        Ok(Self {
            x_hat: ext.x_hat,
            x_hat_debiased: debiased,
            lambda1: ext.lambda1,
            spectrum: ext.spectrum,
            rel_mse: mse,
            rel_rms: mse.map(f64::sqrt),
            rel_mse_debiased: mse_d,
            rel_rms_debiased: mse_d.map(f64::sqrt),
        })
    }
}

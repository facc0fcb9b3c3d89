//! Expectation curves `f(t) = E|ξ|` for rank-2 measurements and empirical
//! near-isometry checks of the measurement map in the nuclear norm.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::{HermitianMatrix, Signal};
use crate::measurement::{Distribution, SensingEnsemble};
use crate::rng::{derive_seed, stream, Domain};
use crate::scalar::{Field, Scalar};
use num_complex::Complex64;

fn check_unit_interval(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "t must lie in [0, 1], got {t}"
        )))
    }
}

/// `E|Z₁² − t Z₂²|` for independent real standard normals:
/// `(2/π)(2√t + (1−t)(π/2 − 2 arctan √t))`.
pub fn f_real(t: f64) -> Result<f64> {
    check_unit_interval(t)?;
    let s = t.sqrt();
    let pi = std::f64::consts::PI;
    Ok((2.0 / pi) * (2.0 * s + (1.0 - t) * (pi / 2.0 - 2.0 * s.atan())))
}

/// `E||Z₁|² − t|Z₂|²|` for independent standard complex normals: `(1 + t²)/(1 + t)`.
pub fn f_complex(t: f64) -> Result<f64> {
    check_unit_interval(t)?;
    Ok((1.0 + t * t) / (1.0 + t))
}

pub fn f_closed(field: Field, t: f64) -> Result<f64> {
    match field {
        Field::Real => f_real(t),
        Field::Complex => f_complex(t),
    }
}

/// Minimizer of [`f_complex`] on `[0, 1]`.
pub fn f_complex_argmin() -> f64 {
    std::f64::consts::SQRT_2 - 1.0
}

const MC_BATCH: usize = 1 << 16;

/// Sample mean and standard error of `ξ = ||Z₁|² − t|Z₂|²|` over `samples` draws.
///
/// Draws are split into fixed batches, each with its own substream, so the
/// result does not depend on the thread count.
pub fn monte_carlo_xi(t: f64, field: Field, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if samples < 1000 {
        return Err(Error::InvalidInput(format!(
            "Monte Carlo needs at least 1000 samples, got {samples}"
        )));
    }
    if !t.is_finite() {
        return Err(Error::InvalidInput(format!("t must be finite, got {t}")));
    }
    let batches = samples.div_ceil(MC_BATCH);
    let sums: Vec<(f64, f64)> = (0..batches)
        .into_par_iter()
        .map(|k| {
            let len = MC_BATCH.min(samples - k * MC_BATCH);
            let mut rng = stream(seed, Domain::MonteCarlo, k as u64);
            let mut acc = (0.0, 0.0);
            for _ in 0..len {
                let (a, b) = match field {
                    Field::Real => (
                        f64::standard_normal(&mut rng).powi(2),
                        f64::standard_normal(&mut rng).powi(2),
                    ),
                    Field::Complex => (
                        Complex64::standard_normal(&mut rng).norm_sqr(),
                        Complex64::standard_normal(&mut rng).norm_sqr(),
                    ),
                };
                let xi = (a - t * b).abs();
                acc.0 += xi;
                acc.1 += xi * xi;
            }
            acc
        })
        .collect();
    let (sum, sum_sq) = sums.iter().fold((0.0, 0.0), |a, s| (a.0 + s.0, a.1 + s.1));
    let nf = samples as f64;
    let mean = sum / nf;
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok((mean, (var / nf).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rip1Report {
    /// `max(1 − σ²_min(Z)/m, σ²_max(Z)/m − 1)`, which bounds `|m⁻¹‖A(uu*)‖₁ − 1|`
    /// uniformly over unit `u`.
    pub delta_observed: f64,
    /// Smallest sampled `m⁻¹‖A(X)‖₁ / ‖X‖_op` over `X = uu* − t vv*`.
    pub rank2_min_ratio: f64,
    pub trials: usize,
    pub field: Field,
}

/// Extreme eigenvalues of `Z*Z / m` where `Z` stacks the rows `z_i*`.
pub fn extreme_gram_eigenvalues<T: Scalar>(ens: &SensingEnsemble<T>) -> Result<(f64, f64)> {
    let z = ens.columns();
    let gram = HermitianMatrix::new(z * z.adjoint())?.scaled(1.0 / ens.m() as f64);
    let eig = gram.eig()?;
    let vals = eig.eigenvalues();
    Ok((vals[vals.len() - 1], vals[0]))
}

/// `m⁻¹‖A(uu* − t vv*)‖₁ / ‖uu* − t vv*‖_op` for orthonormal `u`, `v`.
pub fn rank2_ratio<T: Scalar>(
    ens: &SensingEnsemble<T>,
    u: &Signal<T>,
    v: &Signal<T>,
    t: f64,
) -> Result<f64> {
    let a = ens.intensities(u)?;
    let b = ens.intensities(v)?;
    let l1: f64 = a.iter().zip(&b).map(|(p, q)| (p - t * q).abs()).sum();
    Ok(l1 / ens.m() as f64 / t.max(1.0))
}

fn random_orthonormal_pair<T: Scalar>(
    n: usize,
    seed: u64,
    index: u64,
) -> Result<(Signal<T>, Signal<T>)> {
    let mut rng = stream(seed, Domain::Rank2, index);
    let mut draw = || Signal::new((0..n).map(|_| T::standard_normal(&mut rng)).collect());
    let u = draw()?.normalized()?;
    let w = draw()?;
    let c = u.inner(&w)?;
    let v = Signal::from_dvector(w.as_vector() - u.as_vector() * c)?.normalized()?;
    Ok((u, v))
}

fn rip1_generic<T: Scalar>(n: usize, m: usize, trials: usize, seed: u64) -> Result<Rip1Report> {
    let ens =
        SensingEnsemble::<T>::sample(n, m, Distribution::Gaussian, derive_seed(seed, &[0x51]))?;
    let (lo, hi) = extreme_gram_eigenvalues(&ens)?;
    let delta_observed = (1.0 - lo).max(hi - 1.0).max(0.0);
    let ratios = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let (u, v) = random_orthonormal_pair::<T>(n, seed, k)?;
            let t: f64 = rand::Rng::random(&mut stream(seed, Domain::Rank2, u64::MAX - k));
            rank2_ratio(&ens, &u, &v, t)
        })
        .collect::<Result<Vec<f64>>>()?;
    let rank2_min_ratio = ratios.into_iter().fold(f64::INFINITY, f64::min);
    Ok(Rip1Report {
        delta_observed,
        rank2_min_ratio: if trials == 0 {
            f64::NAN
        } else {
            rank2_min_ratio
        },
        trials,
        field: T::FIELD,
    })
}

/// Draws one Gaussian ensemble of size `n × m` and measures how close `m⁻¹ A`
/// is to an isometry on rank-1 and sampled rank-2 matrices.
pub fn rip1_check(
    field: Field,
    n: usize,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<Rip1Report> {
    if n < 2 || m < n {
        return Err(Error::InvalidInput(format!(
            "need m ≥ n ≥ 2, got n={n}, m={m}"
        )));
    }
    match field {
        Field::Real => rip1_generic::<f64>(n, m, trials, seed),
        Field::Complex => rip1_generic::<Complex64>(n, m, trials, seed),
    }
}

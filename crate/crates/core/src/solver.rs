//! Accelerated proximal gradient for
//!
//! ```text
//! minimize ½‖A(X) − b‖₂² + λ Tr(X)   subject to X ⪰ 0
//! ```
//!
//! and a bisection on λ that solves the noise-constrained problem
//! `minimize Tr(X) s.t. ‖A(X) − b‖₂ ≤ ε, X ⪰ 0` by locating the largest λ whose
//! regularized solution is feasible.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::measurement::{l2, IntensityData, SensingEnsemble};
use crate::rng::{stream, Domain};
use crate::scalar::Scalar;
use crate::tolerance::TOL;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Stop when `‖X_{k+1} − X_k‖_F ≤ rel_tol · ‖X_{k+1}‖_F`.
    pub rel_tol: f64,
    /// Step size is `step_safety / L`.
    pub step_safety: f64,
    /// Reset momentum whenever the objective increases.
    pub restart: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            rel_tol: 1e-8,
            step_safety: 0.9,
            restart: true,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be positive".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidInput(format!(
                "rel_tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if !(self.step_safety > 0.0 && self.step_safety <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "step_safety must lie in (0, 1], got {}",
                self.step_safety
            )));
        }
        Ok(())
    }
}

/// Outcome of a regularized or constrained solve.
#[derive(Debug, Clone)]
pub struct SolveReport<T: Scalar> {
    pub x_hat: HermitianMatrix<T>,
    /// Proximal-gradient iterations, summed over all bisection probes.
    pub iterations: usize,
    /// Best objective seen so far, one entry per iteration of the final solve.
    pub objective_trace: Vec<f64>,
    /// `‖A(X̂) − b‖₂`.
    pub residual: f64,
    pub lambda_used: f64,
    pub converged: bool,
    /// Regularized solves performed (1 for a plain regularized solve).
    pub probes: usize,
}

impl<T: Scalar> SolveReport<T> {
    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }

    /// One-line `key=value` record: iterations, λ, residual, final objective.
    pub fn to_record(&self) -> String {
        self.to_string()
    }
}

impl<T: Scalar> fmt::Display for SolveReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "iterations={} lambda={:e} residual={:e} objective={:e} converged={} probes={}",
            self.iterations,
            self.lambda_used,
            self.residual,
            self.final_objective(),
            self.converged,
            self.probes
        )
    }
}

/// Proximal map of `τ·Tr(·) + ι_{X ⪰ 0}`: every eigenvalue `λ ↦ max(λ − τ, 0)`.
pub fn prox_psd_trace<T: Scalar>(v: &HermitianMatrix<T>, tau: f64) -> Result<HermitianMatrix<T>> {
    if !tau.is_finite() || tau < 0.0 {
        return Err(Error::InvalidInput(format!(
            "prox threshold must be ≥ 0, got {tau}"
        )));
    }
    let eig = v.eig()?;
    Ok(eig.map_spectrum(|l| (l - tau).max(0.0)))
}

/// Power-iteration estimate of `‖A*A‖_op` and the inflated bound used as the
/// Lipschitz constant of `∇ ½‖A(X) − b‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzEstimate {
    pub operator_norm: f64,
    /// `1.05 · operator_norm`.
    pub bound: f64,
    pub iterations: usize,
}

const POWER_MAX_ITERS: usize = 500;
const POWER_REL_TOL: f64 = 1e-4;
const LIPSCHITZ_INFLATION: f64 = 1.05;

pub fn estimate_lipschitz<T: Scalar>(ens: &SensingEnsemble<T>) -> Result<LipschitzEstimate> {
    let n = ens.n();
    let mut rng = stream(ens.seed(), Domain::PowerIteration, 0);
    let start = DMatrix::from_fn(n, n, |_, _| T::standard_normal(&mut rng));
    let mut x = HermitianMatrix::from_raw(start).add_scaled(&HermitianMatrix::identity(n), 1.0)?;
    x = x.scaled(1.0 / x.frobenius_norm());

    let mut estimate = 0.0;
    for iter in 1..=POWER_MAX_ITERS {
        let y = ens.adjoint(&ens.apply(&x)?)?;
        let norm = y.frobenius_norm();
        if norm == 0.0 {
            return Ok(LipschitzEstimate {
                operator_norm: 0.0,
                bound: 0.0,
                iterations: iter,
            });
        }
        let converged = (norm - estimate).abs() <= POWER_REL_TOL * norm;
        estimate = norm;
        x = y.scaled(1.0 / norm);
        if converged {
            return Ok(LipschitzEstimate {
                operator_norm: estimate,
                bound: LIPSCHITZ_INFLATION * estimate,
                iterations: iter,
            });
        }
    }
    Err(Error::PowerIteration {
        iterations: POWER_MAX_ITERS,
        last_bound: LIPSCHITZ_INFLATION * estimate,
    })
}

/// `max(λ_max(A*(b)), 0)`: for every λ at or above this value, `X = 0` is optimal.
pub fn zero_solution_threshold<T: Scalar>(ens: &SensingEnsemble<T>, b: &[f64]) -> Result<f64> {
    let atb = ens.adjoint(b)?;
    Ok(atb.eig()?.eigenvalues()[0].max(0.0))
}

/// Relative λ resolution of the bisection.
const BISECTION_REL_TOL: f64 = 1e-3;
const BISECTION_MAX_PROBES: usize = 50;
/// Lower end of the λ bracket relative to the zero-solution threshold.
const LAMBDA_FLOOR: f64 = 1e-8;
/// Noise bound used when the data carry (almost) none.
const NOISELESS_EPS: f64 = 1e-8;

/// Solver bound to one sensing ensemble, reusing its Lipschitz estimate across solves.
#[derive(Debug, Clone)]
pub struct PhaseLiftSolver<'a, T: Scalar> {
    ens: &'a SensingEnsemble<T>,
    opts: SolverOptions,
    lipschitz: LipschitzEstimate,
}

impl<'a, T: Scalar> PhaseLiftSolver<'a, T> {
    pub fn new(ens: &'a SensingEnsemble<T>, opts: SolverOptions) -> Result<Self> {
        opts.validate()?;
        let lipschitz = estimate_lipschitz(ens)?;
        Ok(Self {
            ens,
            opts,
            lipschitz,
        })
    }

    pub fn lipschitz(&self) -> LipschitzEstimate {
        self.lipschitz
    }

    pub fn options(&self) -> &SolverOptions {
        &self.opts
    }

    pub fn objective(&self, x: &HermitianMatrix<T>, b: &[f64], lambda: f64) -> Result<f64> {
        let ax = self.ens.apply(x)?;
        Ok(smooth_part(&ax, b) + lambda * x.trace())
    }

    /// Accelerated proximal gradient from `warm` (or zero).
    pub fn solve_regularized(
        &self,
        b: &[f64],
        lambda: f64,
        warm: Option<&HermitianMatrix<T>>,
    ) -> Result<SolveReport<T>> {
        check_dim(self.ens.m(), b.len())?;
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidInput(format!(
                "λ must be finite and ≥ 0, got {lambda}"
            )));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("measurements must be finite".into()));
        }
        let n = self.ens.n();
        let mut x = match warm {
            Some(w) => {
                check_dim(n, w.n())?;
                w.clone()
            }
            None => HermitianMatrix::zeros(n),
        };
        if self.lipschitz.bound == 0.0 {
            // A ≡ 0: the objective is λ·Tr(X), minimized at zero.
            let x = HermitianMatrix::zeros(n);
            let residual = l2(b);
            return Ok(SolveReport {
                x_hat: x,
                iterations: 0,
                objective_trace: vec![0.5 * residual * residual],
                residual,
                lambda_used: lambda,
                converged: true,
                probes: 1,
            });
        }
        let step = self.opts.step_safety / self.lipschitz.bound;

        let mut ax = self.ens.apply(&x)?;
        let mut f_x = smooth_part(&ax, b) + lambda * x.trace();
        let mut y = x.clone();
        let mut ay = ax.clone();
        let mut t = 1.0f64;
        let mut best = (f_x, x.clone(), ax.clone());
        let mut trace = Vec::new();
        let mut converged = false;
        let mut iterations = 0;

        for k in 1..=self.opts.max_iters {
            iterations = k;
            let r: Vec<f64> = ay.iter().zip(b).map(|(a, b)| a - b).collect();
            let grad = self.ens.adjoint(&r)?;
            let v = y.add_scaled(&grad, -step)?;
            if !v.is_finite() {
                return Err(Error::Diverged { iteration: k });
            }
            let x_new = prox_psd_trace(&v, step * lambda)?;
            let ax_new = self.ens.apply(&x_new)?;
            let f_new = smooth_part(&ax_new, b) + lambda * x_new.trace();
            if !f_new.is_finite() {
                return Err(Error::Diverged { iteration: k });
            }
            if f_new < best.0 {
                best = (f_new, x_new.clone(), ax_new.clone());
            }
            trace.push(best.0);

            let change = (&x_new - &x).frobenius_norm();
            let scale = x_new.frobenius_norm();

            if self.opts.restart && f_new > f_x {
                t = 1.0;
                y = x_new.clone();
                ay = ax_new.clone();
            } else {
                let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
                let beta = (t - 1.0) / t_next;
                y = x_new.add_scaled(&(&x_new - &x), beta)?;
                ay = ax_new
                    .iter()
                    .zip(&ax)
                    .map(|(new, old)| new + beta * (new - old))
                    .collect();
                t = t_next;
            }
            x = x_new;
            ax = ax_new;
            f_x = f_new;

            if change <= self.opts.rel_tol * scale {
                converged = true;
                break;
            }
        }

        let (_, x_hat, ax_hat) = best;
        Ok(SolveReport {
            residual: residual(&ax_hat, b),
            x_hat,
            iterations,
            objective_trace: trace,
            lambda_used: lambda,
            converged,
            probes: 1,
        })
    }

    /// Trace minimization subject to `‖A(X) − b‖₂ ≤ ε`, via bisection on λ.
    ///
    /// The bracket is `[10⁻⁸·λ₀, λ₀]` with `λ₀ = λ_max(A*(b))⁺`, bisected
    /// geometrically with warm starts until its relative width is below `10⁻³`.
    /// Data with `ε < 10⁻⁸·‖b‖₂` are solved with `ε = 10⁻⁸·‖b‖₂`. If even the
    /// bottom of the bracket is infeasible, that minimal-residual solution is
    /// returned with `converged = false`.
    pub fn solve_constrained(&self, data: &IntensityData) -> Result<SolveReport<T>> {
        let b = data.b();
        check_dim(self.ens.m(), b.len())?;
        let b_norm = l2(b);
        let eps = data.eps().max(NOISELESS_EPS * b_norm);
        let tolerance = eps * (1.0 + TOL.feasibility);
        let n = self.ens.n();

        let lambda_hi = zero_solution_threshold(self.ens, b)?;
        if b_norm <= tolerance || lambda_hi == 0.0 {
            let feasible = b_norm <= tolerance;
            return Ok(SolveReport {
                x_hat: HermitianMatrix::zeros(n),
                iterations: 0,
                objective_trace: vec![0.0],
                residual: b_norm,
                lambda_used: lambda_hi,
                converged: feasible,
                probes: 0,
            });
        }

        let lambda_lo = LAMBDA_FLOOR * lambda_hi;
        let low = self.solve_regularized(b, lambda_lo, None)?;
        let mut iterations = low.iterations;
        let mut probes = 1;
        if low.residual > tolerance {
            log::debug!(
                "noise bound {eps:e} infeasible at λ = {lambda_lo:e} (residual {:e})",
                low.residual
            );
            return Ok(SolveReport {
                iterations,
                probes,
                converged: false,
                ..low
            });
        }

        let mut best = low;
        let (mut lo, mut hi) = (lambda_lo, lambda_hi);
        let mut warm = best.x_hat.clone();
        while hi / lo > 1.0 + BISECTION_REL_TOL && probes < BISECTION_MAX_PROBES {
            let mid = (lo * hi).sqrt();
            let probe = self.solve_regularized(b, mid, Some(&warm))?;
            iterations += probe.iterations;
            probes += 1;
            warm = probe.x_hat.clone();
            if probe.residual <= tolerance {
                lo = mid;
                best = probe;
            } else {
                hi = mid;
            }
        }
        Ok(SolveReport {
            iterations,
            probes,
            converged: true,
            ..best
        })
    }
}

fn smooth_part(ax: &[f64], b: &[f64]) -> f64 {
    0.5 * ax
        .iter()
        .zip(b)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
}

fn residual(ax: &[f64], b: &[f64]) -> f64 {
    (2.0 * smooth_part(ax, b)).sqrt()
}

/// `minimize ½‖A(X) − b‖² + λ Tr(X)` over the PSD cone, starting at zero.
pub fn solve_regularized<T: Scalar>(
    ens: &SensingEnsemble<T>,
    b: &[f64],
    lambda: f64,
    opts: SolverOptions,
) -> Result<SolveReport<T>> {
    PhaseLiftSolver::new(ens, opts)?.solve_regularized(b, lambda, None)
}

/// `minimize Tr(X)` subject to `‖A(X) − b‖₂ ≤ ε` over the PSD cone.
pub fn solve_constrained<T: Scalar>(
    ens: &SensingEnsemble<T>,
    data: &IntensityData,
    opts: SolverOptions,
) -> Result<SolveReport<T>> {
    PhaseLiftSolver::new(ens, opts)?.solve_constrained(data)
}

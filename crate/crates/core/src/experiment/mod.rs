//! Seeded batch experiments: noise and oversampling sweeps of the recovery
//! pipeline, empirical phase transitions, and tabulations of the certificate
//! and near-isometry checks. Every run is a pure function of its configuration.

pub mod config;
pub mod output;

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::analysis::{f_closed, monte_carlo_xi, rip1_check};
use crate::certificate::build_certificate;
use crate::error::{Error, Result};
use crate::measurement::{
    add_noise_with_reference, gaussian_signal, Distribution, NoiseModel, SensingEnsemble,
    SnrReference,
};
use crate::recovery::RecoveryResult;
use crate::rng::derive_seed;
use crate::scalar::{Field, Scalar};
use crate::solver::PhaseLiftSolver;
use num_complex::Complex64;

pub use config::{ConfigOverrides, ExperimentConfig, ExperimentKind, SnrBasis};
pub use output::{git_blob_sha256, render_csv, Cell, Table, SCHEMA_VERSION};

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "PHASELIFT_THREADS";

/// Outcome of one recovery trial.
#[derive(Debug, Clone, PartialEq)]
pub enum TrialStatus {
    Ok,
    /// The pipeline failed; the message is recorded and the metrics are NaN.
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub experiment: ExperimentKind,
    pub grid_index: usize,
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub snr_db: f64,
    pub noise: NoiseModel,
    pub rel_mse: f64,
    pub rel_mse_debiased: f64,
    pub rel_rms: f64,
    pub rel_rms_debiased: f64,
    pub residual: f64,
    pub eps: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    pub success: bool,
    pub status: TrialStatus,
    pub wall_time_ms: f64,
}

impl TrialRecord {
    pub fn is_ok(&self) -> bool {
        self.status == TrialStatus::Ok
    }
}

/// Per-grid-point aggregate over the successful trials.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub grid_index: usize,
    pub n: usize,
    pub m: usize,
    pub snr_db: f64,
    pub noise: NoiseModel,
    pub completed: usize,
    pub mean_rel_mse: f64,
    pub mean_rel_mse_debiased: f64,
    pub mean_rel_rms: f64,
    pub mean_rel_rms_debiased: f64,
    pub success_rate: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (s, k) = values.fold((0.0, 0usize), |(s, k), v| (s + v, k + 1));
    if k == 0 {
        f64::NAN
    } else {
        s / k as f64
    }
}

pub fn summarize(records: &[TrialRecord]) -> Vec<TrialSummary> {
    let mut out: Vec<TrialSummary> = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let gi = records[start].grid_index;
        let end = start
            + records[start..]
                .iter()
                .take_while(|r| r.grid_index == gi)
                .count();
        let group = &records[start..end];
        let ok: Vec<&TrialRecord> = group.iter().filter(|r| r.is_ok()).collect();
        let first = &group[0];
        out.push(TrialSummary {
            grid_index: gi,
            n: first.n,
            m: first.m,
            snr_db: first.snr_db,
            noise: first.noise,
            completed: ok.len(),
            mean_rel_mse: mean(ok.iter().map(|r| r.rel_mse)),
            mean_rel_mse_debiased: mean(ok.iter().map(|r| r.rel_mse_debiased)),
            mean_rel_rms: mean(ok.iter().map(|r| r.rel_rms)),
            mean_rel_rms_debiased: mean(ok.iter().map(|r| r.rel_rms_debiased)),
            success_rate: group.iter().filter(|r| r.success).count() as f64 / group.len() as f64,
        });
        start = end;
    }
    out
}

/// One point of a recovery sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
struct SweepPoint {
    n: usize,
    m: usize,
    snr_db: f64,
}

fn sweep_points(cfg: &ExperimentConfig) -> Vec<SweepPoint> {
    let mut pts = Vec::new();
    for (n, m) in cfg.grid() {
        for &snr_db in &cfg.snr_db {
            pts.push(SweepPoint { n, m, snr_db });
        }
    }
    pts
}

/// Seed of trial `trial` at grid point `grid_index`.
pub fn trial_seed(base: u64, grid_index: usize, trial: usize) -> u64 {
    derive_seed(base, &[grid_index as u64, trial as u64])
}

struct TrialOutcome {
    rel_mse: f64,
    rel_mse_debiased: f64,
    residual: f64,
    eps: f64,
    lambda: f64,
    iterations: usize,
    converged: bool,
}

fn solve_trial<T: Scalar>(
    cfg: &ExperimentConfig,
    p: SweepPoint,
    seed: u64,
) -> Result<TrialOutcome> {
    let x = gaussian_signal::<T>(p.n, derive_seed(seed, &[1]))?;
    let ens = SensingEnsemble::<T>::sample(p.n, p.m, cfg.sensing, derive_seed(seed, &[2]))?;
    let b_clean = ens.intensities(&x)?;
    let reference = match cfg.snr_basis {
        SnrBasis::Intensities => SnrReference::Intensities,
        SnrBasis::Signal => SnrReference::SignalEnergy(x.norm_squared()),
    };
    let data = add_noise_with_reference(
        &b_clean,
        cfg.noise,
        p.snr_db,
        reference,
        derive_seed(seed, &[3]),
    )?;
    let report = PhaseLiftSolver::new(&ens, cfg.solver_options())?.solve_constrained(&data)?;
    let rec = RecoveryResult::from_solution(&report.x_hat, Some(&x))?;
    Ok(TrialOutcome {
        rel_mse: rec.rel_mse.unwrap_or(f64::NAN),
        rel_mse_debiased: rec.rel_mse_debiased.unwrap_or(f64::NAN),
        residual: report.residual,
        eps: data.eps(),
        lambda: report.lambda_used,
        iterations: report.iterations,
        converged: report.converged,
    })
}

fn run_trial(
    cfg: &ExperimentConfig,
    grid_index: usize,
    p: SweepPoint,
    trial: usize,
) -> TrialRecord {
    let seed = trial_seed(cfg.seed, grid_index, trial);
    let start = Instant::now();
    let outcome = match cfg.field {
        Field::Real => solve_trial::<f64>(cfg, p, seed),
        Field::Complex => solve_trial::<Complex64>(cfg, p, seed),
    };
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut rec = TrialRecord {
        experiment: cfg.experiment,
        grid_index,
        trial,
        seed,
        n: p.n,
        m: p.m,
        snr_db: p.snr_db,
        noise: cfg.noise,
        rel_mse: f64::NAN,
        rel_mse_debiased: f64::NAN,
        rel_rms: f64::NAN,
        rel_rms_debiased: f64::NAN,
        residual: f64::NAN,
        eps: f64::NAN,
        lambda: f64::NAN,
        iterations: 0,
        converged: false,
        success: false,
        status: TrialStatus::Ok,
        wall_time_ms,
    };
    match outcome {
        Ok(o) => {
            rec.rel_mse = o.rel_mse;
            rec.rel_mse_debiased = o.rel_mse_debiased;
            rec.rel_rms = o.rel_mse.sqrt();
            rec.rel_rms_debiased = o.rel_mse_debiased.sqrt();
            rec.residual = o.residual;
            rec.eps = o.eps;
            rec.lambda = o.lambda;
            rec.iterations = o.iterations;
            rec.converged = o.converged;
            rec.success = o.rel_mse <= cfg.success_threshold;
        }
        Err(e) => {
            log::warn!("trial {trial} at grid point {grid_index} failed: {e}");
            rec.status = TrialStatus::Failed(e.to_string());
        }
    }
    rec
}

/// Runs every (grid point, trial) pair of a recovery experiment in parallel and
/// returns the records ordered by grid point, then trial index.
pub fn run_recovery_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let jobs: Vec<(usize, SweepPoint, usize)> = sweep_points(cfg)
        .into_iter()
        .enumerate()
        .flat_map(|(gi, p)| (0..cfg.trials).map(move |t| (gi, p, t)))
        .collect();
    Ok(jobs
        .into_par_iter()
        .map(|(gi, p, t)| run_trial(cfg, gi, p, t))
        .collect())
}

fn expect_kind(cfg: &ExperimentConfig, kinds: &[ExperimentKind]) -> Result<()> {
    if kinds.contains(&cfg.experiment) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "configuration is for `{}`, expected one of {:?}",
            cfg.experiment,
            kinds.iter().map(|k| k.tag()).collect::<Vec<_>>()
        )))
    }
}

pub fn run_snr_sweep(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    expect_kind(cfg, &[ExperimentKind::SnrSweep])?;
    run_recovery_trials(cfg)
}

pub fn run_oversampling_sweep(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    expect_kind(cfg, &[ExperimentKind::OversamplingSweep])?;
    run_recovery_trials(cfg)
}

pub fn run_phase_transition(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    expect_kind(cfg, &[ExperimentKind::PhaseTransition])?;
    run_recovery_trials(cfg)
}

pub const RECOVERY_COLUMNS: [&str; 19] = [
    "kind",
    "experiment",
    "trial",
    "seed",
    "n",
    "m",
    "snr_db",
    "noise",
    "rel_mse",
    "rel_mse_debiased",
    "rel_rms",
    "rel_rms_debiased",
    "residual",
    "eps",
    "lambda",
    "iterations",
    "converged",
    "success",
    "status",
];

/// Trial rows followed, for each grid point, by a `summary` row whose `trial`
/// column holds the number of completed trials, whose metric columns hold means
/// over those trials, and whose `success` column holds the success rate.
pub fn recovery_table(records: &[TrialRecord]) -> Table {
    let mut table = Table::new(RECOVERY_COLUMNS.to_vec());
    let summaries = summarize(records);
    let mut s = summaries.iter().peekable();
    for (i, r) in records.iter().enumerate() {
        let status = match &r.status {
            TrialStatus::Ok => "ok".to_string(),
            TrialStatus::Failed(msg) => format!("failed: {msg}"),
        };
        table.push(vec![
            "trial".into(),
            r.experiment.tag().into(),
            r.trial.into(),
            r.seed.into(),
            r.n.into(),
            r.m.into(),
            r.snr_db.into(),
            r.noise.to_string().into(),
            r.rel_mse.into(),
            r.rel_mse_debiased.into(),
            r.rel_rms.into(),
            r.rel_rms_debiased.into(),
            r.residual.into(),
            r.eps.into(),
            r.lambda.into(),
            r.iterations.into(),
            r.converged.into(),
            r.success.into(),
            status.into(),
        ]);
        let last_of_group = records
            .get(i + 1)
            .is_none_or(|next| next.grid_index != r.grid_index);
        if last_of_group {
            let sm = s.next().expect("one summary per grid point");
            table.push(vec![
                "summary".into(),
                r.experiment.tag().into(),
                sm.completed.into(),
                Cell::Empty,
                sm.n.into(),
                sm.m.into(),
                sm.snr_db.into(),
                sm.noise.to_string().into(),
                sm.mean_rel_mse.into(),
                sm.mean_rel_mse_debiased.into(),
                sm.mean_rel_rms.into(),
                sm.mean_rel_rms_debiased.into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                sm.success_rate.into(),
                Cell::Empty,
            ]);
        }
    }
    table
}

/// Certificate quality at one `(n, m)` over `trials` independent draws.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificatePoint {
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub dist_t_median: f64,
    pub opnorm_tperp_median: f64,
    pub truncated_fraction_mean: f64,
    pub pass_rate: f64,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    match v.len() {
        0 => f64::NAN,
        len if len % 2 == 1 => v[k],
        _ => 0.5 * (v[k - 1] + v[k]),
    }
}

fn certificate_trial<T: Scalar>(
    n: usize,
    m: usize,
    beta: f64,
    seed: u64,
) -> Result<crate::certificate::CertificateReport> {
    let ens = SensingEnsemble::<T>::sample(n, m, Distribution::Gaussian, derive_seed(seed, &[2]))?;
    let x = gaussian_signal::<T>(n, derive_seed(seed, &[1]))?.normalized()?;
    build_certificate(&ens, &x, beta, true)?.verify(&x)
}

pub fn run_certificate_study(cfg: &ExperimentConfig) -> Result<Vec<CertificatePoint>> {
    expect_kind(cfg, &[ExperimentKind::CertificateStudy])?;
    cfg.validate()?;
    cfg.grid()
        .into_iter()
        .enumerate()
        .map(|(gi, (n, m))| {
            let reports = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let seed = trial_seed(cfg.seed, gi, t);
                    match cfg.field {
                        Field::Real => certificate_trial::<f64>(n, m, cfg.beta, seed),
                        Field::Complex => certificate_trial::<Complex64>(n, m, cfg.beta, seed),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let pick = |f: fn(&crate::certificate::CertificateReport) -> f64| {
                reports.iter().map(f).collect::<Vec<_>>()
            };
            Ok(CertificatePoint {
                n,
                m,
                trials: reports.len(),
                dist_t_median: median(&pick(|r| r.dist_t)),
                opnorm_tperp_median: median(&pick(|r| r.opnorm_tperp)),
                truncated_fraction_mean: mean(reports.iter().map(|r| r.truncated_fraction)),
                pass_rate: reports.iter().filter(|r| r.pass).count() as f64 / reports.len() as f64,
            })
        })
        .collect()
}

pub fn certificate_table(points: &[CertificatePoint], beta: f64) -> Table {
    let mut t = Table::new(vec![
        "n",
        "m",
        "trials",
        "beta",
        "dist_t_median",
        "opnorm_tperp_median",
        "truncated_fraction_mean",
        "pass_rate",
    ]);
    for p in points {
        t.push(vec![
            p.n.into(),
            p.m.into(),
            p.trials.into(),
            beta.into(),
            p.dist_t_median.into(),
            p.opnorm_tperp_median.into(),
            p.truncated_fraction_mean.into(),
            p.pass_rate.into(),
        ]);
    }
    t
}

/// Near-isometry statistics at one `(n, m)` over `trials` independent ensembles.
#[derive(Debug, Clone, PartialEq)]
pub struct Rip1Point {
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub delta_median: f64,
    pub delta_max: f64,
    pub rank2_min_ratio: f64,
}

pub fn run_rip1_study(cfg: &ExperimentConfig) -> Result<Vec<Rip1Point>> {
    expect_kind(cfg, &[ExperimentKind::Rip1Study])?;
    cfg.validate()?;
    let mut grid = cfg.grid();
    grid.sort_unstable();
    grid.dedup();
    grid.into_iter()
        .map(|(n, m)| {
            let reports = (0..cfg.trials)
                .map(|t| {
                    rip1_check(
                        cfg.field,
                        n,
                        m,
                        cfg.samples,
                        derive_seed(cfg.seed, &[n as u64, m as u64, t as u64]),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let deltas: Vec<f64> = reports.iter().map(|r| r.delta_observed).collect();
            Ok(Rip1Point {
                n,
                m,
                trials: reports.len(),
                delta_median: median(&deltas),
                delta_max: deltas.iter().cloned().fold(0.0, f64::max),
                rank2_min_ratio: reports
                    .iter()
                    .map(|r| r.rank2_min_ratio)
                    .fold(f64::INFINITY, f64::min),
            })
        })
        .collect()
}

pub fn rip1_table(points: &[Rip1Point], field: Field, samples: usize) -> Table {
    let mut t = Table::new(vec![
        "n",
        "m",
        "field",
        "trials",
        "samples",
        "delta_median",
        "delta_max",
        "rank2_min_ratio",
    ]);
    for p in points {
        t.push(vec![
            p.n.into(),
            p.m.into(),
            field.to_string().into(),
            p.trials.into(),
            samples.into(),
            p.delta_median.into(),
            p.delta_max.into(),
            if samples == 0 {
                Cell::Empty
            } else {
                p.rank2_min_ratio.into()
            },
        ]);
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FCurvePoint {
    pub t: f64,
    pub f_closed: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
}

pub fn run_f_curves(cfg: &ExperimentConfig) -> Result<Vec<FCurvePoint>> {
    expect_kind(cfg, &[ExperimentKind::FCurves])?;
    cfg.validate()?;
    let last = (cfg.t_points - 1) as f64;
    (0..cfg.t_points)
        .map(|k| {
            let t = k as f64 / last;
            let (mc_mean, mc_stderr) = monte_carlo_xi(
                t,
                cfg.field,
                cfg.samples,
                derive_seed(cfg.seed, &[k as u64]),
            )?;
            Ok(FCurvePoint {
                t,
                f_closed: f_closed(cfg.field, t)?,
                mc_mean,
                mc_stderr,
            })
        })
        .collect()
}

pub fn f_curves_table(points: &[FCurvePoint], field: Field) -> Table {
    let mut t = Table::new(vec!["field", "t", "f_closed", "mc_mean", "mc_stderr"]);
    for p in points {
        t.push(vec![
            field.to_string().into(),
            p.t.into(),
            p.f_closed.into(),
            p.mc_mean.into(),
            p.mc_stderr.into(),
        ]);
    }
    t
}

/// Result of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub csv: String,
    /// `trial,n,m,snr_db,wall_time_ms` rows for recovery experiments. Kept out of
    /// the main CSV so that it stays byte-identical across runs.
    pub timings_csv: Option<String>,
    /// Recovery trials whose pipeline failed (recorded in the CSV, not fatal).
    pub failed_trials: usize,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let mut timings_csv = None;
    let mut failed_trials = 0;
    let table = match cfg.experiment {
        ExperimentKind::SnrSweep
        | ExperimentKind::OversamplingSweep
        | ExperimentKind::PhaseTransition => {
            let records = run_recovery_trials(cfg)?;
            failed_trials = records.iter().filter(|r| !r.is_ok()).count();
            let mut timing = String::from("grid_index,trial,n,m,snr_db,wall_time_ms\n");
            for r in &records {
                let _ = writeln!(
                    timing,
                    "{},{},{},{},{:?},{:?}",
                    r.grid_index, r.trial, r.n, r.m, r.snr_db, r.wall_time_ms
                );
            }
            timings_csv = Some(timing);
            recovery_table(&records)
        }
        ExperimentKind::CertificateStudy => {
            certificate_table(&run_certificate_study(cfg)?, cfg.beta)
        }
        ExperimentKind::Rip1Study => rip1_table(&run_rip1_study(cfg)?, cfg.field, cfg.samples),
        ExperimentKind::FCurves => f_curves_table(&run_f_curves(cfg)?, cfg.field),
    };
    Ok(ExperimentOutput {
        csv: render_csv(cfg, &table)?,
        timings_csv,
        failed_trials,
    })
}

/// A worker pool sized by `threads`, or by [`THREADS_ENV`] when `threads` is `None`.
pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let threads = match threads {
        Some(t) => t,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| {
                Error::Config(format!(
                    "{THREADS_ENV} must be a non-negative integer, got `{v}`"
                ))
            })?,
            Err(_) => 0,
        },
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))
}

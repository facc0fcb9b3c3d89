//! Command-line front end for the batch experiments.
//!
//! Exit codes: 0 on success, 1 on I/O or runtime errors, 2 on configuration
//! errors, 3 when `--strict` is set and a trial failed.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

use crate::error::Error;
use crate::experiment::{
    run_experiment, thread_pool, ConfigOverrides, ExperimentKind, SnrBasis, THREADS_ENV,
};
use crate::measurement::{Distribution, NoiseModel};
use crate::scalar::Field;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_STRICT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "phaselift",
    version,
    about = "Seeded phase-retrieval experiments with CSV output",
    after_help = "The worker-thread count is read from PHASELIFT_THREADS (default: all cores)."
)]
pub struct Args {
    /// TOML file with experiment settings; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// snr-sweep, oversampling-sweep, phase-transition, certificate-study, rip1-study or f-curves.
    #[arg(long)]
    pub experiment: Option<ExperimentKind>,
    /// Signal length(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Explicit measurement count(s); overrides --m-over-n.
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    /// Oversampling ratio(s) m/n.
    #[arg(long, value_delimiter = ',')]
    pub m_over_n: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// SNR level(s) in dB; `inf` for noiseless data.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub snr_db: Option<Vec<f64>>,
    /// Power the SNR is measured against: intensities or signal.
    #[arg(long)]
    pub snr_basis: Option<SnrBasis>,
    /// gaussian, poisson or none.
    #[arg(long)]
    pub noise: Option<NoiseModel>,
    /// real or complex.
    #[arg(long)]
    pub field: Option<Field>,
    /// gaussian, unit-sphere or sphere-radius-sqrt-n.
    #[arg(long)]
    pub sensing: Option<Distribution>,
    /// Monte Carlo draws per point (f-curves) or rank-2 samples (rip1-study).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub t_points: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub success_threshold: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Output CSV path (stdout when omitted). Per-trial wall times go to `<out>.timing.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with status 3 if any trial failed.
    #[arg(long)]
    pub strict: bool,
}

impl Args {
    pub fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            experiment: self.experiment,
            n: self.n.clone(),
            m: self.m.clone(),
            m_over_n: self.m_over_n.clone(),
            field: self.field,
            sensing: self.sensing,
            noise: self.noise,
            snr_db: self.snr_db.clone(),
            snr_basis: self.snr_basis,
            trials: self.trials,
            seed: self.seed,
            samples: self.samples,
            t_points: self.t_points,
            beta: self.beta,
            success_threshold: self.success_threshold,
            max_iters: self.max_iters,
            rel_tol: self.rel_tol,
            out: self.out.clone(),
        }
    }
}

fn timing_path(out: &std::path::Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".timing.csv");
    PathBuf::from(s)
}

/// Parses `argv`, runs the experiment and returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return EXIT_CONFIG;
            }
            let _ = write!(stdout, "{e}");
            return EXIT_OK;
        }
    };
    let file = match &args.config {
        Some(p) => match ConfigOverrides::from_file(p) {
            Ok(o) => o,
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_CONFIG;
            }
        },
        None => ConfigOverrides::default(),
    };
    let cfg = match file.merge(args.overrides()).resolve() {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let pool = match thread_pool(None) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e} (from {THREADS_ENV})");
            return EXIT_CONFIG;
        }
    };
    let output = match pool.install(|| run_experiment(&cfg)) {
        Ok(o) => o,
        Err(e @ Error::Config(_)) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_RUNTIME;
        }
    };
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &output.csv).and_then(|_| match &output.timings_csv {
            Some(t) => std::fs::write(timing_path(path), t),
            None => Ok(()),
        }),
        None => stdout.write_all(output.csv.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_RUNTIME;
    }
    if output.failed_trials > 0 {
        let _ = writeln!(
            stderr,
            "{} trial(s) failed; see the status column",
            output.failed_trials
        );
    }
    completion_code(output.failed_trials, args.strict)
}

/// Exit status once the output has been written.
pub fn completion_code(failed_trials: usize, strict: bool) -> i32 {
    if strict && failed_trials > 0 {
        EXIT_STRICT
    } else {
        EXIT_OK
    }
}

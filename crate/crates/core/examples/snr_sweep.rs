//! A small SNR sweep driven through the experiment API, printed as CSV.
//!
//!     cargo run --release --example snr_sweep > sweep.csv

use phaselift::experiment::{run_experiment, ExperimentConfig, ExperimentKind};
use phaselift::NoiseModel;

fn main() -> phaselift::Result<()> {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::SnrSweep);
    cfg.n = vec![16];
    cfg.trials = 3;
    cfg.noise = NoiseModel::Gaussian;
    cfg.snr_db = vec![10.0, 30.0, 50.0];
    let out = run_experiment(&cfg)?;
    print!("{}", out.csv);
    Ok(())
}

//! Recovery from Poisson-corrupted intensities, with and without debiasing.
//!
//!     cargo run --release --example noisy_recovery -- [snr_db] [n]

use phaselift::{
    add_noise, gaussian_signal, Complex64, Distribution, NoiseModel, PhaseLiftSolver,
    RecoveryResult, SensingEnsemble, SolverOptions,
};

fn main() -> phaselift::Result<()> {
    let mut args = std::env::args().skip(1);
    let snr_db: f64 = args.next().map_or(10.0, |s| s.parse().expect("snr_db"));
    let n: usize = args.next().map_or(32, |s| s.parse().expect("n"));
    let m = 6 * n;

    println!("trial  rel_rms  rel_rms_debiased  lambda  residual/eps");
    for trial in 0..5u64 {
        let x = gaussian_signal::<Complex64>(n, 100 + trial)?;
        let ens =
            SensingEnsemble::<Complex64>::sample(n, m, Distribution::UnitSphere, 200 + trial)?;
        let data = add_noise(
            &ens.intensities(&x)?,
            NoiseModel::Poisson,
            snr_db,
            300 + trial,
        )?;

        let solver = PhaseLiftSolver::new(&ens, SolverOptions::default())?;
        let report = solver.solve_constrained(&data)?;
        let rec = RecoveryResult::from_solution(&report.x_hat, Some(&x))?;
        println!(
            "{trial:>5}  {:.4}   {:.4}            {:.2e} {:.3}",
            rec.rel_rms.unwrap(),
            rec.rel_rms_debiased.unwrap(),
            report.lambda_used,
            report.residual / data.eps()
        );
    }
    Ok(())
}

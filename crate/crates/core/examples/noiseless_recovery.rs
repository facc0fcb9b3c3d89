//! Exact recovery of a complex signal from m = 6n noiseless intensities.
//!
//!     cargo run --release --example noiseless_recovery -- [n] [seed]

use phaselift::{
    gaussian_signal, solve_constrained, Complex64, Distribution, IntensityData, RecoveryResult,
    SensingEnsemble, SolverOptions,
};

fn main() -> phaselift::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(32, |s| s.parse().expect("n"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let m = 6 * n;

    let x = gaussian_signal::<Complex64>(n, seed)?;
    let ens = SensingEnsemble::<Complex64>::sample(n, m, Distribution::UnitSphere, seed)?;
    let data = IntensityData::clean(ens.intensities(&x)?)?;

    let report = solve_constrained(&ens, &data, SolverOptions::default())?;
    let rec = RecoveryResult::from_solution(&report.x_hat, Some(&x))?;

    println!("n={n} m={m}");
    println!("{report}");
    let top: Vec<String> = rec
        .spectrum
        .iter()
        .take(3)
        .map(|l| format!("{l:.3e}"))
        .collect();
    println!("leading eigenvalues: {}", top.join(" "));
    println!(
        "relative MSE (up to global phase): {:.3e}",
        rec.rel_mse.unwrap()
    );
    Ok(())
}

//! Saves a sensing ensemble and noisy intensities in the text formats, reads them
//! back and solves from the loaded copies.

use std::io::BufReader;

use phaselift::{
    add_noise, gaussian_signal, solve_constrained, Distribution, IntensityData, NoiseModel,
    RecoveryResult, SensingEnsemble, SolverOptions,
};

fn main() -> phaselift::Result<()> {
    let dir = std::env::temp_dir().join("phaselift-example");
    std::fs::create_dir_all(&dir)?;
    let (n, m) = (8, 48);

    let x = gaussian_signal::<f64>(n, 5)?;
    let ens = SensingEnsemble::<f64>::sample(n, m, Distribution::Gaussian, 5)?;
    let data = add_noise(&ens.intensities(&x)?, NoiseModel::Gaussian, 30.0, 5)?;

    let ens_path = dir.join("ensemble.txt");
    let data_path = dir.join("intensities.txt");
    ens.write_text(std::fs::File::create(&ens_path)?)?;
    data.write_text(std::fs::File::create(&data_path)?)?;
    println!("wrote {} and {}", ens_path.display(), data_path.display());

    let ens2 = SensingEnsemble::<f64>::read_text(BufReader::new(std::fs::File::open(&ens_path)?))?;
    let data2 = IntensityData::read_text(BufReader::new(std::fs::File::open(&data_path)?))?;
    assert_eq!(ens2.columns(), ens.columns());
    assert_eq!(data2, data);

    let report = solve_constrained(&ens2, &data2, SolverOptions::default())?;
    let rec = RecoveryResult::from_solution(&report.x_hat, Some(&x))?;
    println!("{report}");
    println!("rel_rms = {:.4}", rec.rel_rms.unwrap());
    Ok(())
}

use std::io::BufReader;

use phaselift::{
    add_noise, debias, extract_rank1, gaussian_signal, prox_psd_trace, rel_mse, Complex64,
    Distribution, HermitianMatrix, IntensityData, NoiseModel, SensingEnsemble, Signal,
};
use proptest::prelude::*;

fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix<Complex64> {
    let a = gaussian_signal::<Complex64>(n * n, seed).unwrap();
    let m = nalgebra::DMatrix::from_column_slice(n, n, a.entries());
    HermitianMatrix::new((&m + m.adjoint()) * Complex64::new(0.5, 0.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rel_mse_ignores_global_phase(n in 1usize..10, seed in any::<u64>(), theta in 0.0..std::f64::consts::TAU) {
        let x = gaussian_signal::<Complex64>(n, seed).unwrap();
        let y = gaussian_signal::<Complex64>(n, seed ^ 1).unwrap();
        let c = Complex64::from_polar(1.0, theta);
        let base = rel_mse(&x, &y).unwrap();
        prop_assert!(base >= 0.0);
        prop_assert!((rel_mse(&x, &y.scaled(c)).unwrap() - base).abs() <= 1e-12 * base.max(1.0));
        prop_assert!((rel_mse(&x.scaled(c), &y).unwrap() - base).abs() <= 1e-12 * base.max(1.0));
        prop_assert!(rel_mse(&x, &x.scaled(c)).unwrap() <= 1e-12);
    }

    #[test]
    fn adjoint_identity(n in 1usize..6, m in 1usize..20, seed in any::<u64>()) {
        let ens = SensingEnsemble::<Complex64>::sample(n, m, Distribution::Gaussian, seed).unwrap();
        let x = random_hermitian(n, seed ^ 7);
        let y: Vec<f64> = gaussian_signal::<f64>(m, seed ^ 9).unwrap().entries().to_vec();
        let lhs: f64 = ens.apply(&x).unwrap().iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs = x.inner(&ens.adjoint(&y).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn prox_output_is_psd_and_a_fixed_point_at_zero(n in 1usize..6, seed in any::<u64>(), tau in 0.0f64..3.0) {
        let v = random_hermitian(n, seed);
        let p = prox_psd_trace(&v, tau).unwrap();
        let eig = p.eig().unwrap();
        prop_assert!(*eig.eigenvalues().last().unwrap() >= -1e-12);
        let again = prox_psd_trace(&p, 0.0).unwrap();
        prop_assert!((&again - &p).frobenius_norm() <= 1e-12 * p.frobenius_norm().max(1.0));
    }

    #[test]
    fn lifted_signal_is_recovered_and_debias_keeps_energy(n in 1usize..8, seed in any::<u64>()) {
        let x = gaussian_signal::<Complex64>(n, seed).unwrap();
        let (x_hat, l1) = extract_rank1(&x.outer()).unwrap();
        prop_assert!(rel_mse(&x, &x_hat).unwrap() <= 1e-10);
        let d = debias(&x_hat, &[l1]);
        prop_assert!((d.norm_squared() - l1).abs() <= 1e-10 * l1);
    }

    #[test]
    fn ensemble_and_intensities_survive_text_round_trip(n in 1usize..5, m in 1usize..8, seed in any::<u64>(), snr in 0.0f64..60.0) {
        let ens = SensingEnsemble::<Complex64>::sample(n, m, Distribution::UnitSphere, seed).unwrap();
        let mut buf = Vec::new();
        ens.write_text(&mut buf).unwrap();
        let back = SensingEnsemble::<Complex64>::read_text(BufReader::new(&buf[..])).unwrap();
        prop_assert_eq!(back.columns(), ens.columns());
        prop_assert_eq!(back.seed(), seed);

        let x = Signal::new(gaussian_signal::<Complex64>(n, seed).unwrap().entries().to_vec()).unwrap();
        let data = add_noise(&ens.intensities(&x).unwrap(), NoiseModel::Gaussian, snr, seed).unwrap();
        let mut buf = Vec::new();
        data.write_text(&mut buf).unwrap();
        prop_assert_eq!(IntensityData::read_text(BufReader::new(&buf[..])).unwrap(), data);
    }
}

//! End-to-end acceptance checks. Runs as a plain binary (no test harness) so
//! that every criterion prints one PASS/FAIL line; exits non-zero on any FAIL.

use std::f64::consts::{PI, SQRT_2};
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use phaselift::analysis::f_complex_argmin;
use phaselift::certificate::DEFAULT_BETA;
use phaselift::{
    add_noise, build_certificate, expectation_check, f_complex, f_real, gaussian_signal,
    monte_carlo_xi, rel_mse, rip1_check, Complex64, Distribution, Field, IntensityData, NoiseModel,
    PhaseLiftSolver, RecoveryResult, SensingEnsemble, Signal, SolverOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Trial {
    rel_mse: f64,
    rel_rms: f64,
    rel_rms_debiased: f64,
    err_over_eps: f64,
}

/// Complex Gaussian signal, fresh ensemble and noise, constrained solve.
fn recovery_trial(
    n: usize,
    m: usize,
    sensing: Distribution,
    noise: NoiseModel,
    snr_db: f64,
    seed: u64,
) -> Trial {
    let x = gaussian_signal::<Complex64>(n, 1000 + seed).unwrap();
    let ens = SensingEnsemble::<Complex64>::sample(n, m, sensing, 2000 + seed).unwrap();
    let clean = ens.intensities(&x).unwrap();
    let data = if noise == NoiseModel::None {
        IntensityData::clean(clean).unwrap()
    } else {
        add_noise(&clean, noise, snr_db, 3000 + seed).unwrap()
    };
    let report = PhaseLiftSolver::new(&ens, SolverOptions::default())
        .unwrap()
        .solve_constrained(&data)
        .unwrap();
    let rec = RecoveryResult::from_solution(&report.x_hat, Some(&x)).unwrap();
    Trial {
        rel_mse: rec.rel_mse.unwrap(),
        rel_rms: rec.rel_rms.unwrap(),
        rel_rms_debiased: rec.rel_rms_debiased.unwrap(),
        err_over_eps: (&report.x_hat - &x.outer()).frobenius_norm() / data.eps(),
    }
}

fn trials(count: u64, f: impl Fn(u64) -> Trial + Sync + Send) -> Vec<Trial> {
    (0..count).into_par_iter().map(f).collect()
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len() / 2;
    if s.len() % 2 == 1 {
        s[k]
    } else {
        0.5 * (s[k - 1] + s[k])
    }
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, k) = v.fold((0.0, 0), |(s, k), x| (s + x, k + 1));
    s / k as f64
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] > w[1])
}

fn noiseless_recovery() -> Outcome {
    let start = Instant::now();
    let res = trials(10, |s| {
        recovery_trial(
            32,
            192,
            Distribution::UnitSphere,
            NoiseModel::None,
            f64::INFINITY,
            s,
        )
    });
    let secs = start.elapsed().as_secs_f64();
    let hits = res.iter().filter(|t| t.rel_mse <= 1e-4).count();
    let worst = res.iter().map(|t| t.rel_mse).fold(0.0, f64::max);
    outcome(
        hits >= 9 && secs <= 300.0,
        format!("{hits}/10 trials with rel_mse ≤ 1e-4 (worst {worst:.2e}), {secs:.1} s"),
    )
}

fn stability_linearity() -> Outcome {
    let levels = [20.0, 40.0, 60.0];
    let mut medians = Vec::new();
    let mut log_rms = Vec::new();
    for (k, &snr) in levels.iter().enumerate() {
        let res = trials(10, |s| {
            recovery_trial(
                32,
                192,
                Distribution::SphereRadiusSqrtN,
                NoiseModel::Gaussian,
                snr,
                100 * k as u64 + s,
            )
        });
        medians.push(median(
            &res.iter().map(|t| t.err_over_eps).collect::<Vec<_>>(),
        ));
        log_rms.push(mean(res.iter().map(|t| t.rel_rms)).log10());
    }
    let xm = mean(levels.iter().copied());
    let ym = mean(log_rms.iter().copied());
    let slope = levels
        .iter()
        .zip(&log_rms)
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum::<f64>()
        / levels.iter().map(|x| (x - xm).powi(2)).sum::<f64>();
    let pass = medians.iter().all(|&r| r <= 10.0) && (-0.07..=-0.03).contains(&slope);
    outcome(
        pass,
        format!(
            "median ‖X̂−xx*‖_F/ε = {:.3}/{:.3}/{:.3} at 20/40/60 dB, log10 RMS slope {slope:.4}/dB",
            medians[0], medians[1], medians[2]
        ),
    )
}

fn debiasing_benefit() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, snr) in [5.0, 10.0].into_iter().enumerate() {
        let res = trials(10, |s| {
            recovery_trial(
                32,
                192,
                Distribution::UnitSphere,
                NoiseModel::Poisson,
                snr,
                50 * k as u64 + s,
            )
        });
        let better = res
            .iter()
            .filter(|t| t.rel_rms_debiased <= t.rel_rms)
            .count();
        pass &= better >= 7;
        parts.push(format!(
            "{snr} dB: debiased ≤ raw in {better}/10 (mean {:.4} vs {:.4})",
            mean(res.iter().map(|t| t.rel_rms_debiased)),
            mean(res.iter().map(|t| t.rel_rms))
        ));
    }
    outcome(pass, parts.join("; "))
}

fn oversampling_law() -> Outcome {
    let rms = |ratio: usize| {
        let res = trials(10, |s| {
            recovery_trial(
                32,
                ratio * 32,
                Distribution::UnitSphere,
                NoiseModel::Poisson,
                15.0,
                10 * ratio as u64 + s,
            )
        });
        mean(res.iter().map(|t| t.rel_rms))
    };
    let (r6, r12) = (rms(6), rms(12));
    let ratio = r6 / r12;
    outcome(
        (1.4..=2.8).contains(&ratio),
        format!("RMS(6n) = {r6:.4}, RMS(12n) = {r12:.4}, ratio {ratio:.3}"),
    )
}

fn expectation_identity() -> Outcome {
    let real = expectation_check(Field::Real, 4, 200_000, 5).unwrap();
    let complex = expectation_check(Field::Complex, 4, 200_000, 5).unwrap();
    outcome(
        real <= 0.05 && complex <= 0.05,
        format!("max relative deviation real {real:.4}, complex {complex:.4}"),
    )
}

fn f_closed_forms() -> Outcome {
    let grid = |k: usize| (0..k).map(move |i| i as f64 / (k - 1) as f64);
    let real_min = grid(10_000)
        .map(|t| f_real(t).unwrap())
        .fold(f64::INFINITY, f64::min);
    let complex_min = grid(1_000_001)
        .map(|t| f_complex(t).unwrap())
        .fold(f64::INFINITY, f64::min);
    let complex_gap = (complex_min - 2.0 * (SQRT_2 - 1.0)).abs();
    let ts = [0.0, 0.25, f_complex_argmin(), 0.75, 1.0];
    let mut worst_z: f64 = 0.0;
    for (k, &t) in ts.iter().enumerate() {
        for field in [Field::Real, Field::Complex] {
            let (m, se) = monte_carlo_xi(t, field, 1_000_000, 70 + k as u64).unwrap();
            let exact = match field {
                Field::Real => f_real(t).unwrap(),
                Field::Complex => f_complex(t).unwrap(),
            };
            worst_z = worst_z.max((m - exact).abs() / se);
        }
    }
    outcome(
        real_min >= 0.94 && complex_gap <= 1e-6 && worst_z <= 4.0,
        format!(
            "min f_real {real_min:.5}, |min f_complex − 2(√2−1)| = {complex_gap:.1e}, worst Monte Carlo |z| = {worst_z:.2}"
        ),
    )
}

fn certificate_report(n: usize, m: usize, seed: u64) -> phaselift::CertificateReport {
    let ens = SensingEnsemble::<f64>::sample(n, m, Distribution::Gaussian, 400 + seed).unwrap();
    let x = gaussian_signal::<f64>(n, 500 + seed)
        .unwrap()
        .normalized()
        .unwrap();
    build_certificate(&ens, &x, DEFAULT_BETA, true)
        .unwrap()
        .verify(&x)
        .unwrap()
}

fn certificate_thresholds() -> Outcome {
    let n = 64;
    let m = 20 * n * (n as f64).ln().ceil() as usize;
    let reports: Vec<_> = (0..10)
        .into_par_iter()
        .map(|s| certificate_report(n, m, s))
        .collect();
    let passes = reports.iter().filter(|r| r.pass).count();
    let medians: Vec<f64> = [2, 8, 32]
        .iter()
        .map(|r| {
            let d: Vec<f64> = (0..10)
                .into_par_iter()
                .map(|s| certificate_report(n, r * n, s).dist_t)
                .collect();
            median(&d)
        })
        .collect();
    outcome(
        passes >= 9 && strictly_decreasing(&medians),
        format!(
            "m = {m}: {passes}/10 pass; median dist_T at m = 2n/8n/32n: {:.3}/{:.3}/{:.3}",
            medians[0], medians[1], medians[2]
        ),
    )
}

fn rip1_trends() -> Outcome {
    let n = 16;
    let medians: Vec<f64> = [4, 16, 64]
        .iter()
        .map(|r| {
            let d: Vec<f64> = (0..10)
                .map(|s| {
                    rip1_check(Field::Real, n, r * n, 0, s)
                        .unwrap()
                        .delta_observed
                })
                .collect();
            median(&d)
        })
        .collect();
    let real = rip1_check(Field::Real, n, 256 * n, 500, 1)
        .unwrap()
        .rank2_min_ratio;
    let complex = rip1_check(Field::Complex, n, 256 * n, 500, 1)
        .unwrap()
        .rank2_min_ratio;
    outcome(
        strictly_decreasing(&medians) && real >= 0.80 && complex >= 0.70,
        format!(
            "median δ at m = 4n/16n/64n: {:.3}/{:.3}/{:.3}; rank-2 ratio real {real:.3}, complex {complex:.3}",
            medians[0], medians[1], medians[2]
        ),
    )
}

/// Plain proximal gradient written directly against the sensing vectors.
struct PlainProxGradient {
    z: Vec<DVector<Complex64>>,
    b: Vec<f64>,
    lambda: f64,
}

impl PlainProxGradient {
    fn forward(&self, x: &DMatrix<Complex64>) -> Vec<f64> {
        self.z
            .iter()
            .map(|z| (z.adjoint() * x * z)[(0, 0)].re)
            .collect()
    }

    fn adjoint(&self, y: &[f64]) -> DMatrix<Complex64> {
        let n = self.z[0].len();
        let mut out = DMatrix::zeros(n, n);
        for (z, &w) in self.z.iter().zip(y) {
            out += z * z.adjoint() * Complex64::new(w, 0.0);
        }
        out
    }

    /// Largest eigenvalue of `A A*`, whose entries are `|⟨z_i, z_j⟩|²`.
    fn lipschitz(&self) -> f64 {
        let m = self.z.len();
        let g = DMatrix::from_fn(m, m, |i, j| self.z[i].dotc(&self.z[j]).norm_sqr());
        g.symmetric_eigen().eigenvalues.max()
    }

    fn objective(&self, x: &DMatrix<Complex64>) -> f64 {
        let r: f64 = self
            .forward(x)
            .iter()
            .zip(&self.b)
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        0.5 * r + self.lambda * x.trace().re
    }

    fn prox(v: &DMatrix<Complex64>, tau: f64) -> DMatrix<Complex64> {
        let h = (v + v.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = h.symmetric_eigen();
        let d = eig
            .eigenvalues
            .map(|l| Complex64::new((l - tau).max(0.0), 0.0));
        &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.adjoint()
    }

    fn solve(&self, step: f64, iters: usize) -> DMatrix<Complex64> {
        let n = self.z[0].len();
        let mut x = DMatrix::zeros(n, n);
        for _ in 0..iters {
            let r: Vec<f64> = self
                .forward(&x)
                .iter()
                .zip(&self.b)
                .map(|(a, b)| a - b)
                .collect();
            let g = self.adjoint(&r);
            x = Self::prox(&(&x - g * Complex64::new(step, 0.0)), step * self.lambda);
        }
        x
    }
}

fn solver_oracle() -> Outcome {
    let (n, m) = (3, 12);
    let results: Vec<(f64, f64)> = (0..5u64)
        .into_par_iter()
        .map(|s| {
            let ens = SensingEnsemble::<Complex64>::sample(n, m, Distribution::Gaussian, 600 + s)
                .unwrap();
            let x = gaussian_signal::<Complex64>(n, 700 + s).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(800 + s);
            let b: Vec<f64> = ens
                .intensities(&x)
                .unwrap()
                .into_iter()
                .map(|v| v + 0.3 * rng.random_range(-1.0..1.0))
                .collect();
            let lambda = 0.5;
            let plain = PlainProxGradient {
                z: (0..m).map(|i| ens.vector(i).as_vector().clone()).collect(),
                b: b.clone(),
                lambda,
            };
            let l = plain.lipschitz();
            let reference = plain.solve(0.1 / l, 100_000);
            let fast = PhaseLiftSolver::new(&ens, SolverOptions::default())
                .unwrap()
                .solve_regularized(&b, lambda, None)
                .unwrap();
            let fast_x = fast.x_hat.as_matrix();
            let (fo, ro) = (plain.objective(fast_x), plain.objective(&reference));
            ((fo - ro).abs() / ro.abs(), (fast_x - &reference).norm())
        })
        .collect();
    let obj = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let frob = results.iter().map(|r| r.1).fold(0.0, f64::max);
    outcome(
        obj <= 1e-6 && frob <= 1e-4,
        format!("worst relative objective gap {obj:.2e}, worst Frobenius gap {frob:.2e} over 5 instances"),
    )
}

fn metric_oracle() -> Outcome {
    let phases = 100_000;
    let worst = (0..100u64)
        .into_par_iter()
        .map(|s| {
            let x = gaussian_signal::<Complex64>(8, 900 + s).unwrap();
            let noise = gaussian_signal::<Complex64>(8, 1900 + s).unwrap();
            let theta = 2.0 * PI * (s as f64 / 100.0);
            let x_hat = Signal::from_dvector(
                x.as_vector() * Complex64::from_polar(1.0, theta)
                    + noise.as_vector() * Complex64::new(0.1 * (s % 7) as f64, 0.0),
            )
            .unwrap();
            let nx = x.norm_squared();
            let brute = (0..phases)
                .map(|k| {
                    let c = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / phases as f64);
                    x.entries()
                        .iter()
                        .zip(x_hat.entries())
                        .map(|(a, b)| (c * a - b).norm_sqr())
                        .sum::<f64>()
                        / nx
                })
                .fold(f64::INFINITY, f64::min);
            (rel_mse(&x, &x_hat).unwrap() - brute).abs()
        })
        .reduce(|| 0.0, f64::max);
    outcome(
        worst <= 1e-8,
        format!("worst |closed form − phase-grid minimum| = {worst:.2e} over 100 pairs"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("noiseless exact recovery", noiseless_recovery),
        ("stability linearity", stability_linearity),
        ("debiasing benefit", debiasing_benefit),
        ("oversampling law", oversampling_law),
        ("expectation identity", expectation_identity),
        ("f(t) closed forms", f_closed_forms),
        ("dual certificate thresholds", certificate_thresholds),
        ("near-isometry trends", rip1_trends),
        ("solver oracle equivalence", solver_oracle),
        ("metric oracle", metric_oracle),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "acceptance {:>2} {} {name}: {} [{:.1} s]",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! The expectation operator S, a Monte Carlo check of E[A*A/m] = S, and the
//! truncated dual certificate at growing numbers of measurements.

use phaselift::certificate::DEFAULT_BETA;
use phaselift::{
    build_certificate, expectation_check, Field, HermitianMatrix, SOperator, SensingEnsemble,
    Signal,
};

fn main() -> phaselift::Result<()> {
    let s = SOperator::new(Field::Real, 4)?;
    let e1 = Signal::<f64>::basis(4, 0).outer();
    let round_trip = s.apply(&s.inverse(&e1)?)?;
    println!(
        "S(S^-1(e1 e1^T)) - e1 e1^T: {:.1e}",
        (&round_trip - &e1).frobenius_norm()
    );
    println!(
        "S(I) = {} I",
        s.apply(&HermitianMatrix::<f64>::identity(4))?.get(0, 0)
    );

    for field in [Field::Real, Field::Complex] {
        let dev = expectation_check(field, 4, 200_000, 7)?;
        println!("{field}: max relative deviation of the sample average from S = {dev:.4}");
    }

    let n = 64;
    let x = Signal::<f64>::basis(n, 0);
    println!("\n    m   dist_T  ||P_Tperp Y||  truncated  pass");
    for ratio in [2, 8, 32, 100] {
        let m = ratio * n;
        let ens = SensingEnsemble::<f64>::sample(n, m, phaselift::Distribution::Gaussian, 11)?;
        let cert = build_certificate(&ens, &x, DEFAULT_BETA, true)?;
        let r = cert.verify(&x)?;
        println!(
            "{m:>5}  {:.4}  {:.4}         {:.4}     {}",
            r.dist_t, r.opnorm_tperp, r.truncated_fraction, r.pass
        );
    }
    Ok(())
}

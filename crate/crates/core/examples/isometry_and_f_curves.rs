//! Closed-form expectation curves against Monte Carlo, and how close m⁻¹A is to an
//! isometry on low-rank matrices as m grows.

use phaselift::analysis::f_complex_argmin;
use phaselift::{f_complex, f_real, monte_carlo_xi, rip1_check, Field};

fn main() -> phaselift::Result<()> {
    println!("   t    f_real  (MC ± se)            f_complex  (MC ± se)");
    for t in [0.0, 0.25, f_complex_argmin(), 0.75, 1.0] {
        let (mr, sr) = monte_carlo_xi(t, Field::Real, 1_000_000, 1)?;
        let (mc, sc) = monte_carlo_xi(t, Field::Complex, 1_000_000, 2)?;
        println!(
            "{t:.3}  {:.4}  ({mr:.4} ± {sr:.4})   {:.4}     ({mc:.4} ± {sc:.4})",
            f_real(t)?,
            f_complex(t)?
        );
    }

    let n = 16;
    println!("\nfield    m/n  delta  min sampled rank-2 ratio");
    for field in [Field::Real, Field::Complex] {
        for ratio in [4, 16, 64, 256] {
            let r = rip1_check(field, n, ratio * n, 200, 3)?;
            println!(
                "{field:<8} {ratio:>3}  {:.3}  {:.3}",
                r.delta_observed, r.rank2_min_ratio
            );
        }
    }
    Ok(())
}

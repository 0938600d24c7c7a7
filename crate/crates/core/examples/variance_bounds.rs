//! Second-moment bounds for the centered measurement operator, exactly at
//! d = 3 and by Monte Carlo at d = 7.

use phaselift::certification::{variance_bound_check, Expectation, DEFAULT_ENUMERATION_BUDGET};
use phaselift::coded::{seeded_rng, MaskDistribution};
use phaselift::{ComplexSignal, HermitianMatrix, TangentSpace};

fn main() -> phaselift::Result<()> {
    let dist = MaskDistribution::ternary();
    for (d, how) in [
        (3, Expectation::Exact { budget: DEFAULT_ENUMERATION_BUDGET }),
        (7, Expectation::MonteCarlo { samples: 2000, seed: 1 }),
    ] {
        let mut rng = seeded_rng(d as u64);
        let tangent = TangentSpace::new(ComplexSignal::random_unit(&mut rng, d))?;
        let z = tangent.project(&HermitianMatrix::random(&mut rng, d))?;
        let z = z.scaled(1.0 / z.frobenius());
        let r = variance_bound_check(&dist, &tangent, &z, how)?;
        println!(
            "d = {d}: operator {:.3} ≤ {:.1}, trace {:.3} ≤ {:.1}, violations {}",
            r.operator_lhs, r.operator_bound, r.trace_lhs, r.trace_bound, r.violations()
        );
    }
    Ok(())
}

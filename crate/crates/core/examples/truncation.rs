//! Frequency of large frame coefficients against a rank-2 tangent matrix.

use phaselift::certification::truncation_statistics;
use phaselift::coded::{sample_masks, seeded_rng, MaskDistribution, MeasurementFrame};
use phaselift::{ComplexSignal, HermitianMatrix};

fn main() -> phaselift::Result<()> {
    let d = 31;
    let dist = MaskDistribution::ternary();
    let mut rng = seeded_rng(2);
    let (u, v) = (ComplexSignal::random_unit(&mut rng, d), ComplexSignal::random_unit(&mut rng, d));
    let z = HermitianMatrix::outer(&u) - HermitianMatrix::outer(&v);
    let l = 100_000usize.div_ceil(d);
    let frame = MeasurementFrame::new(sample_masks(&dist, d, l, 4)?, dist)?;
    for gamma in [1.0, 1.5, 2.0] {
        let s = truncation_statistics(&frame, &z, gamma)?;
        println!(
            "γ = {gamma}: {} of {} terms above {:.3}, rate {:.2e}, bound 4d^-γ = {:.2e}",
            s.events, s.terms, s.threshold, s.empirical_prob, s.bound
        );
    }
    Ok(())
}

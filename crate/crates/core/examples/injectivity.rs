//! Robust injectivity of the measurement map on the tangent space at xx*,
//! as a function of the number of masks.

use phaselift::certification::{injectivity_spectrum, quadratic_form_gap};
use phaselift::coded::{sample_masks, seeded_rng, MaskDistribution, MeasurementFrame};
use phaselift::{ComplexSignal, TangentSpace};

fn main() -> phaselift::Result<()> {
    let d = 7;
    let dist = MaskDistribution::ternary();
    let x = ComplexSignal::random_unit(&mut seeded_rng(1), d);
    let tangent = TangentSpace::new(x.clone())?;
    for l in [2, 10, 50, 200] {
        let frame = MeasurementFrame::new(sample_masks(&dist, d, l, 10 + l as u64)?, dist.clone())?;
        let report = injectivity_spectrum(&frame, &x, 3)?;
        let z = tangent.project(&phaselift::HermitianMatrix::random(&mut seeded_rng(5), d))?;
        println!(
            "L = {l:>3}: 1 + λ_min = {:+.4} (> 1/4: {}), upper-bound margin {:.2}, quadratic-form gap {:.1e}",
            1.0 + report.lambda_min_restricted,
            report.passes_quarter_bound,
            report.upper_bound_margin,
            quadratic_form_gap(&frame, &z)?,
        );
    }
    Ok(())
}

//! Measure a random signal with ternary coded diffraction patterns and
//! recover it with both solver modes.
//!
//!     cargo run --release --example recover_signal

use phaselift::coded::{sample_masks, seeded_rng, MaskDistribution, MeasurementFrame};
use phaselift::solver::{extract_signal, solve_phaselift, verify_feasibility, SolverConfig};
use phaselift::{phase_aligned_distance, ComplexSignal};

fn main() -> phaselift::Result<()> {
    let (d, l) = (15, 20);
    let dist = MaskDistribution::ternary();
    let x = ComplexSignal::random_unit(&mut seeded_rng(7), d);
    let frame = MeasurementFrame::new(sample_masks(&dist, d, l, 7)?, dist)?;
    let y = frame.measure(&x)?;
    println!("d = {d}, L = {l}: {} intensities", y.values().len());

    for cfg in [SolverConfig::feasibility(x.norm().powi(2)), SolverConfig::trace_min()] {
        let res = solve_phaselift(&frame, &y, &cfg)?;
        let (x_hat, gap) = extract_signal(&res.x_hat)?;
        let report = verify_feasibility(&frame, &y, &res.x_hat, cfg.trace_target)?;
        println!(
            "{:<12} iterations {:>4}  residual {:.2e}  error {:.2e}  rank-1 gap {:.2e}  feasible {}",
            cfg.mode.to_string(),
            res.iterations_used,
            res.final_residual,
            phase_aligned_distance(&x, &x_hat)?,
            gap,
            report.passes(1e-6, 1e-8, 1e-6),
        );
    }
    Ok(())
}

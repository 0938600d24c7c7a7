//! Build a dual certificate with the golfing scheme, re-verify it from its
//! witness, and confirm the solver recovers the certified signal.

use phaselift::certification::{
    certify_optimality, format_log, golfing_construct, injectivity_spectrum, verify_certificate, GolfingOutcome,
    GolfingParams,
};
use phaselift::coded::{seeded_rng, MaskDistribution};
use phaselift::solver::{extract_signal, solve_phaselift, SolverConfig};
use phaselift::{phase_aligned_distance, ComplexSignal};

fn main() -> phaselift::Result<()> {
    let d = 15;
    let dist = MaskDistribution::ternary();
    let x = ComplexSignal::random_unit(&mut seeded_rng(3), d);
    let params = GolfingParams::new(&dist, d, 1.0)?;
    println!("r = {}, w = {}, batches {} then {}", params.r, params.w, params.first_batch, params.later_batch);

    let cert = match golfing_construct(&x, &dist, &params, 11)? {
        GolfingOutcome::Success(cert) => cert,
        GolfingOutcome::Failure(report) => {
            println!("golfing failed: {}\n{}", report.reason, format_log(&report.construction_log));
            return Ok(());
        }
    };
    print!("{}", format_log(&cert.construction_log));

    let frame = cert.frame()?;
    let check = verify_certificate(&cert, &x, &frame)?;
    println!(
        "re-verified: tangent {:.2e} ≤ {:.2e}, complement {:.3} ≤ 0.5",
        check.tangent_residual, check.tangent_bound, check.complement_norm
    );
    let injectivity = injectivity_spectrum(&frame, &x, 0)?;
    println!("{}", certify_optimality(&x, &frame, &cert, &injectivity)?);

    let y = frame.measure(&x)?;
    let res = solve_phaselift(&frame, &y, &SolverConfig::feasibility(1.0))?;
    let (x_hat, _) = extract_signal(&res.x_hat)?;
    println!("solver on the certificate's {} masks: error {:.2e}", frame.mask_count(), phase_aligned_distance(&x, &x_hat)?);
    Ok(())
}

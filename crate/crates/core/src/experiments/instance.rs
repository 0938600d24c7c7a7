//! Single-instance pipelines behind the `recover` and `certify` subcommands.

use crate::certification::{
    certify_optimality, golfing_construct, injectivity_spectrum, verify_certificate, CertificateCheck,
    GolfingOutcome, GolfingParams, InjectivityReport, OptimalityVerdict,
};
use crate::coded::{sample_masks, MaskDistribution, MeasurementFrame, MeasurementVector};
use crate::error::Result;
use crate::hermitian::{phase_aligned_distance, ComplexSignal};
use crate::solver::{extract_signal, solve_phaselift, SolveResult, SolverConfig};

use super::runners::solver_for;

#[derive(Debug, Clone)]
pub struct RecoveryInstance {
    pub frame: MeasurementFrame,
    pub y: MeasurementVector,
    pub result: SolveResult,
    pub x_hat: ComplexSignal,
    pub rank1_gap: f64,
    pub recovery_error: f64,
}

/// Measures `x` with `L` masks drawn from `seed` and solves the lifted
/// program.
pub fn recover_instance(
    x: &ComplexSignal,
    dist: &MaskDistribution,
    l: usize,
    seed: u64,
    solver: &SolverConfig,
) -> Result<RecoveryInstance> {
    let frame = MeasurementFrame::new(sample_masks(dist, x.dim(), l, seed)?, dist.clone())?;
    let y = frame.measure(x)?;
    let result = solve_phaselift(&frame, &y, &solver_for(solver, x))?;
    let (x_hat, rank1_gap) = extract_signal(&result.x_hat)?;
    Ok(RecoveryInstance {
        recovery_error: phase_aligned_distance(x, &x_hat)?,
        frame,
        y,
        result,
        x_hat,
        rank1_gap,
    })
}

#[derive(Debug, Clone)]
pub struct CertifyInstance {
    pub outcome: GolfingOutcome,
    /// Present when golfing succeeded.
    pub check: Option<CertificateCheck>,
    pub injectivity: Option<InjectivityReport>,
    pub verdict: Option<OptimalityVerdict>,
    /// Recovery error of the solver on the certificate's masks.
    pub replay_error: Option<f64>,
}

/// Builds a golfing certificate for `x`, re-verifies it, and checks the
/// optimality hypotheses on the union of its masks. With `replay`, the
/// solver is also run on that frame.
pub fn certify_instance(
    x: &ComplexSignal,
    dist: &MaskDistribution,
    params: &GolfingParams,
    seed: u64,
    replay: Option<&SolverConfig>,
) -> Result<CertifyInstance> {
    let outcome = golfing_construct(x, dist, params, seed)?;
    let mut inst = CertifyInstance {
        outcome,
        check: None,
        injectivity: None,
        verdict: None,
        replay_error: None,
    };
    let Some(cert) = inst.outcome.certificate() else {
        return Ok(inst);
    };
    let frame = cert.frame()?;
    let check = verify_certificate(cert, x, &frame)?;
    let injectivity = injectivity_spectrum(&frame, x, seed)?;
    let verdict = certify_optimality(x, &frame, cert, &injectivity)?;
    if let Some(solver) = replay {
        let y = frame.measure(x)?;
        let res = solve_phaselift(&frame, &y, &solver_for(solver, x))?;
        let (x_hat, _) = extract_signal(&res.x_hat)?;
        inst.replay_error = Some(phase_aligned_distance(x, &x_hat)?);
    }
    inst.check = Some(check);
    inst.injectivity = Some(injectivity);
    inst.verdict = Some(verdict);
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coded::seeded_rng;

    #[test]
    fn recovers_with_many_masks() {
        let x = ComplexSignal::random_unit(&mut seeded_rng(1), 7);
        let inst = recover_instance(&x, &MaskDistribution::ternary(), 16, 2, &SolverConfig::default()).unwrap();
        assert!(inst.recovery_error < 1e-4, "error {}", inst.recovery_error);
        assert_eq!(inst.y.mask_count(), 16);
    }

    #[test]
    fn certify_pipeline_on_success() {
        let dist = MaskDistribution::ternary();
        let x = ComplexSignal::random_unit(&mut seeded_rng(4), 15);
        let params = GolfingParams::new(&dist, 15, 1.0).unwrap();
        let inst = certify_instance(&x, &dist, &params, 9, Some(&SolverConfig::default())).unwrap();
        let cert = inst.outcome.certificate().expect("default batches succeed for this seed");
        assert!(cert.valid());
        assert!(inst.check.unwrap().passes());
        let verdict = inst.verdict.unwrap();
        assert_eq!(verdict.certified, inst.injectivity.unwrap().passes_quarter_bound);
        if verdict.certified {
            assert!(inst.replay_error.unwrap() < 1e-3);
        }
    }
}

//! Acceptance suite: every criterion runs and prints one PASS/FAIL line; the
//! process exits non-zero if any criterion failed.
//!
//!     cargo test --test acceptance

use rayon::prelude::*;

use phaselift::certification::{
    certify_optimality, check_near_isotropy_exact, check_two_design_exact, golfing_construct, injectivity_spectrum,
    quadratic_form_gap, truncation_statistics, variance_bound_check, verify_certificate, Expectation,
    GolfingOutcome, GolfingParams, DEFAULT_ENUMERATION_BUDGET,
};
use phaselift::coded::{crt_relabeling, sample_masks, seeded_rng, MaskDistribution, MeasurementFrame};
use phaselift::experiments::{
    lower_bound_exact, run_experiment, run_lower_bound, run_phase_transition, ExperimentConfig, ExperimentKind,
};
use phaselift::solver::{extract_signal, solve_phaselift, SolverConfig};
use phaselift::{phase_aligned_distance, ComplexSignal, HermitianMatrix, Result, TangentSpace};

type Verdict = Result<(bool, String)>;
type Criterion = (&'static str, fn() -> Verdict);

fn frame(d: usize, l: usize, seed: u64) -> Result<MeasurementFrame> {
    let t = MaskDistribution::ternary();
    MeasurementFrame::new(sample_masks(&t, d, l, seed)?, t)
}

fn near_isotropy() -> Verdict {
    let t = MaskDistribution::ternary();
    let mut worst = 0.0f64;
    for d in [3, 5] {
        worst = worst.max(check_near_isotropy_exact(&t, d, DEFAULT_ENUMERATION_BUDGET)?.max_deviation);
    }
    Ok((worst <= 1e-12, format!("max deviation {worst:.2e} over d ∈ {{3, 5}}")))
}

fn two_design() -> Verdict {
    let r = check_two_design_exact(&MaskDistribution::ternary(), 3, DEFAULT_ENUMERATION_BUDGET)?;
    Ok((r.max_deviation <= 1e-12, format!("max deviation {:.2e} at d = 3", r.max_deviation)))
}

fn even_dimension_fails() -> Verdict {
    let r = check_near_isotropy_exact(&MaskDistribution::ternary(), 4, DEFAULT_ENUMERATION_BUDGET)?;
    Ok((r.max_deviation > 1e-6, format!("d = 4 deviation {:.2e}", r.max_deviation)))
}

fn lifting_and_adjoint() -> Verdict {
    let mut lift = 0.0f64;
    let mut pairing = 0.0f64;
    for d in [3, 5, 15] {
        let f = frame(d, 6, d as u64)?;
        let mut rng = seeded_rng(100 + d as u64);
        for _ in 0..100 {
            let x = ComplexSignal::random_unit(&mut rng, d);
            let y = f.measure(&x)?;
            let lifted = f.apply_a(&x.lift())?;
            for (a, b) in lifted.iter().zip(y.values()) {
                lift = lift.max((a - b).abs() / b.abs().max(1e-300).max(y.norm() / 1e3));
            }
            let z = HermitianMatrix::random(&mut rng, d);
            let c: Vec<f64> = (0..f.measurement_count()).map(|_| rand::Rng::random::<f64>(&mut rng) - 0.5).collect();
            let lhs: f64 = f.apply_a(&z)?.iter().zip(&c).map(|(a, b)| a * b).sum();
            let rhs = z.inner(&f.apply_a_adjoint(&c)?);
            pairing = pairing.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0));
        }
    }
    Ok((
        lift <= 1e-9 && pairing <= 1e-9,
        format!("lifting relative error {lift:.2e}, adjoint pairing {pairing:.2e} (100 pairs each at d = 3, 5, 15)"),
    ))
}

fn sweep(d: usize, ls: Vec<usize>, trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        d_grid: vec![d],
        l_grid: ls,
        trials,
        base_seed: 2024,
        ..ExperimentConfig::for_experiment(ExperimentKind::PhaseTransition)
    }
}

fn desk_recovery() -> Verdict {
    let res = run_phase_transition(&sweep(15, vec![30], 20))?;
    let c = &res.cells[0];
    Ok((
        c.successes >= 19,
        format!("{}/{} recovered at d = 15, L = 30, mean error {:.1e}", c.successes, c.trials, c.mean_error),
    ))
}

fn scaling_trend() -> Verdict {
    let res = run_phase_transition(&sweep(15, vec![2, 5, 10, 20, 30], 20))?;
    let rates: Vec<(usize, f64, f64)> = res
        .cells
        .iter()
        .map(|c| {
            let p = c.success_rate;
            (c.l, p, (p * (1.0 - p) / c.trials as f64).sqrt())
        })
        .collect();
    let mut ok = true;
    for (i, a) in rates.iter().enumerate() {
        for b in &rates[i + 1..] {
            ok &= b.1 >= a.1 - 2.0 * (a.2 * a.2 + b.2 * b.2).sqrt();
        }
    }
    let shown: Vec<String> = rates.iter().map(|(l, p, _)| format!("L={l}: {p:.2}")).collect();
    Ok((ok, shown.join(", ")))
}

fn injectivity() -> Verdict {
    let d = 7;
    let reports: Vec<_> = (0..10u64)
        .into_par_iter()
        .map(|s| -> Result<_> {
            let x = ComplexSignal::random_unit(&mut seeded_rng(700 + s), d);
            let f = frame(d, 200, 7000 + s)?;
            let report = injectivity_spectrum(&f, &x, s)?;
            Ok((f, x, report))
        })
        .collect::<Result<_>>()?;
    let passing = reports.iter().filter(|r| r.2.passes_quarter_bound).count();
    let min_margin = reports.iter().map(|r| r.2.upper_bound_margin).fold(f64::INFINITY, f64::min);
    let (f, x, _) = &reports[0];
    let tangent = TangentSpace::new(x.clone())?;
    let mut rng = seeded_rng(77);
    let mut gap = 0.0f64;
    for _ in 0..50 {
        let z = tangent.project(&HermitianMatrix::random(&mut rng, d))?;
        gap = gap.max(quadratic_form_gap(f, &z)?);
    }
    Ok((
        passing >= 9 && gap <= 1e-9 && min_margin >= 0.0,
        format!("{passing}/10 above 1/4, quadratic-form gap {gap:.1e}, min upper-bound margin {min_margin:.2}"),
    ))
}

fn variance_bounds() -> Verdict {
    let t = MaskDistribution::ternary();
    let mut violations = 0;
    let mut worst = 0.0f64;
    for s in 0..5u64 {
        let mut rng = seeded_rng(300 + s);
        let tangent = TangentSpace::new(ComplexSignal::random_unit(&mut rng, 3))?;
        let z = tangent.project(&HermitianMatrix::random(&mut rng, 3))?;
        let z = z.scaled(1.0 / z.frobenius());
        let r = variance_bound_check(&t, &tangent, &z, Expectation::Exact { budget: DEFAULT_ENUMERATION_BUDGET })?;
        violations += r.violations();
        worst = worst.max(r.operator_lhs / r.operator_bound).max(r.trace_lhs / r.trace_bound);
    }
    Ok((
        violations == 0,
        format!("{violations} violations over 5 exact instances, worst lhs/bound {worst:.3}"),
    ))
}

fn truncation() -> Verdict {
    let d = 31;
    let f = frame(d, 100_000usize.div_ceil(d), 31)?;
    let mut rng = seeded_rng(31);
    let x = ComplexSignal::random_unit(&mut rng, d);
    let tangent = TangentSpace::new(x)?;
    let z = tangent.project(&HermitianMatrix::random(&mut rng, d))?;
    let s = truncation_statistics(&f, &z, 1.0)?;
    Ok((
        s.within_bound(3.0),
        format!(
            "{} of {} terms truncated, rate {:.2e} ≤ {:.2e} + 3σ",
            s.events, s.terms, s.empirical_prob, s.bound
        ),
    ))
}

fn golfing_end_to_end() -> Verdict {
    let d = 15;
    let t = MaskDistribution::ternary();
    let params = GolfingParams::new(&t, d, 1.0)?;
    let runs: Vec<_> = (0..50u64)
        .into_par_iter()
        .map(|s| -> Result<_> {
            let x = ComplexSignal::random_unit(&mut seeded_rng(5000 + s), d);
            let outcome = golfing_construct(&x, &t, &params, s)?;
            let GolfingOutcome::Success(cert) = outcome else {
                return Ok((false, false, None));
            };
            let f = cert.frame()?;
            let verified = matches!(verify_certificate(&cert, &x, &f), Ok(c) if c.passes());
            let inj = injectivity_spectrum(&f, &x, s)?;
            let certified = certify_optimality(&x, &f, &cert, &inj)?.certified;
            Ok((true, verified, certified.then_some((f, x))))
        })
        .collect::<Result<_>>()?;
    let successes = runs.iter().filter(|r| r.0).count();
    let discrepancies = runs.iter().filter(|r| r.0 && !r.1).count();
    let certified: Vec<_> = runs.iter().filter_map(|r| r.2.as_ref()).take(20).collect();
    let replayed = certified
        .par_iter()
        .map(|(f, x)| -> Result<bool> {
            let y = f.measure(x)?;
            let res = solve_phaselift(f, &y, &SolverConfig::feasibility(1.0))?;
            Ok(phase_aligned_distance(x, &extract_signal(&res.x_hat)?.0)? <= 1e-3)
        })
        .collect::<Result<Vec<bool>>>()?;
    let recovered = replayed.iter().filter(|&&b| b).count();
    let needed = (replayed.len() * 19).div_ceil(20);
    Ok((
        discrepancies == 0 && certified.len() == 20 && recovered >= needed,
        format!(
            "{successes}/50 successes, {discrepancies} discrepancies, {recovered}/{} certified instances recovered",
            replayed.len()
        ),
    ))
}

fn lower_bound() -> Verdict {
    let exact = lower_bound_exact(3, 1, 1000)?;
    let small = run_lower_bound(3, 1, 10_000, 11)?;
    let sigma = (exact * (1.0 - exact) / small.trials as f64).sqrt();
    let large = run_lower_bound(64, 2, 10_000, 11)?;
    Ok((
        (exact - 0.75).abs() < 1e-15 && (small.probability - exact).abs() <= 3.0 * sigma && large.probability >= 0.99,
        format!(
            "brute force {exact}, estimate {:.4} (3σ = {:.4}); d = 64, L = 2: {:.4}",
            small.probability,
            3.0 * sigma,
            large.probability
        ),
    ))
}

fn crt() -> Verdict {
    let r = crt_relabeling(3, 5)?;
    let dev = r.max_deviation()?;
    Ok((r.is_permutation() && dev <= 1e-12, format!("max deviation {dev:.1e}")))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir()?;
    let configs = [
        sweep(7, vec![3, 12], 4),
        ExperimentConfig {
            d_grid: vec![15],
            l_grid: vec![1200],
            trials: 3,
            ..ExperimentConfig::for_experiment(ExperimentKind::GolfingRate)
        },
        ExperimentConfig {
            trials: 2000,
            ..ExperimentConfig::for_experiment(ExperimentKind::LowerBound)
        },
        ExperimentConfig::for_experiment(ExperimentKind::IsotropyAudit),
    ];
    let mut identical = true;
    for cfg in &configs {
        let kind = cfg.experiment.expect("set by for_experiment");
        let mut files = Vec::new();
        for (run, workers) in [(0, 0), (1, 2)] {
            let out = run_experiment(&ExperimentConfig { workers, ..cfg.clone() }, kind)?;
            let (_, s) = out.write(&dir.path().join(run.to_string()))?;
            files.push(out.trials.deterministic_csv());
            files.push(std::fs::read_to_string(s)?);
        }
        identical &= files[0] == files[2] && files[1] == files[3];
    }
    Ok((identical, "4 experiments rerun on different pools, CSVs compared without wall_time".into()))
}

fn main() -> std::process::ExitCode {
    let criteria: [Criterion; 13] = [
        ("exact near-isotropy", near_isotropy),
        ("exact 2-design identity", two_design),
        ("even-d failure", even_dimension_fails),
        ("lifting and adjoint consistency", lifting_and_adjoint),
        ("desk-scale recovery", desk_recovery),
        ("scaling trend in L", scaling_trend),
        ("robust injectivity", injectivity),
        ("variance bounds", variance_bounds),
        ("truncation rate", truncation),
        ("golfing end to end", golfing_end_to_end),
        ("coupon-collector lower bound", lower_bound),
        ("CRT relabeling", crt),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let (pass, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        println!(
            "criterion {:>2} {} {name}: {detail} [{:.1}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("all {} criteria passed", criteria.len());
        std::process::ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        std::process::ExitCode::FAILURE
    }
}

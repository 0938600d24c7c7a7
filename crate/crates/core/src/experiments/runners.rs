use std::time::Instant;

use log::info;
use rayon::prelude::*;

use crate::certification::{
    check_near_isotropy_exact, check_two_design_exact, golfing_construct, verify_certificate, GolfingOutcome,
    GolfingParams,
};
use crate::coded::{sample_masks_with, seeded_rng, MaskDistribution, MeasurementFrame};
use crate::error::{Error, Result};
use crate::hermitian::{phase_aligned_distance, ComplexSignal};
use crate::solver::{extract_signal, solve_phaselift, SolverConfig, SolverMode};

use super::{trial_seed, ExperimentConfig, ExperimentKind, ExperimentOutput, SignalKind, Table, WALL_TIME};

/// Runs `f` on a pool of `workers` threads (0: the global pool).
fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn grid(cfg: &ExperimentConfig) -> Vec<(usize, usize, usize)> {
    let mut cells = Vec::new();
    for &d in &cfg.d_grid {
        for &l in &cfg.l_grid {
            for t in 0..cfg.trials {
                cells.push((d, l, t));
            }
        }
    }
    cells
}

fn draw_signal<R: rand::Rng + ?Sized>(kind: SignalKind, rng: &mut R, d: usize) -> ComplexSignal {
    match kind {
        SignalKind::Random => ComplexSignal::random_unit(rng, d),
        SignalKind::Basis => ComplexSignal::basis(d, 0),
    }
}

fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

/// One recovery trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub experiment: ExperimentKind,
    pub d: usize,
    pub l: usize,
    pub trial: usize,
    pub seed: u64,
    /// `recovery_error ≤ success_threshold`.
    pub success: bool,
    pub recovery_error: f64,
    pub iterations: usize,
    pub residual: f64,
    pub rank1_gap: f64,
    pub converged: bool,
    pub error: Option<String>,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub d: usize,
    pub l: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Mean over trials that produced an estimate.
    pub mean_error: f64,
    pub median_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTransitionResult {
    pub records: Vec<TrialRecord>,
    pub cells: Vec<CellSummary>,
}

const PHASE_TRIALS_SCHEMA: &str = "phaselift phase_transition trials v1";
const PHASE_SUMMARY_SCHEMA: &str = "phaselift phase_transition summary v1";

impl PhaseTransitionResult {
    pub fn output(&self) -> ExperimentOutput {
        let mut trials = Table::new(
            PHASE_TRIALS_SCHEMA,
            &[
                "experiment",
                "d",
                "L",
                "trial",
                "seed",
                "success",
                "recovery_error",
                "iterations",
                "residual",
                "rank1_gap",
                "converged",
                "error",
                WALL_TIME,
            ],
        );
        for r in &self.records {
            trials.push(vec![
                r.experiment.to_string(),
                r.d.to_string(),
                r.l.to_string(),
                r.trial.to_string(),
                r.seed.to_string(),
                flag(r.success),
                r.recovery_error.to_string(),
                r.iterations.to_string(),
                r.residual.to_string(),
                r.rank1_gap.to_string(),
                flag(r.converged),
                r.error.as_deref().unwrap_or("").replace(',', ";"),
                format!("{:.6}", r.wall_time),
            ]);
        }
        let mut summary = Table::new(
            PHASE_SUMMARY_SCHEMA,
            &["d", "L", "trials", "successes", "success_rate", "mean_error", "median_iterations"],
        );
        for c in &self.cells {
            summary.push(vec![
                c.d.to_string(),
                c.l.to_string(),
                c.trials.to_string(),
                c.successes.to_string(),
                c.success_rate.to_string(),
                c.mean_error.to_string(),
                c.median_iterations.to_string(),
            ]);
        }
        ExperimentOutput {
            kind: ExperimentKind::PhaseTransition,
            trials,
            summary,
        }
    }

    pub fn cell(&self, d: usize, l: usize) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.d == d && c.l == l)
    }
}

/// Per-`(d, L)` aggregates of trial records, in first-appearance order.
pub fn aggregate_cells(records: &[TrialRecord]) -> Vec<CellSummary> {
    let mut keys: Vec<(usize, usize)> = Vec::new();
    for r in records {
        if !keys.contains(&(r.d, r.l)) {
            keys.push((r.d, r.l));
        }
    }
    keys.into_iter()
        .map(|(d, l)| {
            let cell: Vec<&TrialRecord> = records.iter().filter(|r| r.d == d && r.l == l).collect();
            let successes = cell.iter().filter(|r| r.success).count();
            let errors: Vec<f64> = cell.iter().map(|r| r.recovery_error).filter(|e| e.is_finite()).collect();
            let mut iterations: Vec<usize> = cell.iter().map(|r| r.iterations).collect();
            iterations.sort_unstable();
            CellSummary {
                d,
                l,
                trials: cell.len(),
                successes,
                success_rate: successes as f64 / cell.len() as f64,
                mean_error: if errors.is_empty() {
                    f64::NAN
                } else {
                    errors.iter().sum::<f64>() / errors.len() as f64
                },
                median_iterations: iterations[iterations.len() / 2],
            }
        })
        .collect()
}

fn recovery_trial(
    cfg: &ExperimentConfig,
    dist: &MaskDistribution,
    d: usize,
    l: usize,
    trial: usize,
) -> TrialRecord {
    let seed = trial_seed(cfg.base_seed, d, l, trial);
    let start = Instant::now();
    let attempt = || -> Result<(f64, usize, f64, f64, bool)> {
        let mut rng = seeded_rng(seed);
        let x = draw_signal(cfg.signal, &mut rng, d);
        let frame = MeasurementFrame::new(sample_masks_with(dist, d, l, seed, &mut rng)?, dist.clone())?;
        let y = frame.measure(&x)?;
        let solver = solver_for(&cfg.solver, &x);
        let res = solve_phaselift(&frame, &y, &solver)?;
        let (x_hat, gap) = extract_signal(&res.x_hat)?;
        Ok((
            phase_aligned_distance(&x, &x_hat)?,
            res.iterations_used,
            res.final_residual,
            gap,
            res.converged,
        ))
    };
    let outcome = attempt();
    let wall_time = start.elapsed().as_secs_f64();
    let (recovery_error, iterations, residual, rank1_gap, converged, error) = match outcome {
        Ok((e, it, r, g, c)) => (e, it, r, g, c, None),
        Err(e) => (f64::NAN, 0, f64::NAN, f64::NAN, false, Some(e.to_string())),
    };
    TrialRecord {
        experiment: ExperimentKind::PhaseTransition,
        d,
        l,
        trial,
        seed,
        success: recovery_error <= cfg.success_threshold,
        recovery_error,
        iterations,
        residual,
        rank1_gap,
        converged,
        error,
        wall_time,
    }
}

/// The configured solver with the trace target set to the signal's intensity
/// in feasibility mode.
pub(crate) fn solver_for(base: &SolverConfig, x: &ComplexSignal) -> SolverConfig {
    let mut cfg = base.clone();
    if cfg.mode == SolverMode::Feasibility {
        cfg.trace_target = Some(x.norm().powi(2));
    }
    cfg
}

pub fn run_phase_transition(cfg: &ExperimentConfig) -> Result<PhaseTransitionResult> {
    cfg.validate(ExperimentKind::PhaseTransition)?;
    let dist = cfg.distribution()?;
    let cells = grid(cfg);
    info!("phase transition: {} trials", cells.len());
    let records: Vec<TrialRecord> = with_pool(cfg.workers, || {
        cells
            .par_iter()
            .map(|&(d, l, t)| recovery_trial(cfg, &dist, d, l, t))
            .collect()
    })?;
    Ok(PhaseTransitionResult {
        cells: aggregate_cells(&records),
        records,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GolfingTrial {
    pub d: usize,
    pub first_batch: usize,
    pub later_batch: usize,
    pub trial: usize,
    pub seed: u64,
    pub success: bool,
    /// Successful runs whose certificate re-verifies from its witness.
    pub verified: bool,
    pub failure: Option<String>,
    pub masks_consumed: usize,
    pub tangent_residual: f64,
    pub complement_norm: f64,
    pub wall_time: f64,
}

impl GolfingTrial {
    /// A reported success that fails re-verification.
    pub fn discrepancy(&self) -> bool {
        self.success && !self.verified
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GolfingRateResult {
    pub trials: Vec<GolfingTrial>,
}

impl GolfingRateResult {
    pub fn success_rate(&self, d: usize, first_batch: usize) -> f64 {
        let cell: Vec<_> = self
            .trials
            .iter()
            .filter(|t| t.d == d && t.first_batch == first_batch)
            .collect();
        cell.iter().filter(|t| t.success).count() as f64 / cell.len().max(1) as f64
    }

    pub fn discrepancies(&self) -> usize {
        self.trials.iter().filter(|t| t.discrepancy()).count()
    }

    pub fn output(&self) -> ExperimentOutput {
        let mut trials = Table::new(
            "phaselift golfing_rate trials v1",
            &[
                "d",
                "L",
                "later_batch",
                "trial",
                "seed",
                "success",
                "verified",
                "failure",
                "masks_consumed",
                "tangent_residual",
                "complement_norm",
                WALL_TIME,
            ],
        );
        for t in &self.trials {
            trials.push(vec![
                t.d.to_string(),
                t.first_batch.to_string(),
                t.later_batch.to_string(),
                t.trial.to_string(),
                t.seed.to_string(),
                flag(t.success),
                flag(t.verified),
                t.failure.as_deref().unwrap_or("").replace(',', ";"),
                t.masks_consumed.to_string(),
                t.tangent_residual.to_string(),
                t.complement_norm.to_string(),
                format!("{:.6}", t.wall_time),
            ]);
        }
        let mut summary = Table::new(
            "phaselift golfing_rate summary v1",
            &[
                "d",
                "L",
                "later_batch",
                "trials",
                "successes",
                "success_rate",
                "discrepancies",
                "mean_masks_consumed",
            ],
        );
        let mut keys: Vec<(usize, usize, usize)> = Vec::new();
        for t in &self.trials {
            if !keys.contains(&(t.d, t.first_batch, t.later_batch)) {
                keys.push((t.d, t.first_batch, t.later_batch));
            }
        }
        for (d, f, l) in keys {
            let cell: Vec<&GolfingTrial> = self
                .trials
                .iter()
                .filter(|t| t.d == d && t.first_batch == f && t.later_batch == l)
                .collect();
            let n = cell.len();
            let successes = cell.iter().filter(|t| t.success).count();
            summary.push(vec![
                d.to_string(),
                f.to_string(),
                l.to_string(),
                n.to_string(),
                successes.to_string(),
                (successes as f64 / n as f64).to_string(),
                cell.iter().filter(|t| t.discrepancy()).count().to_string(),
                (cell.iter().map(|t| t.masks_consumed).sum::<usize>() as f64 / n as f64).to_string(),
            ]);
        }
        ExperimentOutput {
            kind: ExperimentKind::GolfingRate,
            trials,
            summary,
        }
    }
}

fn golfing_trial(cfg: &ExperimentConfig, dist: &MaskDistribution, d: usize, first: usize, trial: usize) -> GolfingTrial {
    let seed = trial_seed(cfg.base_seed, d, first, trial);
    let later = cfg.golfing.later_batch.unwrap_or(first.div_ceil(6));
    let start = Instant::now();
    let mut record = GolfingTrial {
        d,
        first_batch: first,
        later_batch: later,
        trial,
        seed,
        success: false,
        verified: false,
        failure: None,
        masks_consumed: 0,
        tangent_residual: f64::NAN,
        complement_norm: f64::NAN,
        wall_time: 0.0,
    };
    let attempt = || -> Result<(GolfingOutcome, bool)> {
        let mut rng = seeded_rng(seed);
        let x = draw_signal(cfg.signal, &mut rng, d);
        let params = GolfingParams::new(dist, d, cfg.golfing.omega)?.with_batches(first, later);
        let outcome = golfing_construct(&x, dist, &params, seed)?;
        let verified = match &outcome {
            GolfingOutcome::Success(cert) => {
                matches!(verify_certificate(cert, &x, &cert.frame()?), Ok(c) if c.passes())
            }
            GolfingOutcome::Failure(_) => false,
        };
        Ok((outcome, verified))
    };
    let attempt = attempt().map(|(o, v)| {
        record.verified = v;
        o
    });
    match attempt {
        Ok(GolfingOutcome::Success(cert)) => {
            record.success = true;
            record.masks_consumed = cert.masks_consumed;
            record.tangent_residual = cert.tangent_residual;
            record.complement_norm = cert.complement_norm;
        }
        Ok(GolfingOutcome::Failure(report)) => {
            record.failure = Some(report.reason.to_string());
            record.masks_consumed = report.masks_consumed;
        }
        Err(e) => record.failure = Some(e.to_string()),
    }
    record.wall_time = start.elapsed().as_secs_f64();
    record
}

/// Golfing success rate over `d_grid × L_grid`, where `L` is the size of the
/// first two batches.
pub fn run_golfing_rate(cfg: &ExperimentConfig) -> Result<GolfingRateResult> {
    cfg.validate(ExperimentKind::GolfingRate)?;
    let dist = cfg.distribution()?;
    let cells = grid(cfg);
    let trials = with_pool(cfg.workers, || {
        cells
            .par_iter()
            .map(|&(d, l, t)| golfing_trial(cfg, &dist, d, l, t))
            .collect()
    })?;
    Ok(GolfingRateResult { trials })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundEstimate {
    pub d: usize,
    pub l: usize,
    pub trials: usize,
    pub collisions: usize,
    pub probability: f64,
    /// Binomial standard error of `probability`.
    pub sigma: f64,
    /// Per-trial collision flags, in trial order.
    pub outcomes: Vec<bool>,
}

/// Whether some coordinate `ℓ > 1` has `|ε_{l,ℓ}| = |ε_{l,1}|` for every mask.
fn collision(masks: &[f64], d: usize, l: usize) -> bool {
    (1..d).any(|c| (0..l).all(|m| (masks[m * d + c] != 0.0) == (masks[m * d] != 0.0)))
}

/// Monte-Carlo estimate of the probability that `e₁` is indistinguishable
/// from another standard basis vector under `L` ternary masks.
pub fn run_lower_bound(d: usize, l: usize, trials: usize, seed: u64) -> Result<LowerBoundEstimate> {
    if d < 2 || l == 0 || trials == 0 {
        return Err(Error::InvalidParameter(format!(
            "lower bound needs d ≥ 2, L ≥ 1, trials ≥ 1 (got {d}, {l}, {trials})"
        )));
    }
    let dist = MaskDistribution::ternary();
    let outcomes: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = trial_seed(seed, d, l, t);
            let mut rng = seeded_rng(s);
            let masks: Vec<f64> = (0..d * l).map(|_| dist.sample(&mut rng)).collect();
            collision(&masks, d, l)
        })
        .collect();
    let collisions = outcomes.iter().filter(|&&c| c).count();
    let p = collisions as f64 / trials as f64;
    Ok(LowerBoundEstimate {
        d,
        l,
        trials,
        collisions,
        probability: p,
        sigma: (p * (1.0 - p) / trials as f64).sqrt(),
        outcomes,
    })
}

/// Exact collision probability by enumerating all `3^{dL}` mask draws.
pub fn lower_bound_exact(d: usize, l: usize, budget: u128) -> Result<f64> {
    let dist = MaskDistribution::ternary();
    let n = d * l;
    let needed = 3u128.checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let support = dist.support();
    let probs = dist.probabilities();
    let mut total = 0.0;
    let mut masks = vec![0.0; n];
    for mut index in 0..needed as usize {
        let mut w = 1.0;
        for m in masks.iter_mut() {
            let a = index % 3;
            index /= 3;
            *m = support[a];
            w *= probs[a];
        }
        if collision(&masks, d, l) {
            total += w;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundResult {
    pub estimates: Vec<LowerBoundEstimate>,
    /// Brute-force values where enumeration fits the budget.
    pub exact: Vec<Option<f64>>,
    pub seeds: Vec<u64>,
}

impl LowerBoundResult {
    pub fn output(&self) -> ExperimentOutput {
        let mut trials = Table::new(
            "phaselift lower_bound trials v1",
            &["d", "L", "trial", "seed", "collision"],
        );
        for (e, &seed) in self.estimates.iter().zip(&self.seeds) {
            for (t, &c) in e.outcomes.iter().enumerate() {
                trials.push(vec![
                    e.d.to_string(),
                    e.l.to_string(),
                    t.to_string(),
                    trial_seed(seed, e.d, e.l, t).to_string(),
                    flag(c),
                ]);
            }
        }
        let mut summary = Table::new(
            "phaselift lower_bound summary v1",
            &["d", "L", "trials", "collisions", "probability", "sigma", "exact"],
        );
        for (e, x) in self.estimates.iter().zip(&self.exact) {
            summary.push(vec![
                e.d.to_string(),
                e.l.to_string(),
                e.trials.to_string(),
                e.collisions.to_string(),
                e.probability.to_string(),
                e.sigma.to_string(),
                x.map(|v| v.to_string()).unwrap_or_default(),
            ]);
        }
        ExperimentOutput {
            kind: ExperimentKind::LowerBound,
            trials,
            summary,
        }
    }
}

pub fn run_lower_bound_grid(cfg: &ExperimentConfig) -> Result<LowerBoundResult> {
    cfg.validate(ExperimentKind::LowerBound)?;
    let mut result = LowerBoundResult {
        estimates: Vec::new(),
        exact: Vec::new(),
        seeds: Vec::new(),
    };
    with_pool(cfg.workers, || -> Result<()> {
        for &d in &cfg.d_grid {
            for &l in &cfg.l_grid {
                result.estimates.push(run_lower_bound(d, l, cfg.trials, cfg.base_seed)?);
                result.exact.push(lower_bound_exact(d, l, cfg.enumeration_budget as u128).ok());
                result.seeds.push(cfg.base_seed);
            }
        }
        Ok(())
    })??;
    Ok(result)
}

pub const AUDIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub d: usize,
    pub realizations: usize,
    pub isotropy_deviation: f64,
    pub two_design_deviation: f64,
    pub wall_time: f64,
}

impl AuditRow {
    pub fn passes(&self) -> bool {
        self.isotropy_deviation <= AUDIT_TOLERANCE && self.two_design_deviation <= AUDIT_TOLERANCE
    }

    /// `pass`, `fail`, or `fail_even_d` (the identities need odd `d`).
    pub fn status(&self) -> &'static str {
        match (self.passes(), self.d.is_multiple_of(2)) {
            (true, _) => "pass",
            (false, true) => "fail_even_d",
            (false, false) => "fail",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsotropyAuditResult {
    pub rows: Vec<AuditRow>,
}

impl IsotropyAuditResult {
    pub fn output(&self) -> ExperimentOutput {
        let mut trials = Table::new(
            "phaselift isotropy_audit rows v1",
            &[
                "d",
                "realizations",
                "isotropy_deviation",
                "two_design_deviation",
                "status",
                WALL_TIME,
            ],
        );
        for r in &self.rows {
            trials.push(vec![
                r.d.to_string(),
                r.realizations.to_string(),
                format!("{:e}", r.isotropy_deviation),
                format!("{:e}", r.two_design_deviation),
                r.status().into(),
                format!("{:.6}", r.wall_time),
            ]);
        }
        let odd: Vec<&AuditRow> = self.rows.iter().filter(|r| r.d % 2 == 1).collect();
        let mut summary = Table::new(
            "phaselift isotropy_audit summary v1",
            &["dimensions", "odd_passed", "odd_total", "even_flagged", "max_odd_deviation"],
        );
        summary.push(vec![
            self.rows.len().to_string(),
            odd.iter().filter(|r| r.passes()).count().to_string(),
            odd.len().to_string(),
            self.rows.iter().filter(|r| r.status() == "fail_even_d").count().to_string(),
            format!(
                "{:e}",
                odd.iter()
                    .map(|r| r.isotropy_deviation.max(r.two_design_deviation))
                    .fold(0.0, f64::max)
            ),
        ]);
        ExperimentOutput {
            kind: ExperimentKind::IsotropyAudit,
            trials,
            summary,
        }
    }
}

pub fn run_isotropy_audit(cfg: &ExperimentConfig) -> Result<IsotropyAuditResult> {
    cfg.validate(ExperimentKind::IsotropyAudit)?;
    let dist = cfg.distribution()?;
    let budget = cfg.enumeration_budget as u128;
    let rows = with_pool(cfg.workers, || -> Result<Vec<AuditRow>> {
        cfg.d_grid
            .iter()
            .map(|&d| {
                let start = Instant::now();
                let iso = check_near_isotropy_exact(&dist, d, budget)?;
                let design = check_two_design_exact(&dist, d, budget)?;
                Ok(AuditRow {
                    d,
                    realizations: iso.realizations,
                    isotropy_deviation: iso.max_deviation,
                    two_design_deviation: design.max_deviation,
                    wall_time: start.elapsed().as_secs_f64(),
                })
            })
            .collect()
    })??;
    Ok(IsotropyAuditResult { rows })
}

/// Runs the experiment selected by `kind`.
pub fn run_experiment(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<ExperimentOutput> {
    Ok(match kind {
        ExperimentKind::PhaseTransition => run_phase_transition(cfg)?.output(),
        ExperimentKind::GolfingRate => run_golfing_rate(cfg)?.output(),
        ExperimentKind::LowerBound => run_lower_bound_grid(cfg)?.output(),
        ExperimentKind::IsotropyAudit => run_isotropy_audit(cfg)?.output(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_phase_config() -> ExperimentConfig {
        ExperimentConfig {
            d_grid: vec![5],
            l_grid: vec![2, 12],
            trials: 4,
            base_seed: 3,
            ..ExperimentConfig::for_experiment(ExperimentKind::PhaseTransition)
        }
    }

    #[test]
    fn phase_transition_aggregates_match_records() {
        let res = run_phase_transition(&small_phase_config()).unwrap();
        assert_eq!(res.records.len(), 8);
        assert_eq!(aggregate_cells(&res.records), res.cells);
        assert!(res.records.iter().all(|r| r.success == (r.recovery_error <= 1e-3)));
        assert_eq!(res.cell(5, 12).unwrap().successes, 4);
        let ordered: Vec<(usize, usize)> = res.records.iter().map(|r| (r.l, r.trial)).collect();
        assert_eq!(ordered, vec![(2, 0), (2, 1), (2, 2), (2, 3), (12, 0), (12, 1), (12, 2), (12, 3)]);
    }

    #[test]
    fn phase_transition_is_deterministic_across_pools() {
        let cfg = small_phase_config();
        let a = run_phase_transition(&cfg).unwrap().output();
        let b = run_phase_transition(&ExperimentConfig { workers: 1, ..cfg }).unwrap().output();
        assert_eq!(a.trials.deterministic_csv(), b.trials.deterministic_csv());
        assert_eq!(a.summary.to_csv(), b.summary.to_csv());
    }

    #[test]
    fn lower_bound_brute_force_small_case() {
        assert!((lower_bound_exact(3, 1, 1000).unwrap() - 0.75).abs() < 1e-15);
        // d = 2, L = 1: the single other coordinate matches with probability 1/2.
        assert!((lower_bound_exact(2, 1, 1000).unwrap() - 0.5).abs() < 1e-15);
        assert!(lower_bound_exact(10, 10, 1000).is_err());
    }

    #[test]
    fn lower_bound_monte_carlo() {
        let e = run_lower_bound(3, 1, 4000, 5).unwrap();
        assert!((e.probability - 0.75).abs() <= 3.0 * (0.75f64 * 0.25 / 4000.0).sqrt());
        let e = run_lower_bound(16, 40, 500, 5).unwrap();
        assert!(e.probability < 0.01);
        assert!(run_lower_bound(1, 1, 10, 0).is_err());
    }

    #[test]
    fn isotropy_audit_flags_even_dimensions() {
        let cfg = ExperimentConfig {
            d_grid: vec![3, 4],
            ..ExperimentConfig::for_experiment(ExperimentKind::IsotropyAudit)
        };
        let res = run_isotropy_audit(&cfg).unwrap();
        assert_eq!(res.rows[0].status(), "pass");
        assert_eq!(res.rows[1].status(), "fail_even_d");
        let out = res.output();
        assert_eq!(out.summary.column("even_flagged").unwrap(), vec!["1"]);
        let empty = ExperimentConfig {
            d_grid: vec![],
            ..cfg
        };
        assert!(run_isotropy_audit(&empty).is_err());
    }

    #[test]
    fn golfing_rate_tiny_batches_fail() {
        let cfg = ExperimentConfig {
            d_grid: vec![15],
            l_grid: vec![1],
            trials: 5,
            golfing: super::super::GolfingSettings {
                omega: 1.0,
                later_batch: Some(1),
            },
            ..ExperimentConfig::for_experiment(ExperimentKind::GolfingRate)
        };
        let res = run_golfing_rate(&cfg).unwrap();
        assert_eq!(res.success_rate(15, 1), 0.0);
        assert_eq!(res.discrepancies(), 0);
        assert_eq!(res.output().summary.rows.len(), 1);
    }
}

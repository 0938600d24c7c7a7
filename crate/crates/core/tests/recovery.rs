use phaselift::experiments::{run_lower_bound, run_phase_transition, ExperimentConfig, ExperimentKind};
use phaselift::solver::{SolverConfig, SolverMode};

fn sweep(d: usize, ls: Vec<usize>, trials: usize, solver: SolverConfig) -> ExperimentConfig {
    ExperimentConfig {
        d_grid: vec![d],
        l_grid: ls,
        trials,
        base_seed: 17,
        solver,
        ..ExperimentConfig::for_experiment(ExperimentKind::PhaseTransition)
    }
}

#[test]
fn thirty_masks_recover_at_every_tested_dimension() {
    for d in [5, 7, 15] {
        let res = run_phase_transition(&sweep(d, vec![30], 20, SolverConfig::default())).unwrap();
        assert!(res.cells[0].successes >= 19, "d = {d}: {:?}", res.cells[0]);
        assert!(res.records.iter().all(|r| r.converged && r.error.is_none()));
    }
}

#[test]
fn two_masks_are_below_the_transition() {
    let res = run_phase_transition(&sweep(15, vec![2], 20, SolverConfig::default())).unwrap();
    assert!(res.cells[0].success_rate < 0.5);
}

#[test]
fn trace_minimization_recovers_with_enough_masks() {
    let solver = SolverConfig {
        mode: SolverMode::TraceMin,
        ..SolverConfig::default()
    };
    let res = run_phase_transition(&sweep(7, vec![20], 10, solver)).unwrap();
    assert!(res.cells[0].successes >= 9, "{:?}", res.cells[0]);
}

#[test]
fn many_masks_make_collisions_rare() {
    let e = run_lower_bound(64, 60, 10_000, 3).unwrap();
    assert!(e.probability < 1e-3);
}

//! A small phase-transition sweep driven by a TOML config, written as CSV.

use phaselift::experiments::{run_phase_transition, ExperimentConfig};

const CONFIG: &str = r#"
experiment = "phase_transition"
d_grid = [7, 15]
L_grid = [2, 4, 8, 16]
trials = 6
base_seed = 1

[solver]
mode = "feasibility"
"#;

fn main() -> phaselift::Result<()> {
    let cfg: ExperimentConfig = CONFIG.parse()?;
    let result = run_phase_transition(&cfg)?;
    for c in &result.cells {
        println!(
            "d = {:>2}, L = {:>2}: {}/{} recovered, median iterations {}",
            c.d, c.l, c.successes, c.trials, c.median_iterations
        );
    }
    let dir = std::env::temp_dir().join("phaselift-example");
    let (trials, summary) = result.output().write(&dir)?;
    println!("wrote {} and {}", trials.display(), summary.display());
    Ok(())
}

use std::path::Path;
use std::process::{Command, Output};

fn phaselift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phaselift"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn without_wall_time(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let schema = lines.next().unwrap();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let skip = header.iter().position(|c| *c == "wall_time");
    let strip = |line: &str| {
        line.split(',')
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip)
            .map(|(_, c)| c)
            .collect::<Vec<_>>()
            .join(",")
    };
    let mut out = vec![schema.to_string(), strip(&header.join(","))];
    out.extend(lines.map(strip));
    out.join("\n")
}

#[test]
fn phase_transition_writes_both_tables_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = phaselift(&[
            "phase-transition",
            "--d",
            "5,7",
            "--L",
            "3,12",
            "--trials",
            "2",
            "--seed",
            "9",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let trials = out.join("phase_transition_trials.csv");
        let summary = out.join("phase_transition_summary.csv");
        assert!(std::fs::read_to_string(&trials).unwrap().starts_with("# phaselift phase_transition trials v1\n"));
        runs.push((without_wall_time(&trials), std::fs::read_to_string(summary).unwrap()));
    }
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0].0.lines().count(), 2 + 2 * 2 * 2);
}

#[test]
fn config_file_drives_the_run_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("audit.toml");
    std::fs::write(&cfg, "experiment = \"isotropy_audit\"\nd_grid = [3]\n").unwrap();
    let out = dir.path().join("out");
    let o = phaselift(&["isotropy-audit", "--config", cfg.to_str().unwrap(), "--d", "3,4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = std::fs::read_to_string(out.join("isotropy_audit_trials.csv")).unwrap();
    assert!(rows.lines().any(|l| l.starts_with("3,") && l.contains(",pass,")));
    assert!(rows.lines().any(|l| l.starts_with("4,") && l.contains(",fail_even_d,")));
}

#[test]
fn unknown_config_keys_and_mismatched_experiments_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "trials = 2\nsped = 3\n").unwrap();
    let o = phaselift(&["lower-bound", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sped"));

    std::fs::write(&cfg, "experiment = \"golfing_rate\"\n").unwrap();
    let o = phaselift(&["lower-bound", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_grids_are_rejected_before_work() {
    let o = phaselift(&["phase-transition", "--d", "4", "--L", "5", "--trials", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = phaselift(&["recover", "--d", "5,7"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn recover_prints_a_solve_record() {
    let o = phaselift(&["recover", "--d", "7", "--L", "20", "--seed", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "d,L,seed,mode,iterations,residual,recovery_error,rank1_gap");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..4], &["7", "20", "4", "feasibility"]);
    assert!(row[6].parse::<f64>().unwrap() < 1e-3);
}

#[test]
fn lower_bound_summary_includes_the_brute_force_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = phaselift(&["lower-bound", "--d", "3", "--L", "1", "--trials", "500", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let summary = std::fs::read_to_string(dir.path().join("lower_bound_summary.csv")).unwrap();
    assert!(summary.lines().nth(2).unwrap().ends_with(",0.75"));
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use phaselift::certification::{format_log, GolfingOutcome, GolfingParams};
use phaselift::coded::seeded_rng;
use phaselift::experiments::{
    certify_instance, recover_instance, run_experiment, ExperimentConfig, ExperimentKind, SignalKind,
};
use phaselift::solver::SolveRecord;
use phaselift::{ComplexSignal, Error, Result};

/// PhaseLift recovery from coded diffraction patterns, and numerical checks
/// of its recovery guarantee.
#[derive(Parser)]
#[command(name = "phaselift", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recovery success rate over a (d, L) grid.
    PhaseTransition(Common),
    /// Golfing certificate success rate; L is the size of the first two batches.
    GolfingRate(Common),
    /// Probability that e₁ is indistinguishable from another basis vector.
    LowerBound(Common),
    /// Exact near-isotropy and 2-design checks over the d grid.
    IsotropyAudit(Common),
    /// Recover one random signal and print its solve record.
    Recover(Common),
    /// Build and check a dual certificate for one random signal.
    Certify(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration; unknown keys are rejected.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated dimensions.
    #[arg(long = "d", value_delimiter = ',')]
    d: Option<Vec<usize>>,
    /// Comma-separated mask counts.
    #[arg(long = "L", value_delimiter = ',')]
    l: Option<Vec<usize>>,
}

impl Common {
    fn config(&self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let cfg = ExperimentConfig::load(path)?;
                cfg.resolve_kind(Some(kind))?;
                cfg
            }
            None => ExperimentConfig::for_experiment(kind),
        };
        if let Some(s) = self.seed {
            cfg.base_seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output = o.clone();
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(d) = &self.d {
            cfg.d_grid = d.clone();
        }
        if let Some(l) = &self.l {
            cfg.l_grid = l.clone();
        }
        Ok(cfg)
    }

    /// Settings for the single-instance commands: one `d`, one `L`.
    fn single(&self, kind: ExperimentKind, default_l: usize) -> Result<(ExperimentConfig, usize, usize)> {
        let mut cfg = self.config(kind)?;
        if self.l.is_none() && self.config.is_none() {
            cfg.l_grid = vec![default_l];
        }
        match (cfg.d_grid.as_slice(), cfg.l_grid.as_slice()) {
            ([d], [l]) => {
                let (d, l) = (*d, *l);
                Ok((cfg, d, l))
            }
            _ => Err(Error::InvalidParameter(
                "single-instance commands take exactly one d and one L".into(),
            )),
        }
    }
}

fn signal(cfg: &ExperimentConfig, d: usize) -> ComplexSignal {
    match cfg.signal {
        SignalKind::Random => ComplexSignal::random_unit(&mut seeded_rng(cfg.base_seed ^ 0x5157), d),
        SignalKind::Basis => ComplexSignal::basis(d, 0),
    }
}

fn sweep(args: &Common, kind: ExperimentKind) -> Result<()> {
    let cfg = args.config(kind)?;
    let out = run_experiment(&cfg, kind)?;
    let (trials, summary) = out.write(&cfg.output)?;
    print!("{}", out.summary.to_csv());
    info!("wrote {} and {}", trials.display(), summary.display());
    Ok(())
}

fn recover(args: &Common) -> Result<()> {
    let (cfg, d, l) = args.single(ExperimentKind::PhaseTransition, 30)?;
    cfg.validate(ExperimentKind::PhaseTransition)?;
    let x = signal(&cfg, d);
    let inst = recover_instance(&x, &cfg.distribution()?, l, cfg.base_seed, &cfg.solver)?;
    let record = SolveRecord {
        d,
        l,
        seed: cfg.base_seed,
        mode: cfg.solver.mode,
        iterations: inst.result.iterations_used,
        residual: inst.result.final_residual,
        recovery_error: inst.recovery_error,
        rank1_gap: inst.rank1_gap,
    };
    let csv = format!("{}\n{}\n", SolveRecord::CSV_HEADER, record.to_csv_row());
    if args.out.is_some() || args.config.is_some() {
        std::fs::create_dir_all(&cfg.output)?;
        let path = cfg.output.join("recover.csv");
        std::fs::write(&path, &csv)?;
        inst.frame.masks().save(cfg.output.join("masks.txt"))?;
        info!("wrote {}", path.display());
    }
    print!("{csv}");
    if !inst.result.converged {
        eprintln!("warning: solver stopped before reaching the residual tolerance");
    }
    Ok(())
}

fn certify(args: &Common) -> Result<bool> {
    let (cfg, d, l) = args.single(ExperimentKind::GolfingRate, 1200)?;
    cfg.validate(ExperimentKind::GolfingRate)?;
    let dist = cfg.distribution()?;
    let x = signal(&cfg, d);
    let later = cfg.golfing.later_batch.unwrap_or(l.div_ceil(6));
    let params = GolfingParams::new(&dist, d, cfg.golfing.omega)?.with_batches(l, later);
    let inst = certify_instance(&x, &dist, &params, cfg.base_seed, Some(&cfg.solver))?;
    if args.out.is_some() || args.config.is_some() {
        std::fs::create_dir_all(&cfg.output)?;
        let text = match &inst.outcome {
            GolfingOutcome::Success(cert) => cert.to_text(),
            GolfingOutcome::Failure(r) => format!("# golfing failed: {}\n{}", r.reason, format_log(&r.construction_log)),
        };
        std::fs::write(cfg.output.join("certificate.txt"), text)?;
    }
    match &inst.outcome {
        GolfingOutcome::Failure(r) => {
            println!("golfing failed after {} masks: {}", r.masks_consumed, r.reason);
            Ok(false)
        }
        GolfingOutcome::Success(cert) => {
            let check = inst.check.expect("checked on success");
            let inj = inst.injectivity.expect("checked on success");
            let verdict = inst.verdict.as_ref().expect("checked on success");
            println!("masks in certificate: {}, consumed: {}", cert.masks.count(), cert.masks_consumed);
            println!(
                "tangent residual {:.3e} (bound {:.3e}), complement norm {:.3e}",
                check.tangent_residual, check.tangent_bound, check.complement_norm
            );
            println!("1 + λ_min on T: {:.4}", 1.0 + inj.lambda_min_restricted);
            println!("verdict: {verdict}");
            if let Some(e) = inst.replay_error {
                println!("solver replay error: {e:.3e}");
            }
            Ok(verdict.certified)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::PhaseTransition(a) => sweep(a, ExperimentKind::PhaseTransition).map(|_| true),
        Command::GolfingRate(a) => sweep(a, ExperimentKind::GolfingRate).map(|_| true),
        Command::LowerBound(a) => sweep(a, ExperimentKind::LowerBound).map(|_| true),
        Command::IsotropyAudit(a) => sweep(a, ExperimentKind::IsotropyAudit).map(|_| true),
        Command::Recover(a) => recover(a).map(|_| true),
        Command::Certify(a) => certify(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

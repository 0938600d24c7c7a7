use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::certification::DEFAULT_ENUMERATION_BUDGET;
use crate::coded::MaskDistribution;
use crate::error::{Error, Result};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    PhaseTransition,
    GolfingRate,
    LowerBound,
    IsotropyAudit,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::PhaseTransition => "phase_transition",
            ExperimentKind::GolfingRate => "golfing_rate",
            ExperimentKind::LowerBound => "lower_bound",
            ExperimentKind::IsotropyAudit => "isotropy_audit",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    /// Uniform on the complex unit sphere.
    #[default]
    Random,
    /// The first standard basis vector.
    Basis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GolfingSettings {
    pub omega: f64,
    /// `L_i` for later iterations; `L₁ = L₂` come from the `L` grid. When
    /// absent, `⌈L₁/6⌉`.
    pub later_batch: Option<usize>,
}

impl Default for GolfingSettings {
    fn default() -> Self {
        Self {
            omega: 1.0,
            later_batch: None,
        }
    }
}

/// Experiment configuration. Unknown keys are rejected when parsing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub d_grid: Vec<usize>,
    #[serde(rename = "L_grid")]
    pub l_grid: Vec<usize>,
    pub trials: usize,
    pub distribution: String,
    pub base_seed: u64,
    pub output: PathBuf,
    pub success_threshold: f64,
    pub signal: SignalKind,
    /// Worker threads; 0 uses all cores.
    pub workers: usize,
    pub enumeration_budget: u64,
    pub solver: SolverConfig,
    pub golfing: GolfingSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            d_grid: vec![15],
            l_grid: vec![2, 5, 10, 20, 30],
            trials: 20,
            distribution: "ternary".into(),
            base_seed: 0,
            output: PathBuf::from("results"),
            success_threshold: 1e-3,
            signal: SignalKind::Random,
            workers: 0,
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET as u64,
            solver: SolverConfig::default(),
            golfing: GolfingSettings::default(),
        }
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(format!("config: {e}")))
    }
}

impl ExperimentConfig {
    /// Defaults tuned for each experiment.
    pub fn for_experiment(kind: ExperimentKind) -> Self {
        let base = Self {
            experiment: Some(kind),
            ..Self::default()
        };
        match kind {
            ExperimentKind::PhaseTransition => base,
            ExperimentKind::GolfingRate => Self {
                l_grid: vec![1200],
                trials: 10,
                ..base
            },
            ExperimentKind::LowerBound => Self {
                d_grid: vec![3, 64],
                l_grid: vec![1, 2],
                trials: 10_000,
                ..base
            },
            ExperimentKind::IsotropyAudit => Self {
                d_grid: vec![3, 4, 5],
                l_grid: vec![1],
                trials: 1,
                ..base
            },
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn distribution(&self) -> Result<MaskDistribution> {
        self.distribution.parse()
    }

    /// The experiment to run: `requested` must agree with the file, if both
    /// are given.
    pub fn resolve_kind(&self, requested: Option<ExperimentKind>) -> Result<ExperimentKind> {
        match (self.experiment, requested) {
            (Some(a), Some(b)) if a != b => Err(Error::InvalidParameter(format!(
                "config is for {a} but {b} was requested"
            ))),
            (Some(a), _) | (None, Some(a)) => Ok(a),
            (None, None) => Err(Error::InvalidParameter("no experiment selected".into())),
        }
    }

    pub fn validate(&self, kind: ExperimentKind) -> Result<()> {
        if self.d_grid.is_empty() {
            return Err(Error::InvalidParameter("d grid is empty".into()));
        }
        if kind != ExperimentKind::IsotropyAudit && self.l_grid.is_empty() {
            return Err(Error::InvalidParameter("L grid is empty".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if !(self.success_threshold > 0.0) {
            return Err(Error::InvalidParameter("success threshold must be positive".into()));
        }
        let dist = self.distribution()?;
        match kind {
            ExperimentKind::PhaseTransition | ExperimentKind::GolfingRate => {
                if let Some(&d) = self.d_grid.iter().find(|&&d| d < 3 || d % 2 == 0) {
                    return Err(Error::InvalidParameter(format!(
                        "recovery experiments need odd d ≥ 3, got {d}"
                    )));
                }
                if kind == ExperimentKind::PhaseTransition && self.l_grid.contains(&0) {
                    return Err(Error::InvalidParameter("L must be at least 1".into()));
                }
                let mut solver = self.solver.clone();
                solver.trace_target.get_or_insert(1.0);
                solver.validate()?;
                if kind == ExperimentKind::GolfingRate && !(self.golfing.omega >= 1.0) {
                    return Err(Error::InvalidParameter("ω must be at least 1".into()));
                }
            }
            ExperimentKind::LowerBound => {
                if dist != MaskDistribution::ternary() {
                    return Err(Error::InvalidParameter(
                        "the lower-bound experiment is defined for ternary masks only".into(),
                    ));
                }
                if self.d_grid.contains(&0) || self.d_grid.contains(&1) || self.l_grid.contains(&0) {
                    return Err(Error::InvalidParameter("lower bound needs d ≥ 2 and L ≥ 1".into()));
                }
            }
            ExperimentKind::IsotropyAudit => {
                if self.d_grid.contains(&0) {
                    return Err(Error::InvalidParameter("d must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = r#"
experiment = "phase_transition"
d_grid = [5, 7]
L_grid = [4, 8]
trials = 3
distribution = "ternary"
base_seed = 11
output = "out"
signal = "basis"

[solver]
mode = "trace_min"
max_iterations = 100

[golfing]
omega = 2.0
later_batch = 50
"#;
        let cfg: ExperimentConfig = text.parse().unwrap();
        assert_eq!(cfg.d_grid, vec![5, 7]);
        assert_eq!(cfg.l_grid, vec![4, 8]);
        assert_eq!(cfg.signal, SignalKind::Basis);
        assert_eq!(cfg.solver.mode, crate::solver::SolverMode::TraceMin);
        assert_eq!(cfg.solver.max_iterations, 100);
        assert_eq!(cfg.solver.residual_tolerance, 1e-7);
        assert_eq!(cfg.golfing.later_batch, Some(50));
        cfg.validate(ExperimentKind::PhaseTransition).unwrap();
        let again: ExperimentConfig = cfg.to_toml().parse().unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!("trials = 3\ncolour = 1".parse::<ExperimentConfig>().is_err());
        assert!("[solver]\nfoo = 1".parse::<ExperimentConfig>().is_err());
    }

    #[test]
    fn validation_rules() {
        let mut cfg = ExperimentConfig::default();
        cfg.d_grid.clear();
        assert!(cfg.validate(ExperimentKind::IsotropyAudit).is_err());
        let cfg = ExperimentConfig {
            d_grid: vec![4],
            ..Default::default()
        };
        assert!(cfg.validate(ExperimentKind::PhaseTransition).is_err());
        assert!(cfg.validate(ExperimentKind::IsotropyAudit).is_ok());
        let cfg = ExperimentConfig {
            trials: 0,
            ..Default::default()
        };
        assert!(cfg.validate(ExperimentKind::PhaseTransition).is_err());
        let cfg = ExperimentConfig {
            distribution: "rademacher".into(),
            ..ExperimentConfig::for_experiment(ExperimentKind::LowerBound)
        };
        assert!(cfg.validate(ExperimentKind::LowerBound).is_err());
    }

    #[test]
    fn experiment_kind_resolution() {
        let cfg = ExperimentConfig::for_experiment(ExperimentKind::LowerBound);
        assert_eq!(cfg.resolve_kind(None).unwrap(), ExperimentKind::LowerBound);
        assert!(cfg.resolve_kind(Some(ExperimentKind::GolfingRate)).is_err());
        assert!(ExperimentConfig::default().resolve_kind(None).is_err());
    }
}

//! First-order solvers for the lifted phase retrieval program.
//!
//! Both modes run Douglas–Rachford splitting. Feasibility mode (`tr X = y₀`
//! known) splits between the affine set `{A(X) = y, tr X = y₀}` and the PSD
//! cone. Trace minimization splits between `{A(X) = y}` and
//! `tr(X) + δ_{PSD}(X)`, whose proximal map shifts the spectrum down and
//! clips it at zero. Only applications of `A` and `A*` are needed; the affine
//! projection solves its normal equations by Jacobi-preconditioned conjugate
//! gradients.

use std::fmt;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::coded::{MeasurementFrame, MeasurementVector};
use crate::error::{check_dim, Error, Result};
use crate::hermitian::{ComplexSignal, HermitianMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    TraceMin,
    Feasibility,
}

impl fmt::Display for SolverMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverMode::TraceMin => "trace_min",
            SolverMode::Feasibility => "feasibility",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub mode: SolverMode,
    pub max_iterations: usize,
    /// Tolerance on `‖A(X) − y‖₂ / ‖y‖₂` (and `|tr X − y₀| / y₀`).
    pub residual_tolerance: f64,
    /// Relaxation of the splitting step in feasibility mode; the proximal
    /// step scale in trace-minimization mode.
    pub step_or_relaxation: f64,
    pub trace_target: Option<f64>,
    pub cg_tolerance: f64,
    pub cg_max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mode: SolverMode::Feasibility,
            max_iterations: 5000,
            residual_tolerance: 1e-7,
            step_or_relaxation: 1.0,
            trace_target: None,
            cg_tolerance: 1e-13,
            cg_max_iterations: 1000,
        }
    }
}

impl SolverConfig {
    pub fn feasibility(trace_target: f64) -> Self {
        Self {
            mode: SolverMode::Feasibility,
            trace_target: Some(trace_target),
            ..Self::default()
        }
    }

    pub fn trace_min() -> Self {
        Self {
            mode: SolverMode::TraceMin,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be at least 1".into()));
        }
        for (name, v) in [
            ("residual_tolerance", self.residual_tolerance),
            ("step_or_relaxation", self.step_or_relaxation),
            ("cg_tolerance", self.cg_tolerance),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.mode == SolverMode::Feasibility {
            if self.step_or_relaxation >= 2.0 {
                return Err(Error::InvalidParameter(format!(
                    "relaxation must lie in (0, 2), got {}",
                    self.step_or_relaxation
                )));
            }
            match self.trace_target {
                None => {
                    return Err(Error::InvalidParameter(
                        "feasibility mode requires a trace target y₀".into(),
                    ))
                }
                Some(t) if !(t >= 0.0) => {
                    return Err(Error::InvalidParameter(format!("trace target must be ≥ 0, got {t}")))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x_hat: HermitianMatrix,
    pub iterations_used: usize,
    pub final_residual: f64,
    pub converged: bool,
    /// Eigenvalues of `x_hat`, descending.
    pub eigen_spectrum: Vec<f64>,
    /// Combined residual after each iteration.
    pub residual_history: Vec<f64>,
    /// Iterations where the fixed-point residual `‖Z_{n+1} − Z_n‖` grew.
    pub monotonicity_violations: usize,
}

/// The affine set `{A(X) = y}`, optionally intersected with `{tr X = y₀}`.
struct AffineConstraints<'a> {
    frame: &'a MeasurementFrame,
    y: Vec<f64>,
    preconditioner: Vec<f64>,
    cg_tolerance: f64,
    cg_max_iterations: usize,
    /// `(y₀, v)` with `v` the component of `Id` in `ker A`; `None` when the
    /// trace is not constrained or is already fixed by `A`.
    trace: Option<(f64, HermitianMatrix)>,
}

impl<'a> AffineConstraints<'a> {
    fn new(frame: &'a MeasurementFrame, y: &[f64], trace_target: Option<f64>, cfg: &SolverConfig) -> Result<Self> {
        let d = frame.dim();
        // ‖F_{k,l}‖_F = Σ_i ε_{l,i}²
        let preconditioner: Vec<f64> = frame
            .masks()
            .iter()
            .flat_map(|eps| {
                let e: f64 = eps.iter().map(|v| v * v).sum();
                std::iter::repeat_n(if e == 0.0 { 1.0 } else { e * e }, d)
            })
            .collect();
        let mut out = Self {
            frame,
            y: y.to_vec(),
            preconditioner,
            cg_tolerance: cfg.cg_tolerance,
            cg_max_iterations: cfg.cg_max_iterations,
            trace: None,
        };
        if let Some(y0) = trace_target {
            let id = HermitianMatrix::identity(d);
            let v = &id - &out.range_component(&id)?;
            if v.trace() > 1e-9 * d as f64 {
                out.trace = Some((y0, v));
            }
        }
        Ok(out)
    }

    /// Solves `(A A*) λ = r` by preconditioned CG, returning the iterate with
    /// the smallest residual. `A A*` is singular once `dL > d²`.
    fn solve_normal(&self, r: &[f64]) -> Result<Vec<f64>> {
        let n = r.len();
        let rnorm = norm(r);
        let mut lambda = vec![0.0; n];
        if rnorm == 0.0 {
            return Ok(lambda);
        }
        let mut best = (rnorm, lambda.clone());
        let mut res = r.to_vec();
        let mut z: Vec<f64> = res.iter().zip(&self.preconditioner).map(|(a, p)| a / p).collect();
        let mut p = z.clone();
        let mut rz = dot(&res, &z);
        let mut since_best = 0;
        for _ in 0..self.cg_max_iterations {
            let ap = self.frame.apply_a(&self.frame.apply_a_adjoint(&p)?)?;
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                break;
            }
            let alpha = rz / pap;
            for i in 0..n {
                lambda[i] += alpha * p[i];
                res[i] -= alpha * ap[i];
            }
            let current = norm(&res);
            if current < best.0 {
                best = (current, lambda.clone());
                since_best = 0;
            } else {
                since_best += 1;
            }
            if current <= self.cg_tolerance * rnorm || since_best >= 20 {
                break;
            }
            for i in 0..n {
                z[i] = res[i] / self.preconditioner[i];
            }
            let rz_new = dot(&res, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Ok(best.1)
    }

    /// Orthogonal projection of `z` onto the row space of `A`.
    fn range_component(&self, z: &HermitianMatrix) -> Result<HermitianMatrix> {
        let lambda = self.solve_normal(&self.frame.apply_a(z)?)?;
        self.frame.apply_a_adjoint(&lambda)
    }

    /// Frobenius-orthogonal projection onto the affine set.
    fn project(&self, z: &HermitianMatrix) -> Result<HermitianMatrix> {
        let az = self.frame.apply_a(z)?;
        let r: Vec<f64> = az.iter().zip(&self.y).map(|(a, b)| a - b).collect();
        let lambda = self.solve_normal(&r)?;
        let projected = z - &self.frame.apply_a_adjoint(&lambda)?;
        Ok(match &self.trace {
            // v ⟂ row space of A, so moving along v keeps A(X) = y.
            Some((y0, v)) => &projected + &v.scaled((y0 - projected.trace()) / v.trace()),
            None => projected,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Relative affine residual `max(‖A(X) − y‖/‖y‖, |tr X − y₀|/y₀)`.
fn relative_residual(frame: &MeasurementFrame, y: &[f64], ynorm: f64, x: &HermitianMatrix, trace_target: Option<f64>) -> Result<f64> {
    let ax = frame.apply_a(x)?;
    let r = ax.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / ynorm;
    let t = match trace_target {
        Some(y0) if y0 > 0.0 => (x.trace() - y0).abs() / y0,
        _ => 0.0,
    };
    Ok(r.max(t))
}

/// Solves the PhaseLift program (trace minimization) or its trace-constrained
/// feasibility variant for measurements `y` taken with `frame`.
pub fn solve_phaselift(
    frame: &MeasurementFrame,
    y: &MeasurementVector,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    check_dim(frame.dim(), y.dim())?;
    check_dim(frame.mask_count(), y.mask_count())?;
    let d = frame.dim();
    let ynorm = y.norm();
    if ynorm == 0.0 {
        return Ok(SolveResult {
            x_hat: HermitianMatrix::zeros(d),
            iterations_used: 0,
            final_residual: 0.0,
            converged: true,
            eigen_spectrum: vec![0.0; d],
            residual_history: Vec::new(),
            monotonicity_violations: 0,
        });
    }
    match cfg.mode {
        SolverMode::Feasibility | SolverMode::TraceMin => douglas_rachford(frame, y.values(), ynorm, cfg),
    }
}

fn douglas_rachford(
    frame: &MeasurementFrame,
    y: &[f64],
    ynorm: f64,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    let d = frame.dim();
    let affine = AffineConstraints::new(frame, y, cfg.trace_target, cfg)?;
    let (tau, mut z) = match cfg.mode {
        SolverMode::Feasibility => {
            let y0 = cfg.trace_target.expect("validated");
            (0.0, HermitianMatrix::identity(d).scaled(y0 / d as f64))
        }
        SolverMode::TraceMin => {
            // Σ_k y_{k,l} = d‖D_l x‖², whose mean over masks is dν‖x‖².
            let nu = frame.distribution().variance();
            let trace_estimate = y.iter().sum::<f64>() / (d as f64 * nu * frame.mask_count() as f64);
            let scale = frame.r_scale();
            let backprojection: Vec<f64> = y.iter().map(|v| v * scale).collect();
            (
                cfg.step_or_relaxation * trace_estimate / d as f64,
                frame.apply_a_adjoint(&backprojection)?,
            )
        }
    };
    let relax = match cfg.mode {
        SolverMode::Feasibility => cfg.step_or_relaxation,
        SolverMode::TraceMin => 1.0,
    };
    let prox = |z: &HermitianMatrix| -> Result<HermitianMatrix> {
        if tau == 0.0 {
            z.psd_project()
        } else {
            Ok(z.eigen()?.reconstruct(|v| (v - tau).max(0.0)))
        }
    };

    let mut x = prox(&z)?;
    let mut history = Vec::new();
    let mut violations = 0;
    let mut previous_step = f64::INFINITY;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    for it in 1..=cfg.max_iterations {
        iterations = it;
        let reflected = &x.scaled(2.0) - &z;
        let step = &affine.project(&reflected)? - &x;
        let step_norm = step.frobenius();
        // The fixed-point residual of the Douglas–Rachford operator is non-increasing.
        if step_norm > previous_step * (1.0 + 1e-6) + 1e-14 * ynorm {
            violations += 1;
            debug!("douglas-rachford: step grew from {previous_step:.3e} to {step_norm:.3e} at iteration {it}");
        }
        previous_step = step_norm;
        z = &z + &step.scaled(relax);
        x = prox(&z)?;
        let affine_residual = relative_residual(frame, y, ynorm, &x, cfg.trace_target)?;
        residual = affine_residual.max(step_norm / x.frobenius().max(f64::MIN_POSITIVE));
        history.push(residual);
        if residual <= cfg.residual_tolerance {
            break;
        }
    }
    if violations > 0 {
        warn!("douglas-rachford: fixed-point residual grew in {violations} iterations");
    }
    finish(x, iterations, residual, cfg, history, violations)
}

fn finish(
    x_hat: HermitianMatrix,
    iterations_used: usize,
    final_residual: f64,
    cfg: &SolverConfig,
    residual_history: Vec<f64>,
    monotonicity_violations: usize,
) -> Result<SolveResult> {
    let eigen_spectrum = x_hat.eigenvalues()?;
    Ok(SolveResult {
        x_hat,
        iterations_used,
        final_residual,
        converged: final_residual <= cfg.residual_tolerance,
        eigen_spectrum,
        residual_history,
        monotonicity_violations,
    })
}

/// Top eigenpair `sqrt(λ₁) v₁` and the rank-one gap `λ₂/λ₁`.
pub fn extract_signal(x_hat: &HermitianMatrix) -> Result<(ComplexSignal, f64)> {
    let eig = x_hat.eigen()?;
    let d = x_hat.dim();
    let l1 = eig.values[0];
    if l1 <= 0.0 {
        return Ok((ComplexSignal::zeros(d), 0.0));
    }
    let gap = if d > 1 { eig.values[1].max(0.0) / l1 } else { 0.0 };
    Ok((eig.vector(0).scaled(C64::new(l1.sqrt(), 0.0)), gap))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityReport {
    /// `max_{k,l} |tr(F_{k,l} X) − y_{k,l}|`.
    pub max_affine_violation: f64,
    pub min_eigenvalue: f64,
    /// `|tr X − y₀|` when `y₀` is given.
    pub trace_deviation: Option<f64>,
}

impl FeasibilityReport {
    pub fn passes(&self, affine_tol: f64, psd_tol: f64, trace_tol: f64) -> bool {
        self.max_affine_violation <= affine_tol
            && self.min_eigenvalue >= -psd_tol
            && self.trace_deviation.is_none_or(|t| t <= trace_tol)
    }
}

pub fn verify_feasibility(
    frame: &MeasurementFrame,
    y: &MeasurementVector,
    x: &HermitianMatrix,
    y0: Option<f64>,
) -> Result<FeasibilityReport> {
    check_dim(frame.dim(), x.dim())?;
    check_dim(frame.measurement_count(), y.values().len())?;
    let ax = frame.apply_a(x)?;
    let max_affine_violation = ax
        .iter()
        .zip(y.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let eig = x.eigen()?;
    Ok(FeasibilityReport {
        max_affine_violation,
        min_eigenvalue: eig.min_value(),
        trace_deviation: y0.map(|t| (x.trace() - t).abs()),
    })
}

/// Flat export record of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub d: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub seed: u64,
    pub mode: SolverMode,
    pub iterations: usize,
    pub residual: f64,
    pub recovery_error: f64,
    pub rank1_gap: f64,
}

impl SolveRecord {
    pub const CSV_HEADER: &'static str = "d,L,seed,mode,iterations,residual,recovery_error,rank1_gap";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:e},{:e},{:e}",
            self.d, self.l, self.seed, self.mode, self.iterations, self.residual, self.recovery_error, self.rank1_gap
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

//! Golfing-scheme construction of an approximate dual certificate and its
//! deterministic verification.

use std::fmt;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_rational::Rational64;
use num_traits::One;
use serde::Serialize;

use crate::certification::InjectivityReport;
use crate::coded::{sample_masks_with, seeded_rng, MaskDistribution, MaskSet, MeasurementFrame};
use crate::error::{check_dim, Error, Result};
use crate::hermitian::{ComplexSignal, HermitianMatrix, NormKind, TangentSpace};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GolfingParams {
    pub omega: f64,
    pub gamma: f64,
    /// Successful later iterations required.
    pub r: usize,
    /// Maximum number of later iterations.
    pub w: usize,
    /// `L₁ = L₂`.
    pub first_batch: usize,
    /// `L_i` for `i ≥ 3`.
    pub later_batch: usize,
    pub t_first: f64,
    pub c_first: f64,
    pub t_later: f64,
    pub c_later: f64,
}

pub const DEFAULT_FIRST_BATCH: usize = 1200;
pub const DEFAULT_LATER_BATCH: usize = 200;

impl GolfingParams {
    /// The schedule for dimension `d`: `γ = 8 + log₂(b²/ν)`,
    /// `r = ⌈½ log₂ d⌉ + ⌈log₂(b²/ν)⌉ + 1`, `w = ⌈10 ω r⌉`,
    /// `(t, c) = (1/8, 1/√(2 log d))` for two iterations, then `(log d / 4, 1/2)`.
    pub fn new(dist: &MaskDistribution, d: usize, omega: f64) -> Result<Self> {
        if d < 3 {
            return Err(Error::InvalidParameter(format!("golfing needs d ≥ 3, got {d}")));
        }
        if !(omega >= 1.0) {
            return Err(Error::InvalidParameter(format!("ω must be at least 1, got {omega}")));
        }
        let nu = dist.variance();
        if nu <= 0.0 {
            return Err(Error::InvalidDistribution("distribution has zero variance (ν = 0)".into()));
        }
        let ln_d = (d as f64).ln();
        let r = ceil_log2(Rational64::from_integer(d as i64)).div_ceil(2)
            + ceil_log2(dist.bound_squared_exact() / dist.variance_exact())
            + 1;
        Ok(Self {
            omega,
            gamma: dist.truncation_rate(),
            r,
            w: (10.0 * omega * r as f64).ceil() as usize,
            first_batch: DEFAULT_FIRST_BATCH,
            later_batch: DEFAULT_LATER_BATCH,
            t_first: 0.125,
            c_first: 1.0 / (2.0 * ln_d).sqrt(),
            t_later: ln_d / 4.0,
            c_later: 0.5,
        })
    }

    pub fn with_batches(mut self, first: usize, later: usize) -> Self {
        self.first_batch = first;
        self.later_batch = later;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega >= 1.0) || !(self.gamma >= 1.0) {
            return Err(Error::InvalidParameter("golfing needs ω ≥ 1 and γ ≥ 1".into()));
        }
        for (name, v) in [
            ("t_first", self.t_first),
            ("c_first", self.c_first),
            ("t_later", self.t_later),
            ("c_later", self.c_later),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Bounds implied by accepting the `j`-th successful step (`j = 1..`):
    /// `(‖Q_j‖₂ bound, partial-sum bound on ‖Y_T^⊥‖_∞)` for `‖Q₀‖₂ = 1`.
    pub fn schedule_bounds(&self, steps: usize) -> Vec<(f64, f64)> {
        let mut q = 1.0;
        let mut partial = 0.0;
        (1..=steps)
            .map(|j| {
                let (t, c) = if j <= 2 {
                    (self.t_first, self.c_first)
                } else {
                    (self.t_later, self.c_later)
                };
                partial += t * q;
                q *= c;
                (q, partial)
            })
            .collect()
    }
}

/// `⌈log₂ q⌉` for rational `q ≥ 1`, exactly.
fn ceil_log2(q: Rational64) -> usize {
    let mut k = 0;
    let mut p = Rational64::one();
    while p < q {
        p *= 2;
        k += 1;
    }
    k
}

/// One iteration of the construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GolfingStep {
    pub iteration: usize,
    pub masks: usize,
    pub t: f64,
    pub c: f64,
    pub accepted: bool,
    /// `‖Q‖₂` entering the iteration.
    pub q_norm: f64,
    /// `‖P_T^⊥(R_Q(Q) − tr(Q) Id)‖_∞`.
    pub complement_increment: f64,
    /// `‖P_T(R_Q(Q) − Q − tr(Q) Id)‖₂`.
    pub tangent_error: f64,
    pub truncated: usize,
    /// `‖Q‖₂` after the iteration (unchanged when rejected).
    pub q_norm_after: f64,
    /// Sum of `complement_increment` over accepted iterations so far.
    pub cumulative_complement: f64,
    /// `‖Y_T^⊥‖_∞` of the current `Y`.
    pub complement_norm: f64,
}

pub fn format_log(log: &[GolfingStep]) -> String {
    let mut out = String::from(
        "# i L_i t c xi q_in complement_increment tangent_error truncated q_out cumulative_complement complement_norm\n",
    );
    for s in log {
        let _ = writeln!(
            out,
            "{} {} {:.6} {:.6} {} {:.6e} {:.6e} {:.6e} {} {:.6e} {:.6e} {:.6e}",
            s.iteration,
            s.masks,
            s.t,
            s.c,
            u8::from(s.accepted),
            s.q_norm,
            s.complement_increment,
            s.tangent_error,
            s.truncated,
            s.q_norm_after,
            s.cumulative_complement,
            s.complement_norm
        );
    }
    out
}

#[derive(Debug, Clone)]
pub struct DualCertificate {
    pub y: HermitianMatrix,
    /// `‖Y_T − X‖₂`.
    pub tangent_residual: f64,
    /// `‖Y_T^⊥‖_∞`.
    pub complement_norm: f64,
    /// `ν / (4 b² √d)`.
    pub tangent_bound: f64,
    pub construction_log: Vec<GolfingStep>,
    /// `c` with `Y = A*(c)` over `masks`.
    pub in_range_witness: Vec<f64>,
    /// Union of the masks of all accepted iterations.
    pub masks: MaskSet,
    /// Total masks drawn, including rejected iterations.
    pub masks_consumed: usize,
}

impl DualCertificate {
    pub fn valid(&self) -> bool {
        self.tangent_residual <= self.tangent_bound && self.complement_norm <= 0.5
    }

    pub fn frame(&self) -> Result<MeasurementFrame> {
        MeasurementFrame::from_masks(self.masks.clone())
    }

    pub fn to_text(&self) -> String {
        format!(
            "# dual certificate d={} masks={} consumed={}\n# tangent_residual={:.6e} bound={:.6e} complement_norm={:.6e} valid={}\n{}",
            self.y.dim(),
            self.masks.count(),
            self.masks_consumed,
            self.tangent_residual,
            self.tangent_bound,
            self.complement_norm,
            self.valid(),
            format_log(&self.construction_log)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GolfingFailure {
    /// One of the first two iterations violated its conditions.
    EarlyIteration(usize),
    /// Fewer than `r` later iterations succeeded within `w`.
    TooFewSuccesses { successes: usize, required: usize },
}

impl fmt::Display for GolfingFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GolfingFailure::EarlyIteration(i) => write!(f, "iteration {i} failed its conditions"),
            GolfingFailure::TooFewSuccesses { successes, required } => {
                write!(f, "{successes} of {required} required later iterations succeeded")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct GolfingReport {
    pub reason: GolfingFailure,
    pub construction_log: Vec<GolfingStep>,
    pub masks_consumed: usize,
}

#[derive(Debug, Clone)]
pub enum GolfingOutcome {
    Success(Box<DualCertificate>),
    Failure(GolfingReport),
}

impl GolfingOutcome {
    pub fn certificate(&self) -> Option<&DualCertificate> {
        match self {
            GolfingOutcome::Success(c) => Some(c),
            GolfingOutcome::Failure(_) => None,
        }
    }

    pub fn log(&self) -> &[GolfingStep] {
        match self {
            GolfingOutcome::Success(c) => &c.construction_log,
            GolfingOutcome::Failure(r) => &r.construction_log,
        }
    }
}

pub fn tangent_bound(dist: &MaskDistribution, d: usize) -> f64 {
    dist.variance() / (4.0 * dist.bound().powi(2) * (d as f64).sqrt())
}

struct Accepted {
    masks: MaskSet,
    coefficients: Vec<f64>,
}

/// Runs the golfing scheme for `X = xx*` with masks drawn from `dist`.
pub fn golfing_construct(
    x: &ComplexSignal,
    dist: &MaskDistribution,
    params: &GolfingParams,
    seed: u64,
) -> Result<GolfingOutcome> {
    params.validate()?;
    if !x.is_unit(1e-10) {
        return Err(Error::InvalidAnchor { norm: x.norm() });
    }
    let d = x.dim();
    if d < 3 {
        return Err(Error::InvalidParameter(format!("golfing needs d ≥ 3, got {d}")));
    }
    let tangent = TangentSpace::new(x.clone())?;
    let target = tangent.anchor_projector().clone();
    let identity = HermitianMatrix::identity(d);
    let mut rng = seeded_rng(seed);

    let mut q = target.clone();
    let mut y = HermitianMatrix::zeros(d);
    let mut log = Vec::new();
    let mut accepted: Vec<Accepted> = Vec::new();
    let mut identity_weight = 0.0;
    let mut cumulative = 0.0;
    let mut consumed = 0;
    let mut successes = 0;

    for i in 1..=params.w + 2 {
        let early = i <= 2;
        if !early && successes == params.r {
            break;
        }
        let (t, c, batch) = if early {
            (params.t_first, params.c_first, params.first_batch)
        } else {
            (params.t_later, params.c_later, params.later_batch)
        };
        let masks = if batch == 0 {
            MaskSet::empty(dist, d)
        } else {
            sample_masks_with(dist, d, batch, seed, &mut rng)?
        };
        consumed += batch;
        let frame = MeasurementFrame::new(masks.clone(), dist.clone())?;
        let trace_q = q.trace();
        let truncated = frame.apply_r_truncated(&q, &q, params.gamma)?;
        let increment = &truncated.value - &identity.scaled(trace_q);
        let complement_increment = tangent.project_complement(&increment)?.norm(NormKind::Operator)?;
        let tangent_error = tangent.project(&(&increment - &q))?.frobenius();
        let q_norm = q.frobenius();
        let ok = complement_increment <= t * q_norm && tangent_error <= c * q_norm;
        if ok {
            let coefficients = frame.truncated_coefficients(&q, &q, params.gamma)?;
            y = &y + &increment;
            q = &target - &tangent.project(&y)?;
            cumulative += complement_increment;
            identity_weight += trace_q;
            accepted.push(Accepted { masks, coefficients });
            if !early {
                successes += 1;
            }
        }
        log.push(GolfingStep {
            iteration: i,
            masks: batch,
            t,
            c,
            accepted: ok,
            q_norm,
            complement_increment,
            tangent_error,
            truncated: truncated.truncated,
            q_norm_after: q.frobenius(),
            cumulative_complement: cumulative,
            complement_norm: tangent.project_complement(&y)?.norm(NormKind::Operator)?,
        });
        if early && !ok {
            return Ok(GolfingOutcome::Failure(GolfingReport {
                reason: GolfingFailure::EarlyIteration(i),
                construction_log: log,
                masks_consumed: consumed,
            }));
        }
    }
    if successes < params.r {
        return Ok(GolfingOutcome::Failure(GolfingReport {
            reason: GolfingFailure::TooFewSuccesses {
                successes,
                required: params.r,
            },
            construction_log: log,
            masks_consumed: consumed,
        }));
    }

    let masks = MaskSet::concat(&accepted.iter().map(|a| a.masks.clone()).collect::<Vec<_>>())?;
    let union = MeasurementFrame::new(masks.clone(), dist.clone())?;
    let mut witness: Vec<f64> = accepted.into_iter().flat_map(|a| a.coefficients).collect();
    let id_coefficients = identity_witness(&union)?;
    for (w, c) in witness.iter_mut().zip(&id_coefficients) {
        *w -= identity_weight * c;
    }
    let rebuilt = union.apply_a_adjoint(&witness)?;
    let deviation = rebuilt.max_abs_diff(&y);
    if deviation > 1e-9 * y.max_abs_entry().max(1.0) {
        return Err(Error::Integrity(format!(
            "range witness reproduces Y only to {deviation:.3e}"
        )));
    }
    Ok(GolfingOutcome::Success(Box::new(DualCertificate {
        tangent_residual: (&tangent.project(&y)? - &target).frobenius(),
        complement_norm: tangent.project_complement(&y)?.norm(NormKind::Operator)?,
        tangent_bound: tangent_bound(dist, d),
        y,
        construction_log: log,
        in_range_witness: witness,
        masks,
        masks_consumed: consumed,
    })))
}

/// Coefficients `c` with `A*(c) = Id`: constant in `k` per mask, with mask
/// weights the minimum-norm solution of `Σ_l w_l ε_{l,i}² = 1/d`
/// (`Σ_k F_{k,l} = d D_l²`).
pub fn identity_witness(frame: &MeasurementFrame) -> Result<Vec<f64>> {
    let d = frame.dim();
    let l = frame.mask_count();
    if l == 0 {
        return Err(Error::Integrity("identity is not in the range of an empty frame".into()));
    }
    let squares = DMatrix::from_fn(d, l, |i, m| frame.masks().mask(m)[i].powi(2));
    let rhs = DVector::from_element(d, 1.0 / d as f64);
    let svd = squares.clone().svd(true, true);
    let weights = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Numeric(format!("identity witness solve failed: {e}")))?;
    let residual = (&squares * &weights - &rhs).amax();
    if residual > 1e-12 {
        return Err(Error::Integrity(format!(
            "identity is not in the span of the squared masks (residual {residual:.3e})"
        )));
    }
    Ok(weights.iter().flat_map(|&w| std::iter::repeat_n(w, d)).collect())
}

/// Minimum-norm `c` with `A*(c) = Y` by conjugate gradients on `A*A`.
pub fn range_witness(frame: &MeasurementFrame, y: &HermitianMatrix) -> Result<Vec<f64>> {
    check_dim(frame.dim(), y.dim())?;
    let apply = |z: &HermitianMatrix| -> Result<HermitianMatrix> { frame.apply_a_adjoint(&frame.apply_a(z)?) };
    let ynorm = y.frobenius();
    let mut w = HermitianMatrix::zeros(y.dim());
    if ynorm == 0.0 {
        return frame.apply_a(&w);
    }
    let mut r = y.clone();
    let mut p = r.clone();
    let mut rr = r.inner(&r);
    for _ in 0..10 * y.dim() * y.dim() {
        let ap = apply(&p)?;
        let alpha = rr / p.inner(&ap);
        w = &w + &p.scaled(alpha);
        r = &r - &ap.scaled(alpha);
        let rr_new = r.inner(&r);
        if rr_new.sqrt() <= 1e-14 * ynorm {
            break;
        }
        p = &r + &p.scaled(rr_new / rr);
        rr = rr_new;
    }
    frame.apply_a(&w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateCheck {
    pub tangent_residual: f64,
    pub tangent_bound: f64,
    pub complement_norm: f64,
    pub tangent_ok: bool,
    pub complement_ok: bool,
    /// `max |A*(c) − Y|` entrywise.
    pub reconstruction_deviation: f64,
}

impl CertificateCheck {
    pub fn passes(&self) -> bool {
        self.tangent_ok && self.complement_ok
    }
}

/// Rebuilds `Y` from the witness over `frame` and recomputes both norms.
pub fn verify_certificate(cert: &DualCertificate, x: &ComplexSignal, frame: &MeasurementFrame) -> Result<CertificateCheck> {
    check_dim(frame.dim(), x.dim())?;
    check_dim(frame.measurement_count(), cert.in_range_witness.len())?;
    let y = frame.apply_a_adjoint(&cert.in_range_witness)?;
    let deviation = y.max_abs_diff(&cert.y);
    if deviation > 1e-8 * cert.y.max_abs_entry().max(1.0) {
        return Err(Error::Integrity(format!(
            "witness reconstructs Y only to {deviation:.3e}"
        )));
    }
    let tangent = TangentSpace::new(x.clone())?;
    let tangent_residual = (&tangent.project(&y)? - tangent.anchor_projector()).frobenius();
    let complement_norm = tangent.project_complement(&y)?.norm(NormKind::Operator)?;
    let tangent_bound = tangent_bound(frame.distribution(), frame.dim());
    Ok(CertificateCheck {
        tangent_residual,
        tangent_bound,
        complement_norm,
        tangent_ok: tangent_residual <= tangent_bound,
        complement_ok: complement_norm <= 0.5,
        reconstruction_deviation: deviation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Hypothesis {
    /// `‖Y_T − X‖₂ ≤ ν/(4b²√d)`.
    TangentResidual,
    /// `‖Y_T^⊥‖_∞ ≤ 1/2`.
    ComplementNorm,
    /// `(1/ν²dL)‖A(Z)‖² > ¼‖Z‖²` on `T`.
    Injectivity,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::TangentResidual => "certificate tangent residual bound",
            Hypothesis::ComplementNorm => "certificate complement norm bound",
            Hypothesis::Injectivity => "robust injectivity on the tangent space",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OptimalityVerdict {
    pub certified: bool,
    pub failing: Vec<Hypothesis>,
}

impl fmt::Display for OptimalityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.certified {
            return f.write_str("certified");
        }
        f.write_str("not certified:")?;
        for (n, h) in self.failing.iter().enumerate() {
            write!(f, "{}{h}", if n == 0 { " " } else { "; " })?;
        }
        Ok(())
    }
}

/// `xx*` is the unique optimum for `frame` when the certificate bounds and
/// robust injectivity both hold. The certificate's masks must be the leading
/// masks of `frame`, so that `Y` lies in the range of its adjoint.
pub fn certify_optimality(
    x: &ComplexSignal,
    frame: &MeasurementFrame,
    cert: &DualCertificate,
    injectivity: &InjectivityReport,
) -> Result<OptimalityVerdict> {
    check_dim(frame.dim(), x.dim())?;
    check_dim(frame.dim(), cert.y.dim())?;
    let n = cert.masks.values().len();
    if cert.masks.count() > frame.mask_count() || frame.masks().values()[..n] != *cert.masks.values() {
        return Err(Error::InvalidInput(
            "certificate masks are not the leading masks of the frame".into(),
        ));
    }
    let mut failing = Vec::new();
    if !(cert.tangent_residual <= cert.tangent_bound) {
        failing.push(Hypothesis::TangentResidual);
    }
    if !(cert.complement_norm <= 0.5) {
        failing.push(Hypothesis::ComplementNorm);
    }
    if !injectivity.passes_quarter_bound {
        failing.push(Hypothesis::Injectivity);
    }
    Ok(OptimalityVerdict {
        certified: failing.is_empty(),
        failing,
    })
}

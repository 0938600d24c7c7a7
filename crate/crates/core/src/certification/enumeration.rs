//! Exact expectations over all mask realizations.

use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::coded::{dft_vector, MaskDistribution, MaskSet, MeasurementFrame};
use crate::error::{Error, Result};
use crate::hermitian::{CMatrix, ComplexSignal, HermitianMatrix, NormKind, TangentSpace, C64};

pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1_000_000;

const CHUNK: usize = 256;

/// All `|support|^d` masks with their exact probabilities.
struct Realizations<'a> {
    dist: &'a MaskDistribution,
    d: usize,
    count: usize,
    probabilities: Vec<f64>,
}

impl<'a> Realizations<'a> {
    fn new(dist: &'a MaskDistribution, d: usize, budget: u128) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        let needed = (dist.support_size() as u128)
            .checked_pow(d as u32)
            .unwrap_or(u128::MAX);
        if needed > budget {
            return Err(Error::BudgetExceeded { needed, budget });
        }
        Ok(Self {
            dist,
            d,
            count: needed as usize,
            probabilities: dist
                .atoms()
                .iter()
                .map(|a| a.probability.to_f64().expect("probability fits in f64"))
                .collect(),
        })
    }

    /// Mask values and probability of realization `index`.
    fn get(&self, mut index: usize) -> (Vec<f64>, f64) {
        let n = self.dist.support_size();
        let support = self.dist.support();
        let mut values = Vec::with_capacity(self.d);
        let mut weight = 1.0;
        for _ in 0..self.d {
            let a = index % n;
            index /= n;
            values.push(support[a]);
            weight *= self.probabilities[a];
        }
        (values, weight)
    }

    fn frame(&self, values: Vec<f64>) -> Result<MeasurementFrame> {
        MeasurementFrame::new(
            MaskSet::from_values(self.dist, self.d, 1, values, 0)?,
            self.dist.clone(),
        )
    }

    /// `Σ_realizations p · f(mask)`, reduced in a fixed order.
    fn expectation<T, F, A>(&self, zero: T, f: F, add: A) -> Result<T>
    where
        T: Clone + Send + Sync,
        F: Fn(&[f64], f64) -> Result<T> + Sync,
        A: Fn(&mut T, T) + Sync,
    {
        let chunks: Vec<usize> = (0..self.count).step_by(CHUNK).collect();
        let partial: Vec<Result<T>> = chunks
            .par_iter()
            .map(|&start| {
                let mut acc = zero.clone();
                for index in start..(start + CHUNK).min(self.count) {
                    let (values, weight) = self.get(index);
                    if weight == 0.0 {
                        continue;
                    }
                    add(&mut acc, f(&values, weight)?);
                }
                Ok(acc)
            })
            .collect();
        let mut total = zero;
        for p in partial {
            add(&mut total, p?);
        }
        Ok(total)
    }
}

#[allow(clippy::ptr_arg)] // used as the reducer for `T = Vec<CMatrix>`
fn add_matrices(acc: &mut Vec<CMatrix>, other: Vec<CMatrix>) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a += b;
    }
}

fn elementary(d: usize, i: usize, j: usize) -> CMatrix {
    let mut e = CMatrix::zeros(d, d);
    e[(i, j)] = C64::new(1.0, 0.0);
    e
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropyReport {
    pub d: usize,
    pub realizations: usize,
    /// `max_{ij} ‖E[R](E_ij) − E_ij − δ_ij Id‖_max`.
    pub max_deviation: f64,
    /// Zero-based basis index `(i, j)` attaining the maximum.
    pub worst: (usize, usize),
}

/// Exact `E[R]` for a single mask (`L = 1`; the expectation does not depend
/// on `L`) compared with `Z ↦ Z + tr(Z) Id` on every `E_ij`.
pub fn check_near_isotropy_exact(dist: &MaskDistribution, d: usize, budget: u128) -> Result<IsotropyReport> {
    let real = Realizations::new(dist, d, budget)?;
    if dist.variance() <= 0.0 {
        return Err(Error::InvalidDistribution("distribution has zero variance (ν = 0)".into()));
    }
    let basis: Vec<CMatrix> = (0..d * d).map(|n| elementary(d, n / d, n % d)).collect();
    let expected = real.expectation(
        vec![CMatrix::zeros(d, d); d * d],
        |values, weight| {
            let frame = real.frame(values.to_vec())?;
            basis
                .iter()
                .map(|e| Ok(frame.apply_r_complex(e)? * C64::new(weight, 0.0)))
                .collect()
        },
        add_matrices,
    )?;
    let mut max_deviation = 0.0;
    let mut worst = (0, 0);
    for (n, er) in expected.iter().enumerate() {
        let (i, j) = (n / d, n % d);
        let mut target = basis[n].clone();
        if i == j {
            for a in 0..d {
                target[(a, a)] += C64::new(1.0, 0.0);
            }
        }
        let dev = (er - target).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if dev > max_deviation {
            max_deviation = dev;
            worst = (i, j);
        }
    }
    Ok(IsotropyReport {
        d,
        realizations: real.count,
        max_deviation,
        worst,
    })
}

/// `I + SWAP = 2 P_Sym²` on `C^d ⊗ C^d`, with `(a, b) ↦ a·d + b`.
pub fn symmetric_projector_doubled(d: usize) -> CMatrix {
    let n = d * d;
    CMatrix::from_fn(n, n, |r, c| {
        let (a, b) = (r / d, r % d);
        let (p, q) = (c / d, c % d);
        let mut v = 0.0;
        if r == c {
            v += 1.0;
        }
        if a == q && b == p {
            v += 1.0;
        }
        C64::new(v, 0.0)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoDesignReport {
    pub d: usize,
    pub realizations: usize,
    /// `max |(1/ν²d) Σ_k E[F_k ⊗ F_k] − 2 P_Sym²|` entrywise.
    pub max_deviation: f64,
    /// `‖P_Sym² P_Sym² − P_Sym²‖_max`.
    pub projector_idempotency_error: f64,
    /// `tr P_Sym²`, which should be `d(d+1)/2`.
    pub projector_trace: f64,
}

pub fn check_two_design_exact(dist: &MaskDistribution, d: usize, budget: u128) -> Result<TwoDesignReport> {
    let real = Realizations::new(dist, d, budget)?;
    let nu = dist.variance();
    if nu <= 0.0 {
        return Err(Error::InvalidDistribution("distribution has zero variance (ν = 0)".into()));
    }
    let fourier: Vec<ComplexSignal> = (1..=d).map(|k| dft_vector(d, k)).collect::<Result<_>>()?;
    let n = d * d;
    let sum = real.expectation(
        CMatrix::zeros(n, n),
        |values, weight| {
            let mut acc = CMatrix::zeros(n, n);
            for f in &fourier {
                let v: Vec<C64> = f.as_slice().iter().zip(values).map(|(z, e)| z * *e).collect();
                let vv = nalgebra::DVector::from_fn(n, |r, _| v[r / d] * v[r % d]);
                acc.ger(C64::new(weight, 0.0), &vv, &vv.map(|z| z.conj()), C64::new(1.0, 0.0));
            }
            Ok(acc)
        },
        |a, b| *a += b,
    )?;
    let lhs = sum / C64::new(nu * nu * d as f64, 0.0);
    let doubled = symmetric_projector_doubled(d);
    let projector = &doubled * C64::new(0.5, 0.0);
    let projector_idempotency_error = (&projector * &projector - &projector)
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    Ok(TwoDesignReport {
        d,
        realizations: real.count,
        max_deviation: (lhs - doubled).iter().map(|v| v.norm()).fold(0.0, f64::max),
        projector_idempotency_error,
        projector_trace: projector.trace().re,
    })
}

/// How the expectation over one mask is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expectation {
    Exact { budget: u128 },
    MonteCarlo { samples: usize, seed: u64 },
}

/// Second moments of `M(Z) = (1/ν²d) Σ_k tr(F_k Z) F_k` for one mask, with
/// their bounds `30 b⁸/ν⁴ ‖Z‖₂²` and `60 b⁸/ν⁴ ‖Z‖₂²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceReport {
    /// `‖E[M(Z)²]‖_∞`.
    pub operator_lhs: f64,
    pub operator_bound: f64,
    /// `tr E[(P_T M(Z))²]`.
    pub trace_lhs: f64,
    pub trace_bound: f64,
    /// Three standard errors for Monte-Carlo estimates, zero for exact ones.
    pub operator_slack: f64,
    pub trace_slack: f64,
    pub samples: usize,
    pub exact: bool,
}

impl VarianceReport {
    pub fn violations(&self) -> usize {
        usize::from(self.operator_lhs > self.operator_bound + self.operator_slack)
            + usize::from(self.trace_lhs > self.trace_bound + self.trace_slack)
    }

    pub fn passes(&self) -> bool {
        self.violations() == 0
    }
}

pub fn variance_bound_check(
    dist: &MaskDistribution,
    tangent: &TangentSpace,
    z: &HermitianMatrix,
    how: Expectation,
) -> Result<VarianceReport> {
    let d = tangent.dim();
    crate::error::check_dim(d, z.dim())?;
    if !tangent.contains(z, 1e-9)? {
        return Err(Error::InvalidInput("Z is not in the tangent space".into()));
    }
    let nu = dist.variance();
    if nu <= 0.0 {
        return Err(Error::InvalidDistribution("distribution has zero variance (ν = 0)".into()));
    }
    let b8 = dist.bound().powi(8);
    let z2 = z.frobenius().powi(2);
    let operator_bound = 30.0 * b8 / nu.powi(4) * z2;
    let trace_bound = 60.0 * b8 / nu.powi(4) * z2;

    // (M², tr (P_T M)², ‖M²‖_F², (tr (P_T M)²)²) for one mask
    let moments = |values: Vec<f64>| -> Result<(CMatrix, f64, f64, f64)> {
        let frame = MeasurementFrame::new(MaskSet::from_values(dist, d, 1, values, 0)?, dist.clone())?;
        let m = frame.apply_r(z)?;
        let sq = m.matrix() * m.matrix();
        let pt = tangent.project(&m)?;
        let t = pt.inner(&pt);
        let f2 = sq.iter().map(|v| v.norm_sqr()).sum();
        Ok((sq, t, f2, t * t))
    };

    match how {
        Expectation::Exact { budget } => {
            let real = Realizations::new(dist, d, budget)?;
            let (sq, t, _, _) = real.expectation(
                (CMatrix::zeros(d, d), 0.0, 0.0, 0.0),
                |values, w| {
                    let (sq, t, _, _) = moments(values.to_vec())?;
                    Ok((sq * C64::new(w, 0.0), t * w, 0.0, 0.0))
                },
                |a, b| {
                    a.0 += b.0;
                    a.1 += b.1;
                },
            )?;
            Ok(VarianceReport {
                operator_lhs: HermitianMatrix::new(sq)?.norm(NormKind::Operator)?,
                operator_bound,
                trace_lhs: t,
                trace_bound,
                operator_slack: 0.0,
                trace_slack: 0.0,
                samples: real.count,
                exact: true,
            })
        }
        Expectation::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(Error::InvalidParameter("Monte-Carlo needs at least 2 samples".into()));
            }
            let mut rng = crate::coded::seeded_rng(seed);
            let draws: Vec<Vec<f64>> = (0..samples)
                .map(|_| (0..d).map(|_| dist.sample(&mut rng)).collect())
                .collect();
            let per: Vec<Result<(CMatrix, f64, f64, f64)>> =
                draws.into_par_iter().map(moments).collect();
            let mut acc = (CMatrix::zeros(d, d), 0.0, 0.0, 0.0);
            for p in per {
                let (sq, t, f2, t2) = p?;
                acc.0 += sq;
                acc.1 += t;
                acc.2 += f2;
                acc.3 += t2;
            }
            let n = samples as f64;
            let mean = acc.0 / C64::new(n, 0.0);
            let mean_f2: f64 = mean.iter().map(|v| v.norm_sqr()).sum();
            let t_mean = acc.1 / n;
            // ‖mean − E‖_∞ ≤ ‖mean − E‖_F, whose standard error is this.
            let op_se = ((acc.2 / n - mean_f2).max(0.0) / n).sqrt();
            let t_se = ((acc.3 / n - t_mean * t_mean).max(0.0) / n).sqrt();
            Ok(VarianceReport {
                operator_lhs: HermitianMatrix::new(mean)?.norm(NormKind::Operator)?,
                operator_bound,
                trace_lhs: t_mean,
                trace_bound,
                operator_slack: 3.0 * op_se,
                trace_slack: 3.0 * t_se,
                samples,
                exact: false,
            })
        }
    }
}

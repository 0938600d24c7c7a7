//! The lifted measurement maps of the coded diffraction model.
//!
//! For mask `l` and frequency `k ∈ 1..=d` the lifted frame element is
//! `F_{k,l} = D_l f_k f_k* D_l`. Measurement vectors and coefficient vectors
//! are laid out row-major in `(l, k)`, i.e. index `l·d + (k − 1)`.
//! Frequency `k` maps to FFT bin `k mod d`; the extra phase from one-based
//! positions cancels in every quantity of the form `f_k* M f_k`.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::distribution::MaskDistribution;
use super::masks::MaskSet;
use crate::error::{check_dim, Error, Result};
use crate::hermitian::{CMatrix, ComplexSignal, HermitianMatrix, C64};

/// Squared Fourier magnitudes `y_{k,l} = |⟨f_k, D_l x⟩|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementVector {
    d: usize,
    count: usize,
    y: Vec<f64>,
    intensity: Option<f64>,
}

impl MeasurementVector {
    pub const NEGATIVITY_TOLERANCE: f64 = 1e-12;

    pub fn new(d: usize, count: usize, y: Vec<f64>, intensity: Option<f64>) -> Result<Self> {
        check_dim(d * count, y.len())?;
        if let Some(v) = y
            .iter()
            .find(|&&v| !v.is_finite() || v < -Self::NEGATIVITY_TOLERANCE)
        {
            return Err(Error::InvalidInput(format!(
                "measurement {v} is negative or non-finite"
            )));
        }
        Ok(Self {
            d,
            count,
            y,
            intensity,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn mask_count(&self) -> usize {
        self.count
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    /// `y_{k,l}` with one-based `k` and zero-based `l`.
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.y[l * self.d + (k - 1)]
    }

    /// Known signal intensity `y₀ = ‖x‖²`.
    pub fn intensity(&self) -> Option<f64> {
        self.intensity
    }

    pub fn with_intensity(mut self, y0: f64) -> Self {
        self.intensity = Some(y0);
        self
    }

    pub fn norm(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// CSV with header `l,k,y`, one-based indices, row-major in `(l, k)`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "l,k,y")?;
        for l in 0..self.count {
            for k in 1..=self.d {
                writeln!(w, "{},{},{:?}", l + 1, k, self.get(k, l))?;
            }
        }
        Ok(())
    }

    pub fn read_csv(text: &str, d: usize, count: usize) -> Result<Self> {
        let mut y = vec![f64::NAN; d * count];
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        if lines.next().map(str::trim) != Some("l,k,y") {
            return Err(Error::Parse("expected header `l,k,y`".into()));
        }
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!("malformed row `{line}`")));
            }
            let bad = || Error::Parse(format!("malformed row `{line}`"));
            let l: usize = cols[0].trim().parse().map_err(|_| bad())?;
            let k: usize = cols[1].trim().parse().map_err(|_| bad())?;
            let v: f64 = cols[2].trim().parse().map_err(|_| bad())?;
            if l == 0 || l > count || k == 0 || k > d {
                return Err(bad());
            }
            y[(l - 1) * d + (k - 1)] = v;
        }
        if y.iter().any(|v| v.is_nan()) {
            return Err(Error::Parse("measurement CSV is incomplete".into()));
        }
        Self::new(d, count, y, None)
    }
}

/// FFT plans for one dimension.
#[derive(Clone)]
struct Transforms {
    inverse: Arc<dyn Fft<f64>>,
    /// `ω^m = exp(2πi m / d)` for `m = 0..d`.
    twiddle: Vec<C64>,
}

impl Transforms {
    fn new(d: usize) -> Self {
        let mut planner = FftPlanner::new();
        let twiddle = (0..d)
            .map(|m| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 / d as f64))
            .collect();
        Self {
            inverse: planner.plan_fft_inverse(d),
            twiddle,
        }
    }
}

/// Computes `y = measure(x)` through one length-`d` FFT per mask.
pub fn measure(x: &ComplexSignal, masks: &MaskSet) -> Result<MeasurementVector> {
    let d = masks.dim();
    check_dim(d, x.dim())?;
    let fft = FftPlanner::new().plan_fft_forward(d);
    let xs = x.as_slice();
    let mut y = Vec::with_capacity(d * masks.count());
    let mut buf = vec![C64::new(0.0, 0.0); d];
    for eps in masks.iter() {
        for ((b, &e), &xj) in buf.iter_mut().zip(eps).zip(xs) {
            *b = xj * e;
        }
        let energy: f64 = buf.iter().map(|z| z.norm_sqr()).sum();
        fft.process(&mut buf);
        let start = y.len();
        for k in 1..=d {
            y.push(buf[k % d].norm_sqr());
        }
        // Parseval for the unnormalized DFT.
        let total: f64 = y[start..].iter().sum();
        let expect = d as f64 * energy;
        if (total - expect).abs() > 1e-9 * expect.max(f64::MIN_POSITIVE) {
            return Err(Error::Numeric(format!(
                "Parseval check failed: Σ_k y = {total}, d‖D x‖² = {expect}"
            )));
        }
    }
    MeasurementVector::new(d, masks.count(), y, Some(x.norm().powi(2)))
}

/// The linear maps `A`, `A*`, `R` and truncated `R_Z` for one mask set.
#[derive(Clone)]
pub struct MeasurementFrame {
    masks: MaskSet,
    distribution: MaskDistribution,
    nu: f64,
    transforms: Transforms,
}

impl fmt::Debug for MeasurementFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasurementFrame")
            .field("d", &self.dim())
            .field("L", &self.mask_count())
            .field("distribution", &self.distribution.to_string())
            .field("seed", &self.masks.seed())
            .finish()
    }
}

/// Result of a truncated application `R_Z(W)`.
#[derive(Debug, Clone)]
pub struct TruncatedApplication {
    pub value: HermitianMatrix,
    /// Number of `(k, l)` terms dropped because `U_{k,l}` failed.
    pub truncated: usize,
    pub threshold: f64,
}

impl MeasurementFrame {
    pub fn new(masks: MaskSet, distribution: MaskDistribution) -> Result<Self> {
        if masks.descriptor() != distribution.to_string() {
            return Err(Error::InvalidInput(format!(
                "mask set was drawn from `{}`, frame declares `{distribution}`",
                masks.descriptor()
            )));
        }
        let nu = distribution.variance();
        if nu <= 0.0 {
            return Err(Error::InvalidDistribution("ν must be positive".into()));
        }
        let transforms = Transforms::new(masks.dim());
        Ok(Self {
            masks,
            distribution,
            nu,
            transforms,
        })
    }

    /// Frame whose distribution is recovered from the mask set's descriptor.
    pub fn from_masks(masks: MaskSet) -> Result<Self> {
        let dist = masks.distribution()?;
        Self::new(masks, dist)
    }

    pub fn dim(&self) -> usize {
        self.masks.dim()
    }

    pub fn mask_count(&self) -> usize {
        self.masks.count()
    }

    /// Number of scalar measurements `dL`.
    pub fn measurement_count(&self) -> usize {
        self.dim() * self.mask_count()
    }

    pub fn masks(&self) -> &MaskSet {
        &self.masks
    }

    pub fn distribution(&self) -> &MaskDistribution {
        &self.distribution
    }

    /// Normalization `1/(ν² d L)` of `R`; zero for an empty frame.
    pub fn r_scale(&self) -> f64 {
        if self.mask_count() == 0 {
            0.0
        } else {
            1.0 / (self.nu * self.nu * self.measurement_count() as f64)
        }
    }

    pub fn measure(&self, x: &ComplexSignal) -> Result<MeasurementVector> {
        measure(x, &self.masks)
    }

    /// `tr(F_{k,l} Z)` for a general complex matrix `Z` (complex-linear
    /// extension of `A`), via FFTs of the rows of `D_l Z D_l`.
    pub fn apply_a_complex(&self, z: &CMatrix) -> Result<Vec<C64>> {
        let d = self.dim();
        check_dim(d, z.nrows())?;
        check_dim(d, z.ncols())?;
        let mut out = vec![C64::new(0.0, 0.0); self.measurement_count()];
        out.par_chunks_mut(d.max(1))
            .zip(self.masks.values().par_chunks(d.max(1)))
            .for_each(|(dst, eps)| self.apply_a_single(z, eps, dst));
        Ok(out)
    }

    fn apply_a_single(&self, z: &CMatrix, eps: &[f64], dst: &mut [C64]) {
        let d = eps.len();
        // Rows of M = D Z D, each inverse-transformed: G[i][k] = Σ_j M_ij ω^{jk}.
        let mut g = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            if eps[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                g[i * d + j] = z[(i, j)] * (eps[i] * eps[j]);
            }
        }
        self.transforms.inverse.process(&mut g);
        let tw = &self.transforms.twiddle;
        for k in 1..=d {
            let bin = k % d;
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..d {
                // conj(ω^{i k})
                acc += tw[(i * bin) % d].conj() * g[i * d + bin];
            }
            dst[k - 1] = acc;
        }
    }

    /// `A(Z)_{k,l} = tr(F_{k,l} Z)`.
    pub fn apply_a(&self, z: &HermitianMatrix) -> Result<Vec<f64>> {
        Ok(self
            .apply_a_complex(z.matrix())?
            .into_iter()
            .map(|v| v.re)
            .collect())
    }

    /// `Σ_{k,l} c_{k,l} F_{k,l}` for complex coefficients.
    pub fn apply_a_adjoint_complex(&self, c: &[C64]) -> Result<CMatrix> {
        let d = self.dim();
        check_dim(self.measurement_count(), c.len())?;
        let parts: Vec<CMatrix> = c
            .par_chunks(d.max(1))
            .zip(self.masks.values().par_chunks(d.max(1)))
            .map(|(coef, eps)| self.adjoint_single(coef, eps))
            .collect();
        let mut total = CMatrix::zeros(d, d);
        for p in &parts {
            total += p;
        }
        Ok(total)
    }

    fn adjoint_single(&self, coef: &[C64], eps: &[f64]) -> CMatrix {
        let d = eps.len();
        // ĉ(m) = Σ_k c_k ω^{k m}; entry (i, j) is ε_i ε_j ĉ(i − j).
        let mut chat = vec![C64::new(0.0, 0.0); d];
        for k in 1..=d {
            chat[k % d] = coef[k - 1];
        }
        self.transforms.inverse.process(&mut chat);
        CMatrix::from_fn(d, d, |i, j| chat[(i + d - j) % d] * (eps[i] * eps[j]))
    }

    /// `A*(c) = Σ_{k,l} c_{k,l} F_{k,l}`.
    pub fn apply_a_adjoint(&self, c: &[f64]) -> Result<HermitianMatrix> {
        let cc: Vec<C64> = c.iter().map(|&v| C64::new(v, 0.0)).collect();
        Ok(HermitianMatrix::from_raw(self.apply_a_adjoint_complex(&cc)?))
    }

    /// `R(Z) = A*(A(Z)) / (ν² d L)` on a general complex matrix.
    pub fn apply_r_complex(&self, z: &CMatrix) -> Result<CMatrix> {
        let s = self.r_scale();
        let a: Vec<C64> = self.apply_a_complex(z)?.into_iter().map(|v| v * s).collect();
        self.apply_a_adjoint_complex(&a)
    }

    /// `R(Z) = A*(A(Z)) / (ν² d L)`.
    pub fn apply_r(&self, z: &HermitianMatrix) -> Result<HermitianMatrix> {
        let s = self.r_scale();
        let a: Vec<f64> = self.apply_a(z)?.into_iter().map(|v| v * s).collect();
        self.apply_a_adjoint(&a)
    }

    /// Threshold `2^{3/2} b² γ log(d) ‖Z‖₂` of the event `U_{k,l}`.
    pub fn truncation_threshold(&self, anchor: &HermitianMatrix, gamma: f64) -> f64 {
        let b2 = self.distribution.bound().powi(2);
        2f64.powf(1.5) * b2 * gamma * (self.dim() as f64).ln() * anchor.frobenius()
    }

    /// Indicators of `U_{k,l} = {|tr(F_{k,l} Z)| ≤ threshold}` for anchor `Z`.
    pub fn truncation_events(&self, anchor: &HermitianMatrix, gamma: f64) -> Result<(Vec<bool>, f64)> {
        if !(gamma >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "truncation rate γ must be at least 1, got {gamma}"
            )));
        }
        check_dim(self.dim(), anchor.dim())?;
        let threshold = self.truncation_threshold(anchor, gamma);
        let inside = self
            .apply_a(anchor)?
            .into_iter()
            .map(|v| v.abs() <= threshold)
            .collect();
        Ok((inside, threshold))
    }

    /// `R_Z(W) = (1/ν²dL) Σ 1_{U_{k,l}} tr(F_{k,l} W) F_{k,l}` with events
    /// anchored at `anchor` (which should lie in the tangent space).
    pub fn apply_r_truncated(
        &self,
        w: &HermitianMatrix,
        anchor: &HermitianMatrix,
        gamma: f64,
    ) -> Result<TruncatedApplication> {
        check_rank_at_most_two(anchor)?;
        let (inside, threshold) = self.truncation_events(anchor, gamma)?;
        let s = self.r_scale();
        let coef: Vec<f64> = self
            .apply_a(w)?
            .into_iter()
            .zip(&inside)
            .map(|(v, &keep)| if keep { v * s } else { 0.0 })
            .collect();
        Ok(TruncatedApplication {
            value: self.apply_a_adjoint(&coef)?,
            truncated: inside.iter().filter(|&&k| !k).count(),
            threshold,
        })
    }

    /// Coefficients `c` with `A*(c) = R_Z(W)`: the range witness for a
    /// truncated application.
    pub fn truncated_coefficients(
        &self,
        w: &HermitianMatrix,
        anchor: &HermitianMatrix,
        gamma: f64,
    ) -> Result<Vec<f64>> {
        let (inside, _) = self.truncation_events(anchor, gamma)?;
        let s = self.r_scale();
        Ok(self
            .apply_a(w)?
            .into_iter()
            .zip(&inside)
            .map(|(v, &keep)| if keep { v * s } else { 0.0 })
            .collect())
    }

    /// Dense `F_{k,l} = Σ_{ij} ε_i ε_j ω^{k(i−j)} e_i e_j*` (one-based `k`,
    /// zero-based `l`), built entrywise.
    pub fn frame_element(&self, k: usize, l: usize) -> HermitianMatrix {
        let d = self.dim();
        let eps = self.masks.mask(l);
        let tw = &self.transforms.twiddle;
        HermitianMatrix::from_raw(CMatrix::from_fn(d, d, |i, j| {
            tw[(k * ((i + d - j) % d)) % d] * (eps[i] * eps[j])
        }))
    }
}

/// Errors unless the third-largest `|λ|` of `z` is below `1e-8 ‖z‖₂`.
pub(crate) fn check_rank_at_most_two(z: &HermitianMatrix) -> Result<()> {
    if z.dim() <= 2 {
        return Ok(());
    }
    let mut mags: Vec<f64> = z.eigenvalues()?.into_iter().map(f64::abs).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let scale = z.frobenius();
    if mags[2] > 1e-8 * scale.max(1e-300) {
        return Err(Error::InvalidInput(format!(
            "anchor is not in the tangent space: third singular value {:.3e} (‖Z‖₂ = {scale:.3e})",
            mags[2]
        )));
    }
    Ok(())
}

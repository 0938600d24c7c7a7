//! Dense complex Hermitian matrix algebra.
//!
//! Matrices are stored densely as `nalgebra` complex matrices. Every
//! constructor and arithmetic operation re-symmetrizes its result as
//! `(Z + Z*) / 2`, so the Hermitian invariant holds to machine precision.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Tolerances shared by every check in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericPolicy {
    pub absolute: f64,
    pub relative: f64,
}

impl NumericPolicy {
    pub const DEFAULT: NumericPolicy = NumericPolicy {
        absolute: 1e-10,
        relative: 1e-8,
    };
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self::DEFAULT
    }
}

const EIGEN_MAX_SWEEPS: usize = 10_000;

/// A complex signal `x ∈ C^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSignal {
    entries: DVector<C64>,
}

impl ComplexSignal {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(entries))
    }

    pub fn from_vector(entries: DVector<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("signal dimension must be at least 1".into()));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("signal has non-finite entries".into()));
        }
        Ok(Self { entries })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn zeros(d: usize) -> Self {
        assert!(d >= 1, "signal dimension must be at least 1");
        Self {
            entries: DVector::zeros(d),
        }
    }

    /// Standard basis vector `e_i` (zero-based `i`).
    pub fn basis(d: usize, i: usize) -> Self {
        let mut x = Self::zeros(d);
        x.entries[i] = C64::new(1.0, 0.0);
        x
    }

    /// Uniform draw from the complex unit sphere.
    pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Self {
        loop {
            let v = DVector::from_fn(d, |_, _| {
                C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let n = v.norm();
            if n > 1e-300 {
                return Self { entries: v / C64::new(n, 0.0) };
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &DVector<C64> {
        &self.entries
    }

    pub fn as_slice(&self) -> &[C64] {
        self.entries.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::InvalidInput("cannot normalize the zero signal".into()));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            entries: &self.entries * factor,
        }
    }

    /// `⟨self, other⟩ = Σ conj(self_j) other_j`.
    pub fn inner(&self, other: &ComplexSignal) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.entries.dotc(&other.entries))
    }

    /// The rank-one lift `xx*`.
    pub fn lift(&self) -> HermitianMatrix {
        HermitianMatrix::outer(self)
    }
}

/// Minimum over global phases of `‖a − e^{iφ} b‖₂`, which equals
/// `sqrt(‖a‖² + ‖b‖² − 2|⟨a,b⟩|)`.
///
/// The minimizing phase is `⟨b,a⟩ / |⟨b,a⟩|`; the distance is evaluated
/// directly at that phase to avoid cancellation when `a ≈ e^{iφ} b`.
pub fn phase_aligned_distance(a: &ComplexSignal, b: &ComplexSignal) -> Result<f64> {
    let overlap = b.inner(a)?;
    let r = overlap.norm();
    if r == 0.0 {
        return Ok((a.norm().powi(2) + b.norm().powi(2)).sqrt());
    }
    let phase = overlap / r;
    Ok((a.entries() - b.entries() * phase).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// Nuclear norm `Σ|λ_i|`.
    Trace,
    /// `sqrt(Σ λ_i²)`.
    Frobenius,
    /// Spectral norm `max |λ_i|`.
    Operator,
}

/// Eigendecomposition with eigenvalues sorted in descending order.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Columns are unit eigenvectors matching `values`.
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn vector(&self, i: usize) -> ComplexSignal {
        ComplexSignal {
            entries: self.vectors.column(i).into_owned(),
        }
    }

    pub fn min_value(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }
}

/// A dense complex Hermitian `d × d` matrix.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    m: CMatrix,
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianMatrix(d={}) {}", self.dim(), self.m)
    }
}

fn symmetrize(m: &mut CMatrix) {
    let d = m.nrows();
    for i in 0..d {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..d {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

impl HermitianMatrix {
    /// Builds a Hermitian matrix from a square complex matrix, replacing it by
    /// its Hermitian part.
    pub fn new(mut m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidInput(format!(
                "matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidInput("matrix dimension must be at least 1".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        symmetrize(&mut m);
        Ok(Self { m })
    }

    pub(crate) fn from_raw(mut m: CMatrix) -> Self {
        symmetrize(&mut m);
        Self { m }
    }

    pub fn zeros(d: usize) -> Self {
        Self { m: CMatrix::zeros(d, d) }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            m: CMatrix::identity(d, d),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        Self { m }
    }

    /// `uu*`.
    pub fn outer(u: &ComplexSignal) -> Self {
        let v = u.entries();
        Self::from_raw(v * v.adjoint())
    }

    /// Standard-normal entries, symmetrized.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Self {
        let m = CMatrix::from_fn(d, d, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        Self::from_raw(m)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    /// Frobenius inner product `tr(self · other)`.
    pub fn inner(&self, other: &HermitianMatrix) -> f64 {
        // tr(AB) = Σ_ij A_ij B_ji = Σ_ij A_ij conj(B_ij) for Hermitian B.
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    /// Frobenius norm computed from the entries.
    pub fn frobenius(&self) -> f64 {
        self.m.norm()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &HermitianMatrix) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { m: &self.m * C64::new(s, 0.0) }
    }

    /// Product `self · other` followed by symmetrization; only meaningful
    /// when the two matrices commute or when the Hermitian part is wanted.
    pub fn sym_product(&self, other: &HermitianMatrix) -> Self {
        Self::from_raw(&self.m * &other.m)
    }

    /// Full eigendecomposition, eigenvalues descending.
    pub fn eigen(&self) -> Result<Eigen> {
        let eig = SymmetricEigen::try_new(self.m.clone(), f64::EPSILON, EIGEN_MAX_SWEEPS)
            .ok_or_else(|| {
                Error::Numeric(format!(
                    "Hermitian eigensolver did not converge (d = {}, ‖Z‖_F = {:.3e}, max |Z_ij| = {:.3e})",
                    self.dim(),
                    self.frobenius(),
                    self.max_abs_entry()
                ))
            })?;
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMatrix::from_columns(
            &order
                .iter()
                .map(|&i| eig.eigenvectors.column(i).into_owned())
                .collect::<Vec<_>>(),
        );
        Ok(Eigen { values, vectors })
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eigen()?.values)
    }

    pub fn norm(&self, kind: NormKind) -> Result<f64> {
        if self.m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let values = self.eigenvalues()?;
        Ok(match kind {
            NormKind::Trace => values.iter().map(|v| v.abs()).sum(),
            NormKind::Frobenius => values.iter().map(|v| v * v).sum::<f64>().sqrt(),
            NormKind::Operator => values.iter().map(|v| v.abs()).fold(0.0, f64::max),
        })
    }

    /// Frobenius-nearest positive semidefinite matrix.
    pub fn psd_project(&self) -> Result<HermitianMatrix> {
        Ok(self.eigen()?.reconstruct(|v| v.max(0.0)))
    }

    /// Largest eigenvalue and a unit eigenvector for it.
    pub fn top_eigenpair(&self) -> Result<(f64, ComplexSignal)> {
        let eig = self.eigen()?;
        Ok((eig.values[0], eig.vector(0)))
    }
}

impl Eigen {
    /// `Σ g(λ_i) v_i v_i*`.
    pub fn reconstruct(&self, g: impl Fn(f64) -> f64) -> HermitianMatrix {
        let d = self.vectors.nrows();
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(g(v));
        }
        let m = &scaled * self.vectors.adjoint();
        debug_assert_eq!(m.nrows(), d);
        HermitianMatrix::from_raw(m)
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        HermitianMatrix::from_raw(&self.m + &rhs.m)
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        HermitianMatrix::from_raw(&self.m - &rhs.m)
    }
}

impl Add for HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: HermitianMatrix) -> HermitianMatrix {
        &self + &rhs
    }
}

impl Sub for HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: HermitianMatrix) -> HermitianMatrix {
        &self - &rhs
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, s: f64) -> HermitianMatrix {
        self.scaled(s)
    }
}

impl Mul<f64> for HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, s: f64) -> HermitianMatrix {
        self.scaled(s)
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        self.scaled(-1.0)
    }
}

/// The tangent space `T = {xz* + zx*}` of the rank-one manifold at `X = xx*`.
#[derive(Debug, Clone)]
pub struct TangentSpace {
    anchor: ComplexSignal,
    projector: HermitianMatrix,
}

impl TangentSpace {
    pub const ANCHOR_TOLERANCE: f64 = 1e-10;

    pub fn new(anchor: ComplexSignal) -> Result<Self> {
        let norm = anchor.norm();
        if (norm - 1.0).abs() > Self::ANCHOR_TOLERANCE {
            return Err(Error::InvalidAnchor { norm });
        }
        let projector = anchor.lift();
        Ok(Self { anchor, projector })
    }

    pub fn anchor(&self) -> &ComplexSignal {
        &self.anchor
    }

    /// `X = xx*`.
    pub fn anchor_projector(&self) -> &HermitianMatrix {
        &self.projector
    }

    pub fn dim(&self) -> usize {
        self.anchor.dim()
    }

    /// Real dimension `2d − 1`.
    pub fn real_dimension(&self) -> usize {
        2 * self.dim() - 1
    }

    /// `P_T Z = XZ + ZX − tr(XZ) X`.
    pub fn project(&self, z: &HermitianMatrix) -> Result<HermitianMatrix> {
        check_dim(self.dim(), z.dim())?;
        let x = self.projector.matrix();
        let xz = x * z.matrix();
        let zx = z.matrix() * x;
        let txz = xz.trace();
        Ok(HermitianMatrix::from_raw(xz + zx - x * txz))
    }

    /// `P_T^⊥ Z = Z − P_T Z`.
    pub fn project_complement(&self, z: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(z - &self.project(z)?)
    }

    /// Whether `Z` lies in `T` up to `tol · max(‖Z‖₂, 1)`.
    pub fn contains(&self, z: &HermitianMatrix, tol: f64) -> Result<bool> {
        let off = self.project_complement(z)?.frobenius();
        Ok(off <= tol * z.frobenius().max(1.0))
    }

    /// Orthonormal basis (Frobenius inner product) of `T`: `X` followed by
    /// `(xu* + ux*)/√2` and `i(xu* − ux*)/√2` for an orthonormal completion
    /// `u_1, …, u_{d−1}` of `x`.
    pub fn orthonormal_basis(&self) -> Vec<HermitianMatrix> {
        let d = self.dim();
        let x = self.anchor.entries();
        let completion = orthonormal_completion(x);
        let mut basis = Vec::with_capacity(2 * d - 1);
        basis.push(self.projector.clone());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for u in completion {
            let xu = x * u.adjoint();
            let ux = &u * x.adjoint();
            basis.push(HermitianMatrix::from_raw((&xu + &ux) * C64::new(s, 0.0)));
            basis.push(HermitianMatrix::from_raw((xu - ux) * C64::new(0.0, s)));
        }
        basis
    }
}

/// Unit vectors `u_1..u_{d−1}` completing unit `x` to an orthonormal basis.
fn orthonormal_completion(x: &DVector<C64>) -> Vec<DVector<C64>> {
    let d = x.len();
    let mut kept: Vec<DVector<C64>> = vec![x.clone()];
    // Visit standard basis vectors in order of increasing overlap with x so
    // the nearly-parallel one is the one skipped.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| x[a].norm().total_cmp(&x[b].norm()));
    for j in order {
        if kept.len() == d {
            break;
        }
        let mut v = DVector::<C64>::zeros(d);
        v[j] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for q in &kept {
                let c = q.dotc(&v);
                v -= q * c;
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            kept.push(v / C64::new(n, 0.0));
        }
    }
    kept.remove(0);
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn e(d: usize, i: usize) -> ComplexSignal {
        ComplexSignal::basis(d, i)
    }

    #[test]
    fn norms_of_simple_matrices() {
        let id = HermitianMatrix::identity(3);
        assert!((id.norm(NormKind::Trace).unwrap() - 3.0).abs() < 1e-12);
        let z = &e(3, 0).lift() - &e(3, 1).lift();
        assert!((z.norm(NormKind::Operator).unwrap() - 1.0).abs() < 1e-12);
        assert!((z.norm(NormKind::Frobenius).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn non_finite_matrix_rejected() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(HermitianMatrix::new(m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn construction_symmetrizes() {
        let mut r = rng(1);
        let m = CMatrix::from_fn(4, 4, |_, _| C64::new(r.random(), r.random()));
        let h = HermitianMatrix::new(m).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((h.get(i, j) - h.get(j, i).conj()).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn tangent_projection_trivial_cases() {
        let t = TangentSpace::new(e(3, 0)).unwrap();
        let z = e(3, 1).lift();
        assert!(t.project(&z).unwrap().max_abs_entry() < 1e-15);

        let mut m = CMatrix::zeros(3, 3);
        m[(0, 1)] = C64::new(1.0, 0.0);
        m[(1, 0)] = C64::new(1.0, 0.0);
        let z = HermitianMatrix::new(m).unwrap();
        assert!(t.project(&z).unwrap().max_abs_diff(&z) < 1e-15);

        let x = e(3, 0).lift();
        assert!(t.project_complement(&x).unwrap().max_abs_entry() < 1e-15);
    }

    #[test]
    fn non_unit_anchor_rejected() {
        let x = ComplexSignal::from_real(&[1.0, 1.0]).unwrap();
        assert!(matches!(TangentSpace::new(x), Err(Error::InvalidAnchor { .. })));
    }

    #[test]
    fn tangent_basis_is_orthonormal_with_dimension_2d_minus_1() {
        let mut r = rng(7);
        for d in [1, 2, 5] {
            let t = TangentSpace::new(ComplexSignal::random_unit(&mut r, d)).unwrap();
            let basis = t.orthonormal_basis();
            assert_eq!(basis.len(), 2 * d - 1);
            for (a, ba) in basis.iter().enumerate() {
                for (b, bb) in basis.iter().enumerate() {
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((ba.inner(bb) - expect).abs() < 1e-12);
                }
                assert!(t.project(ba).unwrap().max_abs_diff(ba) < 1e-12);
            }
        }
    }

    #[test]
    fn psd_projection_examples() {
        let z = HermitianMatrix::from_real_diagonal(&[1.0, -1.0]);
        let p = z.psd_project().unwrap();
        assert!(p.max_abs_diff(&HermitianMatrix::from_real_diagonal(&[1.0, 0.0])) < 1e-12);

        let mut r = rng(3);
        let x = ComplexSignal::random_unit(&mut r, 4);
        let psd = &x.lift() + &HermitianMatrix::identity(4).scaled(0.3);
        assert!(psd.psd_project().unwrap().max_abs_diff(&psd) < 1e-10);
    }

    #[test]
    fn top_eigenpair_of_scaled_projector() {
        let mut r = rng(11);
        let u = ComplexSignal::random_unit(&mut r, 6);
        let (lambda, v) = u.lift().scaled(5.0).top_eigenpair().unwrap();
        assert!((lambda - 5.0).abs() < 1e-10);
        assert!(phase_aligned_distance(&u, &v).unwrap() < 1e-8);

        let (lambda, v) = HermitianMatrix::identity(3).top_eigenpair().unwrap();
        assert!((lambda - 1.0).abs() < 1e-12);
        assert!(v.is_unit(1e-12));
    }

    #[test]
    fn phase_aligned_distance_examples() {
        let mut r = rng(5);
        let a = ComplexSignal::random_unit(&mut r, 5);
        let b = a.scaled(C64::from_polar(1.0, 0.77));
        assert!(phase_aligned_distance(&a, &b).unwrap() < 1e-12);
        let d = phase_aligned_distance(&e(2, 0), &e(2, 1)).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
        assert!(matches!(
            phase_aligned_distance(&e(2, 0), &e(3, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}

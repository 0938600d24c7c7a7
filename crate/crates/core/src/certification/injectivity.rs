use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::coded::{seeded_rng, MeasurementFrame};
use crate::error::{check_dim, Error, Result};
use crate::hermitian::{ComplexSignal, HermitianMatrix, TangentSpace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InjectivityReport {
    /// `λ_min` of `P_T(R − I − Π_Id)P_T` on `T`.
    pub lambda_min_restricted: f64,
    /// `1 + λ_min > 1/4`.
    pub passes_quarter_bound: bool,
    /// `min_Z (b⁴d‖Z‖₂² − ‖A(Z)‖²/(dL)) / ‖Z‖₂²` over random `Z ∈ H^d`;
    /// never negative.
    pub upper_bound_margin: f64,
}

pub const UPPER_BOUND_SAMPLES: usize = 100;

/// Matrix of `Z ↦ P_T(R − I − Π_Id)P_T Z` in an orthonormal basis of `T`.
pub fn restricted_operator(frame: &MeasurementFrame, tangent: &TangentSpace) -> Result<DMatrix<f64>> {
    check_dim(frame.dim(), tangent.dim())?;
    let basis = tangent.orthonormal_basis();
    let images: Vec<HermitianMatrix> = basis.iter().map(|b| frame.apply_r(b)).collect::<Result<_>>()?;
    let n = basis.len();
    let mut g = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let identity = if a == b { 1.0 } else { 0.0 };
            g[(a, b)] = basis[a].inner(&images[b]) - identity - basis[a].trace() * basis[b].trace();
        }
    }
    Ok((&g + g.transpose()) * 0.5)
}

pub fn injectivity_spectrum(frame: &MeasurementFrame, x: &ComplexSignal, seed: u64) -> Result<InjectivityReport> {
    if !x.is_unit(1e-10) {
        return Err(Error::InvalidAnchor { norm: x.norm() });
    }
    let tangent = TangentSpace::new(x.clone())?;
    let g = restricted_operator(frame, &tangent)?;
    let eig = SymmetricEigen::try_new(g, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("restricted operator eigensolver did not converge".into()))?;
    let lambda_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);

    let d = frame.dim();
    let b4 = frame.distribution().bound().powi(4);
    let l = frame.mask_count();
    let mut rng = seeded_rng(seed);
    let mut margin = f64::INFINITY;
    for _ in 0..UPPER_BOUND_SAMPLES {
        let z = HermitianMatrix::random(&mut rng, d);
        let z2 = z.frobenius().powi(2);
        let energy = if l == 0 {
            0.0
        } else {
            frame.apply_a(&z)?.iter().map(|v| v * v).sum::<f64>() / (d * l) as f64
        };
        margin = margin.min((b4 * d as f64 * z2 - energy) / z2);
    }
    Ok(InjectivityReport {
        lambda_min_restricted: lambda_min,
        passes_quarter_bound: 1.0 + lambda_min > 0.25,
        upper_bound_margin: margin,
    })
}

/// Relative gap between `tr(Z R(Z))` and `‖A(Z)‖²/(ν²dL)`.
pub fn quadratic_form_gap(frame: &MeasurementFrame, z: &HermitianMatrix) -> Result<f64> {
    let lhs = z.inner(&frame.apply_r(z)?);
    let rhs = frame.apply_a(z)?.iter().map(|v| v * v).sum::<f64>() * frame.r_scale();
    Ok((lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coded::{sample_masks, MaskDistribution, MaskSet};

    fn frame(d: usize, l: usize, seed: u64) -> MeasurementFrame {
        let t = MaskDistribution::ternary();
        MeasurementFrame::new(sample_masks(&t, d, l, seed).unwrap(), t).unwrap()
    }

    #[test]
    fn empty_frame_gives_minus_two() {
        let t = MaskDistribution::ternary();
        let f = MeasurementFrame::new(MaskSet::empty(&t, 5), t).unwrap();
        let x = ComplexSignal::random_unit(&mut seeded_rng(1), 5);
        let r = injectivity_spectrum(&f, &x, 0).unwrap();
        assert!((r.lambda_min_restricted + 2.0).abs() < 1e-12);
        assert!(!r.passes_quarter_bound);
    }

    #[test]
    fn many_masks_concentrate() {
        let x = ComplexSignal::random_unit(&mut seeded_rng(2), 7);
        let r = injectivity_spectrum(&frame(7, 200, 3), &x, 1).unwrap();
        assert!(r.lambda_min_restricted.abs() < 0.5, "{r:?}");
        assert!(r.passes_quarter_bound);
        assert!(r.upper_bound_margin >= 0.0);
    }

    #[test]
    fn restricted_operator_matches_quadratic_form() {
        let f = frame(5, 6, 4);
        let mut rng = seeded_rng(5);
        let x = ComplexSignal::random_unit(&mut rng, 5);
        let tangent = TangentSpace::new(x).unwrap();
        let g = restricted_operator(&f, &tangent).unwrap();
        let basis = tangent.orthonormal_basis();
        let coeffs: Vec<f64> = (0..basis.len()).map(|i| ((i * 7 % 5) as f64) - 2.0).collect();
        let mut z = HermitianMatrix::zeros(5);
        for (c, b) in coeffs.iter().zip(&basis) {
            z = &z + &b.scaled(*c);
        }
        let direct = z.inner(&f.apply_r(&z).unwrap()) - z.inner(&z) - z.trace().powi(2);
        let v = nalgebra::DVector::from_vec(coeffs);
        let via_basis = (v.transpose() * &g * &v)[(0, 0)];
        assert!((direct - via_basis).abs() < 1e-10 * direct.abs().max(1.0));
        assert!(quadratic_form_gap(&f, &z).unwrap() < 1e-9);
    }

    #[test]
    fn rejects_non_unit_signal() {
        let x = ComplexSignal::from_real(&[1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(
            injectivity_spectrum(&frame(3, 2, 0), &x, 0),
            Err(Error::InvalidAnchor { .. })
        ));
    }
}

use serde::Serialize;

use crate::coded::{check_rank_at_most_two, MeasurementFrame};
use crate::error::Result;
use crate::hermitian::HermitianMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationStatistics {
    /// Fraction of `(k, l)` outside `U_{k,l}`.
    pub empirical_prob: f64,
    /// `4 d^{−γ}`.
    pub bound: f64,
    pub events: usize,
    pub terms: usize,
    pub threshold: f64,
    /// Binomial standard deviation of the fraction at probability `bound`.
    pub sigma: f64,
}

impl TruncationStatistics {
    pub fn within_bound(&self, sigmas: f64) -> bool {
        self.empirical_prob <= self.bound + sigmas * self.sigma
    }
}

/// Counts `|tr(F_{k,l} Z)| > 2^{3/2} b² γ log(d) ‖Z‖₂` over the frame.
pub fn truncation_statistics(frame: &MeasurementFrame, z: &HermitianMatrix, gamma: f64) -> Result<TruncationStatistics> {
    check_rank_at_most_two(z)?;
    let (inside, threshold) = frame.truncation_events(z, gamma)?;
    let terms = inside.len();
    let events = inside.iter().filter(|&&i| !i).count();
    let bound = 4.0 * (frame.dim() as f64).powf(-gamma);
    let p = bound.min(1.0);
    Ok(TruncationStatistics {
        empirical_prob: if terms == 0 { 0.0 } else { events as f64 / terms as f64 },
        bound,
        events,
        terms,
        threshold,
        sigma: if terms == 0 { 0.0 } else { (p * (1.0 - p) / terms as f64).sqrt() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coded::{sample_masks, seeded_rng, MaskDistribution};
    use crate::hermitian::{ComplexSignal, TangentSpace};

    fn setup() -> (MeasurementFrame, HermitianMatrix) {
        let t = MaskDistribution::ternary();
        let f = MeasurementFrame::new(sample_masks(&t, 7, 40, 1).unwrap(), t).unwrap();
        let mut rng = seeded_rng(2);
        let tangent = TangentSpace::new(ComplexSignal::random_unit(&mut rng, 7)).unwrap();
        let z = tangent.project(&HermitianMatrix::random(&mut rng, 7)).unwrap();
        (f, z)
    }

    #[test]
    fn huge_gamma_never_truncates() {
        let (f, z) = setup();
        assert_eq!(truncation_statistics(&f, &z, 1e6).unwrap().events, 0);
    }

    #[test]
    fn zero_matrix_sits_on_the_boundary() {
        let (f, _) = setup();
        let s = truncation_statistics(&f, &HermitianMatrix::zeros(7), 1.0).unwrap();
        assert_eq!(s.threshold, 0.0);
        assert_eq!(s.events, 0);
    }

    #[test]
    fn non_increasing_in_gamma() {
        let (f, z) = setup();
        let mut last = usize::MAX;
        for gamma in [1.0, 1.5, 2.0, 4.0, 8.0] {
            let s = truncation_statistics(&f, &z, gamma).unwrap();
            assert!(s.events <= last);
            last = s.events;
        }
    }

    #[test]
    fn rejects_rank_three() {
        let (f, _) = setup();
        let z = HermitianMatrix::identity(7);
        assert!(truncation_statistics(&f, &z, 1.0).is_err());
    }

    #[test]
    fn gamma_below_one_is_rejected() {
        let (f, z) = setup();
        assert!(truncation_statistics(&f, &z, 0.5).is_err());
    }
}

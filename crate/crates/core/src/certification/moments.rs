use std::fmt;

use num_rational::Rational64;
use num_traits::Zero;

use crate::coded::{MaskDistribution, OddMoment};

/// Exact moments `E[ε^p]`, `p = 1..4`, and the conditions
/// `E[ε] = E[ε³] = 0`, `E[ε⁴] = 2 E[ε²]²`, `ν = E[ε²] > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub first: OddMoment,
    pub second: Rational64,
    pub third: OddMoment,
    pub fourth: Rational64,
    pub mean_zero: bool,
    pub third_moment_zero: bool,
    pub fourth_moment_condition: bool,
    pub positive_variance: bool,
}

impl MomentReport {
    pub fn passes(&self) -> bool {
        self.mean_zero && self.third_moment_zero && self.fourth_moment_condition && self.positive_variance
    }
}

impl fmt::Display for MomentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
        writeln!(f, "E[eps]   = {:e} ({})", self.first.value, mark(self.mean_zero))?;
        writeln!(f, "E[eps^2] = {} ({})", self.second, mark(self.positive_variance))?;
        writeln!(f, "E[eps^3] = {:e} ({})", self.third.value, mark(self.third_moment_zero))?;
        write!(
            f,
            "E[eps^4] = {} vs 2 E[eps^2]^2 = {} ({})",
            self.fourth,
            self.second * self.second * 2,
            mark(self.fourth_moment_condition)
        )
    }
}

pub fn validate_moments(dist: &MaskDistribution) -> MomentReport {
    let first = dist.odd_moment(1);
    let third = dist.odd_moment(3);
    let second = dist.even_moment(2);
    let fourth = dist.even_moment(4);
    MomentReport {
        first,
        second,
        third,
        fourth,
        mean_zero: first.exact_zero,
        third_moment_zero: third.exact_zero,
        fourth_moment_condition: fourth == second * second * 2,
        positive_variance: second > Rational64::zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coded::MaskAtom;
    use num_traits::One;

    #[test]
    fn ternary_passes_all_conditions() {
        let r = validate_moments(&MaskDistribution::ternary());
        assert!(r.passes(), "{r}");
        assert_eq!(r.second, Rational64::one());
        assert_eq!(r.fourth, Rational64::from_integer(2));
    }

    #[test]
    fn rademacher_fails_fourth_moment() {
        let r = validate_moments(&MaskDistribution::rademacher());
        assert!(r.mean_zero && r.third_moment_zero && r.positive_variance);
        assert!(!r.fourth_moment_condition);
        assert_eq!(r.fourth, Rational64::one());
        assert!(!r.passes());
    }

    #[test]
    fn point_mass_at_zero_has_no_variance() {
        let d = MaskDistribution::new(vec![MaskAtom::zero(Rational64::one())]).unwrap();
        let r = validate_moments(&d);
        assert!(!r.positive_variance);
        assert!(!r.passes());
    }

    #[test]
    fn mean_zero_across_different_magnitudes() {
        // ε ∈ {2, −1} w.p. {1/3, 2/3}: E[ε] = 0 but E[ε³] = 8/3 − 2/3.
        let d = MaskDistribution::new(vec![
            MaskAtom::new(1, Rational64::from_integer(4), Rational64::new(1, 3)),
            MaskAtom::new(-1, Rational64::from_integer(1), Rational64::new(2, 3)),
        ])
        .unwrap();
        let r = validate_moments(&d);
        assert!(r.mean_zero);
        assert!(!r.third_moment_zero);
    }

    #[test]
    fn square_roots_in_same_field_cancel() {
        // √8 · 1/4 = 2√2 · 1/4 against √2 · 1/2.
        let d = MaskDistribution::new(vec![
            MaskAtom::new(1, Rational64::from_integer(8), Rational64::new(1, 4)),
            MaskAtom::new(-1, Rational64::from_integer(2), Rational64::new(1, 2)),
            MaskAtom::zero(Rational64::new(1, 4)),
        ])
        .unwrap();
        assert!(validate_moments(&d).mean_zero);
        let d = MaskDistribution::new(vec![
            MaskAtom::new(1, Rational64::from_integer(3), Rational64::new(1, 2)),
            MaskAtom::new(-1, Rational64::from_integer(2), Rational64::new(1, 2)),
        ])
        .unwrap();
        assert!(!validate_moments(&d).mean_zero);
    }
}

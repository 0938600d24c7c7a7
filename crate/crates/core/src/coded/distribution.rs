//! Finite real mask distributions.
//!
//! Support points are stored as `sign · sqrt(square)` with a rational
//! `square`, so that even moments are exact rationals and odd moments of
//! symmetric distributions cancel exactly.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};

/// One support point `sign · sqrt(square)` with its probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaskAtom {
    pub sign: i8,
    pub square: Rational64,
    pub probability: Rational64,
}

impl MaskAtom {
    pub fn new(sign: i8, square: Rational64, probability: Rational64) -> Self {
        Self {
            sign,
            square,
            probability,
        }
    }

    pub fn zero(probability: Rational64) -> Self {
        Self::new(0, Rational64::zero(), probability)
    }

    pub fn value(&self) -> f64 {
        f64::from(self.sign) * to_f64(self.square).sqrt()
    }
}

fn to_f64(r: Rational64) -> f64 {
    r.to_f64().expect("rational fits in f64")
}

/// An odd moment `E[ε^p]`: `exact_zero` is decided in exact arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OddMoment {
    pub exact_zero: bool,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskDistribution {
    atoms: Vec<MaskAtom>,
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl MaskDistribution {
    /// Checks structural validity: non-empty support, nonnegative
    /// probabilities summing to exactly one, consistent signs. Moment
    /// conditions are not enforced here; see `certification::validate_moments`.
    pub fn new(atoms: Vec<MaskAtom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let mut total = Rational64::zero();
        for a in &atoms {
            if a.probability.is_negative() {
                return Err(Error::InvalidDistribution("negative probability".into()));
            }
            if a.square.is_negative() {
                return Err(Error::InvalidDistribution("negative squared value".into()));
            }
            if !matches!(a.sign, -1..=1) || ((a.sign == 0) != a.square.is_zero()) {
                return Err(Error::InvalidDistribution(format!(
                    "inconsistent sign {} for squared value {}",
                    a.sign, a.square
                )));
            }
            total += a.probability;
        }
        if total != Rational64::one() {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        let values = atoms.iter().map(MaskAtom::value).collect();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = atoms
            .iter()
            .map(|a| {
                acc += to_f64(a.probability);
                acc
            })
            .collect();
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Self {
            atoms,
            values,
            cumulative,
        })
    }

    /// `ε ∈ {√2, 0, −√2}` with probabilities `{1/4, 1/2, 1/4}`: a Rademacher
    /// vector with random erasures.
    pub fn ternary() -> Self {
        let q = Rational64::new(1, 4);
        Self::new(vec![
            MaskAtom::new(1, Rational64::from_integer(2), q),
            MaskAtom::zero(Rational64::new(1, 2)),
            MaskAtom::new(-1, Rational64::from_integer(2), q),
        ])
        .expect("ternary distribution is valid")
    }

    /// `ε = ±1` with probability 1/2 each. Violates the fourth-moment condition.
    pub fn rademacher() -> Self {
        let h = Rational64::new(1, 2);
        Self::new(vec![
            MaskAtom::new(1, Rational64::one(), h),
            MaskAtom::new(-1, Rational64::one(), h),
        ])
        .expect("rademacher distribution is valid")
    }

    pub fn atoms(&self) -> &[MaskAtom] {
        &self.atoms
    }

    pub fn support(&self) -> &[f64] {
        &self.values
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| to_f64(a.probability)).collect()
    }

    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    /// `E[ε^p]` for even `p`, exactly.
    pub fn even_moment(&self, p: u32) -> Rational64 {
        assert!(p.is_multiple_of(2), "even_moment called with odd p = {p}");
        self.atoms
            .iter()
            .map(|a| a.probability * a.square.pow((p / 2) as i32))
            .sum()
    }

    /// `E[ε^p]` for odd `p`. Each term is a rational multiple of `√s` for a
    /// square-free `s`; the moment vanishes exactly iff every such group of
    /// coefficients sums to zero.
    pub fn odd_moment(&self, p: u32) -> OddMoment {
        assert!(p % 2 == 1, "odd_moment called with even p = {p}");
        let mut groups: Vec<(i64, Rational64)> = Vec::new();
        for a in &self.atoms {
            if a.sign == 0 {
                continue;
            }
            // √(n/m) = √(nm)/m = q√s/m
            let (q, radical) = split_square(*a.square.numer() * *a.square.denom());
            let coefficient = a.probability
                * a.square.pow(((p - 1) / 2) as i32)
                * Rational64::new(q * i64::from(a.sign), *a.square.denom());
            match groups.iter_mut().find(|(r, _)| *r == radical) {
                Some(g) => g.1 += coefficient,
                None => groups.push((radical, coefficient)),
            }
        }
        let exact_zero = groups.iter().all(|(_, s)| s.is_zero());
        let value = self
            .atoms
            .iter()
            .map(|a| to_f64(a.probability) * a.value().powi(p as i32))
            .sum();
        OddMoment { exact_zero, value }
    }

    /// `ν = E[ε²]`, exactly.
    pub fn variance_exact(&self) -> Rational64 {
        self.even_moment(2)
    }

    /// `ν = E[ε²]`.
    pub fn variance(&self) -> f64 {
        to_f64(self.variance_exact())
    }

    /// `b² = max ε²`, exactly.
    pub fn bound_squared_exact(&self) -> Rational64 {
        self.atoms
            .iter()
            .map(|a| a.square)
            .max()
            .unwrap_or_else(Rational64::zero)
    }

    /// The a-priori bound `b = max |ε|`.
    pub fn bound(&self) -> f64 {
        to_f64(self.bound_squared_exact()).sqrt()
    }

    /// Truncation rate `γ = 8 + log₂(b²/ν)`.
    pub fn truncation_rate(&self) -> f64 {
        8.0 + (to_f64(self.bound_squared_exact()) / self.variance()).log2()
    }

    pub(crate) fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.atoms.len() - 1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.values[self.sample_index(rng)]
    }

    pub fn contains_value(&self, v: f64) -> bool {
        self.values.contains(&v)
    }
}

/// `n = q² s` with `s` square-free.
fn split_square(mut n: i64) -> (i64, i64) {
    let mut q = 1;
    let mut f = 2;
    while f * f <= n {
        while n % (f * f) == 0 {
            n /= f * f;
            q *= f;
        }
        f += 1;
    }
    (q, n)
}

fn format_rational(r: Rational64) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn parse_rational(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Rational64::new(n, d))
        }
        None => Ok(Rational64::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Descriptor syntax: `ternary`, `rademacher`, or
/// `atoms:+2@1/4,0@1/2,-2@1/4` where each entry is `±square@probability`.
impl fmt::Display for MaskDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Self::ternary() {
            return write!(f, "ternary");
        }
        if *self == Self::rademacher() {
            return write!(f, "rademacher");
        }
        let parts: Vec<String> = self
            .atoms
            .iter()
            .map(|a| {
                let sign = match a.sign {
                    1 => "+",
                    -1 => "-",
                    _ => "",
                };
                format!(
                    "{sign}{}@{}",
                    format_rational(a.square),
                    format_rational(a.probability)
                )
            })
            .collect();
        write!(f, "atoms:{}", parts.join(","))
    }
}

impl FromStr for MaskDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "ternary" => return Ok(Self::ternary()),
            "rademacher" => return Ok(Self::rademacher()),
            _ => {}
        }
        let body = s
            .strip_prefix("atoms:")
            .ok_or_else(|| Error::Parse(format!("unknown distribution descriptor `{s}`")))?;
        let mut atoms = Vec::new();
        for entry in body.split(',') {
            let (value, prob) = entry
                .split_once('@')
                .ok_or_else(|| Error::Parse(format!("atom `{entry}` lacks `@probability`")))?;
            let value = value.trim();
            let (sign, square) = if let Some(rest) = value.strip_prefix('+') {
                (1, parse_rational(rest)?)
            } else if let Some(rest) = value.strip_prefix('-') {
                (-1, parse_rational(rest)?)
            } else {
                (0, parse_rational(value)?)
            };
            atoms.push(MaskAtom::new(sign, square, parse_rational(prob)?));
        }
        Self::new(atoms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ternary_moments() {
        let t = MaskDistribution::ternary();
        assert_eq!(t.variance_exact(), Rational64::one());
        assert_eq!(t.even_moment(4), Rational64::from_integer(2));
        assert!(t.odd_moment(1).exact_zero);
        assert!(t.odd_moment(3).exact_zero);
        assert!((t.bound() - 2f64.sqrt()).abs() < 1e-15);
        assert!((t.truncation_rate() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn probabilities_must_sum_to_one() {
        let r = MaskDistribution::new(vec![MaskAtom::zero(Rational64::new(1, 2))]);
        assert!(matches!(r, Err(Error::InvalidDistribution(_))));
    }

    #[test]
    fn descriptor_round_trip() {
        for dist in [
            MaskDistribution::ternary(),
            MaskDistribution::rademacher(),
            "atoms:+1/2@1/8,0@3/4,-1/2@1/8".parse().unwrap(),
        ] {
            let text = dist.to_string();
            let back: MaskDistribution = text.parse().unwrap();
            assert_eq!(back, dist, "{text}");
        }
        assert!("gaussian".parse::<MaskDistribution>().is_err());
    }

    #[test]
    fn asymmetric_distribution_has_nonzero_mean() {
        let d: MaskDistribution = "atoms:+1@1/2,-4@1/2".parse().unwrap();
        let m = d.odd_moment(1);
        assert!(!m.exact_zero);
        assert!((m.value - (-0.5)).abs() < 1e-15);
    }
}

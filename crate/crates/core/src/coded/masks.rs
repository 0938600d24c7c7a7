//! Sampled diffraction masks and their text serialization.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::distribution::MaskDistribution;
use crate::error::{Error, Result};

const MASKSET_MAGIC: &str = "# phaselift-maskset v1";

/// `L` real diagonal masks of dimension `d`, stored row-major as the raw
/// `ε_{l,i}` values.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSet {
    d: usize,
    count: usize,
    epsilon: Vec<f64>,
    seed: u64,
    descriptor: String,
}

/// Generator used for every random draw in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws `L` i.i.d. masks of dimension `d` from `dist`.
pub fn sample_masks(dist: &MaskDistribution, d: usize, count: usize, seed: u64) -> Result<MaskSet> {
    if d == 0 || count == 0 {
        return Err(Error::InvalidInput(format!(
            "mask dimensions must be positive, got d = {d}, L = {count}"
        )));
    }
    let mut rng = seeded_rng(seed);
    sample_masks_with(dist, d, count, seed, &mut rng)
}

pub(crate) fn sample_masks_with<R: rand::Rng + ?Sized>(
    dist: &MaskDistribution,
    d: usize,
    count: usize,
    seed: u64,
    rng: &mut R,
) -> Result<MaskSet> {
    if dist.variance() <= 0.0 {
        return Err(Error::InvalidDistribution(
            "distribution has zero variance (ν = 0)".into(),
        ));
    }
    let epsilon = (0..d * count).map(|_| dist.sample(rng)).collect();
    Ok(MaskSet {
        d,
        count,
        epsilon,
        seed,
        descriptor: dist.to_string(),
    })
}

impl MaskSet {
    /// Wraps explicit mask values; each must lie in the support of `dist`.
    /// `count = 0` yields the empty mask set.
    pub fn from_values(
        dist: &MaskDistribution,
        d: usize,
        count: usize,
        epsilon: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput("mask dimension must be positive".into()));
        }
        if epsilon.len() != d * count {
            return Err(Error::DimensionMismatch {
                expected: d * count,
                found: epsilon.len(),
            });
        }
        if let Some(v) = epsilon.iter().find(|&&v| !dist.contains_value(v)) {
            return Err(Error::InvalidInput(format!(
                "mask value {v} is not in the support of {dist}"
            )));
        }
        Ok(Self {
            d,
            count,
            epsilon,
            seed,
            descriptor: dist.to_string(),
        })
    }

    pub fn empty(dist: &MaskDistribution, d: usize) -> Self {
        Self {
            d,
            count: 0,
            epsilon: Vec::new(),
            seed: 0,
            descriptor: dist.to_string(),
        }
    }

    /// Stacks mask sets of equal dimension and distribution. The result keeps
    /// the seed of the first part.
    pub fn concat(parts: &[MaskSet]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidInput("cannot concatenate zero mask sets".into()))?;
        let mut out = first.clone();
        for p in &parts[1..] {
            if p.d != first.d || p.descriptor != first.descriptor {
                return Err(Error::InvalidInput(
                    "mask sets differ in dimension or distribution".into(),
                ));
            }
            out.epsilon.extend_from_slice(&p.epsilon);
            out.count += p.count;
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of masks `L`.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn values(&self) -> &[f64] {
        &self.epsilon
    }

    /// The diagonal `ε_{l,·}` of mask `l` (zero-based).
    pub fn mask(&self, l: usize) -> &[f64] {
        &self.epsilon[l * self.d..(l + 1) * self.d]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.epsilon.chunks_exact(self.d.max(1)).take(self.count)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{MASKSET_MAGIC}").unwrap();
        writeln!(s, "d={}", self.d).unwrap();
        writeln!(s, "L={}", self.count).unwrap();
        writeln!(s, "distribution={}", self.descriptor).unwrap();
        writeln!(s, "seed={}", self.seed).unwrap();
        for row in self.iter() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(s, "{}", line.join(" ")).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(MASKSET_MAGIC) {
            return Err(Error::Parse("missing mask set header".into()));
        }
        let mut header = |key: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing `{key}` line")))?;
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .map(str::to_owned)
                .ok_or_else(|| Error::Parse(format!("expected `{key}=`, found `{line}`")))
        };
        let parse_num = |s: String, key: &str| -> Result<u64> {
            s.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("invalid {key} `{s}`")))
        };
        let d = parse_num(header("d")?, "d")? as usize;
        let count = parse_num(header("L")?, "L")? as usize;
        let dist: MaskDistribution = header("distribution")?.parse()?;
        let seed = parse_num(header("seed")?, "seed")?;
        let mut epsilon = Vec::with_capacity(d * count);
        for line in lines.filter(|l| !l.trim().is_empty()) {
            for tok in line.split_whitespace() {
                epsilon.push(
                    tok.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("invalid mask value `{tok}`")))?,
                );
            }
        }
        Self::from_values(&dist, d, count, epsilon, seed)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn distribution(&self) -> Result<MaskDistribution> {
        self.descriptor.parse()
    }
}

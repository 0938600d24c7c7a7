//! Fourier vectors and the prime-factor relabeling between 2-D and 1-D DFTs.

use crate::error::{Error, Result};
use crate::hermitian::{ComplexSignal, C64};

fn root_power(d: usize, m: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (m % d) as f64 / d as f64)
}

/// `f_k = Σ_{j=1}^d ω^{jk} e_j` with `ω = exp(2πi/d)` and `1 ≤ k ≤ d`.
pub fn dft_vector(d: usize, k: usize) -> Result<ComplexSignal> {
    if d == 0 || k == 0 || k > d {
        return Err(Error::InvalidInput(format!(
            "Fourier index k = {k} outside 1..={d}"
        )));
    }
    ComplexSignal::new((1..=d).map(|j| root_power(d, j * k)).collect())
}

/// 2-D Fourier vector `f_{k,l} = Σ_{i,j} ω_{d₁}^{ik} ω_{d₂}^{jl} e_{i,j}`, with
/// position `(i, j)` flattened to `(i − 1)·d₂ + (j − 1)`.
pub fn dft_vector_2d(d1: usize, d2: usize, k: usize, l: usize) -> Result<ComplexSignal> {
    if k == 0 || k > d1 || l == 0 || l > d2 {
        return Err(Error::InvalidInput(format!(
            "2-D Fourier index ({k}, {l}) outside 1..={d1} × 1..={d2}"
        )));
    }
    let mut v = Vec::with_capacity(d1 * d2);
    for i in 1..=d1 {
        for j in 1..=d2 {
            v.push(root_power(d1, i * k) * root_power(d2, j * l));
        }
    }
    ComplexSignal::new(v)
}

/// Index relabeling under which the 2-D DFT basis over `d₁ × d₂` coincides
/// with the 1-D DFT basis of dimension `d₁d₂` (coprime factors).
///
/// Both maps are indexed by the flattened 2-D pair `(a − 1)·d₂ + (b − 1)` and
/// hold zero-based 1-D indices: `position` sends `(i, j)` to the `n` with
/// `n ≡ i mod d₁`, `n ≡ j mod d₂`; `frequency` sends `(k, l)` to
/// `m ≡ d₂k + d₁l mod d₁d₂`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrtRelabeling {
    pub d1: usize,
    pub d2: usize,
    pub position: Vec<usize>,
    pub frequency: Vec<usize>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn crt_relabeling(d1: usize, d2: usize) -> Result<CrtRelabeling> {
    if d1 == 0 || d2 == 0 {
        return Err(Error::InvalidInput("dimensions must be positive".into()));
    }
    if gcd(d1, d2) != 1 {
        return Err(Error::InvalidInput(format!(
            "gcd({d1}, {d2}) = {} ≠ 1: the 2-D transform does not reduce to a 1-D one",
            gcd(d1, d2)
        )));
    }
    let d = d1 * d2;
    let mut position = vec![0; d];
    let mut frequency = vec![0; d];
    for n in 1..=d {
        let (ri, rj) = (n % d1, n % d2);
        let i = if ri == 0 { d1 } else { ri };
        let j = if rj == 0 { d2 } else { rj };
        position[(i - 1) * d2 + (j - 1)] = n - 1;
    }
    for k in 1..=d1 {
        for l in 1..=d2 {
            let m = (d2 * k + d1 * l) % d;
            let m = if m == 0 { d } else { m };
            frequency[(k - 1) * d2 + (l - 1)] = m - 1;
        }
    }
    Ok(CrtRelabeling {
        d1,
        d2,
        position,
        frequency,
    })
}

impl CrtRelabeling {
    /// Max entrywise deviation between every 2-D basis vector and the
    /// relabeled 1-D basis vector.
    pub fn max_deviation(&self) -> Result<f64> {
        let d = self.d1 * self.d2;
        let mut worst = 0.0f64;
        for k in 1..=self.d1 {
            for l in 1..=self.d2 {
                let two = dft_vector_2d(self.d1, self.d2, k, l)?;
                let m = self.frequency[(k - 1) * self.d2 + (l - 1)] + 1;
                let one = dft_vector(d, m)?;
                for (flat, &n) in self.position.iter().enumerate() {
                    worst = worst.max((two.as_slice()[flat] - one.as_slice()[n]).norm());
                }
            }
        }
        Ok(worst)
    }

    pub fn is_permutation(&self) -> bool {
        let check = |p: &[usize]| {
            let mut seen = vec![false; p.len()];
            p.iter().all(|&i| i < p.len() && !std::mem::replace(&mut seen[i], true))
        };
        check(&self.position) && check(&self.frequency)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_fourier_vector_is_all_ones() {
        for d in [1, 4, 9] {
            let f = dft_vector(d, d).unwrap();
            assert!(f.as_slice().iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-12));
        }
    }

    #[test]
    fn d4_k1_entries() {
        let f = dft_vector(4, 1).unwrap();
        let expect = [
            C64::new(0.0, 1.0),
            C64::new(-1.0, 0.0),
            C64::new(0.0, -1.0),
            C64::new(1.0, 0.0),
        ];
        for (a, b) in f.as_slice().iter().zip(expect) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn fourier_vectors_are_orthogonal() {
        let d = 6;
        for k in 1..=d {
            let fk = dft_vector(d, k).unwrap();
            assert!(fk.as_slice().iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
            for j in 1..=d {
                let ip = fk.inner(&dft_vector(d, j).unwrap()).unwrap();
                let expect = if j == k { d as f64 } else { 0.0 };
                assert!((ip - C64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn out_of_range_index() {
        assert!(dft_vector(4, 0).is_err());
        assert!(dft_vector(4, 5).is_err());
    }

    #[test]
    fn crt_cases() {
        let r = crt_relabeling(3, 5).unwrap();
        assert!(r.is_permutation());
        assert!(r.max_deviation().unwrap() <= 1e-12);
        assert!(crt_relabeling(2, 4).is_err());
        let r = crt_relabeling(1, 7).unwrap();
        assert_eq!(r.position, (0..7).collect::<Vec<_>>());
        assert_eq!(r.frequency, (0..7).collect::<Vec<_>>());
    }
}

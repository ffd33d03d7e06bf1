//! Synthetic Frobenius assignments and the multiplicative coefficient
//! streams they induce on squarefree integers.
//!
//! Each prime `p ≤ X`, in increasing order, draws a uniform element of `G`
//! from a ChaCha8 stream and takes its conjugacy class, so class `C` is hit
//! with probability `|C|/|G|`. Streams are produced in blocks of `2^20`
//! integers; blocks are independent and processed in parallel.

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chartheory::{char_exponent, cuspidal_representatives, induce, trivial_induced_values};
use crate::error::{Error, Result};
use crate::moments::{CompensatedSum, Filter, MomentSeries};
use crate::permgroup::GaloisFrame;

pub const BLOCK: u64 = 1 << 20;
pub const MAX_X: u64 = 100_000_000;

pub fn primes_up_to(x: u64) -> Vec<u32> {
    let n = x as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u32);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct FrobeniusAssignment {
    pub x: u64,
    pub seed: u64,
    pub primes: Vec<u32>,
    /// Class index of `primes[i]`.
    pub classes: Vec<u16>,
    pub class_count: usize,
}

pub fn assign(frame: &GaloisFrame, x: u64, seed: u64) -> Result<FrobeniusAssignment> {
    if x > MAX_X {
        return Err(Error::DomainExceeded {
            available: MAX_X,
            requested: x,
        });
    }
    let order = frame.group().order();
    let class_of = &frame.classes().class_of;
    if frame.classes().len() > u16::MAX as usize {
        return Err(Error::Overflow("class index"));
    }
    let primes = primes_up_to(x);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = primes
        .iter()
        .map(|_| class_of[rng.random_range(0..order)] as u16)
        .collect();
    Ok(FrobeniusAssignment {
        x,
        seed,
        primes,
        classes,
        class_count: frame.classes().len(),
    })
}

impl FrobeniusAssignment {
    pub fn class_of_prime(&self, p: u32) -> Option<u16> {
        self.primes.binary_search(&p).ok().map(|i| self.classes[i])
    }

    pub fn class_frequencies(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &c in &self.classes {
            counts[c as usize] += 1;
        }
        counts
    }

    /// `∏_{p|n} w(class(p))` for squarefree `n`, `None` otherwise.
    pub fn coefficient(&self, weights: &[Complex64], n: u64) -> Option<Complex64> {
        let mut m = n;
        let mut acc = Complex64::new(1.0, 0.0);
        for (&p, &c) in self.primes.iter().zip(&self.classes) {
            let p = p as u64;
            if p * p > m {
                break;
            }
            if m.is_multiple_of(p) {
                m /= p;
                if m.is_multiple_of(p) {
                    return None;
                }
                acc *= weights[c as usize];
            }
        }
        if m > 1 {
            acc *= weights[self.class_of_prime(m as u32)? as usize];
        }
        Some(acc)
    }

    /// Runs `f` over every block of `1..=X` in parallel; results come back
    /// in block order.
    pub fn blocks<R: Send>(&self, channels: &[Vec<Complex64>], f: impl Fn(&Block) -> R + Sync) -> Vec<R> {
        let count = self.x.div_ceil(BLOCK);
        (0..count)
            .into_par_iter()
            .map(|b| {
                let lo = 1 + b * BLOCK;
                let hi = (lo + BLOCK - 1).min(self.x);
                f(&self.block(channels, lo, hi))
            })
            .collect()
    }

    fn block(&self, channels: &[Vec<Complex64>], lo: u64, hi: u64) -> Block {
        let len = (hi - lo + 1) as usize;
        let mut values = vec![vec![Complex64::new(1.0, 0.0); len]; channels.len()];
        let mut squarefree = vec![true; len];
        for (&p, &c) in self.primes.iter().zip(&self.classes) {
            let p = p as u64;
            if p > hi {
                break;
            }
            let first = lo.div_ceil(p) * p;
            let mut m = first;
            while m <= hi {
                let i = (m - lo) as usize;
                for (vals, w) in values.iter_mut().zip(channels) {
                    vals[i] *= w[c as usize];
                }
                m += p;
            }
            if let Some(p2) = p.checked_mul(p).filter(|&q| q <= hi) {
                let mut m = lo.div_ceil(p2) * p2;
                while m <= hi {
                    squarefree[(m - lo) as usize] = false;
                    m += p2;
                }
            }
        }
        for vals in &mut values {
            for (v, &sf) in vals.iter_mut().zip(&squarefree) {
                if !sf {
                    *v = Complex64::new(0.0, 0.0);
                }
            }
        }
        Block {
            start: lo,
            values,
            squarefree,
        }
    }
}

/// Coefficients for `n = start, start+1, …`, zero on non-squarefree `n`.
#[derive(Clone, Debug)]
pub struct Block {
    pub start: u64,
    pub values: Vec<Vec<Complex64>>,
    pub squarefree: Vec<bool>,
}

/// `χ̃^ind` per class as complex numbers: the prime weights of `a(χ, ·)`.
pub fn char_weights(frame: &GaloisFrame, chi: usize) -> Vec<Complex64> {
    induce(frame, chi).values.iter().map(|v| v.numeric()).collect()
}

/// `a(σ,p)` for a prime with Frobenius class `C`, as a `[class][σ]` table.
///
/// Computed by counting cosets `gH` with `g⁻¹cg ∈ H` mapping to `σ`, and
/// cross-checked against `(1/|N|) Σ_χ χ̄(σ) χ̃^ind(C)`.
pub fn prime_class_counts(frame: &GaloisFrame) -> Result<Vec<Vec<u32>>> {
    let group = frame.group();
    let quotient = frame.quotient();
    let structure = &quotient.structure;
    let n = quotient.order();
    let cosets = group.left_cosets(frame.h(), &group.whole());
    let mut table = Vec::with_capacity(frame.classes().len());
    for class in &frame.classes().classes {
        let c = class.representative;
        let mut counts = vec![0u32; n];
        for coset in &cosets {
            let g = coset[0];
            if let Some(sigma) = quotient.image[group.conj(g, c)] {
                counts[sigma] += 1;
            }
        }
        table.push(counts);
    }

    let e = structure.exponent() as f64;
    let induced: Vec<Vec<Complex64>> = (0..n).map(|chi| char_weights(frame, chi)).collect();
    let trivial = trivial_induced_values(frame);
    for (k, counts) in table.iter().enumerate() {
        let total: u32 = counts.iter().sum();
        if trivial[k].to_u32() != Some(total) {
            return Err(Error::CrossCheckMismatch(format!(
                "class {k}: coset count {total} differs from permutation character {}",
                trivial[k]
            )));
        }
        for (sigma, &count) in counts.iter().enumerate() {
            let sum: Complex64 = (0..n)
                .map(|chi| {
                    let k_exp = char_exponent(structure, &structure.coords(chi), sigma) as f64;
                    let conj = Complex64::from_polar(1.0, -std::f64::consts::TAU * k_exp / e);
                    conj * induced[chi][k]
                })
                .sum::<Complex64>()
                / n as f64;
            if (sum.re - count as f64).abs() > 1e-6 || sum.im.abs() > 1e-6 {
                return Err(Error::CrossCheckMismatch(format!(
                    "class {k}, σ = {sigma}: character sum {sum} vs coset count {count}"
                )));
            }
        }
    }
    Ok(table)
}

/// Weights of the cuspidal projection `(1/|N|) Σ_i χ̄ᵢ^ind(σ) a(χᵢ,·)`
/// over the orbit representatives `chars`.
pub fn projection_coefficients(frame: &GaloisFrame, sigma: usize, chars: &[usize]) -> Vec<Complex64> {
    let n = frame.quotient().order() as f64;
    let class = frame.class_of_n(sigma);
    chars
        .iter()
        .map(|&chi| induce(frame, chi).values[class].numeric().conj() / n)
        .collect()
}

/// Squarefree moment series of the trivial-character stream and, on frames
/// with cuspidal characters, of the cuspidal projection at `σ`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SyntheticRun {
    pub sigma: usize,
    pub representatives: Vec<usize>,
    pub trivial: MomentSeries,
    pub cusp: Option<MomentSeries>,
}

pub fn synthetic_moments(
    frame: &GaloisFrame,
    assignment: &FrobeniusAssignment,
    sigma: usize,
    two_beta: f64,
    grid: &[u64],
) -> Result<SyntheticRun> {
    if grid.last().is_some_and(|&g| g > assignment.x) {
        return Err(Error::DomainExceeded {
            available: assignment.x,
            requested: *grid.last().unwrap(),
        });
    }
    let representatives = match frame.q_data() {
        Some(_) => cuspidal_representatives(frame)?,
        None => Vec::new(),
    };
    let mut channels = vec![char_weights(frame, 0)];
    channels.extend(representatives.iter().map(|&chi| char_weights(frame, chi)));
    let proj = projection_coefficients(frame, sigma, &representatives);
    let top = *grid.last().unwrap_or(&0);
    let per_block = assignment.blocks(&channels, |block| {
        let mut seg = vec![[CompensatedSum::default(); 2]; grid.len()];
        let mut k = grid.partition_point(|&g| g < block.start);
        for i in 0..block.squarefree.len() {
            let n = block.start + i as u64;
            if n > top {
                break;
            }
            while grid[k] < n {
                k += 1;
            }
            if !block.squarefree[i] {
                continue;
            }
            let t = block.values[0][i].norm();
            if t != 0.0 {
                seg[k][0].add(t.powf(two_beta));
            }
            if !proj.is_empty() {
                let c: Complex64 = proj.iter().enumerate().map(|(j, w)| w * block.values[j + 1][i]).sum();
                let c = c.norm();
                if c > 1e-12 {
                    seg[k][1].add(c.powf(two_beta));
                }
            }
        }
        seg
    });
    let mut totals = vec![[CompensatedSum::default(); 2]; grid.len()];
    for seg in &per_block {
        for (t, s) in totals.iter_mut().zip(seg) {
            t[0].merge(&s[0]);
            t[1].merge(&s[1]);
        }
    }
    let mut acc = [CompensatedSum::default(); 2];
    let mut triv = Vec::with_capacity(grid.len());
    let mut cusp = Vec::with_capacity(grid.len());
    for (t, &x) in totals.iter().zip(grid) {
        acc[0].merge(&t[0]);
        acc[1].merge(&t[1]);
        triv.push((x, acc[0].value()));
        cusp.push((x, acc[1].value()));
    }
    let power = format!("|a|^{two_beta}");
    let source = format!("synthetic seed={}", assignment.seed);
    Ok(SyntheticRun {
        sigma,
        trivial: MomentSeries::from_values(triv, Filter::Squarefree, &power, &format!("{source} trivial")),
        cusp: (!proj.is_empty())
            .then(|| MomentSeries::from_values(cusp, Filter::Squarefree, &power, &format!("{source} cusp σ={sigma}"))),
        representatives,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::builtin;

    #[test]
    fn sieve() {
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(primes_up_to(1_000_000).len(), 78_498);
    }

    #[test]
    fn seeded_assignment_is_deterministic() {
        let frame = builtin("s3-nongalois").unwrap().frame().unwrap();
        let a = assign(&frame, 10_000, 7).unwrap();
        let b = assign(&frame, 10_000, 7).unwrap();
        let c = assign(&frame, 10_000, 8).unwrap();
        assert_eq!(a.classes, b.classes);
        assert_ne!(a.classes, c.classes);
    }

    #[test]
    fn coefficients_multiply() {
        let frame = builtin("c7c3").unwrap().frame().unwrap();
        let a = assign(&frame, 1000, 1).unwrap();
        let w = char_weights(&frame, 1);
        assert_eq!(a.coefficient(&w, 1), Some(Complex64::new(1.0, 0.0)));
        let wp = w[a.class_of_prime(101).unwrap() as usize];
        let wq = w[a.class_of_prime(7).unwrap() as usize];
        assert!((a.coefficient(&w, 707).unwrap() - wp * wq).norm() < 1e-12);
        assert_eq!(a.coefficient(&w, 12), None);
    }

    #[test]
    fn block_stream_matches_direct() {
        let frame = builtin("cubic-v4").unwrap().frame().unwrap();
        let a = assign(&frame, 5000, 3).unwrap();
        let w = vec![char_weights(&frame, 0), char_weights(&frame, 1)];
        let blocks = a.blocks(&w, |b| b.clone());
        assert_eq!(blocks.len(), 1);
        for n in 1..=5000u64 {
            let i = (n - 1) as usize;
            for ch in 0..2 {
                let direct = a.coefficient(&w[ch], n).unwrap_or_default();
                assert!((blocks[0].values[ch][i] - direct).norm() < 1e-9, "n = {n}");
            }
        }
    }

    #[test]
    fn s3_identity_class_has_three_cosets() {
        let frame = builtin("s3-nongalois").unwrap().frame().unwrap();
        let table = prime_class_counts(&frame).unwrap();
        assert_eq!(table[0], vec![3]);
    }
}

//! Binary symmetric channels and exact weight-law computations.

use crate::bits::BitVec;
use crate::design::CodeParams;
use crate::innercode::bernoulli_vector;
use crate::numeric::{binom_logpmf_raw, conv, Neumaier};
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Flips each bit of `x` independently with probability `crossover`.
pub fn bsc_transmit<R: Rng + ?Sized>(x: &BitVec, crossover: f64, rng: &mut R) -> BitVec {
    let mut y = bernoulli_vector(x.len(), crossover, rng);
    y.xor_assign(x);
    y
}

/// Natural-log Binomial(`n`, `p`) pmf at `w`.
pub fn binom_logpmf(n: u64, p: f64, w: u64) -> Result<f64> {
    if w > n || !(p > 0.0 && p < 1.0) {
        return Err(Error::Contract(format!("binom_logpmf needs 0 <= w <= n, 0 < p < 1 (n={n}, p={p}, w={w})")));
    }
    Ok(binom_logpmf_raw(n, p, w))
}

/// Binomial(`n`, `p`) weight law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightLaw {
    pub n: u64,
    pub p: f64,
}

impl WeightLaw {
    pub fn new(n: u64, p: f64) -> Self {
        Self { n, p }
    }

    pub fn logpmf(&self, w: u64) -> f64 {
        binom_logpmf_raw(self.n, self.p, w)
    }

    pub fn pmf(&self, w: u64) -> f64 {
        self.logpmf(w).exp()
    }

    pub fn mean(&self) -> f64 {
        self.n as f64 * self.p
    }

    pub fn sd(&self) -> f64 {
        (self.n as f64 * self.p * (1.0 - self.p)).sqrt()
    }

    /// Weights outside this range carry negligible mass.
    pub fn window(&self) -> (u64, u64) {
        let spread = 40.0 * self.sd() + 60.0;
        let lo = (self.mean() - spread).floor().max(0.0) as u64;
        let hi = ((self.mean() + spread).ceil() as u64).min(self.n);
        (lo, hi)
    }

    /// Dense pmf over `lo..=hi`.
    pub fn pmf_range(&self, lo: u64, hi: u64) -> Vec<f64> {
        (lo..=hi).map(|w| self.pmf(w)).collect()
    }

    /// `P(W >= t)`, summed over the significant window.
    pub fn sf(&self, t: u64) -> f64 {
        let (lo, hi) = self.window();
        if t > hi {
            return 0.0;
        }
        let mut acc = Neumaier::new();
        for w in t.max(lo)..=hi {
            acc.add(self.pmf(w));
        }
        acc.value().min(1.0)
    }
}

/// Union of the significant windows of two laws on the same `n`.
pub fn joint_window(a: &WeightLaw, b: &WeightLaw) -> (u64, u64) {
    let (a0, a1) = a.window();
    let (b0, b1) = b.window();
    (a0.min(b0), a1.max(b1))
}

/// Exact total variation between i.i.d. Bernoulli(`p0`) and Bernoulli(`p1`)
/// laws on `{0,1}^n`.
///
/// The Hamming weight is a sufficient statistic for both laws, so the
/// distance equals that between the two binomial weight laws.
pub fn tv_product_bernoulli(n: u64, p0: f64, p1: f64) -> f64 {
    if p0 == p1 {
        return 0.0;
    }
    let (a, b) = (WeightLaw::new(n, p0), WeightLaw::new(n, p1));
    let (lo, hi) = joint_window(&a, &b);
    let mut acc = Neumaier::new();
    for w in lo..=hi {
        acc.add((a.pmf(w) - b.pmf(w)).abs());
    }
    (0.5 * acc.value()).clamp(0.0, 1.0)
}

/// Exact distribution over `{0,1}^B` for `B <= 20`. Index bit `i` is
/// position `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicroDistribution {
    pub chunk_len: usize,
    pub probs: Vec<f64>,
}

pub const MICRO_MAX_LEN: usize = 20;

impl MicroDistribution {
    pub fn total(&self) -> f64 {
        crate::numeric::neumaier_sum(self.probs.iter().copied())
    }

    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        if self.chunk_len != other.chunk_len {
            return Err(Error::Contract("micro distributions differ in length".into()));
        }
        let mut acc = Neumaier::new();
        for (a, b) in self.probs.iter().zip(&other.probs) {
            acc.add((a - b).abs());
        }
        Ok(0.5 * acc.value())
    }
}

/// Packs a short bit vector into an index.
pub fn to_index(v: &BitVec) -> usize {
    v.iter_ones().fold(0, |acc, i| acc | 1 << i)
}

fn check_micro(len: usize) -> Result<()> {
    if len > MICRO_MAX_LEN {
        return Err(Error::Scale(format!("micro-scale laws need B <= {MICRO_MAX_LEN}, got {len}")));
    }
    Ok(())
}

/// Output law of a silent transmitter through BSC(`q`).
pub fn micro_p0(chunk_len: usize, q: f64) -> Result<MicroDistribution> {
    exact_p1_micro(&[BitVec::zeros(chunk_len)], q)
}

/// Output law for a uniformly chosen codeword through BSC(`q`).
pub fn exact_p1_micro(codewords: &[BitVec], q: f64) -> Result<MicroDistribution> {
    let len = codewords.first().map(BitVec::len).ok_or_else(|| Error::Contract("empty codebook".into()))?;
    check_micro(len)?;
    if codewords.iter().any(|c| c.len() != len) {
        return Err(Error::Contract("codewords must share one length".into()));
    }
    let pw: Vec<f64> = (0..=len).map(|d| q.powi(d as i32) * (1.0 - q).powi((len - d) as i32)).collect();
    let xs: Vec<usize> = codewords.iter().map(to_index).collect();
    let inv_n = 1.0 / xs.len() as f64;
    let probs = (0..1usize << len)
        .map(|z| {
            let mut acc = Neumaier::new();
            for &x in &xs {
                acc.add(pw[(x ^ z).count_ones() as usize]);
            }
            acc.value() * inv_n
        })
        .collect();
    Ok(MicroDistribution { chunk_len: len, probs })
}

/// Ensemble-averaged active law: Binomial(n, rho * q).
pub fn ensemble_avg_p1(params: &CodeParams) -> WeightLaw {
    WeightLaw::new(params.n, conv(params.rho, params.channel.q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bsc_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = BitVec::from_bit_str("1011001").unwrap();
        assert_eq!(bsc_transmit(&x, 0.0, &mut rng), x);
        let n = 1_000_000;
        let y = bsc_transmit(&BitVec::ones(n), 0.5, &mut rng);
        assert!((y.weight() as f64 - 5e5).abs() < 5.0 * 500.0);
    }

    #[test]
    fn logpmf_domain() {
        assert!(binom_logpmf(3, 0.5, 4).is_err());
        assert!(binom_logpmf(3, 0.0, 1).is_err());
        assert!((binom_logpmf(2, 0.5, 1).unwrap() - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn tv_small_cases() {
        assert_eq!(tv_product_bernoulli(10, 0.3, 0.3), 0.0);
        assert!((tv_product_bernoulli(1, 0.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((tv_product_bernoulli(1, 0.25, 0.5) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn micro_single_codeword() {
        let d = exact_p1_micro(&[BitVec::from_bit_str("11").unwrap()], 0.25).unwrap();
        // Indices: 3 = "11", 1 = "10", 2 = "01", 0 = "00".
        let want = [(3, 0.5625), (1, 0.1875), (2, 0.1875), (0, 0.0625)];
        for (i, p) in want {
            assert!((d.probs[i] - p).abs() < 1e-15);
        }
        assert!((d.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn micro_symmetry_cases() {
        let all: Vec<BitVec> = (0..8usize)
            .map(|i| BitVec::from_bools(&[(i & 1) != 0, (i & 2) != 0, (i & 4) != 0]))
            .collect();
        let u = exact_p1_micro(&all, 0.2).unwrap();
        assert!(u.probs.iter().all(|&p| (p - 0.125).abs() < 1e-15));
        let some = &all[..2];
        let z = exact_p1_micro(some, 0.0).unwrap();
        assert_eq!(z.probs.iter().filter(|&&p| p == 0.5).count(), 2);
        assert!(matches!(micro_p0(21, 0.1), Err(Error::Scale(_))));
    }
}

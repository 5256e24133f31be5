//! The warden's detectors and covertness measurements.

use crate::bits::BitVec;
use crate::channel::{joint_window, to_index, MicroDistribution, WeightLaw};
use crate::codec::ConcatCode;
use crate::gf2m::Elem;
use crate::numeric::{conv, Neumaier};
use crate::seed;
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A deterministic test on the full observation.
pub trait Detector: Sync {
    fn name(&self) -> String;
    fn accuse(&self, z: &BitVec) -> bool;
}

/// A deterministic test that only looks at per-chunk Hamming weights.
pub trait WeightDetector: Sync {
    fn name(&self) -> String;
    fn accuse_weights(&self, chunk_weights: &[u64]) -> bool;
}

pub struct AlwaysAccuse;
pub struct NeverAccuse;

impl Detector for AlwaysAccuse {
    fn name(&self) -> String {
        "always".into()
    }
    fn accuse(&self, _: &BitVec) -> bool {
        true
    }
}

impl Detector for NeverAccuse {
    fn name(&self) -> String {
        "never".into()
    }
    fn accuse(&self, _: &BitVec) -> bool {
        false
    }
}

/// Total-weight threshold test: accuse when `wt(z) >= threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Radiometer {
    pub n: u64,
    pub threshold: u64,
    pub alpha: f64,
    pub beta: f64,
}

impl Radiometer {
    pub fn sum(&self) -> f64 {
        self.alpha + self.beta
    }
}

impl Detector for Radiometer {
    fn name(&self) -> String {
        format!("radiometer(t={})", self.threshold)
    }
    fn accuse(&self, z: &BitVec) -> bool {
        z.weight() as u64 >= self.threshold
    }
}

impl WeightDetector for Radiometer {
    fn name(&self) -> String {
        Detector::name(self)
    }
    fn accuse_weights(&self, w: &[u64]) -> bool {
        w.iter().sum::<u64>() >= self.threshold
    }
}

/// Exact error pair of the threshold test `W >= t` between Binomial(n, p0)
/// and Binomial(n, p1).
pub fn threshold_errors(n: u64, p0: f64, p1: f64, t: u64) -> (f64, f64) {
    let (a, b) = (WeightLaw::new(n, p0), WeightLaw::new(n, p1));
    let (lo, hi) = joint_window(&a, &b);
    let (mut alpha, mut beta) = (Neumaier::new(), Neumaier::new());
    for w in lo..=hi {
        if w >= t {
            alpha.add(a.pmf(w));
        } else {
            beta.add(b.pmf(w));
        }
    }
    if t < lo {
        (1.0, 0.0)
    } else {
        (alpha.value().min(1.0), beta.value().min(1.0))
    }
}

/// Minimises exact `alpha + beta` over thresholds on total weight between
/// Binomial(n, q) and Binomial(n, rho * q). Ties go to the largest
/// threshold; `n + 1` means never accuse.
pub fn radiometer_design(n: u64, q: f64, rho: f64) -> Radiometer {
    let p1 = conv(rho, q);
    let (a, b) = (WeightLaw::new(n, q), WeightLaw::new(n, p1));
    let (lo, hi) = joint_window(&a, &b);
    let mut best_t = n + 1;
    let mut best_gain = 0.0;
    let mut acc = Neumaier::new();
    for t in (lo..=hi).rev() {
        acc.add(b.pmf(t) - a.pmf(t));
        if acc.value() > best_gain {
            best_gain = acc.value();
            best_t = t;
        }
    }
    let (alpha, beta) = if best_t > n { (0.0, 1.0) } else { threshold_errors(n, q, p1, best_t) };
    Radiometer { n, threshold: best_t, alpha, beta }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrtResult {
    pub alpha: f64,
    pub beta: f64,
    pub tv: f64,
}

/// Optimal deterministic test: accuse iff `P1(z) > P0(z)`.
pub fn lrt_exact_micro(p0: &MicroDistribution, p1: &MicroDistribution) -> Result<LrtResult> {
    if p0.chunk_len != p1.chunk_len || p0.probs.len() != p1.probs.len() {
        return Err(Error::Contract("micro distributions differ in dimension".into()));
    }
    let (mut alpha, mut keep1, mut tv) = (Neumaier::new(), Neumaier::new(), Neumaier::new());
    for (&a, &b) in p0.probs.iter().zip(&p1.probs) {
        if b > a {
            alpha.add(a);
        } else {
            keep1.add(b);
        }
        tv.add((a - b).abs());
    }
    Ok(LrtResult { alpha: alpha.value(), beta: keep1.value(), tv: 0.5 * tv.value() })
}

/// The optimal micro-scale test as a [`Detector`].
pub struct MicroLrt {
    accuse_set: Vec<bool>,
}

impl MicroLrt {
    pub fn new(p0: &MicroDistribution, p1: &MicroDistribution) -> Result<Self> {
        if p0.probs.len() != p1.probs.len() {
            return Err(Error::Contract("micro distributions differ in dimension".into()));
        }
        Ok(Self { accuse_set: p0.probs.iter().zip(&p1.probs).map(|(a, b)| b > a).collect() })
    }
}

impl Detector for MicroLrt {
    fn name(&self) -> String {
        "micro-lrt".into()
    }
    fn accuse(&self, z: &BitVec) -> bool {
        self.accuse_set[to_index(z)]
    }
}

/// Accuses when any chunk weight reaches its threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkWeightDetector {
    pub chunk_len: usize,
    pub thresholds: Vec<u64>,
    pub per_chunk_alpha: f64,
}

/// Smallest `t` with `P(Bin(len, q) >= t) <= alpha_c`.
pub fn chunk_threshold(len: usize, q: f64, alpha_c: f64) -> u64 {
    let law = WeightLaw::new(len as u64, q);
    let mut tail = Neumaier::new();
    let mut t = len as u64 + 1;
    for w in (0..=len as u64).rev() {
        tail.add(law.pmf(w));
        if tail.value() > alpha_c {
            break;
        }
        t = w;
    }
    t
}

impl ChunkWeightDetector {
    /// Same threshold in every chunk, designed at per-chunk false alarm
    /// `alpha_c` (default `1/(2L)`).
    pub fn design(num_chunks: usize, chunk_len: usize, q: f64, alpha_c: Option<f64>) -> Self {
        let a = alpha_c.unwrap_or(1.0 / (2.0 * num_chunks as f64));
        let t = chunk_threshold(chunk_len, q, a);
        Self { chunk_len, thresholds: vec![t; num_chunks], per_chunk_alpha: a }
    }

    /// Exact false-alarm probability under BSC(q) on the zero word.
    pub fn exact_alpha(&self, q: f64) -> f64 {
        let law = WeightLaw::new(self.chunk_len as u64, q);
        let log_pass: f64 = self
            .thresholds
            .iter()
            .map(|&t| if t == 0 { f64::NEG_INFINITY } else { (1.0 - law.sf(t)).ln() })
            .sum();
        1.0 - log_pass.exp()
    }
}

impl Detector for ChunkWeightDetector {
    fn name(&self) -> String {
        format!("chunk-weight(alpha_c={:.3e})", self.per_chunk_alpha)
    }
    fn accuse(&self, z: &BitVec) -> bool {
        let b = self.chunk_len;
        self.thresholds.iter().enumerate().any(|(i, &t)| z.slice(i * b, b).weight() as u64 >= t)
    }
}

impl WeightDetector for ChunkWeightDetector {
    fn name(&self) -> String {
        Detector::name(self)
    }
    fn accuse_weights(&self, w: &[u64]) -> bool {
        w.iter().zip(&self.thresholds).any(|(&x, &t)| x >= t)
    }
}

pub fn chunk_weight_detector(code_chunk_len: usize, z: &BitVec, thresholds: &[u64]) -> bool {
    thresholds
        .iter()
        .enumerate()
        .any(|(i, &t)| z.slice(i * code_chunk_len, code_chunk_len).weight() as u64 >= t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub detector_name: String,
    pub alpha: f64,
    pub beta: f64,
    pub sum: f64,
    pub tv_reference: Option<f64>,
    pub trials: u64,
    /// 3-sigma binomial half-widths for alpha, beta and their sum.
    pub ci_halfwidth: [f64; 3],
}

impl DetectionReport {
    fn from_counts(name: String, false_alarms: u64, misses: u64, trials: u64) -> Self {
        let t = trials as f64;
        let (a, b) = (false_alarms as f64 / t, misses as f64 / t);
        let va = a * (1.0 - a) / t;
        let vb = b * (1.0 - b) / t;
        Self {
            detector_name: name,
            alpha: a,
            beta: b,
            sum: a + b,
            tv_reference: None,
            trials,
            ci_halfwidth: [3.0 * va.sqrt(), 3.0 * vb.sqrt(), 3.0 * (va + vb).sqrt()],
        }
    }

    pub fn with_tv(mut self, tv: f64) -> Self {
        self.tv_reference = Some(tv);
        self
    }

    /// `alpha + beta >= 1 - tv` within the confidence slack.
    pub fn respects_optimum(&self) -> bool {
        self.tv_reference.is_none_or(|tv| self.sum + self.ci_halfwidth[2] >= 1.0 - tv - 1e-12)
    }
}

pub const MIN_TRIALS: u64 = 1000;

fn check_trials(trials: u64) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(Error::Config(format!("detection experiments need at least {MIN_TRIALS} trials, got {trials}")));
    }
    Ok(())
}

fn trial_rng(seed_val: u64, hyp: u64, trial: u64) -> ChaCha8Rng {
    seed::stream(seed_val, &[seed::tag::ADVERSARY, hyp, trial])
}

/// Monte Carlo `alpha` and `beta` with observations drawn by `h0` and
/// `h1`. Trial `i` of each hypothesis uses its own index-derived stream.
pub fn detect_experiment<F0, F1>(detector: &dyn Detector, h0: F0, h1: F1, trials: u64, seed_val: u64) -> Result<DetectionReport>
where
    F0: Fn(&mut ChaCha8Rng) -> BitVec + Sync,
    F1: Fn(&mut ChaCha8Rng) -> BitVec + Sync,
{
    check_trials(trials)?;
    let fa: u64 = (0..trials)
        .into_par_iter()
        .map(|i| detector.accuse(&h0(&mut trial_rng(seed_val, 0, i))) as u64)
        .sum();
    let miss: u64 = (0..trials)
        .into_par_iter()
        .map(|i| !detector.accuse(&h1(&mut trial_rng(seed_val, 1, i))) as u64)
        .sum();
    Ok(DetectionReport::from_counts(detector.name(), fa, miss, trials))
}

/// Uniformly random nonzero message symbols for a code.
pub fn random_message_symbols<R: Rng + ?Sized>(code: &ConcatCode, rng: &mut R) -> Vec<Elem> {
    let size = code.params.codebook_size() as Elem;
    loop {
        let s: Vec<Elem> = (0..code.params.l1).map(|_| rng.random_range(0..size)).collect();
        if s.iter().any(|&x| x != 0) {
            return s;
        }
    }
}

/// Per-chunk output weights for input chunk weights `x_weights` through
/// BSC(q): `Bin(w, 1 - q) + Bin(B - w, q)` per chunk.
pub fn sample_chunk_weights<R: Rng + ?Sized>(x_weights: &[u64], chunk_len: u64, q: f64, rng: &mut R) -> Vec<u64> {
    x_weights
        .iter()
        .map(|&w| {
            let keep = if w == 0 { 0 } else { Binomial::new(w, 1.0 - q).expect("valid").sample(rng) };
            let flip = Binomial::new(chunk_len - w, q).expect("valid").sample(rng);
            keep + flip
        })
        .collect()
}

/// Weight-level Monte Carlo for a concatenated code. Under H1 a fresh
/// uniform nonzero message is encoded each trial.
pub fn detect_experiment_weights(
    detector: &dyn WeightDetector,
    code: &ConcatCode,
    trials: u64,
    seed_val: u64,
) -> Result<DetectionReport> {
    check_trials(trials)?;
    let (l, b, q) = (code.params.num_chunks, code.params.chunk_len as u64, code.params.channel.q);
    let zeros = vec![0u64; l];
    let fa: u64 = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed_val, 0, i);
            detector.accuse_weights(&sample_chunk_weights(&zeros, b, q, &mut rng)) as u64
        })
        .sum();
    let miss = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let mut rng = trial_rng(seed_val, 1, i);
            let msg = random_message_symbols(code, &mut rng);
            let cw = code.rs.encode(&msg)?;
            let xw: Vec<u64> = cw
                .iter()
                .zip(&code.inner)
                .map(|(&w, cb)| cb.weights()[w as usize] as u64)
                .collect();
            Ok(!detector.accuse_weights(&sample_chunk_weights(&xw, b, q, &mut rng)) as u64)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(DetectionReport::from_counts(WeightDetector::name(detector), fa, miss, trials))
}

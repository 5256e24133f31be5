//! Random low-weight inner codebooks, joint-type statistics, typical-set
//! membership and the chunk-wise typicality decoder.

use crate::bits::BitVec;
use crate::design::CodeParams;
use crate::numeric::{binom_logpmf_raw, conv, xlog2x};
use crate::seed;
use crate::{Error, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Default cap on `2^m * B` bits per codebook.
pub const DEFAULT_MEMORY_CAP_BITS: u64 = 1 << 30;

#[derive(Debug, Clone, PartialEq)]
pub struct InnerCodebook {
    pub chunk_index: usize,
    pub chunk_len: usize,
    pub seed: u64,
    pub rho: f64,
    codewords: Vec<BitVec>,
    weights: Vec<u32>,
}

impl InnerCodebook {
    /// Wraps explicit codewords, e.g. a hand-built code.
    pub fn from_codewords(chunk_index: usize, rho: f64, codewords: Vec<BitVec>) -> Result<Self> {
        let chunk_len = codewords.first().map_or(0, BitVec::len);
        if codewords.iter().any(|c| c.len() != chunk_len) {
            return Err(Error::Contract("codewords must share one length".into()));
        }
        if !codewords.len().is_power_of_two() {
            return Err(Error::Contract(format!("codebook size {} is not a power of two", codewords.len())));
        }
        let weights = codewords.iter().map(|c| c.weight() as u32).collect();
        Ok(Self { chunk_index, chunk_len, seed: 0, rho, codewords, weights })
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codewords(&self) -> &[BitVec] {
        &self.codewords
    }

    pub fn codeword(&self, w: usize) -> &BitVec {
        &self.codewords[w]
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.iter().map(|&w| w as u64).sum()
    }

    /// `codeword_index -> hex row` lines for debugging.
    pub fn dump_hex(&self) -> String {
        self.codewords
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{i}\t{}\n", c.to_hex()))
            .collect()
    }
}

/// Hash of the parameters that shape a codebook, used as a seed key.
pub fn params_key(params: &CodeParams) -> u64 {
    seed::derive(
        params.n,
        &[params.num_chunks as u64, params.chunk_len as u64, params.m as u64, params.rho.to_bits()],
    )
}

/// Codebook for chunk `chunk_index` drawn i.i.d. Bernoulli(`rho`).
pub fn inner_generate(params: &CodeParams, chunk_index: usize, master_seed: u64) -> Result<InnerCodebook> {
    generate_raw(
        params.chunk_len,
        params.m,
        params.rho,
        chunk_index,
        master_seed,
        params_key(params),
        DEFAULT_MEMORY_CAP_BITS,
    )
}

pub fn generate_raw(
    chunk_len: usize,
    m: u32,
    rho: f64,
    chunk_index: usize,
    master_seed: u64,
    key: u64,
    cap_bits: u64,
) -> Result<InnerCodebook> {
    let size = 1u64 << m;
    if size.saturating_mul(chunk_len as u64) > cap_bits {
        return Err(Error::Scale(format!(
            "codebook of 2^{m} x {chunk_len} bits exceeds the cap of {cap_bits} bits"
        )));
    }
    let seed_val = seed::derive(master_seed, &[seed::tag::CODEBOOK, key, chunk_index as u64]);
    let codewords: Vec<BitVec> = (0..size)
        .into_par_iter()
        .map(|w| {
            let mut rng = seed::stream(seed_val, &[w]);
            bernoulli_vector(chunk_len, rho, &mut rng)
        })
        .collect();
    let weights = codewords.iter().map(|c| c.weight() as u32).collect();
    Ok(InnerCodebook { chunk_index, chunk_len, seed: seed_val, rho, codewords, weights })
}

/// I.i.d. Bernoulli(`p`) bits by geometric gap sampling.
pub fn bernoulli_vector<R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R) -> BitVec {
    let mut v = BitVec::zeros(len);
    if p <= 0.0 {
        return v;
    }
    if p >= 1.0 {
        return BitVec::ones(len);
    }
    if p > 0.25 {
        for i in 0..len {
            if rng.random::<f64>() < p {
                v.set(i, true);
            }
        }
        return v;
    }
    let log_q = (-p).ln_1p();
    let mut pos: usize = 0;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>();
        let gap = (u.ln() / log_q).floor();
        if gap >= (len - pos) as f64 {
            break;
        }
        pos += gap as usize;
        v.set(pos, true);
        pos += 1;
        if pos >= len {
            break;
        }
    }
    v
}

/// Joint type of a (codeword, output) pair, kept as exact counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairStats {
    pub len: usize,
    pub n00: usize,
    pub n01: usize,
    pub n10: usize,
    pub n11: usize,
}

impl PairStats {
    pub fn frac(&self, c: usize) -> f64 {
        c as f64 / self.len as f64
    }
    pub fn f00(&self) -> f64 {
        self.frac(self.n00)
    }
    pub fn f01(&self) -> f64 {
        self.frac(self.n01)
    }
    pub fn f10(&self) -> f64 {
        self.frac(self.n10)
    }
    pub fn f11(&self) -> f64 {
        self.frac(self.n11)
    }
    pub fn fx1(&self) -> f64 {
        self.frac(self.n10 + self.n11)
    }
    pub fn fy1(&self) -> f64 {
        self.frac(self.n01 + self.n11)
    }
    pub fn fractions(&self) -> [f64; 4] {
        [self.f00(), self.f01(), self.f10(), self.f11()]
    }
}

pub fn pair_stats(x: &BitVec, y: &BitVec) -> Result<PairStats> {
    if x.len() != y.len() {
        return Err(Error::Contract(format!("length mismatch {} vs {}", x.len(), y.len())));
    }
    let n11 = x.and_weight(y);
    let n10 = x.weight() - n11;
    let n01 = y.weight() - n11;
    Ok(PairStats { len: x.len(), n00: x.len() - n10 - n01 - n11, n01, n10, n11 })
}

/// Inclusive range of integer counts `w` with `w / len` in
/// `[center (1 - width), center (1 + width)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRange {
    pub lo: i64,
    pub hi: i64,
}

impl CountRange {
    /// Endpoints are widened by a relative `1e-9` so that counts exactly on
    /// the boundary survive floating-point rounding.
    pub fn new(len: usize, center: f64, width: f64) -> Self {
        let a = len as f64 * center * (1.0 - width);
        let b = len as f64 * center * (1.0 + width);
        let tol = |x: f64| 1e-9 * x.abs().max(1.0);
        Self { lo: (a - tol(a)).ceil() as i64, hi: (b + tol(b)).floor() as i64 }
    }

    #[inline]
    pub fn contains(&self, w: usize) -> bool {
        let w = w as i64;
        self.lo <= w && w <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TypicalSet {
    /// Receiver output when the transmitter is silent.
    YSilent,
    /// Receiver output when the transmitter is active.
    YActive,
    /// Warden output when the transmitter is active.
    ZActive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Bob,
    Willie,
}

/// All weight and joint-type boxes implied by a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Boxes {
    pub y_silent: CountRange,
    pub y_active: CountRange,
    pub z_active: CountRange,
    pub bob10: CountRange,
    pub bob11: CountRange,
    pub willie10: CountRange,
    pub willie11: CountRange,
}

impl Boxes {
    pub fn new(params: &CodeParams) -> Self {
        let b = params.chunk_len;
        let (p, q, rho) = (params.channel.p, params.channel.q, params.rho);
        Self {
            y_silent: CountRange::new(b, p, params.dy1),
            y_active: CountRange::new(b, conv(rho, p), params.dy1),
            z_active: CountRange::new(b, conv(rho, q), params.dz1),
            bob10: CountRange::new(b, rho * p, params.dxy10),
            bob11: CountRange::new(b, rho * (1.0 - p), params.dxy11),
            willie10: CountRange::new(b, rho * q, params.dxz10),
            willie11: CountRange::new(b, rho * (1.0 - q), params.dxz11),
        }
    }

    pub fn set(&self, set: TypicalSet) -> CountRange {
        match set {
            TypicalSet::YSilent => self.y_silent,
            TypicalSet::YActive => self.y_active,
            TypicalSet::ZActive => self.z_active,
        }
    }

    pub fn cond(&self, role: Role) -> (CountRange, CountRange) {
        match role {
            Role::Bob => (self.bob10, self.bob11),
            Role::Willie => (self.willie10, self.willie11),
        }
    }
}

pub fn typicality(params: &CodeParams, v: &BitVec, set: TypicalSet) -> bool {
    Boxes::new(params).set(set).contains(v.weight())
}

pub fn cond_typicality(params: &CodeParams, x: &BitVec, v: &BitVec, role: Role) -> Result<bool> {
    let s = pair_stats(x, v)?;
    let (r10, r11) = Boxes::new(params).cond(role);
    Ok(r10.contains(s.n10) && r11.contains(s.n11))
}

/// Per-chunk decoder output. `Silence` is distinct from `Message(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecodeOutcome {
    Silence,
    Message(u32),
    DeclaredError,
}

impl DecodeOutcome {
    /// Token of `width` characters: `S`, `E`, or the symbol in hex.
    pub fn token(&self, width: usize) -> String {
        match self {
            DecodeOutcome::Silence => "S".repeat(width),
            DecodeOutcome::DeclaredError => "E".repeat(width),
            DecodeOutcome::Message(w) => format!("{w:0width$x}"),
        }
    }
}

/// Applies the chunk decoding rule. Returns the outcome and the number of
/// codewords examined.
pub fn inner_decode_counted(cb: &InnerCodebook, boxes: &Boxes, y: &BitVec) -> (DecodeOutcome, usize) {
    let wy = y.weight();
    if boxes.y_active.contains(wy) {
        let (r10, r11) = (boxes.bob10, boxes.bob11);
        let (wlo, whi) = (r10.lo + r11.lo, r10.hi + r11.hi);
        let mut found = None;
        let mut scanned = 0;
        for (w, x) in cb.codewords.iter().enumerate() {
            scanned += 1;
            let wx = cb.weights[w] as i64;
            if wx < wlo || wx > whi {
                continue;
            }
            let n11 = x.and_weight(y);
            let n10 = wx as usize - n11;
            if r10.contains(n10) && r11.contains(n11) {
                if found.is_some() {
                    return (DecodeOutcome::DeclaredError, scanned);
                }
                found = Some(w as u32);
            }
        }
        return (found.map_or(DecodeOutcome::Silence, DecodeOutcome::Message), scanned);
    }
    if boxes.y_silent.contains(wy) {
        (DecodeOutcome::Silence, 0)
    } else {
        (DecodeOutcome::DeclaredError, 0)
    }
}

pub fn inner_decode(cb: &InnerCodebook, params: &CodeParams, y: &BitVec) -> Result<DecodeOutcome> {
    if y.len() != cb.chunk_len {
        return Err(Error::Contract(format!("chunk has {} bits, expected {}", y.len(), cb.chunk_len)));
    }
    Ok(inner_decode_counted(cb, &Boxes::new(params), y).0)
}

/// Empirical mutual information and divergence from a joint type
/// `[f00, f01, f10, f11]`, in bits.
pub fn info_from_fractions(f: [f64; 4], rho: f64) -> Result<(f64, f64)> {
    let [f00, f01, f10, f11] = f;
    let fx = [f00 + f01, f10 + f11];
    let fz = [f00 + f10, f01 + f11];
    let mut i = 0.0;
    for (idx, &fab) in f.iter().enumerate() {
        if fab > 0.0 {
            i += fab * (fab / (fx[idx / 2] * fz[idx % 2])).log2();
        }
    }
    if (rho <= 0.0 && fx[1] > 0.0) || (rho >= 1.0 && fx[0] > 0.0) {
        return Err(Error::Domain(format!("divergence infinite for rho={rho}, fx1={}", fx[1])));
    }
    let term = |fa: f64, pa: f64| if fa == 0.0 { 0.0 } else { xlog2x(fa) - fa * pa.log2() };
    let d = term(fx[0], 1.0 - rho) + term(fx[1], rho);
    Ok((i, d))
}

pub fn empirical_info(x: &BitVec, z: &BitVec, rho: f64) -> Result<(f64, f64)> {
    info_from_fractions(pair_stats(x, z)?.fractions(), rho)
}

/// `log2 P(X in T_{X|z}(c10, c11))` for `X` i.i.d. Bernoulli(`rho`) of
/// length `len` and `z` of weight `cz1`.
pub fn type_class_log2prob_counts(len: u64, rho: f64, c10: u64, c11: u64, cz1: u64) -> Result<f64> {
    if cz1 > len || c11 > cz1 || c10 > len - cz1 {
        return Err(Error::Contract(format!(
            "inconsistent counts c10={c10}, c11={c11}, cz1={cz1}, len={len}"
        )));
    }
    let ln = binom_logpmf_raw(cz1, rho, c11) + binom_logpmf_raw(len - cz1, rho, c10);
    Ok(ln / LN_2)
}

/// Fractional form; each fraction times `B` must be an integer.
pub fn type_class_prob(params: &CodeParams, f10: f64, f11: f64, fz1: f64) -> Result<f64> {
    let b = params.chunk_len as f64;
    let count = |f: f64, name: &str| -> Result<u64> {
        let c = f * b;
        if (c - c.round()).abs() > 1e-9 || c < -1e-9 {
            return Err(Error::Contract(format!("{name} * B = {c} is not an integer")));
        }
        Ok(c.round() as u64)
    };
    type_class_log2prob_counts(
        params.chunk_len as u64,
        params.rho,
        count(f10, "f10")?,
        count(f11, "f11")?,
        count(fz1, "fz1")?,
    )
}

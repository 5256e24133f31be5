//! End-to-end concatenated encoder and decoder.
//!
//! Chunk outcomes feed the outer decoder as follows: `Message(w)` becomes
//! symbol `w`; `Silence` and `DeclaredError` become erasures. If at least
//! `L - floor(l2/2)` chunks are silent, or fewer than `l1` chunks carry a
//! symbol (so the outer decoder cannot succeed), the whole block is
//! declared silent. This global rule is a construction of this crate.

use crate::bits::BitVec;
use crate::design::CodeParams;
use crate::gf2m::{Elem, FieldSpec};
use crate::innercode::{inner_decode_counted, inner_generate, Boxes, DecodeOutcome, InnerCodebook};
use crate::rs::{RsCode, RsOutcome};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct ConcatCode {
    pub params: CodeParams,
    pub rs: RsCode,
    pub inner: Vec<InnerCodebook>,
    pub master_seed: u64,
    boxes: Boxes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RsStatus {
    Ok,
    Failure,
    NotAttempted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransmissionResult {
    pub t_hat: u8,
    pub message: Option<BitVec>,
    pub chunk_outcomes: Vec<DecodeOutcome>,
    pub rs_status: RsStatus,
    /// Codewords examined times chunk length.
    pub work: u64,
}

impl ConcatCode {
    /// Draws all inner codebooks from `master_seed`.
    pub fn build(params: &CodeParams, master_seed: u64) -> Result<Self> {
        let inner = (0..params.num_chunks)
            .into_par_iter()
            .map(|i| inner_generate(params, i, master_seed))
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(params, inner, master_seed)
    }

    /// Uses caller-supplied inner codebooks.
    pub fn from_parts(params: &CodeParams, inner: Vec<InnerCodebook>, master_seed: u64) -> Result<Self> {
        if inner.len() != params.num_chunks {
            return Err(Error::Contract(format!("{} codebooks for L={}", inner.len(), params.num_chunks)));
        }
        for cb in &inner {
            if cb.len() != params.codebook_size() || cb.chunk_len != params.chunk_len {
                return Err(Error::Contract(format!(
                    "codebook {} has shape {}x{}, expected {}x{}",
                    cb.chunk_index,
                    cb.len(),
                    cb.chunk_len,
                    params.codebook_size(),
                    params.chunk_len
                )));
            }
        }
        let field = Arc::new(FieldSpec::new(params.m)?);
        let rs = RsCode::new(field, params.num_chunks, params.l1)?;
        Ok(Self { params: params.clone(), rs, inner, master_seed, boxes: Boxes::new(params) })
    }

    pub fn boxes(&self) -> &Boxes {
        &self.boxes
    }

    pub fn message_bits(&self) -> usize {
        self.params.l1 * self.params.m as usize
    }

    /// `L * 2^m * B`.
    pub fn stored_bits(&self) -> u64 {
        self.inner.iter().map(|cb| (cb.len() * cb.chunk_len) as u64).sum()
    }

    /// Splits `l1 * m` bits into big-endian `m`-bit symbols.
    pub fn message_to_symbols(&self, message: &BitVec) -> Result<Vec<Elem>> {
        let m = self.params.m as usize;
        if message.len() != self.message_bits() {
            return Err(Error::Contract(format!(
                "message has {} bits, expected {}",
                message.len(),
                self.message_bits()
            )));
        }
        Ok((0..self.params.l1)
            .map(|s| (0..m).fold(0, |acc, b| acc << 1 | message.get(s * m + b) as Elem))
            .collect())
    }

    pub fn symbols_to_message(&self, symbols: &[Elem]) -> BitVec {
        let m = self.params.m as usize;
        let mut out = BitVec::zeros(symbols.len() * m);
        for (s, &v) in symbols.iter().enumerate() {
            for b in 0..m {
                if v >> (m - 1 - b) & 1 == 1 {
                    out.set(s * m + b, true);
                }
            }
        }
        out
    }

    /// Outer codeword (one symbol per chunk) for a message.
    pub fn outer_codeword(&self, message: &BitVec) -> Result<Vec<Elem>> {
        self.rs.encode(&self.message_to_symbols(message)?)
    }

    /// Channel input. `t = 0` sends the all-zero word and ignores `message`.
    pub fn encode(&self, message: Option<&BitVec>, t: u8) -> Result<BitVec> {
        match t {
            0 => Ok(BitVec::zeros(self.params.n as usize)),
            1 => {
                let msg = message.ok_or_else(|| Error::Contract("t=1 requires a message".into()))?;
                if msg.len() == self.message_bits() && msg.weight() == 0 {
                    return Err(Error::Contract("the all-zero message is reserved for silence".into()));
                }
                let cw = self.outer_codeword(msg)?;
                Ok(self.encode_symbols(&cw))
            }
            _ => Err(Error::Contract(format!("transmission status must be 0 or 1, got {t}"))),
        }
    }

    /// Concatenates the inner codewords selected by `symbols`.
    pub fn encode_symbols(&self, symbols: &[Elem]) -> BitVec {
        BitVec::concat(symbols.iter().zip(&self.inner).map(|(&w, cb)| cb.codeword(w as usize)))
    }

    pub fn decode(&self, y: &BitVec) -> Result<TransmissionResult> {
        if y.len() as u64 != self.params.n {
            return Err(Error::Contract(format!("received {} bits, expected {}", y.len(), self.params.n)));
        }
        let b = self.params.chunk_len;
        let mut work = 0u64;
        let outcomes = self
            .inner
            .iter()
            .enumerate()
            .map(|(i, cb)| {
                let (o, scanned) = inner_decode_counted(cb, &self.boxes, &y.slice(i * b, b));
                work += (scanned * b) as u64;
                o
            })
            .collect();
        let mut r = self.decode_outcomes(outcomes)?;
        r.work = work;
        Ok(r)
    }

    /// Applies the global rule and outer decoding to chunk outcomes.
    pub fn decode_outcomes(&self, outcomes: Vec<DecodeOutcome>) -> Result<TransmissionResult> {
        let l = self.params.num_chunks;
        let silent = outcomes.iter().filter(|o| **o == DecodeOutcome::Silence).count();
        let symbols = outcomes.iter().filter(|o| matches!(o, DecodeOutcome::Message(_))).count();
        if silent >= l - self.params.l2 / 2 || symbols < self.params.l1 {
            return Ok(TransmissionResult {
                t_hat: 0,
                message: None,
                chunk_outcomes: outcomes,
                rs_status: RsStatus::NotAttempted,
                work: 0,
            });
        }
        let mut received = vec![0; l];
        let mut erasures = Vec::new();
        for (i, o) in outcomes.iter().enumerate() {
            match o {
                DecodeOutcome::Message(w) => received[i] = *w,
                _ => erasures.push(i),
            }
        }
        let (message, rs_status) = match self.rs.decode(&received, &erasures)? {
            RsOutcome::Decoded { message, .. } => (Some(self.symbols_to_message(&message)), RsStatus::Ok),
            RsOutcome::Failure => (None, RsStatus::Failure),
        };
        Ok(TransmissionResult { t_hat: 1, message, chunk_outcomes: outcomes, rs_status, work: 0 })
    }

    pub fn throughput_report(&self) -> ThroughputReport {
        let p = &self.params;
        let nf = p.n as f64;
        ThroughputReport {
            r_nominal: p.r,
            r_eff: p.r_eff,
            gap: p.r - p.r_eff,
            encode_exponent_log: nf.sqrt() * nf.sqrt().log2(),
            decode_exponent: p.complexity_exponent(),
            decode_work_bound: p.num_chunks as u64 * p.codebook_size() as u64 * p.chunk_len as u64,
            stored_bits: self.stored_bits(),
        }
    }
}

/// Renders chunk outcomes, one token per chunk. Tokens are single
/// characters for `m <= 4`; wider tokens are comma separated.
pub fn outcome_string(outcomes: &[DecodeOutcome], m: u32) -> String {
    let width = (m as usize).div_ceil(4);
    let toks: Vec<String> = outcomes.iter().map(|o| o.token(width)).collect();
    toks.join(if width == 1 { "" } else { "," })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub r_nominal: f64,
    pub r_eff: f64,
    pub gap: f64,
    /// `sqrt(n) log sqrt(n)`.
    pub encode_exponent_log: f64,
    /// `r_u k1 + 1`.
    pub decode_exponent: f64,
    /// `L 2^m B`.
    pub decode_work_bound: u64,
    pub stored_bits: u64,
}

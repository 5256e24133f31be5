//! Seeded experiment orchestration and persistence.
//!
//! A run is described by one JSON [`ExperimentConfig`] and produces one
//! [`RunRecord`]. Monte Carlo trials draw from index-derived streams, so a
//! record's metrics depend only on the config.

use crate::adversary::{
    detect_experiment_weights, radiometer_design, ChunkWeightDetector, DetectionReport, WeightDetector,
};
use crate::bits::BitVec;
use crate::channel::{bsc_transmit, exact_p1_micro, micro_p0, tv_product_bernoulli, MICRO_MAX_LEN};
use crate::codec::{outcome_string, ConcatCode, RsStatus};
use crate::design::{
    contour_grid, derive_params, design_k2, verify_corner_points, verify_tail_bound, verify_taylor_identity,
    ChannelModel, CodeParams, ContourCell, Mode, Overrides, TailSide,
};
use crate::gf2m::FieldSpec;
use crate::innercode::{bernoulli_vector, DecodeOutcome};
use crate::numeric::conv;
use crate::rs::{weight_distribution, RsCode};
use crate::seed;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Design,
    Reliability,
    Covertness,
    Lemma1,
    Contour,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scale {
    #[serde(rename = "L")]
    pub num_chunks: usize,
    #[serde(rename = "B")]
    pub chunk_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourSpec {
    pub p_range: (f64, f64),
    pub q_range: (f64, f64),
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma1Spec {
    pub q_values: Vec<f64>,
    pub eps_values: Vec<f64>,
    pub n_values: Vec<u64>,
}

/// Tolerance band for a golden reliability config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub p_err_band: (f64, f64),
    pub silence_failure_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub channel: ChannelModel,
    #[serde(default)]
    pub scale: Option<Scale>,
    #[serde(default)]
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default)]
    pub output_path: Option<String>,
    #[serde(default)]
    pub contour: Option<ContourSpec>,
    #[serde(default)]
    pub lemma1: Option<Lemma1Spec>,
    #[serde(default)]
    pub expected: Option<Expected>,
    /// Per-chunk false-alarm level for the chunk detector.
    #[serde(default)]
    pub alpha_c: Option<f64>,
    /// Verification suite name for `kind = verify`.
    #[serde(default)]
    pub suite: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)
            .map_err(|e| Error::Config(format!("config schema violation at line {} column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate().map_err(|e| Error::Config(format!("channel: {e}")))?;
        let need_scale = matches!(self.kind, Kind::Design | Kind::Reliability | Kind::Covertness);
        if need_scale && self.scale.is_none() {
            return Err(Error::Config("scale: required for this kind".into()));
        }
        match self.kind {
            Kind::Reliability if self.trials == 0 => {
                return Err(Error::Config("trials: must be positive".into()));
            }
            Kind::Covertness if self.trials < crate::adversary::MIN_TRIALS => {
                return Err(Error::Config(format!(
                    "trials: must be at least {} for detection experiments, got {}",
                    crate::adversary::MIN_TRIALS,
                    self.trials
                )));
            }
            Kind::Contour if self.contour.is_none() => {
                return Err(Error::Config("contour: required for kind contour".into()));
            }
            Kind::Lemma1 if self.lemma1.is_none() => {
                return Err(Error::Config("lemma1: required for kind lemma1".into()));
            }
            _ => {}
        }
        if let Some(a) = self.alpha_c {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::Config(format!("alpha_c: must lie in (0, 1), got {a}")));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialisation.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serialises");
        hex::encode(Sha256::digest(canon.as_bytes()))
    }

    pub fn params(&self) -> Result<CodeParams> {
        let s = self.scale.ok_or_else(|| Error::Config("scale: required".into()))?;
        derive_params(&self.channel, s.num_chunks, s.chunk_len, self.mode, &self.overrides)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub timestamp: String,
    pub build_id: String,
    pub kind: Kind,
    pub mode: Mode,
    pub off_paper: Vec<String>,
    pub metrics: Value,
    pub rows: Vec<Value>,
    pub passed: bool,
}

impl RunRecord {
    fn new(cfg_hash: String, kind: Kind, mode: Mode, off_paper: Vec<String>, metrics: Value, rows: Vec<Value>, passed: bool) -> Self {
        Self {
            config_hash: cfg_hash,
            timestamp: chrono::Utc::now().to_rfc3339(),
            build_id: build_id(),
            kind,
            mode,
            off_paper,
            metrics,
            rows,
            passed,
        }
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        format!(
            "{:?} {} config={} {}",
            self.kind,
            if self.passed { "PASS" } else { "FAIL" },
            &self.config_hash[..12.min(self.config_hash.len())],
            self.metrics
        )
    }
}

pub fn build_id() -> String {
    format!("covert-core/{}", env!("CARGO_PKG_VERSION"))
}

/// Dispatches on `cfg.kind`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunRecord> {
    cfg.validate()?;
    match cfg.kind {
        Kind::Design => run_design(cfg),
        Kind::Reliability => run_reliability(cfg),
        Kind::Covertness => run_covertness(cfg),
        Kind::Lemma1 => run_lemma1(cfg),
        Kind::Contour => run_contour(cfg),
        Kind::Verify => run_verify(cfg),
    }
}

pub fn run_design(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let params = cfg.params()?;
    let metrics = serde_json::to_value(&params)?;
    Ok(RunRecord::new(cfg.hash(), Kind::Design, cfg.mode, params.off_paper.clone(), metrics, vec![], true))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeHistogram {
    pub silence: u64,
    pub message_correct: u64,
    pub message_wrong: u64,
    pub declared_error: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TrialRow {
    trial: u64,
    t: u8,
    t_hat: u8,
    error: bool,
    rs_status: RsStatus,
    outcomes: String,
}

fn random_message<R: rand::Rng + ?Sized>(bits: usize, rng: &mut R) -> BitVec {
    loop {
        let v = bernoulli_vector(bits, 0.5, rng);
        if v.weight() > 0 {
            return v;
        }
    }
}

/// Transmits `trials` blocks under each of `T = 0` and `T = 1` through
/// BSC(p) and counts end-to-end errors.
pub fn run_reliability(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let rec = reliability_from(cfg, 0)?;
    persist(cfg, &rec)?;
    Ok(rec)
}

/// Trials use indices `offset..offset + trials`.
fn reliability_from(cfg: &ExperimentConfig, offset: u64) -> Result<RunRecord> {
    let params = cfg.params()?;
    let code = ConcatCode::build(&params, cfg.master_seed)?;
    let p = params.channel.p;
    let trial = |t: u8, i: u64| -> Result<(TrialRow, OutcomeHistogram, Option<Vec<u32>>)> {
        let mut msg_rng = seed::stream(cfg.master_seed, &[seed::tag::MESSAGE, i]);
        let mut noise_rng = seed::stream(cfg.master_seed, &[seed::tag::NOISE, t as u64, i]);
        let (x, msg, cw) = if t == 1 {
            let m = random_message(code.message_bits(), &mut msg_rng);
            let cw = code.outer_codeword(&m)?;
            (code.encode_symbols(&cw), Some(m), Some(cw))
        } else {
            (code.encode(None, 0)?, None, None)
        };
        let y = bsc_transmit(&x, p, &mut noise_rng);
        let r = code.decode(&y)?;
        let error = if t == 1 { r.t_hat != 1 || r.message != msg } else { r.t_hat != 0 };
        let mut h = OutcomeHistogram::default();
        for (k, o) in r.chunk_outcomes.iter().enumerate() {
            match o {
                DecodeOutcome::Silence => h.silence += 1,
                DecodeOutcome::DeclaredError => h.declared_error += 1,
                DecodeOutcome::Message(w) => {
                    if cw.as_ref().is_some_and(|c| c[k] == *w) {
                        h.message_correct += 1
                    } else {
                        h.message_wrong += 1
                    }
                }
            }
        }
        let row = TrialRow {
            trial: i,
            t,
            t_hat: r.t_hat,
            error,
            rs_status: r.rs_status,
            outcomes: outcome_string(&r.chunk_outcomes, params.m),
        };
        Ok((row, h, cw))
    };
    let mut rows = Vec::new();
    let mut branch = Vec::new();
    for t in [0u8, 1] {
        let results = (offset..offset + cfg.trials).into_par_iter().map(|i| trial(t, i)).collect::<Result<Vec<_>>>()?;
        let mut hist = OutcomeHistogram::default();
        let (mut errors, mut rs_fail) = (0u64, 0u64);
        for (row, h, _) in &results {
            hist.silence += h.silence;
            hist.message_correct += h.message_correct;
            hist.message_wrong += h.message_wrong;
            hist.declared_error += h.declared_error;
            errors += row.error as u64;
            rs_fail += (row.rs_status == RsStatus::Failure) as u64;
        }
        branch.push(json!({
            "t": t,
            "errors": errors,
            "p_err": errors as f64 / cfg.trials as f64,
            "rs_failures": rs_fail,
            "chunk_histogram": hist,
        }));
        rows.extend(results.into_iter().map(|(r, _, _)| serde_json::to_value(r).expect("row serialises")));
    }
    let p0 = branch[0]["p_err"].as_f64().unwrap_or(1.0);
    let p1 = branch[1]["p_err"].as_f64().unwrap_or(1.0);
    let p_err = p0.max(p1);
    let passed = match &cfg.expected {
        Some(e) => p_err >= e.p_err_band.0 && p_err <= e.p_err_band.1 && p0 <= e.silence_failure_max,
        None => true,
    };
    let metrics = json!({
        "n": params.n,
        "L": params.num_chunks,
        "B": params.chunk_len,
        "m": params.m,
        "l2": params.l2,
        "rho": params.rho,
        "trials": cfg.trials,
        "p_err": p_err,
        "p_err_t0": p0,
        "p_err_t1": p1,
        "branches": branch,
        "theorem_error_bound": params.theorem_error_bound(),
        "r_nominal": params.r,
        "r_eff": params.r_eff,
        "expected": cfg.expected,
    });
    Ok(RunRecord::new(cfg.hash(), Kind::Reliability, cfg.mode, params.off_paper.clone(), metrics, rows, passed))
}

/// One-sided level used for pilot bands.
pub const BAND_LEVEL: f64 = 1e-3;

/// Range that `eval_trials` Bernoulli draws land in with probability at
/// least `1 - 2 BAND_LEVEL`, for any rate consistent with `errors` out of
/// `pilot_trials` at the same level.
pub fn tolerance_band(errors: u64, pilot_trials: u64, eval_trials: u64) -> (f64, f64) {
    let n = pilot_trials as f64;
    let p_hat = errors as f64 / n;
    let z = crate::numeric::q_inv(BAND_LEVEL);
    let sd = (p_hat * (1.0 - p_hat) / n).sqrt();
    let p_up = if errors == 0 { -BAND_LEVEL.ln() / n } else { (p_hat + z * sd + 1.0 / n).min(1.0) };
    let p_lo = (p_hat - z * sd - 1.0 / n).max(0.0);
    let up = crate::channel::WeightLaw::new(eval_trials, p_up);
    let hi = (0..=eval_trials).find(|&k| up.sf(k + 1) <= BAND_LEVEL).unwrap_or(eval_trials);
    let lo = if p_lo == 0.0 {
        0
    } else {
        let low = crate::channel::WeightLaw::new(eval_trials, p_lo);
        (0..=eval_trials).rev().find(|&k| 1.0 - low.sf(k) <= BAND_LEVEL).unwrap_or(0)
    };
    (lo as f64 / eval_trials as f64, hi as f64 / eval_trials as f64)
}

/// Runs `pilot_trials` trials disjoint from the evaluation indices and
/// returns `cfg` with its `expected` band filled in.
pub fn pilot_golden(cfg: &ExperimentConfig, pilot_trials: u64, silence_failure_max: f64) -> Result<(ExperimentConfig, RunRecord)> {
    let mut pilot = cfg.clone();
    pilot.trials = pilot_trials;
    pilot.expected = None;
    let rec = reliability_from(&pilot, cfg.trials)?;
    let errors = rec.metrics["branches"]
        .as_array()
        .map(|b| b.iter().filter_map(|x| x["errors"].as_u64()).max().unwrap_or(0))
        .unwrap_or(0);
    let mut out = cfg.clone();
    out.expected = Some(Expected { p_err_band: tolerance_band(errors, pilot_trials, cfg.trials), silence_failure_max });
    Ok((out, rec))
}

/// Exact and simulated covertness figures for one parameter set.
pub fn run_covertness(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let params = cfg.params()?;
    let (n, q, rho) = (params.n, params.channel.q, params.rho);
    let tv = tv_product_bernoulli(n, q, conv(rho, q));
    let bound = params.channel.eps_d + (n as f64).powf(-params.channel.delta / 4.0);
    let radiometer = radiometer_design(n, q, rho);
    let code = ConcatCode::build(&params, cfg.master_seed)?;
    let chunk = ChunkWeightDetector::design(params.num_chunks, params.chunk_len, q, cfg.alpha_c);
    let detectors: [&dyn WeightDetector; 2] = [&radiometer, &chunk];
    let reports = detectors
        .iter()
        .enumerate()
        .map(|(k, d)| {
            detect_experiment_weights(*d, &code, cfg.trials, seed::derive(cfg.master_seed, &[k as u64]))
                .map(|r| r.with_tv(tv))
        })
        .collect::<Result<Vec<DetectionReport>>>()?;
    let micro_tv = if params.chunk_len <= MICRO_MAX_LEN {
        let p0 = micro_p0(params.chunk_len, q)?;
        let p1 = exact_p1_micro(code.inner[0].codewords(), q)?;
        Some(p0.total_variation(&p1)?)
    } else {
        None
    };
    let passed = tv <= bound && reports.iter().all(DetectionReport::respects_optimum);
    let metrics = json!({
        "n": n,
        "rho": rho,
        "tv_exact": tv,
        "lemma1_bound": bound,
        "tv_within_bound": tv <= bound,
        "radiometer": radiometer,
        "radiometer_sum": radiometer.sum(),
        "detectors": reports,
        "micro_chunk_tv": micro_tv,
    });
    let rec = RunRecord::new(cfg.hash(), Kind::Covertness, cfg.mode, params.off_paper.clone(), metrics, vec![], passed);
    persist(cfg, &rec)?;
    Ok(rec)
}

/// Chunk 0 holds uniformly random words and every other chunk holds only
/// zero words, so all codeword weight sits in the first `B` positions.
pub fn concentrated_code(params: &CodeParams, master_seed: u64) -> Result<ConcatCode> {
    let size = params.codebook_size();
    let mut inner = Vec::with_capacity(params.num_chunks);
    for i in 0..params.num_chunks {
        let words = (0..size)
            .map(|w| {
                if i == 0 {
                    bernoulli_vector(params.chunk_len, 0.5, &mut seed::stream(master_seed, &[seed::tag::CODEBOOK, 0, w as u64]))
                } else {
                    BitVec::zeros(params.chunk_len)
                }
            })
            .collect();
        inner.push(crate::innercode::InnerCodebook::from_codewords(i, params.rho, words)?);
    }
    ConcatCode::from_parts(params, inner, master_seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadingReport {
    pub n: u64,
    pub rho: f64,
    pub alpha_c: f64,
    pub threshold: u64,
    pub exact_alpha: f64,
    /// `eps_d + n^{-delta/4}`.
    pub tv_bound: f64,
    pub concentrated: DetectionReport,
    pub spread: DetectionReport,
}

/// Chunk-weight detection of a concentrated code against the randomly
/// generated code with the same parameters. The per-chunk level is set so
/// that the aggregate false-alarm rate is `target_alpha`.
pub fn spreading_experiment(params: &CodeParams, target_alpha: f64, trials: u64, master_seed: u64) -> Result<SpreadingReport> {
    let l = params.num_chunks as f64;
    let alpha_c = 1.0 - (1.0 - target_alpha).powf(1.0 / l);
    let q = params.channel.q;
    let det = ChunkWeightDetector::design(params.num_chunks, params.chunk_len, q, Some(alpha_c));
    let tv_bound = params.channel.eps_d + (params.n as f64).powf(-params.channel.delta / 4.0);
    let conc = concentrated_code(params, master_seed)?;
    let spread = ConcatCode::build(params, master_seed)?;
    let detect_seed = seed::derive(master_seed, &[seed::tag::ADVERSARY]);
    Ok(SpreadingReport {
        n: params.n,
        rho: params.rho,
        alpha_c,
        threshold: det.thresholds[0],
        exact_alpha: det.exact_alpha(q),
        tv_bound,
        concentrated: detect_experiment_weights(&det, &conc, trials, detect_seed)?,
        spread: detect_experiment_weights(&det, &spread, trials, detect_seed)?.with_tv(tv_bound),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Row {
    pub q: f64,
    pub eps_d: f64,
    pub n: u64,
    pub mode: Mode,
    pub k2: f64,
    pub rho: f64,
    pub tv: f64,
    pub bound: f64,
    pub holds: bool,
}

impl Lemma1Row {
    pub const CSV_HEADER: &'static str = "q,eps_d,n,mode,k2,rho,tv,bound,holds";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.12},{:.12e},{:.15},{:.15},{}",
            self.q,
            self.eps_d,
            self.n,
            serde_json::to_value(self.mode).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
            self.k2,
            self.rho,
            self.tv,
            self.bound,
            self.holds
        )
    }
}

/// Exact `TV(Bin(n, q), Bin(n, rho * q))` against `eps_d + n^{-delta/4}`.
pub fn lemma1_row(q: f64, eps_d: f64, n: u64, delta: f64, mode: Mode) -> Lemma1Row {
    let k2 = design_k2(q, eps_d, mode);
    let rho = k2 / (n as f64).sqrt();
    let tv = tv_product_bernoulli(n, q, conv(rho, q));
    let bound = eps_d + (n as f64).powf(-delta / 4.0);
    Lemma1Row { q, eps_d, n, mode, k2, rho, tv, bound, holds: tv < bound }
}

pub fn lemma1_table(spec: &Lemma1Spec, delta: f64, mode: Mode) -> Vec<Lemma1Row> {
    let cells: Vec<(f64, f64, u64)> = spec
        .q_values
        .iter()
        .flat_map(|&q| spec.eps_values.iter().flat_map(move |&e| spec.n_values.iter().map(move |&n| (q, e, n))))
        .collect();
    cells.par_iter().map(|&(q, e, n)| lemma1_row(q, e, n, delta, mode)).collect()
}

pub fn run_lemma1(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let spec = cfg.lemma1.as_ref().ok_or_else(|| Error::Config("lemma1: required".into()))?;
    let rows = lemma1_table(spec, cfg.channel.delta, cfg.mode);
    let passed = rows.iter().all(|r| r.holds);
    if let Some(path) = &cfg.output_path {
        write_csv(path, Lemma1Row::CSV_HEADER, rows.iter().map(Lemma1Row::csv_row))?;
    }
    let metrics = json!({ "cells": rows.len(), "all_hold": passed });
    let rows = rows.iter().map(|r| serde_json::to_value(r).expect("row serialises")).collect();
    Ok(RunRecord::new(cfg.hash(), Kind::Lemma1, cfg.mode, vec![], metrics, rows, passed))
}

pub fn run_contour(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let spec = cfg.contour.as_ref().ok_or_else(|| Error::Config("contour: required".into()))?;
    let cells = contour_grid(spec.p_range, spec.q_range, cfg.channel.eps_d, cfg.channel.delta, spec.steps, cfg.mode);
    if let Some(path) = &cfg.output_path {
        write_csv(path, ContourCell::CSV_HEADER, cells.iter().map(ContourCell::csv_row))?;
    }
    let feasible = cells.iter().filter(|c| c.exponent.is_some()).count();
    let min_ok = cells.iter().filter_map(|c| c.exponent).all(|e| e >= 1.0);
    let metrics = json!({ "cells": cells.len(), "feasible": feasible, "exponents_at_least_one": min_ok });
    let rows = cells.iter().map(|c| serde_json::to_value(c).expect("cell serialises")).collect();
    Ok(RunRecord::new(cfg.hash(), Kind::Contour, cfg.mode, vec![], metrics, rows, min_ok))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub check: String,
    pub passed: bool,
    pub values: Value,
}

fn row(check: impl Into<String>, passed: bool, values: Value) -> VerifyRow {
    VerifyRow { check: check.into(), passed, values }
}

/// The corner-point sample: `q x rho x Delta`.
pub fn corner_sample() -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for q in [0.1, 0.25, 0.4] {
        for rho in [1e-3, 1e-2] {
            for d in [0.3, 0.8] {
                out.push((q, rho, d));
            }
        }
    }
    out
}

/// Exhaustive weight enumeration against the MDS formula.
pub fn weight_distribution_check(m: u32, len: usize, l1: usize) -> Result<VerifyRow> {
    let code = RsCode::new(Arc::new(FieldSpec::new(m)?), len, l1)?;
    let mut counts = vec![0u64; len + 1];
    for cw in code.enumerate_codewords()? {
        counts[cw.iter().filter(|&&s| s != 0).count()] += 1;
    }
    let dmin = (len - l1 + 1) as u64;
    let formula: Vec<String> =
        (0..=len as u64).map(|i| weight_distribution(len as u64, dmin, 1 << m, i).to_string()).collect();
    let enumerated: Vec<String> = counts.iter().map(u64::to_string).collect();
    let min_nonzero = counts.iter().enumerate().skip(1).find(|(_, &c)| c > 0).map(|(i, _)| i);
    let passed = formula == enumerated && min_nonzero == Some(dmin as usize);
    Ok(row(
        format!("weight_distribution[{len},{l1}]/GF(2^{m})"),
        passed,
        json!({ "enumerated": enumerated, "formula": formula, "min_distance": min_nonzero }),
    ))
}

pub fn preimage_check(m: u32, len: usize, l1: usize) -> Result<VerifyRow> {
    let code = RsCode::new(Arc::new(FieldSpec::new(m)?), len, l1)?;
    let expected = code.preimage_count()?;
    let size = code.field().size() as u32;
    let l2 = code.l2();
    let mut counts = Vec::new();
    for idx in 0..(size as u64).pow(l2 as u32) {
        let parity: Vec<u32> = (0..l2).map(|k| ((idx / (size as u64).pow(k as u32)) % size as u64) as u32).collect();
        counts.push(code.enumerate_preimages(&parity)?.len());
    }
    let passed = counts.iter().all(|&c| expected == c.into());
    Ok(row(
        format!("preimage[{len},{l1}]/GF(2^{m})"),
        passed,
        json!({ "expected": expected.to_string(), "counts": counts }),
    ))
}

/// Bounds used to call the Taylor ratios bounded.
pub const TAYLOR_SPREAD_MAX: f64 = 2.0;

/// Runs every analytic oracle at default settings.
pub fn verify_suite() -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();
    for (q, rho, d) in corner_sample() {
        let r = verify_corner_points(q, rho, d, d, 101)?;
        rows.push(row(format!("corner(q={q},rho={rho},delta={d})"), r.at_corner, serde_json::to_value(&r)?));
    }
    let ch = ChannelModel::new(0.05, 0.25, 0.1, 0.01)?;
    let params = derive_params(&ch, 100, 10_000, Mode::Paper, &Overrides::default())?;
    for side in TailSide::ALL {
        let r = verify_tail_bound(&params, side);
        rows.push(row(format!("tail({side:?},n=1e6)"), r.holds, serde_json::to_value(&r)?));
    }
    let k2 = design_k2(0.25, 0.1, Mode::Paper);
    let t = verify_taylor_identity(0.05, k2, &[1e4, 1e6, 1e8])?;
    let ok = t.center_positive && t.center_spread <= TAYLOR_SPREAD_MAX && t.box_spread <= TAYLOR_SPREAD_MAX;
    rows.push(row("taylor(p=0.05)", ok, serde_json::to_value(&t)?));
    rows.push(weight_distribution_check(3, 7, 3)?);
    rows.push(weight_distribution_check(2, 3, 2)?);
    rows.push(preimage_check(2, 3, 2)?);
    Ok(rows)
}

pub fn run_verify(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let suite = cfg.suite.as_deref().unwrap_or("appendix");
    if suite != "appendix" {
        return Err(Error::Config(format!("suite: unknown verification suite {suite:?}; available: appendix")));
    }
    let rows = verify_suite()?;
    let passed = rows.iter().all(|r| r.passed);
    let metrics = json!({
        "suite": suite,
        "checks": rows.len(),
        "passed": rows.iter().filter(|r| r.passed).count(),
    });
    let rows = rows.iter().map(|r| serde_json::to_value(r).expect("row serialises")).collect();
    let rec = RunRecord::new(cfg.hash(), Kind::Verify, cfg.mode, vec![], metrics, rows, passed);
    persist(cfg, &rec)?;
    Ok(rec)
}

/// Writes the record: JSON-lines of rows if any, otherwise one JSON object.
fn persist(cfg: &ExperimentConfig, rec: &RunRecord) -> Result<()> {
    if let Some(path) = &cfg.output_path {
        write_record(path, rec)?;
    }
    Ok(())
}

/// Header line with the record summary, then one JSON object per row
/// tagged with the config hash, mode and off-nominal flag.
pub fn write_record(path: impl AsRef<Path>, rec: &RunRecord) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header = json!({
        "config_hash": rec.config_hash,
        "timestamp": rec.timestamp,
        "build_id": rec.build_id,
        "kind": rec.kind,
        "mode": rec.mode,
        "off_paper": rec.off_paper,
        "metrics": rec.metrics,
        "passed": rec.passed,
    });
    writeln!(f, "{}", serde_json::to_string(&header)?)?;
    for r in &rec.rows {
        let mut r = r.clone();
        if let Value::Object(map) = &mut r {
            map.insert("config_hash".into(), Value::String(rec.config_hash.clone()));
            map.insert("mode".into(), serde_json::to_value(rec.mode)?);
            map.insert("off_paper".into(), Value::Bool(!rec.off_paper.is_empty()));
        }
        writeln!(f, "{}", serde_json::to_string(&r)?)?;
    }
    f.flush()?;
    Ok(())
}

pub fn write_csv(path: impl AsRef<Path>, header: &str, rows: impl Iterator<Item = String>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{header}")?;
    for r in rows {
        writeln!(f, "{r}")?;
    }
    f.flush()?;
    Ok(())
}

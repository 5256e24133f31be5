//! Design quantities, the `k1` min–max program, integer parameter
//! resolution, and numeric verifiers for the analysis.
//!
//! All logarithms are base 2.

use crate::innercode::info_from_fractions;
use crate::numeric::{binom_logpmf_raw, conv, q_inv, Neumaier, LOG2_E};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Source of `k2` and `r_u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Closed forms driven by Pinsker's inequality.
    #[default]
    Paper,
    /// Second-order optimal constants using `Q^{-1}((1 - eps)/2)`.
    Optimal,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Mode::Paper),
            "optimal" => Ok(Mode::Optimal),
            _ => Err(Error::Config(format!("unknown mode {s:?}; expected paper or optimal"))),
        }
    }
}

pub const DEFAULT_DELTA: f64 = 0.01;
/// `xi_1, xi_2, xi_3`.
pub const XI: [f64; 3] = [1.5, 0.5, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelModel {
    /// Crossover probability to the receiver.
    pub p: f64,
    /// Crossover probability to the warden.
    pub q: f64,
    pub eps_d: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

impl ChannelModel {
    pub fn new(p: f64, q: f64, eps_d: f64, delta: f64) -> Result<Self> {
        let ch = Self { p, q, eps_d, delta };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { p, q, eps_d, delta } = *self;
        if !(p > 0.0 && q < 0.5) {
            return Err(Error::Config(format!("crossovers must satisfy 0 < p and q < 1/2 (p={p}, q={q})")));
        }
        if p >= q {
            return Err(Error::Config(format!("channel model requires p < q (p={p}, q={q})")));
        }
        if !(eps_d > 0.0 && eps_d < 1.0) {
            return Err(Error::Config(format!("eps_d must lie in (0, 1), got {eps_d}")));
        }
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::Config(format!("delta must lie in (0, 0.5), got {delta}")));
        }
        Ok(())
    }
}

/// `f(x) = (1 + x) log(1 + x) - x log e`.
pub fn aux_f(x: f64) -> f64 {
    (1.0 + x) * (1.0 + x).log2() - x * LOG2_E
}

/// Codeword weight parameter `k2`.
pub fn design_k2(q: f64, eps_d: f64, mode: Mode) -> f64 {
    let s = 2.0 * (q * (1.0 - q)).sqrt() / (1.0 - 2.0 * q);
    match mode {
        Mode::Paper => s * eps_d,
        Mode::Optimal => s * q_inv((1.0 - eps_d) / 2.0),
    }
}

/// Throughput parameter `r_u`.
pub fn design_ru(p: f64, q: f64, eps_d: f64, mode: Mode) -> f64 {
    design_k2(q, eps_d, mode) * (1.0 - 2.0 * p) * ((1.0 - p) / p).log2()
}

/// Sign pattern of `(w, t)` for `g_1..g_4`.
pub const G_SIGNS: [(f64, f64); 4] = [(-1.0, 1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)];

/// `g_j(u, v, w, t)` for `j` in `1..=4`, with `k2` taken in `mode`.
pub fn aux_g(j: usize, u: f64, v: f64, w: f64, t: f64, mode: Mode) -> Result<f64> {
    if !(1..=4).contains(&j) {
        return Err(Error::Domain(format!("g index {j} outside 1..=4")));
    }
    let (sw, st) = G_SIGNS[j - 1];
    let a = u * (1.0 + sw * w);
    let b = (1.0 - u) * (1.0 + st * t);
    if a <= 0.0 || b <= 0.0 || u <= 0.0 || u >= 1.0 {
        return Err(Error::Domain(format!("g_{j} undefined at u={u}, w={w}, t={t}")));
    }
    let bracket = a * (((1.0 - u) / a).log2() + LOG2_E) + b * ((u / b).log2() + LOG2_E) - LOG2_E;
    Ok(design_k2(u, v, mode) * bracket)
}

/// Which constraint attains the max in the min–max objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Binding {
    Phi1,
    Phi2,
    Phi3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct K1Solution {
    pub k1: f64,
    pub d10: f64,
    pub d11: f64,
    pub binding_constraint: Binding,
    /// `(Phi_1, Phi_2, Phi_3)` at the solution.
    pub phi_values: [f64; 3],
    /// Index `j` in `1..=4` of the worst corner inside `Phi_1`.
    pub phi1_corner_j: usize,
    /// `k1 * Phi_i` for each `i`.
    pub certificates: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub coarse_step: f64,
    /// Successively finer steps, each searched over +/- one previous step.
    pub refine_steps: [f64; 2],
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { coarse_step: 0.01, refine_steps: [1e-3, 1e-4] }
    }
}

impl SolverOptions {
    pub fn halved() -> Self {
        Self { coarse_step: 0.005, refine_steps: [5e-4, 5e-5] }
    }
}

/// `(Phi_1, Phi_2, Phi_3)` and the `j` attaining `min g_j`.
///
/// Each `g_j` is `-(I + D)` at one corner of the conditional box, so the
/// worst corner is the smallest `g_j`.
pub fn phi_values(ch: &ChannelModel, mode: Mode, d10: f64, d11: f64) -> ([f64; 3], usize) {
    let q = ch.q;
    let k2 = design_k2(q, ch.eps_d, mode);
    let ru = design_ru(ch.p, q, ch.eps_d, mode);
    let mut best = (f64::INFINITY, 0);
    for j in 1..=4 {
        if let Ok(g) = aux_g(j, q, ch.eps_d, d10, d11, mode) {
            if g < best.0 {
                best = (g, j);
            }
        }
    }
    if best.1 == 0 {
        best.0 = f64::NEG_INFINITY;
    }
    ([ru + best.0, q * k2 * aux_f(d10), (1.0 - q) * k2 * aux_f(d11)], best.1)
}

/// `max_i (xi_i + delta) / Phi_i`, infinite when some `Phi_i <= 0`.
fn objective(ch: &ChannelModel, mode: Mode, d10: f64, d11: f64) -> f64 {
    let (phi, _) = phi_values(ch, mode, d10, d11);
    phi.iter().zip(XI).fold(0.0f64, |acc, (&ph, xi)| {
        if ph > 0.0 {
            acc.max((xi + ch.delta) / ph)
        } else {
            f64::INFINITY
        }
    })
}

/// Solves the min–max program for `k1` by grid search and refinement.
pub fn solve_k1(ch: &ChannelModel, mode: Mode) -> Result<K1Solution> {
    solve_k1_with(ch, mode, &SolverOptions::default())
}

pub fn solve_k1_with(ch: &ChannelModel, mode: Mode, opts: &SolverOptions) -> Result<K1Solution> {
    ch.validate()?;
    let better = |a: (f64, f64, f64), b: (f64, f64, f64)| {
        a.0 < b.0 || (a.0 == b.0 && (a.1 < b.1 || (a.1 == b.1 && a.2 < b.2)))
    };
    let mut best = (f64::INFINITY, f64::NAN, f64::NAN);
    let scan = |lo10: f64, lo11: f64, steps10: i64, steps11: i64, h: f64, best: &mut (f64, f64, f64)| {
        for i in 0..=steps10 {
            let d10 = lo10 + i as f64 * h;
            if d10 <= 0.0 || d10 >= 1.0 {
                continue;
            }
            for k in 0..=steps11 {
                let d11 = lo11 + k as f64 * h;
                if d11 <= 0.0 || d11 >= 1.0 {
                    continue;
                }
                let cand = (objective(ch, mode, d10, d11), d10, d11);
                if cand.0.is_finite() && better(cand, *best) {
                    *best = cand;
                }
            }
        }
    };
    let h0 = opts.coarse_step;
    let n0 = ((1.0 - 2.0 * h0) / h0).round() as i64;
    scan(h0, h0, n0, n0, h0, &mut best);
    if !best.0.is_finite() {
        let (phi, _) = phi_values(ch, mode, 0.5, 0.5);
        return Err(Error::Infeasible(format!(
            "no Delta pair in (0,1)^2 makes Phi1 = r_u + min_j g_j positive \
             (Phi1 at (0.5, 0.5) is {:.6})",
            phi[0]
        )));
    }
    let mut prev = h0;
    for &h in &opts.refine_steps {
        let span = (prev / h).round() as i64;
        let (c10, c11) = (best.1, best.2);
        scan(c10 - span as f64 * h, c11 - span as f64 * h, 2 * span, 2 * span, h, &mut best);
        prev = h;
    }
    let (_, d10, d11) = best;
    let (phi, j) = phi_values(ch, mode, d10, d11);
    let ratios: Vec<f64> = phi.iter().zip(XI).map(|(&ph, xi)| (xi + ch.delta) / ph).collect();
    let bind = (0..3).fold(0, |b, i| if ratios[i] > ratios[b] { i } else { b });
    let mut k1 = ratios[bind];
    // Nudge past rounding so every certificate holds in floating point.
    while (0..3).any(|i| k1 * phi[i] < XI[i] + ch.delta) {
        k1 = k1.next_up();
    }
    Ok(K1Solution {
        k1,
        d10,
        d11,
        binding_constraint: [Binding::Phi1, Binding::Phi2, Binding::Phi3][bind],
        phi_values: phi,
        phi1_corner_j: j,
        certificates: [k1 * phi[0], k1 * phi[1], k1 * phi[2]],
    })
}

impl K1Solution {
    /// Re-evaluates the constraints from scratch.
    pub fn certificates_hold(&self, ch: &ChannelModel, mode: Mode) -> bool {
        let (phi, _) = phi_values(ch, mode, self.d10, self.d11);
        (0..3).all(|i| self.k1 * phi[i] >= XI[i] + ch.delta)
    }
}

/// Optional off-nominal settings. Each one used is flagged in
/// [`CodeParams::off_paper`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    pub l2: Option<usize>,
    pub m: Option<u32>,
    pub rho: Option<f64>,
    pub dz1: Option<f64>,
    pub dy1: Option<f64>,
    pub dxz10: Option<f64>,
    pub dxz11: Option<f64>,
    pub dxy10: Option<f64>,
    pub dxy11: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    pub channel: ChannelModel,
    pub mode: Mode,
    pub n: u64,
    #[serde(rename = "L")]
    pub num_chunks: usize,
    #[serde(rename = "B")]
    pub chunk_len: usize,
    pub m: u32,
    pub lambda: f64,
    pub l1: usize,
    pub l2: usize,
    pub k1: f64,
    pub k2: f64,
    pub r_u: f64,
    /// Nominal relative throughput `r_u (1 - (log n)^{-1/4})`.
    pub r: f64,
    /// Effective throughput `l1 m / sqrt(n)`.
    pub r_eff: f64,
    /// `r k1 / lambda`.
    pub r_hat: f64,
    pub rho: f64,
    pub dz1: f64,
    pub dy1: f64,
    pub dxz10: f64,
    pub dxz11: f64,
    pub dxy10: f64,
    pub dxy11: f64,
    pub k1_solution: K1Solution,
    /// `round(28 L / log n)` before any adjustment.
    pub l2_nominal: usize,
    /// `r_hat log n` before rounding and clamping.
    pub m_nominal: f64,
    /// Chunk length `k1 sqrt(n) log n` the asymptotic family would use.
    pub b_nominal: f64,
    /// Human-readable notes for every deviation from nominal scalings.
    pub off_paper: Vec<String>,
}

impl CodeParams {
    pub fn log2_n(&self) -> f64 {
        (self.n as f64).log2()
    }

    pub fn is_off_paper(&self) -> bool {
        !self.off_paper.is_empty()
    }

    /// `rho * q`.
    pub fn rho_star_q(&self) -> f64 {
        conv(self.rho, self.channel.q)
    }

    /// `rho * p`.
    pub fn rho_star_p(&self) -> f64 {
        conv(self.rho, self.channel.p)
    }

    /// Codebook size per chunk.
    pub fn codebook_size(&self) -> usize {
        1usize << self.m
    }

    /// Asymptotic error bound `exp(-2 sqrt(n) / (k1 log^2 n))`.
    pub fn theorem_error_bound(&self) -> f64 {
        let n = self.n as f64;
        (-2.0 * n.sqrt() / (self.k1 * self.log2_n().powi(2))).exp()
    }

    /// `log_2` of the decoding-work bound `n^{r_u k1 + 1}`.
    pub fn complexity_exponent(&self) -> f64 {
        self.r_u * self.k1 + 1.0
    }
}

/// Resolves integer `(L, B)` into a full parameter set.
pub fn derive_params(ch: &ChannelModel, num_chunks: usize, chunk_len: usize, mode: Mode, ov: &Overrides) -> Result<CodeParams> {
    ch.validate()?;
    if num_chunks < 4 || chunk_len < 16 {
        return Err(Error::Config(format!("need L >= 4 and B >= 16, got L={num_chunks}, B={chunk_len}")));
    }
    let sol = solve_k1(ch, mode)?;
    let n = num_chunks as u64 * chunk_len as u64;
    let nf = n as f64;
    let logn = nf.log2();
    let mut off = Vec::new();

    let ratio = 28.0 * num_chunks as f64 / logn;
    let l2_nominal = ((ratio.round()) as usize).max(2);
    let l2 = match ov.l2 {
        Some(v) => {
            off.push(format!("l2 override {v} (nominal {l2_nominal})"));
            v
        }
        None if ratio >= num_chunks as f64 / 2.0 => {
            let v = (num_chunks / 4).max(2);
            off.push(format!("l2 defaulted to L/4 = {v}; nominal {l2_nominal} is too large at this scale"));
            v
        }
        None => l2_nominal,
    };
    if l2 < 2 || l2 >= num_chunks {
        return Err(Error::InfeasibleCode(format!("need 2 <= l2 < L, got l2={l2}, L={num_chunks}")));
    }
    let l1 = num_chunks - l2;
    let lambda = l1 as f64 / num_chunks as f64;

    let k2 = design_k2(ch.q, ch.eps_d, mode);
    let r_u = design_ru(ch.p, ch.q, ch.eps_d, mode);
    let r = r_u * (1.0 - logn.powf(-0.25));
    let r_hat = r * sol.k1 / lambda;
    let m_nominal = r_hat * logn;
    let m = match ov.m {
        Some(v) => {
            off.push(format!("m override {v} (nominal {m_nominal:.3})"));
            v
        }
        None => {
            let v = m_nominal.round();
            if v < 2.0 {
                return Err(Error::Scale(format!(
                    "r_hat log n = {m_nominal:.3} rounds below 2 bits per chunk"
                )));
            }
            if v > 20.0 {
                off.push(format!("m clamped to 20 (nominal {m_nominal:.3})"));
                20
            } else {
                v as u32
            }
        }
    };
    if !(2..=20).contains(&m) {
        return Err(Error::Scale(format!("m={m} outside [2, 20]")));
    }
    if num_chunks > 1usize << m {
        return Err(Error::InfeasibleCode(format!("L={num_chunks} exceeds field size 2^{m}")));
    }

    let mut pick = |name: &str, nominal: f64, o: Option<f64>| -> Result<f64> {
        match o {
            Some(v) => {
                // rho = 0 is admitted so the silent ensemble can be studied.
                let lo_ok = if name == "rho" { v >= 0.0 } else { v > 0.0 };
                if !(lo_ok && v < 1.0) {
                    return Err(Error::Config(format!("{name} override must lie in (0, 1), got {v}")));
                }
                off.push(format!("{name} override {v} (nominal {nominal:.6})"));
                Ok(v)
            }
            None => Ok(nominal),
        }
    };
    let rho = pick("rho", k2 / nf.sqrt(), ov.rho)?;
    let dzy = nf.powf(-0.25 + ch.delta / 2.0);
    let dxy = logn.powf(-1.0 / 3.0);
    let dz1 = pick("dz1", dzy, ov.dz1)?;
    let dy1 = pick("dy1", dzy, ov.dy1)?;
    let dxz10 = pick("dxz10", sol.d10, ov.dxz10)?;
    let dxz11 = pick("dxz11", sol.d11, ov.dxz11)?;
    let dxy10 = pick("dxy10", dxy, ov.dxy10)?;
    let dxy11 = pick("dxy11", dxy, ov.dxy11)?;

    Ok(CodeParams {
        channel: *ch,
        mode,
        n,
        num_chunks,
        chunk_len,
        m,
        lambda,
        l1,
        l2,
        k1: sol.k1,
        k2,
        r_u,
        r,
        r_eff: l1 as f64 * m as f64 / nf.sqrt(),
        r_hat,
        rho,
        dz1,
        dy1,
        dxz10,
        dxz11,
        dxy10,
        dxy11,
        b_nominal: sol.k1 * nf.sqrt() * logn,
        k1_solution: sol,
        l2_nominal,
        m_nominal,
        off_paper: off,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourCell {
    pub p: f64,
    pub q: f64,
    pub k1: Option<f64>,
    pub d10: Option<f64>,
    pub d11: Option<f64>,
    pub exponent: Option<f64>,
    pub status: String,
}

impl ContourCell {
    pub const CSV_HEADER: &'static str = "p,q,k1,d10,d11,exponent,status";

    pub fn csv_row(&self) -> String {
        let o = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.10}"));
        format!(
            "{},{},{},{},{},{},{}",
            self.p,
            self.q,
            o(self.k1),
            o(self.d10),
            o(self.d11),
            o(self.exponent),
            self.status
        )
    }
}

/// Complexity exponent `r_u k1 + 1` at one `(p, q)`.
pub fn contour_cell(p: f64, q: f64, eps_d: f64, delta: f64, mode: Mode) -> ContourCell {
    let absent = |status: String| ContourCell { p, q, k1: None, d10: None, d11: None, exponent: None, status };
    if p >= q {
        return absent("absent:p>=q".into());
    }
    let ch = match ChannelModel::new(p, q, eps_d, delta) {
        Ok(c) => c,
        Err(e) => return absent(format!("absent:{e}")),
    };
    match solve_k1(&ch, mode) {
        Ok(s) => ContourCell {
            p,
            q,
            k1: Some(s.k1),
            d10: Some(s.d10),
            d11: Some(s.d11),
            exponent: Some(design_ru(p, q, eps_d, mode) * s.k1 + 1.0),
            status: "ok".into(),
        },
        Err(e) => absent(format!("infeasible:{}", e.to_string().replace(',', ";"))),
    }
}

/// Evenly spaced grid including both endpoints.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![lo];
    }
    (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect()
}

/// Row-major grid (p outer, q inner). Cells are evaluated in parallel.
pub fn contour_grid(p_range: (f64, f64), q_range: (f64, f64), eps_d: f64, delta: f64, steps: usize, mode: Mode) -> Vec<ContourCell> {
    let ps = linspace(p_range.0, p_range.1, steps);
    let qs = linspace(q_range.0, q_range.1, steps);
    let cells: Vec<(f64, f64)> = ps.iter().flat_map(|&p| qs.iter().map(move |&q| (p, q))).collect();
    cells.par_iter().map(|&(p, q)| contour_cell(p, q, eps_d, delta, mode)).collect()
}

/// `I + D` as a function of `(f10, f11)` with the output marginal held at `fz1`.
pub fn info_plus_div(f10: f64, f11: f64, fz1: f64, rho: f64) -> Result<f64> {
    let f01 = fz1 - f11;
    let f00 = 1.0 - f01 - f10 - f11;
    if f01 < 0.0 || f00 < 0.0 || f10 < 0.0 || f11 < 0.0 {
        return Err(Error::Domain(format!("negative joint type at f10={f10}, f11={f11}")));
    }
    let (i, d) = info_from_fractions([f00, f01, f10, f11], rho)?;
    Ok(i + d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerReport {
    pub q: f64,
    pub rho: f64,
    pub d10: f64,
    pub d11: f64,
    pub grid_steps: usize,
    pub argmax: (f64, f64),
    pub max_value: f64,
    /// Values at the corners in `g_1..g_4` order.
    pub corner_values: [f64; 4],
    pub at_corner: bool,
}

/// Corner point `(f10, f11)` associated with `g_j`.
pub fn corner_point(j: usize, q: f64, rho: f64, d10: f64, d11: f64) -> (f64, f64) {
    let (sw, st) = G_SIGNS[j - 1];
    (rho * q * (1.0 + sw * d10), rho * (1.0 - q) * (1.0 + st * d11))
}

/// Grid search of `I + D` over the conditional box around the warden's
/// typical type.
pub fn verify_corner_points(q: f64, rho: f64, d10: f64, d11: f64, grid_steps: usize) -> Result<CornerReport> {
    let fz1 = conv(rho, q);
    let c10 = rho * q;
    let c11 = rho * (1.0 - q);
    let steps = grid_steps.max(2);
    let mut best = (f64::NEG_INFINITY, (c10, c11), (0usize, 0usize));
    for i in 0..steps {
        let f10 = c10 * (1.0 - d10 + 2.0 * d10 * i as f64 / (steps - 1) as f64);
        for k in 0..steps {
            let f11 = c11 * (1.0 - d11 + 2.0 * d11 * k as f64 / (steps - 1) as f64);
            let v = info_plus_div(f10, f11, fz1, rho)?;
            if v > best.0 {
                best = (v, (f10, f11), (i, k));
            }
        }
    }
    let mut corner_values = [0.0; 4];
    for (j, cv) in corner_values.iter_mut().enumerate() {
        let (a, b) = corner_point(j + 1, q, rho, d10, d11);
        *cv = info_plus_div(a, b, fz1, rho)?;
    }
    let edge = |i: usize| i == 0 || i == steps - 1;
    let max_corner = corner_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let at_corner = (edge(best.2 .0) && edge(best.2 .1))
        || (d10 == 0.0 && d11 == 0.0)
        || max_corner >= best.0 - 1e-12 * best.0.abs();
    Ok(CornerReport {
        q,
        rho,
        d10,
        d11,
        grid_steps: steps,
        argmax: best.1,
        max_value: best.0,
        corner_values,
        at_corner,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailSide {
    D10Upper,
    D10Lower,
    D11Upper,
    D11Lower,
}

impl TailSide {
    pub const ALL: [TailSide; 4] = [TailSide::D10Upper, TailSide::D10Lower, TailSide::D11Upper, TailSide::D11Lower];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub side: TailSide,
    /// Nominal chunk length used for the tail.
    pub chunk_len: u64,
    pub success_prob: f64,
    pub delta_width: f64,
    pub threshold: i64,
    /// `log2` of the exact tail mass.
    pub tail_log2: f64,
    /// `log2` of `n^{-k1 k2 c f(Delta) + delta/2}`.
    pub bound_log2: f64,
    pub holds: bool,
}

/// Exact binomial tail over the nominal chunk length against the
/// `f`-exponent bound.
pub fn verify_tail_bound(params: &CodeParams, side: TailSide) -> TailReport {
    let (c, width, upper) = match side {
        TailSide::D10Upper => (params.channel.q, params.dxz10, true),
        TailSide::D10Lower => (params.channel.q, params.dxz10, false),
        TailSide::D11Upper => (1.0 - params.channel.q, params.dxz11, true),
        TailSide::D11Lower => (1.0 - params.channel.q, params.dxz11, false),
    };
    tail_bound_at(params.n, params.k1, params.k2, c, width, params.channel.delta, upper, side)
}

#[allow(clippy::too_many_arguments)]
pub fn tail_bound_at(n: u64, k1: f64, k2: f64, c: f64, width: f64, delta: f64, upper: bool, side: TailSide) -> TailReport {
    let nf = n as f64;
    let logn = nf.log2();
    let big_n = (k1 * nf.sqrt() * logn).round() as u64;
    let ps = k2 * c / nf.sqrt();
    let mu = big_n as f64 * ps;
    let bound_log2 = -k1 * k2 * c * aux_f(width) * logn + delta / 2.0 * logn;
    let (threshold, tail_ln) = if upper {
        let t = (mu * (1.0 + width)).ceil() as i64;
        (t, tail_ln_sum(big_n, ps, t.max(0) as u64, true))
    } else {
        let t = (mu * (1.0 - width)).floor() as i64;
        let s = if t < 0 { f64::NEG_INFINITY } else { tail_ln_sum(big_n, ps, t as u64, false) };
        (t, s)
    };
    let tail_log2 = tail_ln / LN_2;
    TailReport {
        side,
        chunk_len: big_n,
        success_prob: ps,
        delta_width: width,
        threshold,
        tail_log2,
        bound_log2,
        holds: tail_log2 <= bound_log2,
    }
}

/// `ln P(X >= t)` (upper) or `ln P(X <= t)` (lower) for `X ~ Bin(n, p)`.
pub fn tail_ln_sum(n: u64, p: f64, t: u64, upper: bool) -> f64 {
    if upper && t > n {
        return f64::NEG_INFINITY;
    }
    let start = if upper { t } else { t.min(n) };
    let lead = binom_logpmf_raw(n, p, start);
    let mut acc = Neumaier::new();
    let mut i = start;
    loop {
        let term = binom_logpmf_raw(n, p, i) - lead;
        if term < -60.0 && i != start {
            break;
        }
        acc.add(term.exp());
        if upper {
            if i == n {
                break;
            }
            i += 1;
        } else {
            if i == 0 {
                break;
            }
            i -= 1;
        }
    }
    lead + acc.value().ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorRow {
    pub n: f64,
    pub rho: f64,
    pub center: f64,
    pub leading: f64,
    /// `|center - leading| * n`.
    pub scaled_center_dev: f64,
    /// Max over the box of `|I + D - center|`.
    pub box_dev: f64,
    /// `box_dev / (n^{-1/2} (log n)^{-1/3})`.
    pub box_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorReport {
    pub p: f64,
    pub k2: f64,
    pub rows: Vec<TaylorRow>,
    /// Largest over smallest `scaled_center_dev` across the schedule.
    pub center_spread: f64,
    /// Largest over smallest `box_ratio` across the schedule.
    pub box_spread: f64,
    pub center_positive: bool,
}

/// Expansion of `I + D` at the receiver's centre type along `rho = k2/sqrt(n)`.
pub fn verify_taylor_identity(p: f64, k2: f64, ns: &[f64]) -> Result<TaylorReport> {
    let mut rows = Vec::new();
    for &n in ns {
        let rho = k2 / n.sqrt();
        let fy1 = conv(rho, p);
        let (c10, c11) = (rho * p, rho * (1.0 - p));
        let center = info_plus_div(c10, c11, fy1, rho)?;
        let leading = rho * (1.0 - 2.0 * p) * ((1.0 - p) / p).log2();
        let dxy = n.log2().powf(-1.0 / 3.0);
        let mut box_dev = 0.0f64;
        let steps = 21;
        for i in 0..steps {
            let f10 = c10 * (1.0 - dxy + 2.0 * dxy * i as f64 / (steps - 1) as f64);
            for k in 0..steps {
                let f11 = c11 * (1.0 - dxy + 2.0 * dxy * k as f64 / (steps - 1) as f64);
                box_dev = box_dev.max((info_plus_div(f10, f11, fy1, rho)? - center).abs());
            }
        }
        rows.push(TaylorRow {
            n,
            rho,
            center,
            leading,
            scaled_center_dev: (center - leading).abs() * n,
            box_dev,
            box_ratio: box_dev / (n.powf(-0.5) * n.log2().powf(-1.0 / 3.0)),
        });
    }
    let spread = |f: fn(&TaylorRow) -> f64| {
        let hi = rows.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        let lo = rows.iter().map(f).fold(f64::INFINITY, f64::min);
        hi / lo
    };
    Ok(TaylorReport {
        p,
        k2,
        center_spread: spread(|r| r.scaled_center_dev),
        box_spread: spread(|r| r.box_ratio),
        center_positive: rows.iter().all(|r| r.center > 0.0),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

/// Multiplicative Chernoff bound `exp(-eps^2 mu / 3)`.
pub fn chernoff_bound(_n: u64, mu: f64, eps: f64, _side: Side) -> f64 {
    (-eps * eps * mu / 3.0).exp()
}

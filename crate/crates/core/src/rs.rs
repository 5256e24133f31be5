//! Systematic Reed–Solomon codes over GF(2^m).
//!
//! Codewords are evaluations of polynomials of degree `< l1` at the first
//! `L` field elements in canonical order. The systematic generator `[I | P]`
//! is obtained by Gaussian elimination of the Vandermonde generator.
//! Decoding uses Gao's interpolation/Euclid algorithm on the unerased
//! positions, which corrects any pattern with `2e + s <= l2`.

use crate::gf2m::{Elem, FieldSpec};
use crate::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct RsCode {
    field: Arc<FieldSpec>,
    len: usize,
    l1: usize,
    eval_points: Vec<Elem>,
    /// `l1 x L` systematic generator, row major.
    gen_systematic: Vec<Vec<Elem>>,
}

/// Result of an errors-and-erasures decoding attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RsOutcome {
    /// Message recovered; `corrected` counts symbols changed outside erasures.
    Decoded { message: Vec<Elem>, corrected: usize },
    /// Pattern outside the correction radius.
    Failure,
}

impl RsOutcome {
    pub fn message(&self) -> Option<&[Elem]> {
        match self {
            RsOutcome::Decoded { message, .. } => Some(message),
            RsOutcome::Failure => None,
        }
    }
}

impl RsCode {
    pub fn new(field: Arc<FieldSpec>, len: usize, l1: usize) -> Result<Self> {
        if len > field.size() {
            return Err(Error::InfeasibleCode(format!(
                "length L={len} exceeds field size {}",
                field.size()
            )));
        }
        if l1 == 0 || l1 >= len {
            return Err(Error::InfeasibleCode(format!("need 1 <= l1 < L, got l1={l1}, L={len}")));
        }
        let eval_points: Vec<Elem> = (0..len).map(|i| field.canonical_element(i)).collect();
        let vandermonde = vandermonde(&field, &eval_points, l1);
        let gen_systematic = systematize(&field, vandermonde)?;
        Ok(Self { field, len, l1, eval_points, gen_systematic })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn field_arc(&self) -> Arc<FieldSpec> {
        self.field.clone()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn l1(&self) -> usize {
        self.l1
    }

    pub fn l2(&self) -> usize {
        self.len - self.l1
    }

    pub fn eval_points(&self) -> &[Elem] {
        &self.eval_points
    }

    pub fn gen_systematic(&self) -> &[Vec<Elem>] {
        &self.gen_systematic
    }

    /// The non-systematic generator, rows `mu^j` for `j < l1`.
    pub fn gen_vandermonde(&self) -> Vec<Vec<Elem>> {
        vandermonde(&self.field, &self.eval_points, self.l1)
    }

    pub fn encode(&self, msg: &[Elem]) -> Result<Vec<Elem>> {
        if msg.len() != self.l1 {
            return Err(Error::Contract(format!(
                "message has {} symbols, expected {}",
                msg.len(),
                self.l1
            )));
        }
        if let Some(&bad) = msg.iter().find(|&&s| !self.field.contains(s)) {
            return Err(Error::Contract(format!("symbol {bad} outside GF(2^{})", self.field.degree())));
        }
        let f = &self.field;
        let mut out = msg.to_vec();
        out.resize(self.len, 0);
        for (row, &s) in self.gen_systematic.iter().zip(msg) {
            if s == 0 {
                continue;
            }
            for (o, &g) in out[self.l1..].iter_mut().zip(&row[self.l1..]) {
                *o ^= f.mul(s, g);
            }
        }
        Ok(out)
    }

    /// Parity part of the codeword for `msg`.
    pub fn parity(&self, msg: &[Elem]) -> Result<Vec<Elem>> {
        Ok(self.encode(msg)?[self.l1..].to_vec())
    }

    /// Errors-and-erasures decoding. `erasures` lists positions whose
    /// received symbol is to be ignored.
    pub fn decode(&self, received: &[Elem], erasures: &[usize]) -> Result<RsOutcome> {
        if received.len() != self.len {
            return Err(Error::Contract(format!(
                "received word has {} symbols, expected {}",
                received.len(),
                self.len
            )));
        }
        let mut erased = vec![false; self.len];
        for &e in erasures {
            if e >= self.len {
                return Err(Error::Contract(format!("erasure index {e} out of range")));
            }
            if erased[e] {
                return Err(Error::Contract(format!("duplicate erasure index {e}")));
            }
            erased[e] = true;
        }
        if let Some(&bad) = received.iter().find(|&&s| !self.field.contains(s)) {
            return Err(Error::Contract(format!("symbol {bad} outside GF(2^{})", self.field.degree())));
        }
        let f = &self.field;
        let (pts, vals): (Vec<Elem>, Vec<Elem>) = (0..self.len)
            .filter(|&i| !erased[i])
            .map(|i| (self.eval_points[i], received[i]))
            .unzip();
        let n = pts.len();
        let k = self.l1;
        if n < k {
            return Ok(RsOutcome::Failure);
        }
        let g0 = poly_from_roots(f, &pts);
        let g1 = interpolate(f, &pts, &vals, &g0);
        // Partial extended Euclid until deg(r) < (n + k) / 2.
        let stop = (n + k).div_ceil(2);
        let (mut r_prev, mut r) = (g0, g1);
        let (mut v_prev, mut v) = (Vec::<Elem>::new(), vec![1]);
        while degree(&r).is_some_and(|d| d >= stop) {
            let (quo, rem) = poly_divmod(f, &r_prev, &r)?;
            r_prev = std::mem::replace(&mut r, rem);
            let next_v = poly_add(&v_prev, &poly_mul(f, &quo, &v));
            v_prev = std::mem::replace(&mut v, next_v);
        }
        let (msg_poly, rem) = poly_divmod(f, &r, &v)?;
        if degree(&rem).is_some() || degree(&msg_poly).is_some_and(|d| d >= k) {
            return Ok(RsOutcome::Failure);
        }
        let corrected = pts
            .iter()
            .zip(&vals)
            .filter(|(&x, &y)| poly_eval(f, &msg_poly, x) != y)
            .count();
        if 2 * corrected > n - k {
            return Ok(RsOutcome::Failure);
        }
        let message = self.eval_points[..k].iter().map(|&x| poly_eval(f, &msg_poly, x)).collect();
        Ok(RsOutcome::Decoded { message, corrected })
    }

    /// Number of systematic messages sharing any given parity vector.
    pub fn preimage_count(&self) -> Result<BigUint> {
        if self.l1 < self.l2() {
            return Err(Error::Contract(format!(
                "preimage count needs l1 >= l2, got l1={}, l2={}",
                self.l1,
                self.l2()
            )));
        }
        Ok(BigUint::from(self.field.size()).pow((self.l1 - self.l2()) as u32))
    }

    /// Lists every message whose parity equals `parity`.
    pub fn enumerate_preimages(&self, parity: &[Elem]) -> Result<Vec<Vec<Elem>>> {
        if parity.len() != self.l2() {
            return Err(Error::Contract(format!(
                "parity has {} symbols, expected {}",
                parity.len(),
                self.l2()
            )));
        }
        let total = self.message_space_size()?;
        let mut out = Vec::new();
        for idx in 0..total {
            let msg = self.index_to_message(idx);
            if self.parity(&msg)? == parity {
                out.push(msg);
            }
        }
        Ok(out)
    }

    /// All `|F|^l1` codewords, in message-index order.
    pub fn enumerate_codewords(&self) -> Result<Vec<Vec<Elem>>> {
        (0..self.message_space_size()?).map(|i| self.encode(&self.index_to_message(i))).collect()
    }

    fn message_space_size(&self) -> Result<u64> {
        let bits = self.field.degree() as u64 * self.l1 as u64;
        if bits > 20 {
            return Err(Error::Scale(format!(
                "enumeration of |F|^l1 = 2^{bits} messages exceeds the 2^20 cap"
            )));
        }
        Ok(1u64 << bits)
    }

    fn index_to_message(&self, mut idx: u64) -> Vec<Elem> {
        let m = self.field.degree();
        let mut msg = vec![0; self.l1];
        for s in msg.iter_mut().rev() {
            *s = (idx & ((1 << m) - 1)) as Elem;
            idx >>= m;
        }
        msg
    }
}

/// Exact number of weight-`i` codewords of an MDS code of length `len`,
/// minimum distance `dmin`, over a field of `q` elements.
pub fn weight_distribution(len: u64, dmin: u64, q: u64, i: u64) -> BigUint {
    if i == 0 {
        return BigUint::one();
    }
    if i < dmin || i > len {
        return BigUint::zero();
    }
    let qb = BigInt::from(q);
    let mut sum = BigInt::zero();
    for j in 0..=(i - dmin) {
        let term = BigInt::from(binomial(i - 1, j)) * qb.pow((i - dmin - j) as u32);
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let total = BigInt::from(binomial(len, i)) * BigInt::from(q - 1) * sum;
    debug_assert!(!total.is_negative());
    total.to_biguint().unwrap_or_default()
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for j in 0..k {
        acc = acc * BigUint::from(n - j) / BigUint::from(j + 1);
    }
    acc
}

fn vandermonde(f: &FieldSpec, pts: &[Elem], rows: usize) -> Vec<Vec<Elem>> {
    let mut out = Vec::with_capacity(rows);
    let mut row = vec![1; pts.len()];
    for _ in 0..rows {
        out.push(row.clone());
        for (r, &x) in row.iter_mut().zip(pts) {
            *r = f.mul(*r, x);
        }
    }
    out
}

/// Row-reduces `g` so its leading square block is the identity.
fn systematize(f: &FieldSpec, mut g: Vec<Vec<Elem>>) -> Result<Vec<Vec<Elem>>> {
    let k = g.len();
    for col in 0..k {
        let pivot = (col..k)
            .find(|&r| g[r][col] != 0)
            .ok_or_else(|| Error::InfeasibleCode("singular leading block".into()))?;
        g.swap(col, pivot);
        let inv = f.inv(g[col][col])?;
        for x in g[col].iter_mut() {
            *x = f.mul(*x, inv);
        }
        let prow = g[col].clone();
        for (r, row) in g.iter_mut().enumerate() {
            let c = row[col];
            if r == col || c == 0 {
                continue;
            }
            for (x, &p) in row.iter_mut().zip(&prow) {
                *x ^= f.mul(c, p);
            }
        }
    }
    Ok(g)
}

// Polynomials are coefficient vectors, lowest degree first.

fn degree(p: &[Elem]) -> Option<usize> {
    p.iter().rposition(|&c| c != 0)
}

fn trim(mut p: Vec<Elem>) -> Vec<Elem> {
    p.truncate(degree(&p).map_or(0, |d| d + 1));
    p
}

fn poly_add(a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    let mut out = vec![0; a.len().max(b.len())];
    for (i, o) in out.iter_mut().enumerate() {
        *o = a.get(i).copied().unwrap_or(0) ^ b.get(i).copied().unwrap_or(0);
    }
    trim(out)
}

fn poly_mul(f: &FieldSpec, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] ^= f.mul(x, y);
        }
    }
    trim(out)
}

fn poly_divmod(f: &FieldSpec, a: &[Elem], b: &[Elem]) -> Result<(Vec<Elem>, Vec<Elem>)> {
    let db = degree(b).ok_or(Error::DivisionByZero(f.degree()))?;
    let mut rem = trim(a.to_vec());
    let Some(da) = degree(&rem) else {
        return Ok((Vec::new(), Vec::new()));
    };
    if da < db {
        return Ok((Vec::new(), rem));
    }
    let lead_inv = f.inv(b[db])?;
    let mut quo = vec![0; da - db + 1];
    for shift in (0..=da - db).rev() {
        let c = rem[shift + db];
        if c == 0 {
            continue;
        }
        let t = f.mul(c, lead_inv);
        quo[shift] = t;
        for (j, &bj) in b[..=db].iter().enumerate() {
            rem[shift + j] ^= f.mul(t, bj);
        }
    }
    Ok((trim(quo), trim(rem)))
}

fn poly_eval(f: &FieldSpec, p: &[Elem], x: Elem) -> Elem {
    p.iter().rev().fold(0, |acc, &c| f.mul(acc, x) ^ c)
}

fn poly_from_roots(f: &FieldSpec, roots: &[Elem]) -> Vec<Elem> {
    let mut p = vec![1];
    for &r in roots {
        let mut next = vec![0; p.len() + 1];
        for (i, &c) in p.iter().enumerate() {
            next[i + 1] ^= c;
            next[i] ^= f.mul(c, r);
        }
        p = next;
    }
    p
}

/// Lagrange interpolation through `(pts[i], vals[i])`, given
/// `g0 = prod (x - pts[i])`.
fn interpolate(f: &FieldSpec, pts: &[Elem], vals: &[Elem], g0: &[Elem]) -> Vec<Elem> {
    let n = pts.len();
    let mut out = vec![0; n];
    for (&x, &y) in pts.iter().zip(vals) {
        if y == 0 {
            continue;
        }
        // Synthetic division of g0 by (X - x).
        let mut q = vec![0; n];
        let mut carry = 0;
        for d in (1..=n).rev() {
            carry = g0[d] ^ f.mul(carry, x);
            q[d - 1] = carry;
        }
        let denom = poly_eval(f, &q, x);
        let scale = f.mul(y, f.inv(denom).expect("distinct evaluation points"));
        for (o, &c) in out.iter_mut().zip(&q) {
            *o ^= f.mul(scale, c);
        }
    }
    trim(out)
}

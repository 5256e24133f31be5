//! Table-driven arithmetic in GF(2^m), 2 <= m <= 20.
//!
//! Each degree uses one fixed primitive polynomial so that field elements,
//! and everything built on them, are bit-reproducible.

use crate::{Error, Result};

/// Field element, stored in the low `m` bits.
pub type Elem = u32;

pub const MIN_DEGREE: u32 = 2;
pub const MAX_DEGREE: u32 = 20;

/// Canonical primitive polynomials indexed by degree. Bit `i` holds the
/// coefficient of `x^i`.
const PRIMITIVE_POLYS: [u32; 21] = [
    0, 0,
    0x7,        // x^2 + x + 1
    0xB,        // x^3 + x + 1
    0x13,       // x^4 + x + 1
    0x25,       // x^5 + x^2 + 1
    0x43,       // x^6 + x + 1
    0x83,       // x^7 + x + 1
    0x11D,      // x^8 + x^4 + x^3 + x^2 + 1
    0x211,      // x^9 + x^4 + 1
    0x409,      // x^10 + x^3 + 1
    0x805,      // x^11 + x^2 + 1
    0x1053,     // x^12 + x^6 + x^4 + x + 1
    0x201B,     // x^13 + x^4 + x^3 + x + 1
    0x4443,     // x^14 + x^10 + x^6 + x + 1
    0x8003,     // x^15 + x + 1
    0x1100B,    // x^16 + x^12 + x^3 + x + 1
    0x20009,    // x^17 + x^3 + 1
    0x40081,    // x^18 + x^7 + 1
    0x80027,    // x^19 + x^5 + x^2 + x + 1
    0x100009,   // x^20 + x^3 + 1
];

/// GF(2^m) with discrete log/antilog tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    m: u32,
    primitive_poly: u32,
    /// `exp[i] = alpha^i` for `0 <= i < 2(2^m - 1)`; doubled so products of
    /// two logs never need a reduction.
    exp: Vec<Elem>,
    /// `log[a]` for `a != 0`; `log[0]` is unused.
    log: Vec<u32>,
}

impl FieldSpec {
    /// Builds GF(2^m) from the canonical primitive polynomial of degree `m`.
    pub fn new(m: u32) -> Result<Self> {
        if !(MIN_DEGREE..=MAX_DEGREE).contains(&m) {
            return Err(Error::Config(format!(
                "field degree m={m} outside [{MIN_DEGREE}, {MAX_DEGREE}]"
            )));
        }
        let poly = PRIMITIVE_POLYS[m as usize];
        let size = 1usize << m;
        let order = size - 1;
        let mut exp = vec![0; 2 * order];
        let mut log = vec![0; size];
        let mut x: u32 = 1;
        for i in 0..order {
            if i > 0 && x == 1 {
                return Err(Error::Config(format!(
                    "polynomial {poly:#x} is not primitive for m={m} (cycle length {i})"
                )));
            }
            exp[i] = x;
            log[x as usize] = i as u32;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= poly;
            }
        }
        if x != 1 {
            return Err(Error::Config(format!(
                "polynomial {poly:#x} does not generate a cycle of length {order}"
            )));
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(Self { m, primitive_poly: poly, exp, log })
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn primitive_poly(&self) -> u32 {
        self.primitive_poly
    }

    /// Number of field elements, `2^m`.
    pub fn size(&self) -> usize {
        1 << self.m
    }

    /// Order of the multiplicative group, `2^m - 1`.
    pub fn order(&self) -> usize {
        self.size() - 1
    }

    pub fn contains(&self, a: Elem) -> bool {
        (a as usize) < self.size()
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a == 0 {
            return Err(Error::DivisionByZero(self.m));
        }
        let order = self.order() as u32;
        Ok(self.exp[((order - self.log[a as usize]) % order) as usize])
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `alpha^i` for any `i`.
    pub fn alpha_pow(&self, i: usize) -> Elem {
        self.exp[i % self.order()]
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let order = self.order() as u64;
        let l = (self.log[a as usize] as u64 * (e % order)) % order;
        self.exp[l as usize]
    }

    /// Element `i` in the canonical ordering `0, 1, alpha, alpha^2, ...`.
    pub fn canonical_element(&self, i: usize) -> Elem {
        if i == 0 {
            0
        } else {
            self.alpha_pow(i - 1)
        }
    }

    /// Raw `exp` table entry; the table cycles with period `2^m - 1`.
    pub fn exp_table(&self) -> &[Elem] {
        &self.exp[..self.order()]
    }

    pub fn log_table(&self) -> &[u32] {
        &self.log
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Shift-and-xor multiplication modulo the primitive polynomial.
    fn clmul_mod(a: u32, b: u32, m: u32, poly: u32) -> u32 {
        let mut acc: u64 = 0;
        for i in 0..m {
            if b >> i & 1 == 1 {
                acc ^= (a as u64) << i;
            }
        }
        for bit in (m..2 * m).rev() {
            if acc >> bit & 1 == 1 {
                acc ^= (poly as u64) << (bit - m);
            }
        }
        acc as u32
    }

    #[test]
    fn degree_bounds() {
        assert!(FieldSpec::new(1).is_err());
        assert!(FieldSpec::new(21).is_err());
    }

    #[test]
    fn every_tabled_polynomial_is_primitive() {
        for m in MIN_DEGREE..=MAX_DEGREE {
            let f = FieldSpec::new(m).unwrap();
            for a in 1..f.size().min(1 << 12) as u32 {
                assert_eq!(f.exp[f.log[a as usize] as usize], a);
            }
        }
    }

    #[test]
    fn gf4_examples() {
        let f = FieldSpec::new(2).unwrap();
        assert_eq!(f.primitive_poly(), 0b111);
        assert_eq!(f.size(), 4);
        // alpha = x = 0b10; alpha^2 = alpha + 1.
        assert_eq!(f.mul(0b10, 0b10), 0b11);
        assert_eq!(f.inv(0b10).unwrap(), 0b11);
        assert_eq!(f.inv(1).unwrap(), 1);
    }

    #[test]
    fn gf8_group_order() {
        let f = FieldSpec::new(3).unwrap();
        assert_eq!(f.order(), 7);
    }

    #[test]
    fn gf16_exp_period() {
        let f = FieldSpec::new(4).unwrap();
        let mut x = 1u32;
        let mut period = 0;
        loop {
            x = f.mul(x, 2);
            period += 1;
            if x == 1 {
                break;
            }
        }
        assert_eq!(period, 15);
        for a in 1..16 {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn inverse_of_zero_errors() {
        let f = FieldSpec::new(5).unwrap();
        assert!(matches!(f.inv(0), Err(Error::DivisionByZero(5))));
    }

    #[test]
    fn mul_matches_shift_and_xor() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in [3, 8, 13, 20] {
            let f = FieldSpec::new(m).unwrap();
            let trials = if m == 3 { 10_000 } else { 2_000 };
            for _ in 0..trials {
                let a = rng.random_range(0..f.size() as u32);
                let b = rng.random_range(0..f.size() as u32);
                assert_eq!(f.mul(a, b), clmul_mod(a, b, m, f.primitive_poly()));
            }
        }
    }

    #[test]
    fn identities() {
        let f = FieldSpec::new(6).unwrap();
        for a in 0..64 {
            assert_eq!(f.mul(a, 0), 0);
            assert_eq!(f.mul(a, 1), a);
            assert_eq!(f.add(a, a), 0);
        }
        assert_eq!(f.pow(f.alpha_pow(1), 63), 1);
        assert_eq!(f.canonical_element(0), 0);
        assert_eq!(f.canonical_element(1), 1);
        assert_eq!(f.canonical_element(2), 2);
    }
}

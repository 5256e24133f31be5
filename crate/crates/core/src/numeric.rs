//! Numerical helpers: compensated summation, accurate binomial log-pmf,
//! and the Gaussian tail function.

use std::f64::consts::{LN_2, PI};

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn neumaier_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Neumaier::new();
    xs.into_iter().for_each(|x| acc.add(x));
    acc.value()
}

/// `ln(sum exp(x_i))`, `-inf` for an empty input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + neumaier_sum(xs.iter().map(|x| (x - m).exp())).ln()
}

/// Binary convolution `a(1-b) + b(1-a)`.
#[inline]
pub fn conv(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

/// `x log2 x` with `0 log 0 = 0`.
#[inline]
pub fn xlog2x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    -xlog2x(p) - xlog2x(1.0 - p)
}

/// Error of Stirling's approximation,
/// `ln n! - (n + 1/2) ln n + n - ln sqrt(2 pi)`.
pub fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n == 0 {
        return 0.0;
    }
    let x = n as f64;
    if n <= 15 {
        let lnfact = neumaier_sum((2..=n).map(|k| (k as f64).ln()));
        return lnfact - (x + 0.5) * x.ln() + x - 0.5 * (2.0 * PI).ln();
    }
    let nn = x * x;
    if n > 500 {
        (S0 - S1 / nn) / x
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / x
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / x
    }
}

/// Deviance term `x ln(x/np) + np - x`, evaluated without cancellation.
pub fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// Natural log of the Binomial(n, p) pmf at `w`, via the saddle-point
/// expansion. Relative error stays near machine precision for large `n`.
pub fn binom_logpmf_raw(n: u64, p: f64, w: u64) -> f64 {
    debug_assert!(w <= n);
    if p == 0.0 {
        return if w == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if p == 1.0 {
        return if w == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let q = 1.0 - p;
    let nf = n as f64;
    if w == 0 {
        return nf * (-p).ln_1p();
    }
    if w == n {
        return nf * p.ln();
    }
    let x = w as f64;
    let lc = stirlerr(n) - stirlerr(w) - stirlerr(n - w) - bd0(x, nf * p) - bd0(nf - x, nf * q);
    let lf = (2.0 * PI).ln() + x.ln() + (-x / nf).ln_1p();
    lc - 0.5 * lf
}

/// Gaussian upper tail `Q(x) = P(N(0,1) > x)`.
pub fn q_func(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of [`q_func`] by bisection on `[-10, 10]`, to `|Q(x) - y| <= 1e-10`
/// or interval exhaustion.
pub fn q_inv(y: f64) -> f64 {
    assert!(y > 0.0 && y < 1.0, "q_inv needs 0 < y < 1");
    let (mut lo, mut hi) = (-10.0f64, 10.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q_func(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

pub const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Converts a natural log to base 2.
#[inline]
pub fn ln_to_log2(x: f64) -> f64 {
    x / LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_small_terms() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(neumaier_sum(xs), 2.0);
    }

    #[test]
    fn stirlerr_small_and_large_agree_with_lgamma() {
        for n in [1u64, 2, 5, 15, 16, 40, 100, 1000] {
            let x = n as f64;
            let direct = statrs::function::gamma::ln_gamma(x + 1.0) - (x + 0.5) * x.ln() + x
                - 0.5 * (2.0 * PI).ln();
            assert!((stirlerr(n) - direct).abs() < 1e-11, "n={n}");
        }
        assert!((stirlerr(1) - 0.081_061_466_795_327_26).abs() < 1e-15);
    }

    #[test]
    fn logpmf_trivial_values() {
        assert!((binom_logpmf_raw(2, 0.5, 1) - 0.5f64.ln()).abs() < 1e-15);
        assert!((binom_logpmf_raw(10, 0.3, 0) - 10.0 * 0.7f64.ln()).abs() < 1e-14);
        let total = neumaier_sum((0..=50).map(|w| binom_logpmf_raw(50, 0.37, w).exp()));
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn q_inverse_values() {
        assert!((q_inv(0.45) - 0.125_661_346_855_074).abs() < 1e-9);
        assert!((q_func(0.0) - 0.5).abs() < 1e-16);
        for y in [0.01, 0.2, 0.5, 0.9] {
            assert!((q_func(q_inv(y)) - y).abs() < 1e-10);
        }
    }

    #[test]
    fn entropy_and_conv() {
        assert_eq!(h2(0.5), 1.0);
        assert_eq!(h2(0.0), 0.0);
        assert!((conv(0.1, 0.25) - 0.3).abs() < 1e-15);
    }
}

use covert_core::adversary::radiometer_design;
use covert_core::bits::BitVec;
use covert_core::channel::tv_product_bernoulli;
use covert_core::design::{aux_f, contour_cell, design_k2, solve_k1, ChannelModel, Mode, XI};
use covert_core::gf2m::{Elem, FieldSpec};
use covert_core::harness::lemma1_row;
use covert_core::innercode::{info_from_fractions, CountRange};
use covert_core::numeric::conv;
use covert_core::rs::{RsCode, RsOutcome};
use proptest::prelude::*;
use std::sync::Arc;

fn field_and_triple() -> impl Strategy<Value = (u32, Elem, Elem, Elem)> {
    (2u32..=16).prop_flat_map(|m| {
        let s = 1u32 << m;
        (Just(m), 0..s, 0..s, 0..s)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn field_laws((m, a, b, c) in field_and_triple()) {
        let f = FieldSpec::new(m).unwrap();
        prop_assert_eq!(f.add(a, b), a ^ b);
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn rs_round_trip_within_radius(
        m in 3u32..=8,
        len_frac in 0.3f64..1.0,
        rate in 0.2f64..0.9,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let f = Arc::new(FieldSpec::new(m).unwrap());
        let len = ((f.size() as f64 * len_frac) as usize).max(3);
        let l1 = ((len as f64 * rate) as usize).clamp(1, len - 1);
        let code = RsCode::new(f.clone(), len, l1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let s = f.size() as Elem;
        let msg: Vec<Elem> = (0..l1).map(|_| rng.random_range(0..s)).collect();
        let cw = code.encode(&msg).unwrap();
        prop_assert_eq!(&cw[..l1], &msg[..]);
        let erasures = rng.random_range(0..=code.l2());
        let errors = rng.random_range(0..=(code.l2() - erasures) / 2);
        let pos = rand::seq::index::sample(&mut rng, len, errors + erasures).into_vec();
        let mut r = cw.clone();
        for &p in &pos[..errors] {
            r[p] ^= rng.random_range(1..s);
        }
        for &p in &pos[errors..] {
            r[p] = rng.random_range(0..s);
        }
        match code.decode(&r, &pos[errors..]).unwrap() {
            RsOutcome::Decoded { message, corrected } => {
                prop_assert_eq!(message, msg);
                prop_assert_eq!(corrected, errors);
            }
            RsOutcome::Failure => prop_assert!(false, "failure inside radius"),
        }
    }

    #[test]
    fn aux_f_positive(x in 1e-9f64..=1.0) {
        prop_assert!(aux_f(x) > 0.0);
    }

    #[test]
    fn pinsker_k2_below_optimal(q in 0.01f64..0.49, eps in 0.001f64..=0.3) {
        prop_assert!(design_k2(q, eps, Mode::Paper) <= design_k2(q, eps, Mode::Optimal));
    }

    #[test]
    fn hex_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..300)) {
        let v = BitVec::from_bools(&bits);
        prop_assert_eq!(BitVec::from_hex(&v.to_hex(), bits.len()).unwrap(), v.clone());
        let cut = bits.len() / 3;
        let (a, b) = (v.slice(0, cut), v.slice(cut, bits.len() - cut));
        prop_assert_eq!(BitVec::concat([&a, &b]), v.clone());
        prop_assert_eq!(v.weight(), bits.iter().filter(|&&x| x).count());
    }

    #[test]
    fn distance_is_a_metric(
        a in proptest::collection::vec(any::<bool>(), 64),
        b in proptest::collection::vec(any::<bool>(), 64),
        c in proptest::collection::vec(any::<bool>(), 64),
    ) {
        let (a, b, c) = (BitVec::from_bools(&a), BitVec::from_bools(&b), BitVec::from_bools(&c));
        prop_assert_eq!(a.distance(&b), b.distance(&a));
        prop_assert!(a.distance(&c) <= a.distance(&b) + b.distance(&c));
        prop_assert_eq!(a.distance(&a), 0);
    }

    #[test]
    fn count_range_is_closed_interval(len in 1usize..5000, center in 0.0f64..1.0, width in 0.0f64..1.0, w in 0usize..5000) {
        let r = CountRange::new(len, center, width);
        let (lo, hi) = (len as f64 * center * (1.0 - width), len as f64 * center * (1.0 + width));
        let x = w as f64;
        if x >= lo + 1e-6 && x <= hi - 1e-6 {
            prop_assert!(r.contains(w));
        }
        if x < lo - 1e-6 || x > hi + 1e-6 {
            prop_assert!(!r.contains(w));
        }
    }

    #[test]
    fn divergence_nonnegative(f in proptest::array::uniform4(0.0f64..1.0), rho in 0.001f64..0.999) {
        let s: f64 = f.iter().sum();
        prop_assume!(s > 1e-6);
        let f = f.map(|x| x / s);
        let (i, d) = info_from_fractions(f, rho).unwrap();
        prop_assert!(i >= -1e-12);
        prop_assert!(d >= -1e-12);
    }

    #[test]
    fn radiometer_not_super_optimal(n in 100u64..20_000, q in 0.05f64..0.45, rho in 0.0f64..0.2) {
        let tv = tv_product_bernoulli(n, q, conv(rho, q));
        let r = radiometer_design(n, q, rho);
        prop_assert!(r.sum() >= 1.0 - tv - 1e-9);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&tv));
    }

    #[test]
    fn pinsker_mode_respects_tv_bound(q in 0.02f64..0.48, eps in 0.01f64..0.5, logn in 4.0f64..6.5) {
        let n = 10f64.powf(logn) as u64;
        let r = lemma1_row(q, eps, n, 0.01, Mode::Paper);
        prop_assert!(r.holds, "tv={} bound={}", r.tv, r.bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_certificates_hold(p in 0.01f64..0.2, gap in 0.02f64..0.25, eps in 0.01f64..0.3) {
        let q = (p + gap).min(0.49);
        prop_assume!(p < q);
        let ch = ChannelModel::new(p, q, eps, 0.01).unwrap();
        for mode in [Mode::Paper, Mode::Optimal] {
            if let Ok(sol) = solve_k1(&ch, mode) {
                for i in 0..3 {
                    prop_assert!(sol.certificates[i] >= XI[i] + ch.delta);
                }
                prop_assert!(sol.certificates_hold(&ch, mode));
            }
        }
    }

    #[test]
    fn contour_exponents_at_least_linear(p in 0.01f64..0.3, gap in 0.01f64..0.2) {
        let q = (p + gap).min(0.49);
        prop_assume!(p < q);
        if let Some(e) = contour_cell(p, q, 0.1, 0.01, Mode::Paper).exponent {
            prop_assert!(e >= 1.0);
        }
    }
}

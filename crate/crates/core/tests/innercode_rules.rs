use covert_core::bits::BitVec;
use covert_core::design::{derive_params, ChannelModel, CodeParams, Mode, Overrides};
use covert_core::innercode::{
    bernoulli_vector, generate_raw, inner_decode, inner_generate, pair_stats, type_class_log2prob_counts,
    DecodeOutcome, InnerCodebook,
};
use covert_core::numeric::conv;
use covert_core::seed;
use rand::Rng;
use sha2::{Digest, Sha256};

fn params(chunk_len: usize, m: u32, rho: f64, dy1: f64, dxy10: f64, dxy11: f64) -> CodeParams {
    params_at(0.1, chunk_len, m, rho, dy1, dxy10, dxy11)
}

fn params_at(p: f64, chunk_len: usize, m: u32, rho: f64, dy1: f64, dxy10: f64, dxy11: f64) -> CodeParams {
    let ch = ChannelModel::new(p, 0.25, 0.1, 0.01).unwrap();
    let ov = Overrides {
        l2: Some(2),
        m: Some(m),
        rho: Some(rho),
        dy1: Some(dy1),
        dxy10: Some(dxy10),
        dxy11: Some(dxy11),
        ..Default::default()
    };
    derive_params(&ch, 4, chunk_len, Mode::Paper, &ov).unwrap()
}

/// Fraction `count / len` lies in the closed interval `center (1 -+ width)`.
fn within(count: usize, len: usize, center: f64, width: f64) -> bool {
    let f = count as f64 / len as f64;
    f >= center * (1.0 - width) - 1e-12 && f <= center * (1.0 + width) + 1e-12
}

/// The chunk decoding rule written out directly from its three cases.
fn reference_decode(cb: &InnerCodebook, prm: &CodeParams, y: &BitVec) -> DecodeOutcome {
    let (b, p, rho) = (prm.chunk_len, prm.channel.p, prm.rho);
    let wy = y.weight();
    let in_active = within(wy, b, conv(rho, p), prm.dy1);
    let in_silent = within(wy, b, p, prm.dy1);
    if in_active {
        let hits: Vec<usize> = (0..cb.len())
            .filter(|&w| {
                let s = pair_stats(cb.codeword(w), y).unwrap();
                within(s.n10, b, rho * p, prm.dxy10) && within(s.n11, b, rho * (1.0 - p), prm.dxy11)
            })
            .collect();
        match hits.len() {
            0 => DecodeOutcome::Silence,
            1 => DecodeOutcome::Message(hits[0] as u32),
            _ => DecodeOutcome::DeclaredError,
        }
    } else if in_silent {
        DecodeOutcome::Silence
    } else {
        DecodeOutcome::DeclaredError
    }
}

#[test]
fn rule_fidelity_against_predicate_chain() {
    let configs = [
        params(64, 4, 0.3, 0.4, 0.9, 0.4),
        params(64, 3, 0.2, 0.6, 0.95, 0.6),
        params(128, 5, 0.15, 0.3, 0.9, 0.3),
        params(32, 4, 0.4, 0.8, 0.99, 0.8),
    ];
    let mut rng = seed::stream(99, &[]);
    let mut seen = [0usize; 3];
    for pair in 0..10_000u64 {
        let prm = &configs[(pair % 4) as usize];
        let cb = inner_generate(prm, (pair / 4 % 4) as usize, pair / 16).unwrap();
        let b = prm.chunk_len;
        let y = match pair % 5 {
            0 | 1 => {
                let mut y = cb.codeword(rng.random_range(0..cb.len())).clone();
                y.xor_assign(&bernoulli_vector(b, prm.channel.p, &mut rng));
                y
            }
            2 => bernoulli_vector(b, prm.channel.p, &mut rng),
            3 => bernoulli_vector(b, rng.random_range(0.0..0.6), &mut rng),
            _ => cb.codeword(rng.random_range(0..cb.len())).clone(),
        };
        let got = inner_decode(&cb, prm, &y).unwrap();
        assert_eq!(got, reference_decode(&cb, prm, &y), "pair {pair}");
        seen[match got {
            DecodeOutcome::Silence => 0,
            DecodeOutcome::Message(_) => 1,
            DecodeOutcome::DeclaredError => 2,
        }] += 1;
    }
    assert!(seen.iter().all(|&c| c > 100), "outcome mix too narrow: {seen:?}");
}

#[test]
fn decoder_is_total_on_every_output() {
    let prm = params(16, 3, 0.3, 0.9, 0.99, 0.9);
    let cb = inner_generate(&prm, 0, 3).unwrap();
    for z in 0u32..1 << 16 {
        let y = BitVec::from_bools(&(0..16).map(|i| z >> i & 1 == 1).collect::<Vec<_>>());
        if let DecodeOutcome::Message(w) = inner_decode(&cb, &prm, &y).unwrap() {
            assert!((w as usize) < cb.len());
        }
    }
}

#[test]
fn constructed_examples() {
    // With p this small the (1,0) box collapses to {0}, so an exact copy of
    // a codeword is inside its own conditional box.
    let prm = params_at(1e-12, 256, 4, 0.2, 0.3, 0.5, 0.3);
    let cb = inner_generate(&prm, 1, 8).unwrap();
    let mut unique_hits = 0;
    for w in 0..cb.len() {
        let y = cb.codeword(w).clone();
        let got = inner_decode(&cb, &prm, &y).unwrap();
        assert_eq!(got, reference_decode(&cb, &prm, &y));
        unique_hits += (got == DecodeOutcome::Message(w as u32)) as usize;
    }
    assert!(unique_hits >= cb.len() / 2, "{unique_hits} of {}", cb.len());
    assert_eq!(inner_decode(&cb, &prm, &BitVec::zeros(256)).unwrap(), DecodeOutcome::Silence);

    let prm = params(256, 4, 0.2, 0.3, 0.9, 0.3);
    let cb = inner_generate(&prm, 1, 8).unwrap();
    let mut silent = BitVec::zeros(256);
    for i in 0..26 {
        silent.set(i * 9, true);
    }
    assert_eq!(inner_decode(&cb, &prm, &silent).unwrap(), DecodeOutcome::Silence);
    assert_eq!(inner_decode(&cb, &prm, &BitVec::ones(256)).unwrap(), DecodeOutcome::DeclaredError);
}

fn codebook_digest(cb: &InnerCodebook) -> String {
    let mut h = Sha256::new();
    for c in cb.codewords() {
        h.update(c.to_hex().as_bytes());
    }
    hex::encode(h.finalize())
}

#[test]
fn codebooks_are_determined_by_seed_and_params() {
    let prm = params(64, 4, 0.3, 0.4, 0.9, 0.4);
    let a = codebook_digest(&inner_generate(&prm, 2, 77).unwrap());
    assert_eq!(a, codebook_digest(&inner_generate(&prm, 2, 77).unwrap()));
    assert_ne!(a, codebook_digest(&inner_generate(&prm, 2, 78).unwrap()));
    assert_ne!(a, codebook_digest(&inner_generate(&prm, 3, 77).unwrap()));
}

#[test]
fn type_classes_close_to_one() {
    for (len, rho, cz1) in [(20u64, 0.1, 7u64), (12, 0.3, 0), (16, 0.05, 16)] {
        let mut total = 0.0;
        for c11 in 0..=cz1 {
            for c10 in 0..=len - cz1 {
                total += type_class_log2prob_counts(len, rho, c10, c11, cz1).unwrap().exp2();
            }
        }
        assert!((total - 1.0).abs() < 1e-13, "len={len} total={total}");
    }
}

#[test]
fn type_class_matches_sampling() {
    let (len, rho) = (64usize, 0.1);
    let mut z = BitVec::zeros(len);
    for i in 0..20 {
        z.set(3 * i, true);
    }
    let (c10, c11) = (4usize, 2usize);
    let prob = type_class_log2prob_counts(len as u64, rho, c10 as u64, c11 as u64, 20).unwrap().exp2();
    let trials = 1_000_000u64;
    let mut rng = seed::stream(1234, &[]);
    let mut hits = 0u64;
    for _ in 0..trials {
        let x = bernoulli_vector(len, rho, &mut rng);
        let s = pair_stats(&x, &z).unwrap();
        hits += (s.n10 == c10 && s.n11 == c11) as u64;
    }
    let freq = hits as f64 / trials as f64;
    let sigma = (prob * (1.0 - prob) / trials as f64).sqrt();
    assert!((freq - prob).abs() <= 3.0 * sigma, "freq {freq} prob {prob} sigma {sigma}");
}

#[test]
fn class_counts_concentrate_across_codebooks() {
    // 2^14 codewords of length 16 at rho = 1/4; class (2, 2) given |z| = 8.
    let (len, m, rho) = (16usize, 14u32, 0.25);
    let mut z = BitVec::zeros(len);
    for i in 0..8 {
        z.set(2 * i, true);
    }
    let prob = type_class_log2prob_counts(len as u64, rho, 2, 2, 8).unwrap().exp2();
    let expected = prob * (1u64 << m) as f64;
    assert!(expected >= 1e3);
    for book in 0..50u64 {
        let cb = generate_raw(len, m, rho, 0, book, 0, 1 << 30).unwrap();
        let count = cb
            .codewords()
            .iter()
            .filter(|x| {
                let s = pair_stats(x, &z).unwrap();
                s.n10 == 2 && s.n11 == 2
            })
            .count() as f64;
        assert!((count - expected).abs() <= 0.2 * expected, "book {book}: {count} vs {expected}");
    }
}

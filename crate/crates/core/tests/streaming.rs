//! Streaming reads, bulk generation and file replay must all agree.

use std::sync::Arc;

use num_bigint::BigUint;
use proptest::prelude::*;

use normlab::analytics::{analyze, AnalyzeOptions, WindowMode};
use normlab::digits::{
    read_bits_file, sqrt_digits, write_bits_file, BitBuffer, BufferSource, SourceSpec,
};

fn non_square(m: &u64) -> bool {
    let r = (*m as f64).sqrt() as u64;
    r * r != *m && (r + 1) * (r + 1) != *m
}

fn spec_strategy() -> impl Strategy<Value = SourceSpec> {
    prop_oneof![
        (2u64..500)
            .prop_filter("perfect square", non_square)
            .prop_map(|m| SourceSpec::Sqrt { m }),
        (1u64..50, 1u64..50).prop_map(|(p, q)| SourceSpec::Rational { p, q }),
        Just(SourceSpec::Champernowne2),
        Just(SourceSpec::CopelandErdos2),
        Just(SourceSpec::ConstantOnes),
        Just(SourceSpec::Alternating),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chunked_reads_equal_bulk(spec in spec_strategy(), chunks in prop::collection::vec(1usize..700, 1..12)) {
        let total: usize = chunks.iter().sum();
        let bulk = spec.generate(total).unwrap();
        let mut src = spec.open().unwrap();
        let mut streamed = BitBuffer::new();
        for c in &chunks {
            prop_assert_eq!(src.read_into(*c, &mut streamed).unwrap(), *c);
        }
        prop_assert_eq!(src.position(), total);
        prop_assert_eq!(streamed, bulk);
    }

    #[test]
    fn prefixes_are_stable(spec in spec_strategy(), n in 1usize..2000, extra in 1usize..2000) {
        let short = spec.generate(n).unwrap();
        let long = spec.generate(n + extra).unwrap();
        prop_assert_eq!(long.prefix(n), short);
    }

    #[test]
    fn sqrt_digits_match_library_root(m in (2u64..10_000).prop_filter("perfect square", non_square), n in 1usize..600) {
        // For a non-square m with L integer bits, the first n digits are
        // ⌊√m · 2^(n−L)⌋; compare against num-bigint's own square root.
        let d = sqrt_digits(m, n).unwrap();
        let int_bits = (m as f64).sqrt().floor().log2().floor() as usize + 1;
        let shift = 2 * (n as i64 - int_bits as i64);
        let root = if shift >= 0 {
            (BigUint::from(m) << shift as usize).sqrt()
        } else {
            BigUint::from(m).sqrt() >> ((-shift / 2) as usize)
        };
        prop_assert_eq!(d.to_string01(), root.to_str_radix(2));
    }
}

#[test]
fn sqrt2_scale_invariance() {
    // Digits of √2 · 2^p are the digits of √2: the n-digit prefix is the top
    // n bits of ⌊√(2·4^(n−1+p))⌋ for every p.
    for n in [1usize, 5, 21, 64, 333] {
        let d = sqrt_digits(2, n).unwrap().to_string01();
        for p in [0usize, 1, 7, 40] {
            let wide = (BigUint::from(2u32) << (2 * (n - 1 + p)))
                .sqrt()
                .to_str_radix(2);
            assert_eq!(&wide[..n], d, "n = {n}, p = {p}");
        }
    }
}

#[test]
fn file_replay_matches_live_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sqrt2.nbits");
    let spec = SourceSpec::Sqrt { m: 2 };
    let bits = spec.generate(50_000).unwrap();
    write_bits_file(&bits, &path).unwrap();
    let back = read_bits_file(&path).unwrap();
    assert_eq!(back, bits);

    let opts = AnalyzeOptions {
        checkpoints: vec![10, 1000, 50_000],
        ns_checkpoints: Some(vec![8, 16, 32]),
        block_lengths: vec![1, 2, 3],
        mode: WindowMode::Disjoint,
        ..Default::default()
    };
    let live = analyze(Arc::new(bits), spec.clone(), &opts).unwrap();
    let replay = BufferSource::from_file(&path).unwrap();
    assert_eq!(replay.len(), 50_000);
    let from_file = analyze(Arc::new(back), spec, &opts).unwrap();
    assert_eq!(live.to_json().unwrap(), from_file.to_json().unwrap());
}

//! Decomposition along a Cantor normal form sum, in both directions.

use emlab::largeness::{decompose_large, is_alpha_large, LargenessError};
use emlab::ordinal::Term;
use emlab::{FinSet, Ordinal};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plain stepping on `(exponent, coefficient)` lists, highest term first.
fn residue(elements: &[u64], terms: &[(u32, u64)]) -> Vec<(u32, u64)> {
    let mut a = terms.to_vec();
    for &x in elements {
        let Some((e, k)) = a.pop() else { break };
        if k > 1 {
            a.push((e, k - 1));
        }
        if e > 0 && x > 0 {
            a.push((e - 1, x));
        }
    }
    a
}

fn pairs(o: &Ordinal) -> Vec<(u32, u64)> {
    o.terms().iter().map(|t| (t.exponent, t.coefficient)).collect()
}

/// Random sum below `ω^3·2`, cut into consecutive parts listed trailing-first.
fn random_parts(rng: &mut ChaCha8Rng) -> Vec<Ordinal> {
    let mut terms: Vec<(u32, u64)> = Vec::new();
    for e in (0..3u32).rev() {
        if rng.random_bool(0.6) {
            terms.push((e, rng.random_range(1..=4)));
        }
    }
    if rng.random_bool(0.15) {
        terms.insert(0, (3, 1));
    }
    if terms.is_empty() {
        terms.push((0, rng.random_range(1..=4)));
    }
    // Split every coefficient into unit pieces, then regroup runs of them.
    let units: Vec<(u32, u64)> = terms.iter().flat_map(|&(e, k)| (0..k).map(move |_| (e, 1))).collect();
    let mut parts: Vec<Vec<(u32, u64)>> = Vec::new();
    for u in units.into_iter().rev() {
        match parts.last_mut() {
            Some(p) if rng.random_bool(0.5) => p.insert(0, u),
            _ => parts.push(vec![u]),
        }
    }
    parts
        .into_iter()
        .map(|p| {
            let merged = p.into_iter().fold(Vec::<(u32, u64)>::new(), |mut acc, (e, k)| {
                match acc.last_mut() {
                    Some(last) if last.0 == e => last.1 += k,
                    _ => acc.push((e, k)),
                }
                acc
            });
            Ordinal::from_terms(merged.into_iter().map(|(e, k)| Term::new(e, k)).collect()).unwrap()
        })
        .collect()
}

fn random_set(rng: &mut ChaCha8Rng) -> FinSet {
    let min = rng.random_range(0..9u64);
    let len = rng.random_range(1..=10_000usize);
    let sparse = rng.random_bool(0.3);
    let mut x = min;
    let mut v = Vec::with_capacity(len);
    for _ in 0..len {
        v.push(x);
        x += if sparse { rng.random_range(1..4) } else { 1 };
    }
    FinSet::new(v).unwrap()
}

#[test]
fn decomposition_succeeds_exactly_on_large_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut succeeded, mut refused) = (0, 0);
    for _ in 0..500 {
        let parts = random_parts(&mut rng);
        let set = random_set(&mut rng);
        let sum = Ordinal::make_sum(&parts.iter().rev().cloned().collect::<Vec<_>>()).unwrap();
        let large = residue(set.as_slice(), &pairs(&sum)).is_empty();
        assert_eq!(is_alpha_large(&set, &sum).unwrap(), large);
        match decompose_large(&set, &parts) {
            Ok(blocks) => {
                assert!(large, "decomposed a set that is not {sum}-large: {set}");
                succeeded += 1;
                assert_eq!(blocks.len(), parts.len());
                let flat: Vec<u64> = blocks.iter().flat_map(|b| b.iter()).collect();
                assert_eq!(flat, set.as_slice());
                for (b, p) in blocks.iter().zip(&parts) {
                    assert!(residue(b.as_slice(), &pairs(p)).is_empty(), "{b} is not {p}-large");
                }
            }
            Err(LargenessError::InsufficientLargeness { .. }) => {
                assert!(!large, "refused a {sum}-large set {set}");
                refused += 1;
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }
    assert!(succeeded > 50 && refused > 50, "{succeeded} / {refused}");
}

fn arb_monomials() -> impl Strategy<Value = Vec<Ordinal>> {
    // Trailing-first parts whose exponents never decrease. An ω^2 part is
    // only reachable while the start is still small, so it comes first.
    let low = proptest::collection::vec((0u32..2, 1u64..4), 1..5).prop_map(|mut v| {
        v.sort_by_key(|&(e, _)| e);
        v.into_iter().map(|(e, k)| Ordinal::monomial(e, k)).collect::<Vec<_>>()
    });
    let square = (0u64..3).prop_map(|k| {
        let mut v = vec![Ordinal::omega_pow(2)];
        if k > 0 {
            v.insert(0, Ordinal::finite(k));
        }
        v
    });
    prop_oneof![low, square]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn minimal_blocks_concatenate_to_a_large_set(parts in arb_monomials(), start in 4u64..7) {
        let mut blocks: Vec<Vec<u64>> = Vec::new();
        let mut next = start;
        for p in &parts {
            let mut block = Vec::new();
            let mut left = pairs(p);
            while !left.is_empty() {
                left = residue(&[next], &left);
                block.push(next);
                next += 1;
                prop_assume!(next < 200_000);
            }
            blocks.push(block);
        }
        let flat: Vec<u64> = blocks.concat();
        let set = FinSet::new(flat).unwrap();
        let sum = Ordinal::make_sum(&parts.iter().rev().cloned().collect::<Vec<_>>()).unwrap();
        prop_assert!(is_alpha_large(&set, &sum).unwrap());
        let got = decompose_large(&set, &parts).unwrap();
        let got: Vec<Vec<u64>> = got.into_iter().map(FinSet::into_vec).collect();
        prop_assert_eq!(got, blocks);
    }
}

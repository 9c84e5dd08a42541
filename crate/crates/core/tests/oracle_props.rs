//! Oracle-layer invariants: set algebra, residual identities, structural
//! checks against an independent pairwise checker, and access gating.

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use substream_core::matroid::Matroid;
use substream_core::oracle::{
    restrict, verify_monotone_submodular, AccessPolicy, Coverage, FnOracle, OracleSession, Verdict,
};
use substream_core::{ElementId, ElementSet, Value, ValueOracle};

fn set_of(mask: u64, n: usize) -> ElementSet {
    (0..n as u32).filter(|i| mask >> i & 1 == 1).map(ElementId).collect()
}

/// Brute-force `S ⊆ T` form of diminishing returns plus monotonicity.
fn pairwise_ok(f: &dyn ValueOracle) -> bool {
    let n = f.ground_size();
    let vals: Vec<Value> = (0..1u64 << n).map(|m| f.value(&set_of(m, n))).collect();
    for t in 0..1u64 << n {
        for s in 0..1u64 << n {
            if s & !t != 0 {
                continue;
            }
            if vals[s as usize] > vals[t as usize] {
                return false;
            }
            for e in 0..n {
                let eb = 1u64 << e;
                if t & eb == 0
                    && &vals[(s | eb) as usize] - &vals[s as usize] < &vals[(t | eb) as usize] - &vals[t as usize]
                {
                    return false;
                }
            }
        }
    }
    true
}

fn coverage(seed: u64, n: usize) -> Coverage {
    Coverage::random(&mut ChaCha8Rng::seed_from_u64(seed), n, 2 * n, 0.4, 9)
}

proptest! {
    #[test]
    fn mask_round_trip(mask in 0u64..(1 << 20)) {
        let s = ElementSet::from_mask(mask);
        prop_assert_eq!(s.to_mask(), Some(mask));
        prop_assert_eq!(s.len() as u32, mask.count_ones());
        prop_assert!(s.as_slice().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn union_and_with(a in 0u64..4096, b in 0u64..4096, e in 0u32..12) {
        let (sa, sb) = (ElementSet::from_mask(a), ElementSet::from_mask(b));
        prop_assert_eq!(sa.union(&sb), ElementSet::from_mask(a | b));
        prop_assert_eq!(sa.union(&sb), sb.union(&sa));
        prop_assert_eq!(sa.with(ElementId(e)), ElementSet::from_mask(a | 1 << e));
        prop_assert!(sa.is_subset(&sa.union(&sb)));
    }

    #[test]
    fn coverage_is_monotone_submodular(seed in any::<u64>(), n in 1usize..=7) {
        let f = coverage(seed, n);
        prop_assert!(pairwise_ok(&f));
        prop_assert_eq!(verify_monotone_submodular(&f, 14).unwrap(), Verdict::Ok);
    }

    #[test]
    fn residual_identity(seed in any::<u64>(), pinned in 0u64..64, t in 0u64..64) {
        let f = coverage(seed, 6);
        let s = set_of(pinned, 6);
        let g = restrict(&f, &s);
        let tt = set_of(t, 6);
        prop_assert_eq!(g.value(&tt), f.value(&tt.union(&s)) - f.value(&s));
        prop_assert_eq!(g.value(&ElementSet::new()), BigInt::from(0));
        prop_assert!(pairwise_ok(&g));
    }

    #[test]
    fn nested_restriction(seed in any::<u64>(), a in 0u64..64, b in 0u64..64, t in 0u64..64) {
        let f = coverage(seed, 6);
        let (sa, sb, tt) = (set_of(a, 6), set_of(b, 6), set_of(t, 6));
        let twice = restrict(&f, &sa).restrict(&sb);
        let once = restrict(&f, &sa.union(&sb));
        prop_assert_eq!(twice.value(&tt), once.value(&tt));
    }

    #[test]
    fn weak_policy_gates_exactly(mask in 0u64..256, k in 0usize..5) {
        let f = coverage(1, 8);
        let m = Matroid::uniform(8, k);
        let mut sess = OracleSession::new(&f, AccessPolicy::Weak(&m));
        let s = set_of(mask, 8);
        let r = sess.evaluate(&s);
        prop_assert_eq!(r.is_ok(), s.len() <= k);
        prop_assert_eq!(sess.audit().rejected_queries.len(), usize::from(s.len() > k));
        prop_assert_eq!(sess.audit().query_count, u64::from(s.len() <= k));
    }
}

#[test]
fn checker_catches_supermodular() {
    // f(S) = |S|² is monotone but not submodular
    let f = FnOracle::new(4, |s: &ElementSet| BigInt::from(s.len() * s.len()));
    assert!(!pairwise_ok(&f));
    assert!(matches!(verify_monotone_submodular(&f, 14).unwrap(), Verdict::Violated(_)));
}

#[test]
fn checker_catches_non_monotone() {
    let f = FnOracle::new(3, |s: &ElementSet| BigInt::from(if s.len() == 3 { 0 } else { s.len() }));
    assert!(!pairwise_ok(&f));
    assert!(!verify_monotone_submodular(&f, 14).unwrap().is_ok());
}

#[test]
fn rejected_queries_reveal_nothing() {
    let f = coverage(3, 5);
    let mut sess = OracleSession::new(&f, AccessPolicy::ElementStore);
    sess.begin_step(ElementId(0));
    assert!(sess.evaluate(&ElementSet::singleton(ElementId(1))).is_err());
    assert_eq!(sess.evaluate_or_zero(&ElementSet::singleton(ElementId(1))), BigInt::from(0));
    assert!(sess.audit().max_observed.is_none());
}

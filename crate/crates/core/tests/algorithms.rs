//! Guarantees of the branching algorithms at a fixed guess, driver
//! feasibility, and element-store compliance of the streaming baselines.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use substream_core::algs::baselines::{brute_force_optimum, offline_greedy, SieveStreaming, StoreAll};
use substream_core::algs::cardinality::CardTree;
use substream_core::algs::driver::guess_driver;
use substream_core::algs::matroid::MatTree;
use substream_core::algs::{run_stream, Constraint, StreamAlgorithm};
use substream_core::matroid::Matroid;
use substream_core::oracle::{replay_out_of_window, AccessPolicy, Coverage, OracleSession};
use substream_core::{ElementId, ElementSet, Value, ValueOracle};

fn coverage(seed: u64, n: usize) -> Coverage {
    Coverage::random(&mut ChaCha8Rng::seed_from_u64(seed), n, 2 * n, 0.35, 9)
}

fn shuffled(seed: u64, n: usize) -> Vec<ElementId> {
    let mut v: Vec<ElementId> = (0..n).map(ElementId::from).collect();
    v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
    v
}

fn max_feasible(f: &dyn ValueOracle, ok: impl Fn(&ElementSet) -> bool) -> Value {
    let n = f.ground_size();
    (0..1u64 << n)
        .map(ElementSet::from_mask)
        .filter(|s| ok(s))
        .map(|s| f.value(&s))
        .max()
        .unwrap_or_default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    /// For `v ≤ g(OPT)`, the cardinality tree returns `g(S) ≥ K/(2K−1)·v`.
    #[test]
    fn cardinality_tree_guarantee(seed in any::<u64>(), n in 1usize..=8, k in 1usize..=3, num in 1u32..=8) {
        let f = coverage(seed, n);
        let empty = f.value(&ElementSet::new());
        let opt = max_feasible(&f, |s| s.len() <= k) - &empty;
        let v = BigRational::new(opt * BigInt::from(num), BigInt::from(8));
        let mut tree = CardTree::new(k, v.clone());
        let uniform = Matroid::uniform(n, k);
        let mut sess = OracleSession::new(&f, AccessPolicy::Weak(&uniform));
        let rep = run_stream(&mut tree, &shuffled(seed, n), &mut sess);
        let gain = BigRational::from_integer(rep.value.clone() - empty);
        prop_assert!(gain * BigInt::from(2 * k - 1) >= v * BigInt::from(k));
        prop_assert!(rep.solution.len() <= k);
        prop_assert_eq!(rep.value, f.value(&rep.solution));
        prop_assert_eq!(rep.violations, 0);
        prop_assert_eq!(rep.discipline_violations, 0);
    }

    /// For `v` at most the best basis value, the matroid tree returns
    /// `g(S) ≥ ½(1 − 1/K)·v` with `S` independent.
    #[test]
    fn matroid_tree_guarantee(seed in any::<u64>(), k in 1usize..=3, extra in 0usize..=4, num in 1u32..=4) {
        let n = k + extra;
        let f = coverage(seed, n);
        let m = Matroid::unit_partition((0..n).map(|e| e % k).collect());
        let empty = f.value(&ElementSet::new());
        let opt = max_feasible(&f, |s| m.is_independent(s)) - &empty;
        let v = BigRational::new(opt * BigInt::from(num), BigInt::from(4));
        let mut tree = MatTree::new(&m, v.clone(), false).unwrap();
        let mut sess = OracleSession::new(&f, AccessPolicy::Weak(&m));
        let rep = run_stream(&mut tree, &shuffled(seed, n), &mut sess);
        let gain = BigRational::from_integer(rep.value.clone() - empty);
        let factor = BigRational::new(BigInt::from(k - 1), BigInt::from(2 * k));
        prop_assert!(gain >= factor * v);
        prop_assert!(m.is_independent(&rep.solution));
        prop_assert_eq!(rep.value, f.value(&rep.solution));
        prop_assert_eq!(rep.violations, 0);
    }

    #[test]
    fn driver_outputs_feasible_sets(seed in any::<u64>(), n in 1usize..=8, k in 1usize..=3, partition in any::<bool>()) {
        let f = coverage(seed, n);
        let c = if partition {
            Constraint::matroid(Matroid::unit_partition((0..n).map(|e| e % k).collect()))
        } else {
            Constraint::cardinality(n, k)
        };
        let eps = BigRational::new(BigInt::from(1), BigInt::from(5));
        let rep = guess_driver(&f, &shuffled(seed, n), eps, &c).unwrap();
        prop_assert!(c.is_feasible(&rep.solution));
        prop_assert_eq!(rep.violations, 0);
        prop_assert_eq!(&rep.value, &f.value(&rep.solution));
        prop_assert!(rep.value <= brute_force_optimum(&f, &c).unwrap().1);
    }

    #[test]
    fn streaming_baselines_respect_element_store(seed in any::<u64>(), n in 1usize..=12, k in 1usize..=3, budget in 3usize..=9) {
        let f = coverage(seed, n);
        let c = Constraint::cardinality(n, k);
        let order = shuffled(seed, n);
        let eps = BigRational::new(BigInt::from(1), BigInt::from(10));
        let mut sieve = SieveStreaming::new(&c, eps, Some(budget.max(k))).unwrap();
        let mut store = StoreAll::new(&c);
        for alg in [&mut sieve as &mut dyn StreamAlgorithm, &mut store] {
            let mut sess = OracleSession::new(&f, AccessPolicy::ElementStore).with_logging();
            let rep = run_stream(alg, &order, &mut sess);
            prop_assert_eq!(rep.violations, 0);
            prop_assert!(c.is_feasible(&rep.solution));
            let replayed = replay_out_of_window(sess.query_log().unwrap(), sess.window_log().unwrap());
            prop_assert!(replayed.is_empty());
        }
    }
}

/// Queries the element that arrived one step earlier without storing it.
struct LooksBack {
    prev: Option<ElementId>,
}

impl StreamAlgorithm for LooksBack {
    fn process(&mut self, e: ElementId, sess: &mut OracleSession<'_>) {
        if let Some(p) = self.prev {
            sess.evaluate_or_zero(&ElementSet::singleton(p).with(e));
        }
        self.prev = Some(e);
    }

    fn stored_count(&self) -> usize {
        0
    }

    fn stored_elements(&self) -> ElementSet {
        ElementSet::new()
    }

    fn finish(&mut self, _sess: &mut OracleSession<'_>) -> (ElementSet, Value) {
        (ElementSet::new(), Value::zero())
    }
}

#[test]
fn element_store_catches_undeclared_memory_live_and_on_replay() {
    let f = coverage(9, 5);
    let order = shuffled(9, 5);

    let mut sess = OracleSession::new(&f, AccessPolicy::ElementStore);
    let rep = run_stream(&mut LooksBack { prev: None }, &order, &mut sess);
    assert_eq!(rep.violations, 4);

    let mut sess = OracleSession::strong(&f).with_logging();
    run_stream(&mut LooksBack { prev: None }, &order, &mut sess);
    let replayed = replay_out_of_window(sess.query_log().unwrap(), sess.window_log().unwrap());
    assert_eq!(replayed.len(), 4);
}

#[test]
fn greedy_is_a_half_approximation_on_small_instances() {
    for seed in 0..40 {
        let f = coverage(seed, 7);
        let c = Constraint::cardinality(7, 3);
        let (s, v) = offline_greedy(&f, &c);
        let opt = brute_force_optimum(&f, &c).unwrap().1;
        assert!(c.is_feasible(&s));
        assert!(BigInt::from(2) * v >= opt);
    }
}

#[test]
fn fixed_guess_above_optimum_still_feasible() {
    let f = coverage(4, 6);
    let v = BigRational::from_integer(f.value(&(0..6).map(ElementId::from).collect())) * BigInt::from(3) + BigRational::one();
    let mut tree = CardTree::new(2, v);
    let mut sess = OracleSession::strong(&f);
    let rep = run_stream(&mut tree, &shuffled(4, 6), &mut sess);
    assert!(rep.solution.len() <= 2);
}

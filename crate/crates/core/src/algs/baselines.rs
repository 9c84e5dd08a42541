//! Reference points: exhaustive optimum, offline greedy, a threshold
//! ("sieve") streaming baseline, and a store-everything streaming baseline.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::driver::GuessGrid;
use super::{AlgStats, Constraint, StreamAlgorithm};
use crate::error::{Error, Result};
use crate::oracle::{ElementId, ElementSet, OracleSession, Value, ValueOracle};

/// Enumeration limit for cardinality constraints.
pub const BRUTE_FORCE_CARDINALITY_LIMIT: usize = 20;
/// Enumeration limit for general matroid constraints.
pub const BRUTE_FORCE_MATROID_LIMIT: usize = 16;

/// Exact maximizer over all feasible sets. Ties keep the set with the
/// smallest bitmask.
pub fn brute_force_optimum(oracle: &dyn ValueOracle, constraint: &Constraint) -> Result<(ElementSet, Value)> {
    let n = oracle.ground_size();
    let limit = if constraint.is_cardinality() {
        BRUTE_FORCE_CARDINALITY_LIMIT
    } else {
        BRUTE_FORCE_MATROID_LIMIT
    };
    if n > limit {
        return Err(Error::GroundSetTooLarge { n, limit });
    }
    let rank = constraint.rank() as u32;
    let mut best = (ElementSet::new(), oracle.value(&ElementSet::new()));
    for mask in 1u64..(1u64 << n) {
        if mask.count_ones() > rank {
            continue;
        }
        let set = ElementSet::from_mask(mask);
        if !constraint.is_feasible(&set) {
            continue;
        }
        let v = oracle.value(&set);
        if v > best.1 {
            best = (set, v);
        }
    }
    Ok(best)
}

/// Greedy augmentation through a session: repeatedly adds the feasible
/// candidate with the largest gain (lowest id on ties) while the gain is
/// positive.
pub fn greedy_over(
    sess: &mut OracleSession<'_>,
    candidates: &[ElementId],
    constraint: &Constraint,
) -> (ElementSet, Value) {
    let mut s = ElementSet::new();
    let mut fs = sess.evaluate_or_zero(&s);
    loop {
        let mut best: Option<(ElementId, Value)> = None;
        for &e in candidates {
            if s.contains(e) {
                continue;
            }
            let with = s.with(e);
            if !constraint.is_feasible(&with) {
                continue;
            }
            let v = sess.evaluate_or_zero(&with);
            if best.as_ref().is_none_or(|(be, bv)| v > *bv || (v == *bv && e < *be)) {
                best = Some((e, v));
            }
        }
        match best {
            Some((e, v)) if v > fs => {
                s.insert(e);
                fs = v;
            }
            _ => return (s, fs),
        }
    }
}

/// Offline greedy with strong access to every element.
pub fn offline_greedy(oracle: &dyn ValueOracle, constraint: &Constraint) -> (ElementSet, Value) {
    let mut sess = OracleSession::strong(oracle);
    let all: Vec<ElementId> = (0..oracle.ground_size()).map(ElementId::from).collect();
    greedy_over(&mut sess, &all, constraint)
}

/// Threshold streaming: one candidate set per guess `v = (1+ε)^i` in
/// `[m, 2Km]`; `e` joins the set `S` of guess `v` if `S + e` is feasible,
/// `|S| < K` and its gain is at least `(v/2 − g(S))/(K − |S|)`.
///
/// With a budget `s`, at most `⌊s/K⌋` guesses (the lowest in the window)
/// run at once, so at most `s` elements are retained.
pub struct SieveStreaming<'c> {
    constraint: &'c Constraint,
    grid: GuessGrid,
    budget: Option<usize>,
    empty_value: Value,
    m: Value,
    sets: BTreeMap<i64, (ElementSet, Value)>,
    spawned_upto: Option<i64>,
    max_active: usize,
}

impl<'c> SieveStreaming<'c> {
    pub fn new(constraint: &'c Constraint, epsilon: BigRational, budget: Option<usize>) -> Result<Self> {
        if budget.is_some_and(|s| s < constraint.rank().max(1)) {
            return Err(Error::InvalidParams(format!(
                "budget {} cannot hold one solution of size {}",
                budget.unwrap_or(0),
                constraint.rank()
            )));
        }
        Ok(SieveStreaming {
            constraint,
            // window [m, 2Km] is the guess window of a grid built for 2K
            // after scaling; handled directly in `window` below
            grid: GuessGrid::new(epsilon, constraint.rank().max(1))?,
            budget,
            empty_value: Value::zero(),
            m: Value::zero(),
            sets: BTreeMap::new(),
            spawned_upto: None,
            max_active: 0,
        })
    }

    fn cap(&self) -> usize {
        self.budget.map_or(usize::MAX, |s| s / self.constraint.rank().max(1))
    }

    /// Indices with `m ≤ (1+ε)^i ≤ 2Km`.
    fn window(&mut self) -> Option<(i64, i64)> {
        if self.m <= Value::zero() {
            return None;
        }
        let mr = BigRational::from_integer(self.m.clone());
        let upper = &mr * BigInt::from(2 * self.constraint.rank().max(1));
        let mut lo = 0i64;
        while self.grid.power(lo) < mr {
            lo += 1;
        }
        while self.grid.power(lo - 1) >= mr {
            lo -= 1;
        }
        let mut hi = lo;
        while self.grid.power(hi + 1) <= upper {
            hi += 1;
        }
        (self.grid.power(lo) <= upper).then_some((lo, hi))
    }
}

impl StreamAlgorithm for SieveStreaming<'_> {
    fn start(&mut self, sess: &mut OracleSession<'_>) {
        self.empty_value = sess.evaluate_or_zero(&ElementSet::new());
    }

    fn process(&mut self, e: ElementId, sess: &mut OracleSession<'_>) {
        let single = ElementSet::singleton(e);
        if self.constraint.is_feasible(&single) {
            let gain = sess.evaluate_or_zero(&single) - &self.empty_value;
            if gain > self.m {
                self.m = gain;
            }
        }
        if let Some((lo, hi)) = self.window() {
            self.sets.retain(|&i, _| i >= lo);
            let from = self.spawned_upto.map_or(lo, |s| (s + 1).max(lo));
            for i in from..=hi {
                if self.sets.len() >= self.cap() {
                    break;
                }
                self.sets.insert(i, (ElementSet::new(), self.empty_value.clone()));
                self.spawned_upto = Some(i);
            }
        }
        self.max_active = self.max_active.max(self.sets.len());

        let k = self.constraint.rank();
        let indices: Vec<i64> = self.sets.keys().copied().collect();
        for i in indices {
            let v = self.grid.power(i);
            let (s, fs) = &self.sets[&i];
            if s.len() >= k {
                continue;
            }
            let with = s.with(e);
            if !self.constraint.is_feasible(&with) {
                continue;
            }
            let val = sess.evaluate_or_zero(&with);
            let gain = BigRational::from_integer(&val - fs);
            let have = BigRational::from_integer(fs - &self.empty_value);
            let need = (v / BigInt::from(2) - have) / BigInt::from(k - s.len());
            if gain >= need {
                self.sets.insert(i, (with, val));
            }
        }
    }

    fn stored_count(&self) -> usize {
        self.sets.values().map(|(s, _)| s.len()).sum()
    }

    fn stored_elements(&self) -> ElementSet {
        self.sets.values().fold(ElementSet::new(), |acc, (s, _)| acc.union(s))
    }

    fn finish(&mut self, _sess: &mut OracleSession<'_>) -> (ElementSet, Value) {
        let mut best = (ElementSet::new(), self.empty_value.clone());
        for (s, v) in self.sets.values() {
            if v > &best.1 {
                best = (s.clone(), v.clone());
            }
        }
        best
    }

    fn stats(&self) -> AlgStats {
        AlgStats { max_active_guesses: self.max_active, ..AlgStats::default() }
    }
}

/// Keeps every element and runs greedy over all of them at the end.
pub struct StoreAll<'c> {
    constraint: &'c Constraint,
    stored: Vec<ElementId>,
}

impl<'c> StoreAll<'c> {
    pub fn new(constraint: &'c Constraint) -> Self {
        StoreAll { constraint, stored: Vec::new() }
    }
}

impl StreamAlgorithm for StoreAll<'_> {
    fn process(&mut self, e: ElementId, _sess: &mut OracleSession<'_>) {
        self.stored.push(e);
    }

    fn stored_count(&self) -> usize {
        self.stored.len()
    }

    fn stored_elements(&self) -> ElementSet {
        self.stored.iter().copied().collect()
    }

    fn finish(&mut self, sess: &mut OracleSession<'_>) -> (ElementSet, Value) {
        let mut order = self.stored.clone();
        order.sort();
        greedy_over(sess, &order, self.constraint)
    }
}

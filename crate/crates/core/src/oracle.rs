//! Exact-valued set functions, residual (conditioned) functions, query
//! gating under strong / weak / element-store access, and exhaustive
//! verification of monotonicity and submodularity on small ground sets.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, PolicyViolation};
use crate::matroid::Matroid;

/// Exact function value. Hard-instance values overflow 64 bits quickly, so
/// every value in the crate is an arbitrary-precision integer.
pub type Value = BigInt;

/// Default ground-set limit for [`verify_monotone_submodular`].
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 14;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub u32);

impl ElementId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for ElementId {
    fn from(i: usize) -> Self {
        ElementId(i as u32)
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// A duplicate-free set of elements, kept sorted.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementSet(Vec<ElementId>);

impl ElementSet {
    pub fn new() -> Self {
        ElementSet(Vec::new())
    }

    pub fn singleton(e: ElementId) -> Self {
        ElementSet(vec![e])
    }

    /// Bit `i` of `mask` selects element `i`.
    pub fn from_mask(mask: u64) -> Self {
        let mut v = Vec::with_capacity(mask.count_ones() as usize);
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros();
            v.push(ElementId(i));
            m &= m - 1;
        }
        ElementSet(v)
    }

    /// Inverse of [`ElementSet::from_mask`]; `None` if an id is ≥ 64.
    pub fn to_mask(&self) -> Option<u64> {
        let mut mask = 0u64;
        for e in &self.0 {
            if e.0 >= 64 {
                return None;
            }
            mask |= 1 << e.0;
        }
        Some(mask)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: ElementId) -> bool {
        self.0.binary_search(&e).is_ok()
    }

    pub fn insert(&mut self, e: ElementId) -> bool {
        match self.0.binary_search(&e) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, e);
                true
            }
        }
    }

    pub fn remove(&mut self, e: ElementId) -> bool {
        match self.0.binary_search(&e) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    /// `self + e` as a new set.
    pub fn with(&self, e: ElementId) -> Self {
        let mut s = self.clone();
        s.insert(e);
        s
    }

    pub fn union(&self, other: &ElementSet) -> Self {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(self.0[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        ElementSet(out)
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        self.0.iter().all(|e| other.contains(*e))
    }

    pub fn iter(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[ElementId] {
        &self.0
    }

    pub fn max_id(&self) -> Option<ElementId> {
        self.0.last().copied()
    }
}

impl FromIterator<ElementId> for ElementSet {
    fn from_iter<I: IntoIterator<Item = ElementId>>(iter: I) -> Self {
        let set: BTreeSet<ElementId> = iter.into_iter().collect();
        ElementSet(set.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a ElementSet {
    type Item = &'a ElementId;
    type IntoIter = std::slice::Iter<'a, ElementId>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter().map(|e| e.0)).finish()
    }
}

/// A deterministic set function over the ground set `{0, …, n−1}`.
///
/// Implementations must be pure: the same set always yields the same value.
pub trait ValueOracle: Send + Sync {
    fn ground_size(&self) -> usize;

    fn value(&self, set: &ElementSet) -> Value;
}

impl<T: ValueOracle + ?Sized> ValueOracle for &T {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn value(&self, set: &ElementSet) -> Value {
        (**self).value(set)
    }
}

impl<T: ValueOracle + ?Sized> ValueOracle for Box<T> {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn value(&self, set: &ElementSet) -> Value {
        (**self).value(set)
    }
}

/// `f(T ∪ S) − f(S)` evaluated directly on the base oracle.
pub fn marginal(oracle: &dyn ValueOracle, t: &ElementSet, s: &ElementSet) -> Value {
    oracle.value(&t.union(s)) - oracle.value(s)
}

/// The residual function `g(T) = f(T ∪ S) − f(S)` for a pinned set `S`.
///
/// `f(S)` is queried once at construction.
pub struct ResidualOracle<'a> {
    base: &'a dyn ValueOracle,
    pinned: ElementSet,
    pinned_value: Value,
}

pub fn restrict<'a>(oracle: &'a dyn ValueOracle, pinned: &ElementSet) -> ResidualOracle<'a> {
    ResidualOracle {
        base: oracle,
        pinned_value: oracle.value(pinned),
        pinned: pinned.clone(),
    }
}

impl<'a> ResidualOracle<'a> {
    pub fn pinned(&self) -> &ElementSet {
        &self.pinned
    }

    pub fn pinned_value(&self) -> &Value {
        &self.pinned_value
    }

    /// Flattened nesting: the result is a residual of the same base with
    /// the union of both pinned sets.
    pub fn restrict(&self, more: &ElementSet) -> ResidualOracle<'a> {
        restrict(self.base, &self.pinned.union(more))
    }
}

impl ValueOracle for ResidualOracle<'_> {
    fn ground_size(&self) -> usize {
        self.base.ground_size()
    }

    fn value(&self, set: &ElementSet) -> Value {
        self.base.value(&set.union(&self.pinned)) - &self.pinned_value
    }
}

/// Modular function with non-negative integer weights.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Additive {
    pub weights: Vec<u64>,
}

impl Additive {
    pub fn new(weights: Vec<u64>) -> Self {
        Additive { weights }
    }
}

impl ValueOracle for Additive {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, set: &ElementSet) -> Value {
        set.iter().map(|e| BigInt::from(self.weights[e.index()])).sum()
    }
}

/// Weighted coverage: element `i` covers `covers[i]` ⊆ universe, and
/// `f(S)` is the total weight of the union of covered items.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Coverage {
    pub covers: Vec<Vec<u32>>,
    pub item_weights: Vec<u64>,
}

impl Coverage {
    pub fn new(covers: Vec<Vec<u32>>, item_weights: Vec<u64>) -> Self {
        Coverage { covers, item_weights }
    }

    /// Random instance: each element covers each item independently with
    /// probability `density`, item weights uniform in `1..=max_weight`.
    pub fn random<R: rand::Rng>(
        rng: &mut R,
        n: usize,
        universe: usize,
        density: f64,
        max_weight: u64,
    ) -> Self {
        let item_weights = (0..universe).map(|_| rng.gen_range(1..=max_weight)).collect();
        let covers = (0..n)
            .map(|_| (0..universe as u32).filter(|_| rng.gen_bool(density)).collect())
            .collect();
        Coverage { covers, item_weights }
    }
}

impl ValueOracle for Coverage {
    fn ground_size(&self) -> usize {
        self.covers.len()
    }

    fn value(&self, set: &ElementSet) -> Value {
        let mut seen = vec![false; self.item_weights.len()];
        let mut total = 0u64;
        for e in set.iter() {
            for &item in &self.covers[e.index()] {
                let slot = &mut seen[item as usize];
                if !*slot {
                    *slot = true;
                    total += self.item_weights[item as usize];
                }
            }
        }
        BigInt::from(total)
    }
}

/// Wraps a closure as an oracle; mostly for tests and ad-hoc functions.
pub struct FnOracle<F> {
    n: usize,
    f: F,
}

impl<F> FnOracle<F>
where
    F: Fn(&ElementSet) -> Value + Send + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        FnOracle { n, f }
    }
}

impl<F> ValueOracle for FnOracle<F>
where
    F: Fn(&ElementSet) -> Value + Send + Sync,
{
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, set: &ElementSet) -> Value {
        (self.f)(set)
    }
}

/// Which sets an algorithm may evaluate.
#[derive(Clone, Copy, Debug)]
pub enum AccessPolicy<'a> {
    /// Any set.
    Strong,
    /// Only sets independent in the constraint.
    Weak(&'a Matroid),
    /// Only subsets of the currently stored set plus the current arrival.
    ElementStore,
}

impl AccessPolicy<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            AccessPolicy::Strong => "strong",
            AccessPolicy::Weak(_) => "weak",
            AccessPolicy::ElementStore => "element-store",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub set: ElementSet,
    pub step: usize,
    pub reason: String,
}

/// Query and space accounting for one run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleAudit {
    pub query_count: u64,
    /// Peak number of elements retained by the algorithm's live state.
    pub max_stored: usize,
    pub rejected_queries: Vec<Rejection>,
    /// Largest value returned to the algorithm by any admitted query.
    #[serde(with = "crate::serde_value::option")]
    pub max_observed: Option<Value>,
    /// Optional self-reported auxiliary memory, in words.
    pub memory_words: Option<u64>,
}

impl OracleAudit {
    pub fn compliant(&self) -> bool {
        self.rejected_queries.is_empty()
    }
}

/// One admitted or rejected query, in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryRecord {
    pub step: usize,
    pub set: ElementSet,
    pub admitted: bool,
}

/// Stored set and arrival in effect at a given step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowRecord {
    pub step: usize,
    pub stored: ElementSet,
    pub arrival: Option<ElementId>,
}

/// Mediates every query an algorithm makes: enforces the access policy,
/// counts queries and tracks stored-element peaks.
///
/// Steps are 1-based; step 0 is "before the first arrival" and
/// `ground_size + 1` is used after the stream ends.
pub struct OracleSession<'a> {
    oracle: &'a dyn ValueOracle,
    policy: AccessPolicy<'a>,
    audit: OracleAudit,
    step: usize,
    // declared by the algorithm; becomes the window at the next step
    stored: ElementSet,
    window: ElementSet,
    arrival: Option<ElementId>,
    query_log: Option<Vec<QueryRecord>>,
    window_log: Option<Vec<WindowRecord>>,
}

impl<'a> OracleSession<'a> {
    pub fn new(oracle: &'a dyn ValueOracle, policy: AccessPolicy<'a>) -> Self {
        OracleSession {
            oracle,
            policy,
            audit: OracleAudit::default(),
            step: 0,
            stored: ElementSet::new(),
            window: ElementSet::new(),
            arrival: None,
            query_log: None,
            window_log: None,
        }
    }

    pub fn strong(oracle: &'a dyn ValueOracle) -> Self {
        Self::new(oracle, AccessPolicy::Strong)
    }

    /// Keep a full query log and stored-set history for later replay.
    pub fn with_logging(mut self) -> Self {
        self.query_log = Some(Vec::new());
        self.window_log = Some(Vec::new());
        self
    }

    pub fn ground_size(&self) -> usize {
        self.oracle.ground_size()
    }

    pub fn policy(&self) -> AccessPolicy<'a> {
        self.policy
    }

    /// Whether algorithms must report their full stored set each step.
    pub fn tracks_window(&self) -> bool {
        matches!(self.policy, AccessPolicy::ElementStore) || self.window_log.is_some()
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Starts step `t`: queries may touch the stored set declared during
    /// step `t−1` plus `arrival`.
    pub fn begin_step(&mut self, arrival: ElementId) {
        self.step += 1;
        self.window = self.stored.clone();
        self.arrival = Some(arrival);
        self.log_window();
    }

    /// Marks the end of the stream; no arrival is current afterwards.
    pub fn end_stream(&mut self) {
        self.step += 1;
        self.window = self.stored.clone();
        self.arrival = None;
        self.log_window();
    }

    /// Declares the set the algorithm keeps after the current step.
    pub fn set_stored(&mut self, stored: ElementSet) {
        self.note_stored_count(stored.len());
        self.stored = stored;
    }

    pub fn note_stored_count(&mut self, count: usize) {
        if count > self.audit.max_stored {
            self.audit.max_stored = count;
        }
    }

    pub fn report_memory_words(&mut self, words: u64) {
        let w = self.audit.memory_words.get_or_insert(0);
        *w = (*w).max(words);
    }

    fn log_window(&mut self) {
        if let Some(log) = self.window_log.as_mut() {
            let rec = WindowRecord {
                step: self.step,
                stored: self.window.clone(),
                arrival: self.arrival,
            };
            match log.last_mut() {
                Some(last) if last.step == rec.step => *last = rec,
                _ => log.push(rec),
            }
        }
    }

    fn check(&self, set: &ElementSet) -> Result<(), PolicyViolation> {
        match self.policy {
            AccessPolicy::Strong => Ok(()),
            AccessPolicy::Weak(m) => {
                if m.is_independent(set) {
                    Ok(())
                } else {
                    Err(PolicyViolation::Infeasible { set: set.clone() })
                }
            }
            AccessPolicy::ElementStore => {
                let ok = set
                    .iter()
                    .all(|e| self.window.contains(e) || self.arrival == Some(e));
                if ok {
                    Ok(())
                } else {
                    Err(PolicyViolation::OutsideWindow { set: set.clone() })
                }
            }
        }
    }

    /// Returns `f(set)`, or records a rejection without revealing the value.
    pub fn evaluate(&mut self, set: &ElementSet) -> Result<Value, PolicyViolation> {
        let verdict = self.check(set);
        if let Some(log) = self.query_log.as_mut() {
            log.push(QueryRecord {
                step: self.step,
                set: set.clone(),
                admitted: verdict.is_ok(),
            });
        }
        match verdict {
            Ok(()) => {
                self.audit.query_count += 1;
                let v = self.oracle.value(set);
                if self.audit.max_observed.as_ref().is_none_or(|m| &v > m) {
                    self.audit.max_observed = Some(v.clone());
                }
                Ok(v)
            }
            Err(violation) => {
                self.audit.rejected_queries.push(Rejection {
                    set: set.clone(),
                    step: self.step,
                    reason: violation.to_string(),
                });
                Err(violation)
            }
        }
    }

    /// Like [`evaluate`](Self::evaluate) but maps a rejection to zero, so a
    /// misbehaving algorithm keeps running and every violation is recorded.
    pub fn evaluate_or_zero(&mut self, set: &ElementSet) -> Value {
        self.evaluate(set).unwrap_or_else(|_| Value::zero())
    }

    /// `f(T ∪ S) − f(S)` through two gated queries.
    pub fn marginal(&mut self, t: &ElementSet, s: &ElementSet) -> Result<Value, PolicyViolation> {
        let with = self.evaluate(&t.union(s))?;
        let without = self.evaluate(s)?;
        Ok(with - without)
    }

    pub fn audit(&self) -> &OracleAudit {
        &self.audit
    }

    pub fn into_audit(self) -> OracleAudit {
        self.audit
    }

    pub fn query_log(&self) -> Option<&[QueryRecord]> {
        self.query_log.as_deref()
    }

    pub fn window_log(&self) -> Option<&[WindowRecord]> {
        self.window_log.as_deref()
    }
}

/// Replays a logged run and returns every admitted query that fell outside
/// the stored set plus arrival in effect at its step.
pub fn replay_out_of_window(queries: &[QueryRecord], windows: &[WindowRecord]) -> Vec<QueryRecord> {
    let mut out = Vec::new();
    for q in queries.iter().filter(|q| q.admitted) {
        // last window record at or before the query's step
        let w = windows.iter().rev().find(|w| w.step <= q.step);
        let inside = match w {
            Some(w) => q.set.iter().all(|e| w.stored.contains(e) || w.arrival == Some(e)),
            None => q.set.is_empty(),
        };
        if !inside {
            out.push(q.clone());
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Monotonicity,
    Submodularity,
}

/// A concrete failure of monotonicity (`t` is unused and equals `s`) or of
/// diminishing returns: `f(S+e) − f(S) < f(T+e) − f(T)` with `S ⊆ T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub kind: ViolationKind,
    pub s: ElementSet,
    pub t: ElementSet,
    pub e: ElementId,
    pub marginal_s: Value,
    pub marginal_t: Value,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ViolationKind::Monotonicity => write!(
                f,
                "monotonicity fails: f({:?} + {}) − f({:?}) = {}",
                self.s, self.e, self.s, self.marginal_s
            ),
            ViolationKind::Submodularity => write!(
                f,
                "diminishing returns fails: S={:?} ⊆ T={:?}, e={}: {} < {}",
                self.s, self.t, self.e, self.marginal_s, self.marginal_t
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    Violated(Witness),
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Ok)
    }
}

/// Exhaustively checks monotonicity and submodularity.
///
/// Uses the local form of diminishing returns,
/// `f(S+e) − f(S) ≥ f(S+x+e) − f(S+x)` for all `S` and distinct `x, e ∉ S`,
/// which is equivalent to the `S ⊆ T` form. All `2^n` values are tabulated
/// first, so cost is `O(2^n · n²)` comparisons.
pub fn verify_monotone_submodular(oracle: &dyn ValueOracle, limit: usize) -> Result<Verdict, Error> {
    let n = oracle.ground_size();
    if n > limit || n > 30 {
        return Err(Error::GroundSetTooLarge { n, limit: limit.min(30) });
    }
    let full = 1usize << n;
    let table: Vec<Value> = (0..full).map(|m| oracle.value(&ElementSet::from_mask(m as u64))).collect();
    for s in 0..full {
        for x in 0..n {
            let xb = 1usize << x;
            if s & xb != 0 {
                continue;
            }
            if table[s | xb] < table[s] {
                return Ok(Verdict::Violated(Witness {
                    kind: ViolationKind::Monotonicity,
                    s: ElementSet::from_mask(s as u64),
                    t: ElementSet::from_mask(s as u64),
                    e: ElementId(x as u32),
                    marginal_s: &table[s | xb] - &table[s],
                    marginal_t: &table[s | xb] - &table[s],
                }));
            }
        }
        for x in 0..n {
            let xb = 1usize << x;
            if s & xb != 0 {
                continue;
            }
            let t = s | xb;
            for e in 0..n {
                let eb = 1usize << e;
                if e == x || s & eb != 0 {
                    continue;
                }
                let ms = &table[s | eb] - &table[s];
                let mt = &table[t | eb] - &table[t];
                if ms < mt {
                    return Ok(Verdict::Violated(Witness {
                        kind: ViolationKind::Submodularity,
                        s: ElementSet::from_mask(s as u64),
                        t: ElementSet::from_mask(t as u64),
                        e: ElementId(e as u32),
                        marginal_s: ms,
                        marginal_t: mt,
                    }));
                }
            }
        }
    }
    Ok(Verdict::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[u32]) -> ElementSet {
        v.iter().map(|&i| ElementId(i)).collect()
    }

    #[test]
    fn element_set_is_sorted_and_deduplicated() {
        let s = ids(&[3, 1, 3, 2]);
        assert_eq!(s.as_slice(), &[ElementId(1), ElementId(2), ElementId(3)]);
        assert_eq!(s.union(&ids(&[0, 3])), ids(&[0, 1, 2, 3]));
        assert!(ids(&[1, 3]).is_subset(&s));
        assert_eq!(ElementSet::from_mask(0b1011), ids(&[0, 1, 3]));
        assert_eq!(ids(&[0, 1, 3]).to_mask(), Some(0b1011));
    }

    #[test]
    fn strong_policy_counts_queries() {
        let f = Additive::new(vec![3, 2, 5]);
        let mut sess = OracleSession::strong(&f);
        assert_eq!(sess.evaluate(&ids(&[0, 1, 2])).unwrap(), BigInt::from(10));
        assert_eq!(sess.audit().query_count, 1);
    }

    #[test]
    fn weak_policy_rejects_infeasible_without_value() {
        let f = Additive::new(vec![1; 4]);
        let m = Matroid::uniform(4, 2);
        let mut sess = OracleSession::new(&f, AccessPolicy::Weak(&m));
        assert!(sess.evaluate(&ids(&[0, 1])).is_ok());
        let err = sess.evaluate(&ids(&[0, 1, 2])).unwrap_err();
        assert!(matches!(err, PolicyViolation::Infeasible { .. }));
        assert_eq!(sess.audit().query_count, 1);
        assert_eq!(sess.audit().rejected_queries.len(), 1);
        assert!(!sess.audit().compliant());
    }

    #[test]
    fn element_store_window() {
        // stored {a,b}, arrival c
        let f = Additive::new(vec![1; 4]);
        let mut sess = OracleSession::new(&f, AccessPolicy::ElementStore);
        sess.set_stored(ids(&[0, 1]));
        sess.begin_step(ElementId(2));
        assert!(sess.evaluate(&ids(&[0, 2])).is_ok());
        assert!(matches!(
            sess.evaluate(&ids(&[0, 3])),
            Err(PolicyViolation::OutsideWindow { .. })
        ));
        assert_eq!(sess.audit().max_stored, 2);
    }

    #[test]
    fn marginal_examples() {
        let f = Additive::new(vec![3, 2]);
        assert_eq!(marginal(&f, &ElementSet::new(), &ids(&[0])), BigInt::from(0));
        assert_eq!(marginal(&f, &ids(&[1]), &ids(&[0])), BigInt::from(2));
    }

    #[test]
    fn restrict_empty_is_identity() {
        let f = Coverage::new(vec![vec![0, 1], vec![1, 2], vec![2]], vec![1, 2, 3]);
        let g = restrict(&f, &ElementSet::new());
        for m in 0..8u64 {
            let s = ElementSet::from_mask(m);
            assert_eq!(g.value(&s), f.value(&s));
        }
    }

    #[test]
    fn additive_is_submodular() {
        let f = Additive::new(vec![4, 0, 7, 1]);
        assert_eq!(verify_monotone_submodular(&f, DEFAULT_EXHAUSTIVE_LIMIT).unwrap(), Verdict::Ok);
    }

    #[test]
    fn square_of_cardinality_violates_diminishing_returns() {
        let f = FnOracle::new(3, |s: &ElementSet| BigInt::from(s.len() * s.len()));
        match verify_monotone_submodular(&f, DEFAULT_EXHAUSTIVE_LIMIT).unwrap() {
            Verdict::Violated(w) => {
                assert_eq!(w.kind, ViolationKind::Submodularity);
                assert_eq!(w.s, ElementSet::new());
                assert_eq!(w.t, ids(&[0]));
                assert_eq!(w.e, ElementId(1));
                assert_eq!(w.marginal_s, BigInt::from(1));
                assert_eq!(w.marginal_t, BigInt::from(3));
            }
            Verdict::Ok => panic!("|S|² is not submodular"),
        }
    }

    #[test]
    fn decreasing_function_fails_monotonicity() {
        let f = FnOracle::new(2, |s: &ElementSet| BigInt::from(5 - s.len() as i64));
        let v = verify_monotone_submodular(&f, DEFAULT_EXHAUSTIVE_LIMIT).unwrap();
        assert!(matches!(v, Verdict::Violated(Witness { kind: ViolationKind::Monotonicity, .. })));
    }

    #[test]
    fn ground_set_limit_enforced() {
        let f = Additive::new(vec![1; 15]);
        assert!(matches!(
            verify_monotone_submodular(&f, DEFAULT_EXHAUSTIVE_LIMIT),
            Err(Error::GroundSetTooLarge { n: 15, .. })
        ));
        assert!(verify_monotone_submodular(&f, 15).is_ok());
    }

    #[test]
    fn replay_detects_out_of_window_queries() {
        let f = Additive::new(vec![1; 4]);
        // strong policy admits anything, replay still flags the window breach
        let mut sess = OracleSession::strong(&f).with_logging();
        sess.begin_step(ElementId(0));
        sess.evaluate(&ids(&[0])).unwrap();
        sess.set_stored(ids(&[0]));
        sess.begin_step(ElementId(1));
        sess.evaluate(&ids(&[0, 1])).unwrap();
        sess.evaluate(&ids(&[2])).unwrap();
        let bad = replay_out_of_window(sess.query_log().unwrap(), sess.window_log().unwrap());
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].set, ids(&[2]));
    }
}

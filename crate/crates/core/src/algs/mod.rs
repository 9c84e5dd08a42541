//! Streaming algorithms, the value-guessing driver and offline baselines.
//!
//! Every streaming algorithm sees the stream one element at a time through
//! an [`OracleSession`], which gates and counts its queries.

pub mod baselines;
pub mod cardinality;
pub mod driver;
pub mod matroid;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::matroid::Matroid;
use crate::oracle::{AccessPolicy, ElementId, ElementSet, OracleSession, Value};

/// Feasibility constraint with its rank `K`. A cardinality constraint is
/// the uniform matroid of rank `K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    matroid: Matroid,
    rank: usize,
}

impl Constraint {
    pub fn cardinality(n: usize, k: usize) -> Self {
        Constraint { matroid: Matroid::uniform(n, k), rank: k.min(n) }
    }

    pub fn matroid(m: Matroid) -> Self {
        let rank = m.rank();
        Constraint { matroid: m, rank }
    }

    pub fn as_matroid(&self) -> &Matroid {
        &self.matroid
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ground_size(&self) -> usize {
        self.matroid.ground_size()
    }

    pub fn is_cardinality(&self) -> bool {
        matches!(self.matroid, Matroid::Uniform { .. })
    }

    pub fn is_feasible(&self, set: &ElementSet) -> bool {
        self.matroid.is_independent(set)
    }

    pub fn weak_policy(&self) -> AccessPolicy<'_> {
        AccessPolicy::Weak(&self.matroid)
    }
}

/// Result record of one streaming run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgReport {
    pub solution: ElementSet,
    #[serde(with = "crate::serde_value")]
    pub value: Value,
    pub queries: u64,
    pub max_stored: usize,
    pub branches_spawned: u64,
    /// The guess the returned solution came from, if the algorithm guesses.
    #[serde(with = "crate::serde_value::rational::option")]
    pub v_used: Option<BigRational>,
    /// Peak number of simultaneously running guesses.
    pub max_active_guesses: usize,
    pub violations: usize,
    /// Elements delivered to a branch out of order or twice.
    pub discipline_violations: u64,
}

/// Bookkeeping an algorithm reports alongside its solution.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AlgStats {
    pub branches_spawned: u64,
    pub v_used: Option<BigRational>,
    pub max_active_guesses: usize,
    pub discipline_violations: u64,
}

/// A single-pass algorithm driven one arrival at a time.
pub trait StreamAlgorithm {
    /// Runs before the first arrival (step 0).
    fn start(&mut self, _sess: &mut OracleSession<'_>) {}

    fn process(&mut self, e: ElementId, sess: &mut OracleSession<'_>);

    /// Number of elements currently retained, counted with multiplicity
    /// across independent pieces of state.
    fn stored_count(&self) -> usize;

    /// The distinct elements currently retained.
    fn stored_elements(&self) -> ElementSet;

    /// Runs after the last arrival; returns the solution and its value.
    fn finish(&mut self, sess: &mut OracleSession<'_>) -> (ElementSet, Value);

    fn stats(&self) -> AlgStats {
        AlgStats::default()
    }
}

/// Feeds `stream` through `alg` under `sess` and collects the report.
pub fn run_stream(
    alg: &mut dyn StreamAlgorithm,
    stream: &[ElementId],
    sess: &mut OracleSession<'_>,
) -> AlgReport {
    alg.start(sess);
    declare_stored(alg, sess);
    for &e in stream {
        sess.begin_step(e);
        alg.process(e, sess);
        declare_stored(alg, sess);
    }
    sess.end_stream();
    let (solution, value) = alg.finish(sess);
    let stats = alg.stats();
    let audit = sess.audit();
    AlgReport {
        solution,
        value,
        queries: audit.query_count,
        max_stored: audit.max_stored,
        branches_spawned: stats.branches_spawned,
        v_used: stats.v_used,
        max_active_guesses: stats.max_active_guesses,
        violations: audit.rejected_queries.len(),
        discipline_violations: stats.discipline_violations,
    }
}

fn declare_stored(alg: &dyn StreamAlgorithm, sess: &mut OracleSession<'_>) {
    if sess.tracks_window() {
        sess.set_stored(alg.stored_elements());
    }
    sess.note_stored_count(alg.stored_count());
}

/// Tracks the steps at which one branch saw elements; any repeat or
/// out-of-order delivery is a single-pass violation.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct PassGuard {
    last_step: usize,
}

impl PassGuard {
    pub(crate) fn starting_at(step: usize) -> Self {
        PassGuard { last_step: step }
    }

    /// Returns false if `step` was already seen or precedes the branch.
    pub(crate) fn observe(&mut self, step: usize) -> bool {
        let ok = step > self.last_step;
        self.last_step = self.last_step.max(step);
        ok
    }
}

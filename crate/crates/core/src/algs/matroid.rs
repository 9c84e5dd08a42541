//! Branching algorithm for a matroid constraint at a fixed guess `v`.
//!
//! A node carries an independent set `I` (its pinned set, so `g = f(·|I)`)
//! and a size `k`. For `k > 1` it runs one track per threshold index
//! `b = 0..=β`, `β = ⌊K⁴/2⌋`: track `b` collects a set `T` of elements that
//! keep `I ∪ T` independent and have `g(e) ≥ b·v/K⁴`, and every collected
//! element starts a child `(k−1, (1−1/K⁴)v − 2g(e), I + e)` on the rest of
//! the stream. Branch 0 keeps the best `e` with `I + e` independent.
//!
//! Children depend only on the accepted element, never on the track, so a
//! node spawns at most one child per element.
//!
//! Independence is tested before any query, and every query has the form
//! `f(I + e)` with `I + e` independent.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{AlgStats, PassGuard, StreamAlgorithm};
use crate::error::{Error, Result};
use crate::matroid::Matroid;
use crate::oracle::{ElementId, ElementSet, OracleSession, Value};

/// Largest rank accepted without an explicit override.
pub const DEFAULT_MAX_RANK: usize = 4;

#[derive(Clone, Debug)]
struct Track {
    threshold: BigRational,
    t: ElementSet,
}

#[derive(Clone, Debug)]
pub struct MatBranchNode {
    pub k: usize,
    pub v: BigRational,
    independent: ElementSet,
    pinned_value: Value,
    tracks: Vec<Track>,
    /// Accepted element -> child node, in acceptance order.
    children: Vec<(ElementId, usize)>,
    child_of: BTreeMap<ElementId, usize>,
    best0: Option<(ElementId, Value)>,
    guard: PassGuard,
}

impl MatBranchNode {
    pub fn independent_set(&self) -> &ElementSet {
        &self.independent
    }

    pub fn tracks(&self) -> usize {
        self.tracks.len()
    }

    fn owned(&self) -> ElementSet {
        let mut s = ElementSet::new();
        for tr in &self.tracks {
            s = s.union(&tr.t);
        }
        if let Some((e, _)) = &self.best0 {
            s.insert(*e);
        }
        s
    }
}

/// The recursion tree for one guess `v`, rooted at `(K, v, f, ∅)`.
#[derive(Clone, Debug)]
pub struct MatTree<'m> {
    matroid: &'m Matroid,
    rank: usize,
    v: BigRational,
    nodes: Vec<MatBranchNode>,
    owned_counts: Vec<usize>,
    stored: usize,
    discipline_violations: u64,
    started: bool,
}

impl<'m> MatTree<'m> {
    /// Refuses ranks above [`DEFAULT_MAX_RANK`] unless `allow_large_rank`;
    /// the tree has `Θ(K⁵)` children per node and depth `K`.
    pub fn new(matroid: &'m Matroid, v: BigRational, allow_large_rank: bool) -> Result<Self> {
        let rank = matroid.rank();
        if rank > DEFAULT_MAX_RANK && !allow_large_rank {
            return Err(Error::InvalidParams(format!(
                "matroid branching with rank {rank} > {DEFAULT_MAX_RANK} needs an explicit override"
            )));
        }
        Ok(MatTree {
            matroid,
            rank,
            v,
            nodes: Vec::new(),
            owned_counts: Vec::new(),
            stored: 0,
            discipline_violations: 0,
            started: false,
        })
    }

    /// A tree whose root starts after `step` with `f(∅)` already known.
    pub fn with_empty_value(
        matroid: &'m Matroid,
        v: BigRational,
        allow_large_rank: bool,
        empty_value: Value,
        step: usize,
    ) -> Result<Self> {
        let mut t = MatTree::new(matroid, v.clone(), allow_large_rank)?;
        if t.rank >= 1 {
            t.spawn(t.rank, v, ElementSet::new(), empty_value, step);
        }
        t.started = true;
        Ok(t)
    }

    pub fn v(&self) -> &BigRational {
        &self.v
    }

    pub fn nodes(&self) -> &[MatBranchNode] {
        &self.nodes
    }

    /// `β = ⌊K⁴/2⌋`.
    pub fn beta(rank: usize) -> usize {
        rank.pow(4) / 2
    }

    fn spawn(&mut self, k: usize, v: BigRational, independent: ElementSet, pinned_value: Value, step: usize) -> usize {
        let k4 = BigInt::from(self.rank.pow(4));
        let tracks = if k > 1 {
            (0..=Self::beta(self.rank))
                .map(|b| Track {
                    threshold: &v * BigRational::new(BigInt::from(b), k4.clone()),
                    t: ElementSet::new(),
                })
                .collect()
        } else {
            Vec::new()
        };
        self.nodes.push(MatBranchNode {
            k,
            v,
            independent,
            pinned_value,
            tracks,
            children: Vec::new(),
            child_of: BTreeMap::new(),
            best0: None,
            guard: PassGuard::starting_at(step),
        });
        self.owned_counts.push(0);
        self.nodes.len() - 1
    }

    pub fn observe(&mut self, e: ElementId, sess: &mut OracleSession<'_>) {
        let step = sess.step();
        let live = self.nodes.len();
        let k4 = BigRational::from_integer(BigInt::from(self.rank.pow(4)));
        let shrink = BigRational::one() - BigRational::one() / &k4;
        for i in 0..live {
            if !self.nodes[i].guard.observe(step) {
                self.discipline_violations += 1;
                continue;
            }
            let with = self.nodes[i].independent.with(e);
            if !self.matroid.is_independent(&with) {
                continue;
            }
            let val = sess.evaluate_or_zero(&with);
            let gain = BigRational::from_integer(&val - &self.nodes[i].pinned_value);

            let node = &mut self.nodes[i];
            if node.best0.as_ref().is_none_or(|(_, b)| &val > b) {
                node.best0 = Some((e, val.clone()));
            }
            let mut accepted = false;
            for tr in node.tracks.iter_mut() {
                if node.independent.len() + tr.t.len() >= self.rank || gain < tr.threshold {
                    continue;
                }
                if self.matroid.is_independent(&node.independent.union(&tr.t).with(e)) {
                    tr.t.insert(e);
                    accepted = true;
                }
            }
            let needs_child = accepted && !node.child_of.contains_key(&e);
            // only nodes with k > 1 have tracks, so this is used only then
            let child_k = node.k.saturating_sub(1);
            let child_v = &shrink * &node.v - &gain * BigInt::from(2);

            if needs_child {
                let child = self.spawn(child_k, child_v, with, val, step);
                let node = &mut self.nodes[i];
                node.children.push((e, child));
                node.child_of.insert(e, child);
            }
            let owned = self.nodes[i].owned().len();
            self.stored = self.stored + owned - self.owned_counts[i];
            self.owned_counts[i] = owned;
        }
    }

    /// Candidate solutions of node `i` relative to its independent set,
    /// with `f(I ∪ S)`; the argmax keeps the earliest candidate on ties.
    pub fn result_of(&self, i: usize) -> (ElementSet, Value) {
        let node = &self.nodes[i];
        let mut best: Option<(ElementSet, Value)> = None;
        for &(e, c) in &node.children {
            let (mut s, v) = self.result_of(c);
            s.insert(e);
            if best.as_ref().is_none_or(|(_, b)| &v > b) {
                best = Some((s, v));
            }
        }
        if let Some((e, v)) = &node.best0 {
            if best.as_ref().is_none_or(|(_, b)| v > b) {
                best = Some((ElementSet::singleton(*e), v.clone()));
            }
        }
        best.unwrap_or_else(|| (ElementSet::new(), node.pinned_value.clone()))
    }

    pub fn result(&self) -> (ElementSet, Value) {
        if self.nodes.is_empty() {
            return (ElementSet::new(), Value::zero());
        }
        self.result_of(0)
    }
}

impl StreamAlgorithm for MatTree<'_> {
    fn start(&mut self, sess: &mut OracleSession<'_>) {
        if !self.started {
            let empty = sess.evaluate_or_zero(&ElementSet::new());
            if self.rank >= 1 {
                self.spawn(self.rank, self.v.clone(), ElementSet::new(), empty, sess.step());
            }
            self.started = true;
        }
    }

    fn process(&mut self, e: ElementId, sess: &mut OracleSession<'_>) {
        self.observe(e, sess);
    }

    fn stored_count(&self) -> usize {
        self.stored
    }

    fn stored_elements(&self) -> ElementSet {
        self.nodes.iter().fold(ElementSet::new(), |acc, n| acc.union(&n.owned()))
    }

    fn finish(&mut self, _sess: &mut OracleSession<'_>) -> (ElementSet, Value) {
        self.result()
    }

    fn stats(&self) -> AlgStats {
        AlgStats {
            branches_spawned: self.nodes.len() as u64,
            v_used: Some(self.v.clone()),
            max_active_guesses: 1,
            discipline_violations: self.discipline_violations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algs::run_stream;
    use crate::oracle::{AccessPolicy, Additive};

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn rank_one_returns_best_singleton() {
        let f = Additive::new(vec![2, 7, 3]);
        let m = Matroid::uniform(3, 1);
        let mut tree = MatTree::new(&m, rat(7), false).unwrap();
        let mut sess = OracleSession::strong(&f);
        let order: Vec<_> = (0..3).map(ElementId).collect();
        let rep = run_stream(&mut tree, &order, &mut sess);
        assert_eq!(rep.solution, ElementSet::singleton(ElementId(1)));
    }

    #[test]
    fn modular_partition_picks_class_maxima() {
        // classes {0,1} and {2,3}; maxima 1 and 2
        let f = Additive::new(vec![1, 5, 6, 2]);
        let m = Matroid::unit_partition(vec![0, 0, 1, 1]);
        let mut tree = MatTree::new(&m, rat(11), false).unwrap();
        let mut sess = OracleSession::new(&f, AccessPolicy::Weak(&m));
        let order: Vec<_> = (0..4).map(ElementId).collect();
        let rep = run_stream(&mut tree, &order, &mut sess);
        assert_eq!(rep.solution, [ElementId(1), ElementId(2)].into_iter().collect());
        assert_eq!(rep.violations, 0);
        assert!(m.is_independent(&rep.solution));
    }

    #[test]
    fn large_rank_needs_override() {
        let m = Matroid::uniform(10, 5);
        assert!(MatTree::new(&m, rat(1), false).is_err());
        assert!(MatTree::new(&m, rat(1), true).is_ok());
    }

    #[test]
    fn beta_values() {
        assert_eq!(MatTree::beta(2), 8);
        assert_eq!(MatTree::beta(3), 40);
    }
}

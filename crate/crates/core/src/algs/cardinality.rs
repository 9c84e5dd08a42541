//! Branching algorithm for a cardinality constraint at a fixed guess `v`.
//!
//! The recursion is unrolled into a tree of nodes that all consume the
//! same physical stream. An inner node `(k, s)` waits for the first
//! element whose residual value reaches `v/(k+s−1)` (Branch 1) and then
//! hands the rest of the stream to a child `(k, s−1)` pinned on that
//! element; its Branch-2 child `(k−1, s)` is created together with the
//! node and runs in parallel on the same elements. A leaf (`k = 1` or
//! `s = 1`) keeps the best single element.
//!
//! Each node owns at most one element, and every query has the form
//! `f(pinned + e)` with `|pinned| < K`, so a weak oracle never refuses.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{AlgStats, PassGuard, StreamAlgorithm};
use crate::oracle::{ElementId, ElementSet, OracleSession, Value};

#[derive(Clone, Debug)]
enum NodeState {
    Leaf {
        /// Best element so far and `f(pinned + e)`.
        best: Option<(ElementId, Value)>,
    },
    Awaiting {
        branch2: usize,
    },
    Recursed {
        e: ElementId,
        child: usize,
        branch2: usize,
    },
}

#[derive(Clone, Debug)]
pub struct CardBranchNode {
    pub k: usize,
    pub s: usize,
    pub v: BigRational,
    pinned: ElementSet,
    pinned_value: Value,
    state: NodeState,
    guard: PassGuard,
}

impl CardBranchNode {
    pub fn pinned(&self) -> &ElementSet {
        &self.pinned
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.state, NodeState::Leaf { .. })
    }

    fn owned(&self) -> Option<ElementId> {
        match &self.state {
            NodeState::Leaf { best } => best.as_ref().map(|(e, _)| *e),
            NodeState::Awaiting { .. } => None,
            NodeState::Recursed { e, .. } => Some(*e),
        }
    }
}

/// The whole recursion tree for one guess `v`, rooted at `(K, K)` with
/// nothing pinned.
#[derive(Clone, Debug)]
pub struct CardTree {
    k: usize,
    v: BigRational,
    nodes: Vec<CardBranchNode>,
    stored: usize,
    discipline_violations: u64,
    started: bool,
}

impl CardTree {
    /// A tree whose root is created lazily by [`StreamAlgorithm::start`],
    /// which queries `f(∅)`.
    pub fn new(k: usize, v: BigRational) -> Self {
        CardTree { k, v, nodes: Vec::new(), stored: 0, discipline_violations: 0, started: false }
    }

    /// A tree whose root starts at `step` with `f(∅)` already known.
    pub fn with_empty_value(k: usize, v: BigRational, empty_value: Value, step: usize) -> Self {
        let mut t = CardTree::new(k, v.clone());
        if k >= 1 {
            t.spawn(k, k, v, ElementSet::new(), empty_value, step);
        }
        t.started = true;
        t
    }

    pub fn v(&self) -> &BigRational {
        &self.v
    }

    pub fn nodes(&self) -> &[CardBranchNode] {
        &self.nodes
    }

    fn spawn(&mut self, k: usize, s: usize, v: BigRational, pinned: ElementSet, pinned_value: Value, step: usize) -> usize {
        let idx = self.nodes.len();
        let leaf = k == 1 || s == 1;
        self.nodes.push(CardBranchNode {
            k,
            s,
            v: v.clone(),
            pinned: pinned.clone(),
            pinned_value: pinned_value.clone(),
            state: NodeState::Leaf { best: None },
            guard: PassGuard::starting_at(step),
        });
        if !leaf {
            let scaled = v * BigRational::new(BigInt::from(k + s - 2), BigInt::from(k + s - 1));
            let branch2 = self.spawn(k - 1, s, scaled, pinned, pinned_value, step);
            self.nodes[idx].state = NodeState::Awaiting { branch2 };
        }
        idx
    }

    /// Dispatches one arrival to every node that existed before it.
    pub fn observe(&mut self, e: ElementId, sess: &mut OracleSession<'_>) {
        let step = sess.step();
        let live = self.nodes.len();
        for i in 0..live {
            if !self.nodes[i].guard.observe(step) {
                self.discipline_violations += 1;
                continue;
            }
            match self.nodes[i].state {
                NodeState::Recursed { .. } => {}
                NodeState::Leaf { .. } => {
                    let node = &self.nodes[i];
                    let with = node.pinned.with(e);
                    let val = sess.evaluate_or_zero(&with);
                    if let NodeState::Leaf { best } = &mut self.nodes[i].state {
                        if best.as_ref().is_none_or(|(_, b)| &val > b) {
                            if best.is_none() {
                                self.stored += 1;
                            }
                            *best = Some((e, val));
                        }
                    }
                }
                NodeState::Awaiting { branch2 } => {
                    let node = &self.nodes[i];
                    let with = node.pinned.with(e);
                    let val = sess.evaluate_or_zero(&with);
                    let gain = &val - &node.pinned_value;
                    let lhs = BigRational::from_integer(&gain * BigInt::from(node.k + node.s - 1));
                    if lhs >= node.v {
                        let (k, s) = (node.k, node.s);
                        let child_v = &node.v - BigRational::from_integer(gain);
                        let child = self.spawn(k, s - 1, child_v, with, val, step);
                        self.nodes[i].state = NodeState::Recursed { e, child, branch2 };
                        self.stored += 1;
                    }
                }
            }
        }
    }

    /// Post-order evaluation: the solution of node `i` (excluding its
    /// pinned set) and `f(pinned ∪ solution)`.
    pub fn result_of(&self, i: usize) -> (ElementSet, Value) {
        let node = &self.nodes[i];
        match &node.state {
            NodeState::Leaf { best } => match best {
                Some((e, val)) => (ElementSet::singleton(*e), val.clone()),
                None => (ElementSet::new(), node.pinned_value.clone()),
            },
            // no Branch-1 element: S₁ = ∅ has g(S₁) = 0 and never wins
            NodeState::Awaiting { branch2 } => self.result_of(*branch2),
            NodeState::Recursed { e, child, branch2 } => {
                let (mut s1, v1) = self.result_of(*child);
                s1.insert(*e);
                let s2 = self.result_of(*branch2);
                if v1 > s2.1 {
                    (s1, v1)
                } else {
                    s2
                }
            }
        }
    }

    pub fn result(&self) -> (ElementSet, Value) {
        if self.nodes.is_empty() {
            return (ElementSet::new(), Value::zero());
        }
        self.result_of(0)
    }

    pub fn discipline_violations(&self) -> u64 {
        self.discipline_violations
    }
}

impl StreamAlgorithm for CardTree {
    fn start(&mut self, sess: &mut OracleSession<'_>) {
        if !self.started {
            let empty = sess.evaluate_or_zero(&ElementSet::new());
            if self.k >= 1 {
                self.spawn(self.k, self.k, self.v.clone(), ElementSet::new(), empty, sess.step());
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
        self.nodes.iter().filter_map(|n| n.owned()).collect()
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

/// Node-count bound `Γ(k, s) = Γ(k−1, s) + Γ(k, s−1) + 1`, with `Γ = 1`
/// at leaves.
pub fn node_count_bound(k: usize, s: usize) -> u64 {
    if k <= 1 || s <= 1 {
        return 1;
    }
    let mut g = vec![vec![1u64; s + 1]; k + 1];
    for kk in 2..=k {
        for ss in 2..=s {
            g[kk][ss] = g[kk - 1][ss] + g[kk][ss - 1] + 1;
        }
    }
    g[k][s]
}

//! Runs the branching algorithms without knowing the optimum.
//!
//! Guesses are `v = (1+ε)^i`. With `m` the best singleton gain seen so far,
//! a guess is live while `m/(1+ε)² ≤ v ≤ K·m/ε`. Since `m` only grows, the
//! window only moves up: guesses that fall below it are finalized and
//! retired, new guesses entering it start on the current element.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::cardinality::CardTree;
use super::matroid::MatTree;
use super::{run_stream, AlgReport, AlgStats, Constraint, StreamAlgorithm};
use crate::error::{Error, Result};
use crate::oracle::{ElementId, ElementSet, OracleSession, Value, ValueOracle};

/// Parses `"0.05"`, `"1/20"` or `"1"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::InvalidParams(format!("not a decimal or fraction: {text:?}"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (int, frac) = t.split_once('.').unwrap_or((t, ""));
    if frac.chars().any(|c| !c.is_ascii_digit()) || (int.is_empty() && frac.is_empty()) {
        return Err(bad());
    }
    let digits = format!("{}{}", if int.is_empty() { "0" } else { int }, frac);
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    Ok(BigRational::new(n, BigInt::from(10).pow(frac.len() as u32)))
}

/// Checks `0 < ε ≤ 1`.
pub fn validate_epsilon(eps: &BigRational) -> Result<()> {
    if !eps.is_positive() || eps > &BigRational::one() {
        return Err(Error::InvalidParams(format!("ε must lie in (0, 1], got {eps}")));
    }
    Ok(())
}

/// Geometric grid of guesses with exact powers.
#[derive(Clone, Debug)]
pub struct GuessGrid {
    epsilon: BigRational,
    base: BigRational,
    k: usize,
    powers: BTreeMap<i64, BigRational>,
}

impl GuessGrid {
    pub fn new(epsilon: BigRational, k: usize) -> Result<Self> {
        validate_epsilon(&epsilon)?;
        let base = BigRational::one() + &epsilon;
        Ok(GuessGrid { epsilon, base, k, powers: BTreeMap::new() })
    }

    pub fn epsilon(&self) -> &BigRational {
        &self.epsilon
    }

    /// `(1+ε)^i`.
    pub fn power(&mut self, i: i64) -> BigRational {
        let base = &self.base;
        self.powers
            .entry(i)
            .or_insert_with(|| {
                let p = base.pow(i.unsigned_abs() as i32);
                if i < 0 {
                    p.recip()
                } else {
                    p
                }
            })
            .clone()
    }

    /// Inclusive index range of guesses in `[m/(1+ε)², K·m/ε]`, or `None`
    /// when `m ≤ 0` or the range is empty.
    pub fn window(&mut self, m: &Value) -> Option<(i64, i64)> {
        if !m.is_positive() {
            return None;
        }
        let mr = BigRational::from_integer(m.clone());
        let lower = &mr / (&self.base * &self.base);
        let upper = &mr * BigInt::from(self.k) / &self.epsilon;
        let ln_base = self.base.to_f64().unwrap_or(2.0).ln();
        let guess = |x: &BigRational| (x.to_f64().unwrap_or(f64::MAX).ln() / ln_base).floor() as i64;

        // smallest i with power(i) ≥ lower
        let mut lo = guess(&lower);
        while self.power(lo) < lower {
            lo += 1;
        }
        while self.power(lo - 1) >= lower {
            lo -= 1;
        }
        // largest i with power(i) ≤ upper
        let mut hi = guess(&upper);
        while self.power(hi) > upper {
            hi -= 1;
        }
        while self.power(hi + 1) <= upper {
            hi += 1;
        }
        (lo <= hi).then_some((lo, hi))
    }
}

enum Root<'m> {
    Card(CardTree),
    Mat(MatTree<'m>),
}

impl Root<'_> {
    fn alg(&mut self) -> &mut dyn StreamAlgorithm {
        match self {
            Root::Card(t) => t,
            Root::Mat(t) => t,
        }
    }

    fn alg_ref(&self) -> &dyn StreamAlgorithm {
        match self {
            Root::Card(t) => t,
            Root::Mat(t) => t,
        }
    }
}

/// The guessing driver over the cardinality branch tree (uniform
/// constraints) or the matroid branch tree (anything else).
pub struct GuessDriver<'m> {
    constraint: &'m Constraint,
    allow_large_rank: bool,
    grid: GuessGrid,
    empty_value: Value,
    m: Value,
    active: BTreeMap<i64, Root<'m>>,
    spawned_upto: Option<i64>,
    retired_best: Option<(i64, ElementSet, Value)>,
    retired_nodes: u64,
    retired_violations: u64,
    max_active: usize,
    winner: Option<i64>,
}

impl<'m> GuessDriver<'m> {
    pub fn new(constraint: &'m Constraint, epsilon: BigRational, allow_large_rank: bool) -> Result<Self> {
        if !constraint.is_cardinality() && constraint.rank() > super::matroid::DEFAULT_MAX_RANK && !allow_large_rank {
            return Err(Error::InvalidParams(format!(
                "matroid branching with rank {} > {} needs an explicit override",
                constraint.rank(),
                super::matroid::DEFAULT_MAX_RANK
            )));
        }
        Ok(GuessDriver {
            constraint,
            allow_large_rank,
            grid: GuessGrid::new(epsilon, constraint.rank().max(1))?,
            empty_value: Value::zero(),
            m: Value::zero(),
            active: BTreeMap::new(),
            spawned_upto: None,
            retired_best: None,
            retired_nodes: 0,
            retired_violations: 0,
            max_active: 0,
            winner: None,
        })
    }

    /// The running maximum singleton gain.
    pub fn max_singleton(&self) -> &Value {
        &self.m
    }

    pub fn active_guesses(&self) -> usize {
        self.active.len()
    }

    fn make_root(&mut self, i: i64, step: usize) -> Root<'m> {
        let v = self.grid.power(i);
        let k = self.constraint.rank();
        if self.constraint.is_cardinality() {
            Root::Card(CardTree::with_empty_value(k, v, self.empty_value.clone(), step))
        } else {
            Root::Mat(
                MatTree::with_empty_value(
                    self.constraint.as_matroid(),
                    v,
                    self.allow_large_rank,
                    self.empty_value.clone(),
                    step,
                )
                .expect("rank checked at construction"),
            )
        }
    }

    fn retire(&mut self, i: i64, mut root: Root<'m>, sess: &mut OracleSession<'_>) {
        let stats = root.alg_ref().stats();
        self.retired_nodes += stats.branches_spawned;
        self.retired_violations += stats.discipline_violations;
        let (s, v) = root.alg().finish(sess);
        if self.retired_best.as_ref().is_none_or(|(_, _, b)| &v > b) {
            self.retired_best = Some((i, s, v));
        }
    }
}

impl StreamAlgorithm for GuessDriver<'_> {
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
        if let Some((lo, hi)) = self.grid.window(&self.m) {
            let below: Vec<i64> = self.active.range(..lo).map(|(&i, _)| i).collect();
            for i in below {
                let root = self.active.remove(&i).expect("listed");
                self.retire(i, root, sess);
            }
            let from = self.spawned_upto.map_or(lo, |s| (s + 1).max(lo));
            // roots created now must see the current element
            let step = sess.step() - 1;
            for i in from..=hi {
                let root = self.make_root(i, step);
                self.active.insert(i, root);
            }
            if hi >= from {
                self.spawned_upto = Some(hi);
            }
        }
        self.max_active = self.max_active.max(self.active.len());
        for root in self.active.values_mut() {
            root.alg().process(e, sess);
        }
    }

    fn stored_count(&self) -> usize {
        let live: usize = self.active.values().map(|r| r.alg_ref().stored_count()).sum();
        live + self.retired_best.as_ref().map_or(0, |(_, s, _)| s.len())
    }

    fn stored_elements(&self) -> ElementSet {
        let mut out = self.retired_best.as_ref().map(|(_, s, _)| s.clone()).unwrap_or_default();
        for r in self.active.values() {
            out = out.union(&r.alg_ref().stored_elements());
        }
        out
    }

    fn finish(&mut self, sess: &mut OracleSession<'_>) -> (ElementSet, Value) {
        let mut best = self.retired_best.take();
        let active = std::mem::take(&mut self.active);
        for (i, mut root) in active {
            let stats = root.alg_ref().stats();
            self.retired_nodes += stats.branches_spawned;
            self.retired_violations += stats.discipline_violations;
            let (s, v) = root.alg().finish(sess);
            if best.as_ref().is_none_or(|(_, _, b)| &v > b) {
                best = Some((i, s, v));
            }
        }
        match best {
            Some((i, s, v)) => {
                self.winner = Some(i);
                (s, v)
            }
            None => (ElementSet::new(), self.empty_value.clone()),
        }
    }

    fn stats(&self) -> AlgStats {
        let live: u64 = self.active.values().map(|r| r.alg_ref().stats().branches_spawned).sum();
        let live_bad: u64 = self.active.values().map(|r| r.alg_ref().stats().discipline_violations).sum();
        let mut grid = self.grid.clone();
        AlgStats {
            branches_spawned: self.retired_nodes + live,
            v_used: self.winner.map(|i| grid.power(i)),
            max_active_guesses: self.max_active,
            discipline_violations: self.retired_violations + live_bad,
        }
    }
}

/// Runs the guessing driver under a weak oracle for `constraint`.
pub fn guess_driver(
    oracle: &dyn ValueOracle,
    stream: &[ElementId],
    epsilon: BigRational,
    constraint: &Constraint,
) -> Result<AlgReport> {
    let mut drv = GuessDriver::new(constraint, epsilon, false)?;
    let mut sess = OracleSession::new(oracle, constraint.weak_policy());
    Ok(run_stream(&mut drv, stream, &mut sess))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Additive;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parse_exact_decimals() {
        assert_eq!(parse_rational("0.1").unwrap(), q(1, 10));
        assert_eq!(parse_rational("0.05").unwrap(), q(1, 20));
        assert_eq!(parse_rational("1").unwrap(), q(1, 1));
        assert_eq!(parse_rational("3/40").unwrap(), q(3, 40));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(validate_epsilon(&q(0, 1)).is_err());
        assert!(validate_epsilon(&q(3, 2)).is_err());
    }

    #[test]
    fn window_bounds_are_exact() {
        let mut g = GuessGrid::new(q(1, 10), 3).unwrap();
        let m = BigInt::from(120);
        let (lo, hi) = g.window(&m).unwrap();
        let mr = BigRational::from_integer(m);
        let base2 = q(121, 100);
        assert!(g.power(lo) >= &mr / &base2 && g.power(lo - 1) < &mr / &base2);
        let upper = &mr * BigInt::from(30);
        assert!(g.power(hi) <= upper && g.power(hi + 1) > upper);
        assert!(g.window(&BigInt::zero()).is_none());
    }

    #[test]
    fn equal_values_reach_the_maximum() {
        let f = Additive::new(vec![4; 6]);
        let c = Constraint::cardinality(6, 3);
        let order: Vec<_> = (0..6).map(ElementId).collect();
        let rep = guess_driver(&f, &order, q(1, 10), &c).unwrap();
        assert_eq!(rep.value, BigInt::from(12));
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn active_guesses_logarithmic() {
        let f = Additive::new((1..=20).collect());
        let c = Constraint::cardinality(20, 3);
        let order: Vec<_> = (0..20).map(ElementId).collect();
        let eps = q(1, 10);
        let rep = guess_driver(&f, &order, eps, &c).unwrap();
        // log_{1.1}(K(1+ε)²/ε) + 1 guesses fit in the window
        let bound = ((3.0 * 1.21 / 0.1f64).ln() / 1.1f64.ln()).ceil() as usize + 1;
        assert!(rep.max_active_guesses <= bound, "{} > {bound}", rep.max_active_guesses);
    }
}

//! Recursive hard function for the partition-matroid constraint.
//!
//! Classes `C_1..C_{K−1}` hold `m` elements each, one of them red; the last
//! class `C_K` is a single red element. A set's value depends on which reds
//! it contains and on its per-class blue counts, clamped at `2(K−i)`.
//!
//! The value is built level by level from the last class backwards:
//! `f_1 = r_K` and `f_t = m_t − a_t·d_t` with `m_t = (2t−1)!`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::matroid::Matroid;
use crate::oracle::{ElementId, ElementSet, Value, ValueOracle};
use crate::rng::{rng_for, Purpose};

pub fn factorial(n: usize) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// `m_t = (2t−1)!`, the maximum of `f_t`.
pub fn level_max(t: usize) -> BigInt {
    factorial(2 * t - 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct MatHardParams {
    #[serde(rename = "K")]
    pub k: usize,
    pub m: usize,
}

impl MatHardParams {
    pub fn new(k: usize, m: usize) -> Result<Self> {
        let p = MatHardParams { k, m };
        p.validate()?;
        Ok(p)
    }

    /// `m = 2(K−1)`, the smallest class size that reaches every clamp.
    pub fn with_default_m(k: usize) -> Result<Self> {
        Self::new(k, (2 * k.saturating_sub(1)).max(1))
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidParams("K must be at least 1".into()));
        }
        if self.k > 1 && self.m < 1 {
            return Err(Error::InvalidParams("classes need at least one element".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        (self.k - 1) * self.m + 1
    }

    /// 1-based class of element `e`; the last element is class `K`.
    pub fn class_of(&self, e: ElementId) -> usize {
        let i = e.index();
        if i + 1 == self.n() {
            self.k
        } else {
            i / self.m + 1
        }
    }

    /// Element ids of class `i` (1-based), in ground-set order.
    pub fn class_members(&self, i: usize) -> std::ops::Range<usize> {
        if i == self.k {
            self.n() - 1..self.n()
        } else {
            (i - 1) * self.m..i * self.m
        }
    }
}

/// Per-class counts `(r_1..r_K; b_1..b_K)`, indexed from 0 for class 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatroidProfile {
    r: Vec<u8>,
    b: Vec<usize>,
}

impl MatroidProfile {
    pub fn new(r: Vec<u8>, b: Vec<usize>) -> Result<Self> {
        if r.is_empty() || r.len() != b.len() {
            return Err(Error::InvalidProfile(format!(
                "need equal non-empty lengths, got r:{} b:{}",
                r.len(),
                b.len()
            )));
        }
        if r.iter().any(|&x| x > 1) {
            return Err(Error::InvalidProfile(format!("red counts must be 0 or 1: {r:?}")));
        }
        if b[b.len() - 1] != 0 {
            return Err(Error::InvalidProfile("the last class has no blue elements".into()));
        }
        Ok(MatroidProfile { r, b })
    }

    pub fn zero(k: usize) -> Self {
        MatroidProfile { r: vec![0; k], b: vec![0; k] }
    }

    pub fn k(&self) -> usize {
        self.r.len()
    }

    pub fn r(&self) -> &[u8] {
        &self.r
    }

    pub fn b(&self) -> &[usize] {
        &self.b
    }

    /// `b̂_i = min(b_i, 2(K−i))`.
    pub fn clamped(&self) -> MatroidProfile {
        let k = self.k();
        let b = self.b.iter().enumerate().map(|(j, &x)| x.min(2 * (k - 1 - j))).collect();
        MatroidProfile { r: self.r.clone(), b }
    }

    pub fn with_red(&self, class: usize) -> MatroidProfile {
        let mut p = self.clone();
        p.r[class - 1] = 1;
        p
    }

    pub fn with_blue(&self, class: usize) -> MatroidProfile {
        let mut p = self.clone();
        p.b[class - 1] += 1;
        p
    }
}

/// Intermediate quantities of one recursion level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecursionState {
    pub t: usize,
    pub m_t: BigInt,
    pub d_t: BigInt,
    pub s_t: BigInt,
    pub delta_prev: BigInt,
    pub a_t: BigInt,
    pub f_t: BigInt,
}

/// `f_t` on the last `t` classes. `r` and `b` hold the suffix for classes
/// `K−(t−1)..K`, so their length is `t`; blue counts are clamped here.
pub fn f_level(t: usize, r: &[u8], b: &[usize]) -> Result<Value> {
    Ok(trace_level(t, r, b)?.pop().expect("t ≥ 1").f_t)
}

/// Every level of the recursion for a suffix of length `t`, level 1 first.
/// Level 1 has `a_t = d_t = 0` and `f_1 = r_K`.
pub fn trace_level(t: usize, r: &[u8], b: &[usize]) -> Result<Vec<RecursionState>> {
    if t == 0 || r.len() != t || b.len() != t {
        return Err(Error::InvalidProfile(format!(
            "level {t} needs suffixes of length {t}, got r:{} b:{}",
            r.len(),
            b.len()
        )));
    }
    if b[t - 1] != 0 {
        return Err(Error::InvalidProfile("the last class has no blue elements".into()));
    }
    if r.iter().any(|&x| x > 1) {
        return Err(Error::InvalidProfile(format!("red counts must be 0 or 1: {r:?}")));
    }
    let mut states = Vec::with_capacity(t);
    let mut f = BigInt::from(r[t - 1]);
    states.push(RecursionState {
        t: 1,
        m_t: BigInt::one(),
        d_t: BigInt::zero(),
        s_t: BigInt::from(1 - r[t - 1]),
        delta_prev: BigInt::zero(),
        a_t: BigInt::zero(),
        f_t: f.clone(),
    });
    let mut m_prev = BigInt::one();
    for level in 2..=t {
        // the class this level adds sits at suffix index t − level
        let j = t - level;
        let cap = 2 * (level - 1);
        let d = BigInt::from(cap - b[j].min(cap));
        let s = BigInt::from(1 - r[j]);
        let m_t = &m_prev * ((2 * level - 2) * (2 * level - 1));
        let delta = &m_prev - &f;
        let a = BigInt::from(2) * &m_prev * &s + &delta * (&d - 1);
        f = &m_t - &a * &d;
        states.push(RecursionState { t: level, m_t: m_t.clone(), d_t: d, s_t: s, delta_prev: delta, a_t: a, f_t: f.clone() });
        m_prev = m_t;
    }
    Ok(states)
}

pub fn profile_value(pr: &MatroidProfile) -> Value {
    f_level(pr.k(), &pr.r, &pr.b).expect("profile validated at construction")
}

/// Closed-form K=3 polynomial
/// `120 − (12 s₃ + (2 s₂ + s₁(d₂ − 1)) d₂ (d₃ − 1)) d₃`, where `s₁ = 1 − r₃`,
/// `s₂ = 1 − r₂`, `s₃ = 1 − r₁`, `d₂ = 2 − b̂₂`, `d₃ = 4 − b̂₁`.
pub fn polynomial_check_k3(pr: &MatroidProfile) -> Result<Value> {
    if pr.k() != 3 {
        return Err(Error::WrongK { expected: 3, got: pr.k() });
    }
    let c = pr.clamped();
    let s1 = 1 - i64::from(c.r[2]);
    let s2 = 1 - i64::from(c.r[1]);
    let s3 = 1 - i64::from(c.r[0]);
    let d2 = 2 - c.b[1] as i64;
    let d3 = 4 - c.b[0] as i64;
    Ok(BigInt::from(120 - (12 * s3 + (2 * s2 + s1 * (d2 - 1)) * d2 * (d3 - 1)) * d3))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingletonValues {
    pub red_class_lt_k: Value,
    pub blue_any: Value,
    pub red_class_k: Value,
}

/// `2(2K−2)!`, `2(2K−2)!` and `(2K−2)!`.
pub fn singleton_values(k: usize) -> Result<SingletonValues> {
    if k < 2 {
        return Err(Error::InvalidParams(format!("singleton values need K ≥ 2, got {k}")));
    }
    let base = factorial(2 * k - 2);
    Ok(SingletonValues {
        red_class_lt_k: &base * 2,
        blue_any: &base * 2,
        red_class_k: base,
    })
}

/// `(2K−1)!`, reached by taking every red.
pub fn optimal_value(k: usize) -> Value {
    level_max(k)
}

/// `K(2K−2)!`, the value of one blue per class plus the last red.
pub fn output_bound(k: usize) -> Value {
    factorial(2 * k - 2) * k
}

/// `K(2K−2)! / (2K−1)!`, which reduces to `K/(2K−1)`.
pub fn ratio(k: usize) -> BigRational {
    BigRational::new(output_bound(k), optimal_value(k))
}

/// Concrete instance: contiguous class blocks, one hidden red per class,
/// and the capacity-1 partition matroid over the classes.
#[derive(Clone, Debug)]
pub struct MatHardInstance {
    params: MatHardParams,
    seed: u64,
    is_red: Vec<bool>,
    matroid: Matroid,
}

impl MatHardInstance {
    pub fn instantiate(params: MatHardParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let n = params.n();
        let mut rng = rng_for(seed, Purpose::Coloring);
        let mut is_red = vec![false; n];
        for i in 1..params.k {
            let range = params.class_members(i);
            is_red[rng.gen_range(range)] = true;
        }
        is_red[n - 1] = true;
        let class_of = (0..n).map(|e| params.class_of(ElementId::from(e)) - 1).collect();
        Ok(MatHardInstance { params, seed, is_red, matroid: Matroid::unit_partition(class_of) })
    }

    pub fn params(&self) -> &MatHardParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn matroid(&self) -> &Matroid {
        &self.matroid
    }

    /// The hidden red flags. Harness and audits only.
    pub fn hidden_reds(&self) -> &[bool] {
        &self.is_red
    }

    pub fn red_of_class(&self, i: usize) -> ElementId {
        let e = self.params.class_members(i).find(|&e| self.is_red[e]).expect("one red per class");
        ElementId::from(e)
    }

    pub fn profile_of(&self, set: &ElementSet) -> MatroidProfile {
        let mut pr = MatroidProfile::zero(self.params.k);
        for e in set.iter() {
            let c = self.params.class_of(e) - 1;
            if self.is_red[e.index()] {
                pr.r[c] = 1;
            } else {
                pr.b[c] += 1;
            }
        }
        pr
    }
}

impl ValueOracle for MatHardInstance {
    fn ground_size(&self) -> usize {
        self.params.n()
    }

    fn value(&self, set: &ElementSet) -> Value {
        profile_value(&self.profile_of(set))
    }
}

/// A failed profile-level inequality, described for reporting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProfileWitness(pub String);

/// All clamped profiles for `K` classes: `r ∈ {0,1}^K`, `b_i ∈ 0..=2(K−i)`.
pub fn clamped_profiles(k: usize) -> Vec<MatroidProfile> {
    let mut out = vec![MatroidProfile::zero(k)];
    for j in 0..k {
        let cap = 2 * (k - 1 - j);
        let mut next = Vec::with_capacity(out.len() * 2 * (cap + 1));
        for p in &out {
            for r in 0..2u8 {
                for b in 0..=cap {
                    let mut q = p.clone();
                    q.r[j] = r;
                    q.b[j] = b;
                    next.push(q);
                }
            }
        }
        out = next;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Step {
    Red(usize),
    Blue(usize),
}

fn step_allowed(pr: &MatroidProfile, s: Step) -> bool {
    match s {
        Step::Red(c) => pr.r[c - 1] == 0,
        Step::Blue(c) => c < pr.k(),
    }
}

fn apply(pr: &MatroidProfile, s: Step) -> MatroidProfile {
    match s {
        Step::Red(c) => pr.with_red(c),
        Step::Blue(c) => pr.with_blue(c).clamped(),
    }
}

/// Profile-level monotonicity and diminishing returns: for every clamped
/// profile `x`, every increment `u` and every other increment `w`,
/// `f(x+u) ≥ f(x)` and `f(x+u) − f(x) ≥ f(x+w+u) − f(x+w)`. Chaining `w`
/// steps gives the inequality for all `x ≤ y` componentwise.
pub fn check_profile_lemmas(k: usize) -> Option<ProfileWitness> {
    let steps: Vec<Step> = (1..=k).map(Step::Red).chain((1..k).map(Step::Blue)).collect();
    for x in clamped_profiles(k) {
        let fx = profile_value(&x);
        for &u in &steps {
            if !step_allowed(&x, u) {
                continue;
            }
            let xu = apply(&x, u);
            let gain = profile_value(&xu) - &fx;
            if gain < BigInt::zero() {
                return Some(ProfileWitness(format!("decrease at {x:?} by {u:?}")));
            }
            for &w in &steps {
                if !step_allowed(&x, w) {
                    continue;
                }
                let xw = apply(&x, w);
                if !step_allowed(&xw, u) {
                    continue;
                }
                let later = profile_value(&apply(&xw, u)) - profile_value(&xw);
                if later > gain {
                    return Some(ProfileWitness(format!(
                        "{u:?} gains {gain} at {x:?} but {later} after {w:?}"
                    )));
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(r: &[u8], b: &[usize]) -> MatroidProfile {
        MatroidProfile::new(r.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn base_level() {
        assert_eq!(f_level(1, &[1], &[0]).unwrap(), BigInt::from(1));
        assert_eq!(f_level(1, &[0], &[0]).unwrap(), BigInt::from(0));
    }

    #[test]
    fn k3_landmarks() {
        assert_eq!(profile_value(&pr(&[0, 0, 1], &[0, 0, 0])), BigInt::from(24));
        assert_eq!(profile_value(&pr(&[1, 0, 0], &[0, 0, 0])), BigInt::from(48));
        assert_eq!(profile_value(&pr(&[0, 0, 0], &[2, 1, 0])), BigInt::from(92));
        assert_eq!(profile_value(&pr(&[1, 0, 1], &[1, 0, 0])), BigInt::from(96));
    }

    #[test]
    fn extremes() {
        for k in 1..=6 {
            assert_eq!(profile_value(&MatroidProfile::zero(k)), BigInt::zero());
            let all_red = pr(&vec![1; k], &vec![0; k]);
            assert_eq!(profile_value(&all_red), factorial(2 * k - 1));
        }
    }

    #[test]
    fn last_red_plus_one_blue_each() {
        for k in 1..=7 {
            let mut r = vec![0; k];
            r[k - 1] = 1;
            let mut b = vec![1; k];
            b[k - 1] = 0;
            assert_eq!(profile_value(&pr(&r, &b)), output_bound(k));
        }
    }

    #[test]
    fn trace_k3_all_zero() {
        let st = trace_level(3, &[0, 0, 0], &[0, 0, 0]).unwrap();
        let a: Vec<_> = st.iter().map(|s| s.a_t.clone()).collect();
        assert_eq!(a, vec![BigInt::from(0), BigInt::from(3), BigInt::from(30)]);
        assert_eq!(st[2].d_t, BigInt::from(4));
        assert_eq!(st[2].delta_prev, BigInt::from(6));
    }

    #[test]
    fn polynomial_matches_k3_examples() {
        assert_eq!(polynomial_check_k3(&pr(&[0, 0, 0], &[0, 0, 0])).unwrap(), BigInt::from(0));
        assert_eq!(polynomial_check_k3(&pr(&[1, 1, 1], &[0, 0, 0])).unwrap(), BigInt::from(120));
        assert_eq!(polynomial_check_k3(&pr(&[0, 0, 0], &[4, 0, 0])).unwrap(), BigInt::from(120));
        assert!(matches!(
            polynomial_check_k3(&MatroidProfile::zero(2)),
            Err(Error::WrongK { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn polynomial_agrees_everywhere() {
        for p in clamped_profiles(3) {
            assert_eq!(polynomial_check_k3(&p).unwrap(), profile_value(&p), "{p:?}");
        }
        assert_eq!(clamped_profiles(3).len(), 2 * 2 * 2 * 5 * 3);
    }

    #[test]
    fn singletons() {
        let s = singleton_values(3).unwrap();
        assert_eq!(
            (s.red_class_lt_k, s.blue_any, s.red_class_k),
            (BigInt::from(48), BigInt::from(48), BigInt::from(24))
        );
        let s2 = singleton_values(2).unwrap();
        assert_eq!(s2.red_class_k, f_level(2, &[0, 1], &[0, 0]).unwrap());
        assert_eq!(s2.blue_any, f_level(2, &[0, 0], &[1, 0]).unwrap());
        assert_eq!(s2.red_class_lt_k, BigInt::from(4));
    }

    #[test]
    fn ratios() {
        assert_eq!(ratio(3), BigRational::new(BigInt::from(3), BigInt::from(5)));
        assert_eq!(ratio(1), BigRational::one());
        assert_eq!(ratio(10), BigRational::new(BigInt::from(10), BigInt::from(19)));
    }

    #[test]
    fn profile_rejects_blue_in_last_class() {
        assert!(MatroidProfile::new(vec![0, 0], vec![0, 1]).is_err());
        assert!(MatroidProfile::new(vec![2, 0], vec![0, 0]).is_err());
    }

    #[test]
    fn clamp_invariance() {
        let base = pr(&[0, 1, 0], &[4, 2, 0]);
        let over = pr(&[0, 1, 0], &[9, 5, 0]);
        assert_eq!(profile_value(&base), profile_value(&over));
    }

    #[test]
    fn instance_layout() {
        let params = MatHardParams::new(3, 3).unwrap();
        let inst = MatHardInstance::instantiate(params, 5).unwrap();
        assert_eq!(inst.ground_size(), 7);
        assert_eq!(params.class_of(ElementId(2)), 1);
        assert_eq!(params.class_of(ElementId(3)), 2);
        assert_eq!(params.class_of(ElementId(6)), 3);
        assert_eq!(inst.hidden_reds().iter().filter(|&&r| r).count(), 3);
        assert_eq!(inst.value(&ElementSet::new()), BigInt::zero());
        assert_eq!(inst.value(&ElementSet::singleton(ElementId(6))), factorial(4));
        let reds: ElementSet = (1..=3).map(|i| inst.red_of_class(i)).collect();
        assert_eq!(inst.value(&reds), BigInt::from(120));
        assert!(inst.matroid().is_independent(&reds));
    }

    #[test]
    fn profile_lemmas_small_k() {
        for k in 1..=3 {
            assert_eq!(check_profile_lemmas(k), None, "K={k}");
        }
    }
}

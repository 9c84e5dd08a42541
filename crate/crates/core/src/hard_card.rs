//! Colorwise-symmetric hard function for the cardinality constraint.
//!
//! The ground set is colored blue (`n−K` elements), red (`K−1`) and purple
//! (one). A set's value depends only on its color counts `(b, r, p)` and is
//! built from a base value plus per-blue and per-red marginal returns.
//! Adding a red to a red-free set is worth exactly as much as adding a
//! blue, so a memory-bounded algorithm cannot tell them apart.

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{ElementId, ElementSet, Value, ValueOracle};
use crate::rng::{rng_for, Purpose};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Blue,
    Red,
    Purple,
}

/// Color counts of a set: blue, red, purple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct ColorProfile3 {
    pub b: usize,
    pub r: usize,
    pub p: usize,
}

impl ColorProfile3 {
    pub fn new(b: usize, r: usize, p: usize) -> Self {
        ColorProfile3 { b, r, p }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CardHardParams {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub h: usize,
}

impl CardHardParams {
    pub fn new(n: usize, k: usize, h: usize) -> Result<Self> {
        let p = CardHardParams { n, k, h };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidParams("K must be at least 1".into()));
        }
        if self.h < self.k {
            return Err(Error::InvalidParams(format!("need h ≥ K, got h={} K={}", self.h, self.k)));
        }
        if self.n < 2 * self.k {
            return Err(Error::InvalidParams(format!("need n ≥ 2K, got n={} K={}", self.n, self.k)));
        }
        Ok(())
    }

    pub fn blues(&self) -> usize {
        self.n - self.k
    }

    pub fn reds(&self) -> usize {
        self.k - 1
    }

    pub fn check_profile(&self, pr: ColorProfile3) -> Result<()> {
        if pr.b > self.blues() || pr.r > self.reds() || pr.p > 1 {
            return Err(Error::InvalidProfile(format!(
                "{pr:?} outside b ≤ {}, r ≤ {}, p ≤ 1",
                self.blues(),
                self.reds()
            )));
        }
        Ok(())
    }
}

/// The shared tail of both blue marginals and of `Δ_r(b, 0)`, valid for
/// `x = r + b > h + r` i.e. past the linear part. Returns `None` while
/// still in the linear part.
fn decaying_tail(b: i64, r: i64, k: i64, h: i64) -> Option<i64> {
    if b <= h + r {
        None
    } else if b <= h + 2 * (k - 2) - r {
        let excess = r + b - h; // ≥ 1
        Some(k - 1 - (excess + 1) / 2)
    } else {
        Some(0)
    }
}

/// Marginal return of one more red: `f(b, r+1, p) − f(b, r, p)`.
pub fn delta_r(b: usize, r: usize, params: &CardHardParams) -> Value {
    BigInt::from(delta_r_i64(b as i64, r as i64, params.k as i64, params.h as i64))
}

fn delta_r_i64(b: i64, r: i64, k: i64, h: i64) -> i64 {
    decaying_tail(b, r, k, h).unwrap_or(k - 1 + h - b)
}

/// Marginal return of one more blue on a red-free set:
/// `f(b+1, 0, p) − f(b, 0, p)`.
pub fn delta_b(b: usize, p: usize, params: &CardHardParams) -> Value {
    BigInt::from(delta_b_i64(b as i64, p, params.k as i64, params.h as i64))
}

fn delta_b_i64(b: i64, p: usize, k: i64, h: i64) -> i64 {
    if p == 0 {
        delta_r_i64(b, 0, k, h)
    } else {
        decaying_tail(b, 0, k, h).unwrap_or(k - 1)
    }
}

fn base_value(p: usize, h: usize) -> i64 {
    if p == 0 {
        0
    } else {
        (h * (h + 1) / 2) as i64
    }
}

/// `f(b, r, p)` from the base value, the blue marginals, then the red
/// marginals at the final blue count. Only `K` and `h` are used, so `b` may
/// exceed `n − K` (table rendering uses this).
pub fn profile_value_raw(pr: ColorProfile3, k: usize, h: usize) -> Value {
    let (ki, hi) = (k as i64, h as i64);
    let mut v = base_value(pr.p, h);
    for j in 0..pr.b as i64 {
        v += delta_b_i64(j, pr.p, ki, hi);
    }
    for i in 0..pr.r as i64 {
        v += delta_r_i64(pr.b as i64, i, ki, hi);
    }
    BigInt::from(v)
}

pub fn profile_value(pr: ColorProfile3, params: &CardHardParams) -> Result<Value> {
    params.check_profile(pr)?;
    Ok(profile_value_raw(pr, params.k, params.h))
}

/// `f(0, K−1, 1) = (K−1)(h+K−1) + h(h+1)/2`.
pub fn optimal_value(params: &CardHardParams) -> Value {
    let (k, h) = (BigInt::from(params.k), BigInt::from(params.h));
    (&k - 1) * (&h + &k - 1) + &h * (&h + 1) / 2
}

/// `f(K, 0, 0) = f(K−1, 1, 0) = hK + (K−1)K/2`.
pub fn output_value_blue(params: &CardHardParams) -> Value {
    let (k, h) = (BigInt::from(params.k), BigInt::from(params.h));
    &h * &k + (&k - 1) * &k / 2
}

/// `f(K−1, 0, 1) = (K−1)² + h(h+1)/2`.
pub fn output_value_purple(params: &CardHardParams) -> Value {
    let (k, h) = (BigInt::from(params.k), BigInt::from(params.h));
    (&k - 1) * (&k - 1) + &h * (&h + 1) / 2
}

/// Best value an algorithm that never holds two reds can reach.
pub fn output_bound(params: &CardHardParams) -> Value {
    output_value_blue(params).max(output_value_purple(params))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioBound {
    pub h: usize,
    pub ratio: BigRational,
}

/// Minimizes `output_bound / optimal_value` over the two integers around
/// `√2·(K−1)`, each clamped to `h ≥ K`. Ties keep the smaller `h`.
pub fn ratio_bound(k: usize) -> Result<RatioBound> {
    if k < 2 {
        return Err(Error::InvalidParams(format!("ratio bound needs K ≥ 2, got {k}")));
    }
    let km1 = (k - 1) as u128;
    let floor = (2 * km1 * km1).sqrt() as usize;
    let mut best: Option<RatioBound> = None;
    for h in [floor.max(k), (floor + 1).max(k)] {
        // n does not enter either closed form
        let params = CardHardParams { n: 2 * k, k, h };
        let ratio = BigRational::new(output_bound(&params), optimal_value(&params));
        if best.as_ref().is_none_or(|b| ratio < b.ratio) {
            best = Some(RatioBound { h, ratio });
        }
    }
    Ok(best.expect("two candidates"))
}

/// `2 / (2 + √2)`, the limit of [`ratio_bound`] as `K → ∞`.
pub fn limiting_ratio() -> f64 {
    2.0 / (2.0 + std::f64::consts::SQRT_2)
}

/// Concrete hard instance: a hidden coloring of `0..n` and the
/// colorwise-symmetric oracle it induces.
#[derive(Clone, Debug)]
pub struct CardHardInstance {
    params: CardHardParams,
    seed: u64,
    colors: Vec<Color>,
    // (b, r, p) -> value, b-major
    table: Vec<Value>,
}

impl CardHardInstance {
    pub fn instantiate(params: CardHardParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let mut colors: Vec<Color> = std::iter::repeat_n(Color::Blue, params.blues())
            .chain(std::iter::repeat_n(Color::Red, params.reds()))
            .chain(std::iter::once(Color::Purple))
            .collect();
        colors.shuffle(&mut rng_for(seed, Purpose::Coloring));
        let table = build_table(&params);
        Ok(CardHardInstance { params, seed, colors, table })
    }

    pub fn params(&self) -> &CardHardParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The hidden coloring. Only the experiment harness and audits may use
    /// this; algorithms see the instance through [`ValueOracle`] only.
    pub fn hidden_coloring(&self) -> &[Color] {
        &self.colors
    }

    pub fn color_of(&self, e: ElementId) -> Color {
        self.colors[e.index()]
    }

    pub fn profile_of(&self, set: &ElementSet) -> ColorProfile3 {
        let mut pr = ColorProfile3::default();
        for e in set.iter() {
            match self.colors[e.index()] {
                Color::Blue => pr.b += 1,
                Color::Red => pr.r += 1,
                Color::Purple => pr.p += 1,
            }
        }
        pr
    }

    pub fn elements_of(&self, color: Color) -> Vec<ElementId> {
        (0..self.params.n)
            .filter(|&i| self.colors[i] == color)
            .map(ElementId::from)
            .collect()
    }

    pub fn table_value(&self, pr: ColorProfile3) -> &Value {
        &self.table[table_index(&self.params, pr)]
    }
}

fn table_index(params: &CardHardParams, pr: ColorProfile3) -> usize {
    (pr.b * params.k + pr.r) * 2 + pr.p
}

fn build_table(params: &CardHardParams) -> Vec<Value> {
    let (k, h) = (params.k as i64, params.h as i64);
    let mut table = vec![BigInt::default(); (params.blues() + 1) * params.k * 2];
    for p in 0..2 {
        let mut red_free = base_value(p, params.h);
        for b in 0..=params.blues() {
            let mut v = red_free;
            for r in 0..params.k {
                table[table_index(params, ColorProfile3 { b, r, p })] = BigInt::from(v);
                v += delta_r_i64(b as i64, r as i64, k, h);
            }
            red_free += delta_b_i64(b as i64, p, k, h);
        }
    }
    table
}

impl ValueOracle for CardHardInstance {
    fn ground_size(&self) -> usize {
        self.params.n
    }

    fn value(&self, set: &ElementSet) -> Value {
        self.table_value(self.profile_of(set)).clone()
    }
}

/// Checks the three profile-level marginal families over all profiles with
/// `b ≤ min(b_max, n−K)`: each of the p-, r- and b-marginals is
/// non-negative and non-increasing as every coordinate grows. Returns the
/// first failure.
pub fn check_profile_lemmas(params: &CardHardParams, b_max: usize) -> Option<String> {
    let bb = b_max.min(params.blues());
    let rr = params.reds();
    let f = |b, r, p| profile_value_raw(ColorProfile3::new(b, r, p), params.k, params.h);
    let grid = |b_hi: usize, r_hi: usize| {
        (0..=b_hi).flat_map(move |b| (0..=r_hi).flat_map(move |r| (0..2).map(move |p| (b, r, p))))
    };
    let zero = BigInt::default();

    let dp = |b, r| f(b, r, 1) - f(b, r, 0);
    for (b1, r1, _) in grid(bb, rr).filter(|x| x.2 == 0) {
        let m1 = dp(b1, r1);
        if m1 < zero {
            return Some(format!("p-marginal negative at b={b1} r={r1}"));
        }
        for (b2, r2, _) in grid(bb, rr).filter(|x| x.2 == 0 && x.0 >= b1 && x.1 >= r1) {
            if dp(b2, r2) > m1 {
                return Some(format!("p-marginal grows from ({b1},{r1}) to ({b2},{r2})"));
            }
        }
    }
    if rr >= 1 {
        let dr = |b, r, p| f(b, r + 1, p) - f(b, r, p);
        for (b1, r1, p1) in grid(bb, rr - 1) {
            let m1 = dr(b1, r1, p1);
            if m1 < zero {
                return Some(format!("r-marginal negative at ({b1},{r1},{p1})"));
            }
            for (b2, r2, p2) in grid(bb, rr - 1).filter(|x| x.0 >= b1 && x.1 >= r1 && x.2 >= p1) {
                if dr(b2, r2, p2) > m1 {
                    return Some(format!("r-marginal grows from ({b1},{r1},{p1}) to ({b2},{r2},{p2})"));
                }
            }
        }
    }
    if bb >= 1 {
        let db = |b, r, p| f(b + 1, r, p) - f(b, r, p);
        for (b1, r1, p1) in grid(bb - 1, rr) {
            let m1 = db(b1, r1, p1);
            if m1 < zero {
                return Some(format!("b-marginal negative at ({b1},{r1},{p1})"));
            }
            for (b2, r2, p2) in grid(bb - 1, rr).filter(|x| x.0 >= b1 && x.1 >= r1 && x.2 >= p1) {
                if db(b2, r2, p2) > m1 {
                    return Some(format!("b-marginal grows from ({b1},{r1},{p1}) to ({b2},{r2},{p2})"));
                }
            }
        }
    }
    None
}

/// One row of the red-free-purple grid: `f(b, r, 0)` for `r = 0..K−1` and
/// `Δ_r(b, r)` between consecutive columns. Marginals are `None` on the
/// last row, where no blue remains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridRow {
    pub b: usize,
    pub f: Vec<Value>,
    pub delta_r: Vec<Option<Value>>,
}

/// The `p = 0` grid for `b = 0..=n−K`.
pub fn card_grid(params: &CardHardParams) -> Vec<GridRow> {
    (0..=params.blues())
        .map(|b| GridRow {
            b,
            f: (0..params.k)
                .map(|r| profile_value_raw(ColorProfile3::new(b, r, 0), params.k, params.h))
                .collect(),
            delta_r: (0..params.k - 1)
                .map(|r| (b < params.blues()).then(|| delta_r(b, r, params)))
                .collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{restrict, verify_monotone_submodular, Verdict, DEFAULT_EXHAUSTIVE_LIMIT};

    fn k4h4() -> CardHardParams {
        CardHardParams::new(14, 4, 4).unwrap()
    }

    fn v(x: i64) -> Value {
        BigInt::from(x)
    }

    #[test]
    fn delta_r_table_entries() {
        let p = k4h4();
        assert_eq!(delta_r(0, 0, &p), v(7));
        assert_eq!(delta_r(4, 0, &p), v(3));
        assert_eq!(delta_r(9, 0, &p), v(0));
    }

    #[test]
    fn delta_b_entries() {
        let p = k4h4();
        assert_eq!(delta_b(2, 0, &p), v(5));
        assert_eq!(delta_b(2, 1, &p), v(3));
        for b in 0..30 {
            assert_eq!(delta_b(b, 0, &p), delta_r(b, 0, &p));
        }
    }

    #[test]
    fn profile_values_from_table() {
        let p = k4h4();
        let f = |b, r, q| profile_value(ColorProfile3::new(b, r, q), &p).unwrap();
        assert_eq!(f(0, 0, 0), v(0));
        assert_eq!(f(4, 0, 0), v(22));
        assert_eq!(f(0, 3, 0), v(21));
        assert_eq!(f(9, 3, 0), v(31));
        assert_eq!(f(3, 0, 1), v(19));
        assert_eq!(f(4, 0, 0), output_value_blue(&p));
        assert_eq!(f(3, 0, 1), output_value_purple(&p));
        assert_eq!(output_value_purple(&p), v(19));
    }

    #[test]
    fn profile_out_of_range_rejected() {
        let p = CardHardParams::new(8, 3, 3).unwrap();
        assert!(profile_value(ColorProfile3::new(6, 0, 0), &p).is_err());
        assert!(profile_value(ColorProfile3::new(0, 3, 0), &p).is_err());
    }

    #[test]
    fn closed_forms() {
        assert_eq!(optimal_value(&k4h4()), v(31));
        assert_eq!(output_bound(&k4h4()), v(22));
        let p22 = CardHardParams::new(4, 2, 2).unwrap();
        assert_eq!(optimal_value(&p22), v(6));
        assert_eq!(profile_value(ColorProfile3::new(0, 1, 1), &p22).unwrap(), v(6));
    }

    #[test]
    fn ratio_bound_small_k_clamps() {
        let rb = ratio_bound(2).unwrap();
        assert_eq!(rb.h, 2);
        assert_eq!(rb.ratio, BigRational::new(v(5), v(6)));
        assert!(ratio_bound(1).is_err());
    }

    #[test]
    fn invalid_params() {
        assert!(CardHardParams::new(8, 3, 2).is_err());
        assert!(CardHardParams::new(5, 3, 3).is_err());
    }

    #[test]
    fn instance_coloring_counts() {
        let inst = CardHardInstance::instantiate(CardHardParams::new(20, 4, 5).unwrap(), 7).unwrap();
        assert_eq!(inst.elements_of(Color::Blue).len(), 16);
        assert_eq!(inst.elements_of(Color::Red).len(), 3);
        assert_eq!(inst.elements_of(Color::Purple).len(), 1);
        assert_eq!(inst.value(&ElementSet::new()), v(0));
    }

    #[test]
    fn table_matches_direct_sum() {
        let params = CardHardParams::new(16, 4, 6).unwrap();
        let inst = CardHardInstance::instantiate(params, 1).unwrap();
        for b in 0..=params.blues() {
            for r in 0..=params.reds() {
                for p in 0..2 {
                    let pr = ColorProfile3::new(b, r, p);
                    assert_eq!(inst.table_value(pr), &profile_value(pr, &params).unwrap());
                }
            }
        }
    }

    #[test]
    fn k_blues_plus_purple() {
        let params = CardHardParams::new(10, 3, 4).unwrap();
        let inst = CardHardInstance::instantiate(params, 3).unwrap();
        let mut s: ElementSet = inst.elements_of(Color::Blue).into_iter().take(2).collect();
        s.insert(inst.elements_of(Color::Purple)[0]);
        assert_eq!(inst.value(&s), profile_value(ColorProfile3::new(2, 0, 1), &params).unwrap());
    }

    #[test]
    fn residual_of_one_blue() {
        let params = CardHardParams::new(10, 3, 3).unwrap();
        let inst = CardHardInstance::instantiate(params, 11).unwrap();
        let blues = inst.elements_of(Color::Blue);
        let g = restrict(&inst, &ElementSet::singleton(blues[0]));
        // Δ_b(1,0,0) by direct formula: b=1 ≤ h, so K−1+h−1
        let expected = v(3 - 1 + 3 - 1);
        assert_eq!(g.value(&ElementSet::singleton(blues[1])), expected);
        assert_eq!(delta_b(1, 0, &params), expected);
    }

    #[test]
    fn profile_lemmas_hold() {
        for (k, h) in [(2, 2), (3, 3), (3, 6), (4, 4), (4, 8)] {
            let params = CardHardParams::new(30, k, h).unwrap();
            assert_eq!(check_profile_lemmas(&params, 12), None, "K={k} h={h}");
        }
    }

    #[test]
    fn grid_shape() {
        let g = card_grid(&k4h4());
        assert_eq!(g.len(), 11);
        assert_eq!(g[5].f[1], v(27));
        assert_eq!(g[10].delta_r, vec![None, None, None]);
        assert_eq!(g[6].delta_r[1], Some(v(1)));
    }

    #[test]
    fn n8_k3_h3_is_monotone_submodular() {
        let inst = CardHardInstance::instantiate(CardHardParams::new(8, 3, 3).unwrap(), 0).unwrap();
        assert_eq!(verify_monotone_submodular(&inst, DEFAULT_EXHAUSTIVE_LIMIT).unwrap(), Verdict::Ok);
    }
}

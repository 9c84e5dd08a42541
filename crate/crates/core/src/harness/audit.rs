//! Canonical-process auditing against the hidden coloring.
//!
//! `X_t`: the set held after step `t−1` contains a red element and `e_t`
//! is red, for `1 ≤ t ≤ n−1`. `Y`: the set held after step `n−1` contains
//! a red element. While neither happens, every set the algorithm can
//! query holds at most one red, so it cannot tell reds from blues and
//! follows the canonical process.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::experiment::{run_experiment, AlgorithmId, ExperimentConfig};
use super::instance::InstanceFile;
use crate::error::{Error, Result};
use crate::oracle::{ElementId, Value, WindowRecord};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the closed-form endpoints are exact at the boundaries
    let low = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let high = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (low, high)
}

/// An empirical frequency with its 95% Wilson interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub count: usize,
    pub trials: usize,
    pub frequency: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Proportion {
    pub fn new(count: usize, trials: usize) -> Self {
        let (ci_low, ci_high) = wilson_interval(count, trials, Z95);
        let frequency = if trials == 0 { 0.0 } else { count as f64 / trials as f64 };
        Proportion { count, trials, frequency, ci_low, ci_high }
    }
}

/// Deviation events of one run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviationFlags {
    /// Steps `t` at which `X_t` happened.
    pub x_steps: Vec<usize>,
    pub y: bool,
}

impl DeviationFlags {
    pub fn deviated(&self) -> bool {
        self.y || !self.x_steps.is_empty()
    }
}

/// Reads the events off a window log of a stream of length `n`; record
/// `t` carries the set held after step `t−1` and the arrival `e_t`.
pub fn deviation_flags(windows: &[WindowRecord], n: usize, is_red: impl Fn(ElementId) -> bool) -> DeviationFlags {
    let mut flags = DeviationFlags::default();
    for w in windows {
        let held_red = || w.stored.iter().any(&is_red);
        if w.step >= 1 && w.step < n {
            if w.arrival.is_some_and(&is_red) && held_red() {
                flags.x_steps.push(w.step);
            }
        } else if w.step == n && n >= 1 && held_red() {
            flags.y = true;
        }
    }
    flags
}

/// Whether the deviation frequency at `2m` is consistent with half the
/// frequency at `m`: the halved interval at `m` overlaps the interval at
/// `2m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendCheck {
    pub at_m: Proportion,
    pub at_2m: Proportion,
    pub halved_low: f64,
    pub halved_high: f64,
    pub consistent: bool,
}

pub fn halving_trend(at_m: &Proportion, at_2m: &Proportion) -> TrendCheck {
    let (halved_low, halved_high) = (at_m.ci_low / 2.0, at_m.ci_high / 2.0);
    let consistent = at_2m.ci_low <= halved_high && halved_low <= at_2m.ci_high;
    TrendCheck { at_m: at_m.clone(), at_2m: at_2m.clone(), halved_low, halved_high, consistent }
}

/// Monte Carlo summary of how often an element-store algorithm leaves the
/// canonical process, and what that buys it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalAudit {
    pub instance: InstanceFile,
    pub algorithm: AlgorithmId,
    pub budget: Option<usize>,
    pub trials: usize,
    /// `⋁ X_t ∨ Y`.
    pub deviation: Proportion,
    pub x_any: Proportion,
    pub y: Proportion,
    #[serde(with = "crate::serde_value")]
    pub optimum: Value,
    #[serde(with = "crate::serde_value")]
    pub output_bound: Value,
    /// Trials whose returned value exceeds the output bound.
    pub above_bound: Proportion,
    /// Largest value any query returned, over all trials.
    #[serde(with = "crate::serde_value")]
    pub max_observed: Value,
    /// Trials that stayed canonical yet observed a value above the bound;
    /// always 0 for a correct instance.
    pub canonical_ceiling_breaches: usize,
    pub mean_ratio: f64,
}

/// Runs `trials` element-store runs on a hard instance under its
/// lower-bound distribution and audits each against the hidden coloring.
pub fn canonical_audit(
    instance: &InstanceFile,
    algorithm: AlgorithmId,
    epsilon: BigRational,
    budget: Option<usize>,
    trials: usize,
    seed: u64,
) -> Result<CanonicalAudit> {
    if !matches!(algorithm, AlgorithmId::Sieve | AlgorithmId::StoreAll) {
        return Err(Error::InvalidParams(format!(
            "the canonical audit needs an element-store algorithm, not `{}`",
            algorithm.name()
        )));
    }
    let inst = instance.instantiate()?;
    let output_bound = inst.output_bound().ok_or_else(|| {
        Error::InvalidParams(format!("{} instances have no hidden coloring to audit", instance.kind.name()))
    })?;
    let mut config = ExperimentConfig::new(instance.clone(), algorithm, epsilon, trials)?;
    config.seed = seed;
    config.budget = budget;
    let report = run_experiment(&config)?;
    if let Some(bad) = report.trials.iter().find_map(|t| t.error.as_ref()) {
        return Err(Error::InvalidParams(bad.clone()));
    }

    let audits: Vec<_> = report.trials.iter().filter_map(|t| t.audit.as_ref()).collect();
    let count = |pred: &dyn Fn(&super::experiment::TrialAudit) -> bool| audits.iter().filter(|a| pred(a)).count();
    let max_observed = audits.iter().filter_map(|a| a.max_observed.clone()).max().unwrap_or_default();
    Ok(CanonicalAudit {
        instance: instance.clone(),
        algorithm,
        budget,
        trials,
        deviation: Proportion::new(count(&|a| a.flags.deviated()), trials),
        x_any: Proportion::new(count(&|a| !a.flags.x_steps.is_empty()), trials),
        y: Proportion::new(count(&|a| a.flags.y), trials),
        optimum: inst.exact_optimum()?,
        above_bound: Proportion::new(report.trials.iter().filter(|t| t.value > output_bound).count(), trials),
        max_observed,
        canonical_ceiling_breaches: count(&|a| {
            !a.flags.deviated() && a.max_observed.as_ref().is_some_and(|v| v > &output_bound)
        }),
        output_bound,
        mean_ratio: report.aggregates.mean_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ElementSet;

    #[test]
    fn wilson_known_values() {
        // 0 of 10: upper limit z²/(n+z²)
        let (lo, hi) = wilson_interval(0, 10, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - Z95 * Z95 / (10.0 + Z95 * Z95)).abs() < 1e-12);
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!((lo + hi - 1.0).abs() < 1e-12);
        assert!((hi - 0.5 - 0.0960).abs() < 1e-3);
    }

    fn rec(step: usize, stored: &[u32], arrival: Option<u32>) -> WindowRecord {
        WindowRecord {
            step,
            stored: stored.iter().map(|&e| ElementId(e)).collect::<ElementSet>(),
            arrival: arrival.map(ElementId),
        }
    }

    #[test]
    fn flags_from_windows() {
        let red = |e: ElementId| e.0 >= 10;
        let log = vec![
            rec(1, &[], Some(10)),
            rec(2, &[10], Some(1)),
            rec(3, &[10, 1], Some(11)),
            rec(4, &[1], Some(2)),
            rec(5, &[2], None),
        ];
        let f = deviation_flags(&log, 4, red);
        assert_eq!(f.x_steps, vec![3]);
        assert!(!f.y);
        assert!(f.deviated());

        let g = deviation_flags(&[rec(4, &[12], Some(3))], 4, red);
        assert!(g.y && g.x_steps.is_empty());
    }

    #[test]
    fn store_all_always_deviates_and_sees_past_the_ceiling() {
        let f = InstanceFile::hard_matroid(3, 4, 2);
        let a = canonical_audit(&f, AlgorithmId::StoreAll, BigRational::new(1.into(), 10.into()), None, 5, 0).unwrap();
        assert_eq!(a.deviation.count, 5);
        assert!(a.max_observed > a.output_bound);
        assert_eq!(a.canonical_ceiling_breaches, 0);
    }

    #[test]
    fn audit_rejects_coverage_and_weak_algorithms() {
        use crate::harness::instance::ConstraintKind;
        let e = BigRational::new(1.into(), 10.into());
        let cov = InstanceFile::coverage(5, 2, ConstraintKind::Cardinality, 0);
        assert!(canonical_audit(&cov, AlgorithmId::StoreAll, e.clone(), None, 1, 0).is_err());
        let hard = InstanceFile::hard_matroid(2, 3, 0);
        assert!(canonical_audit(&hard, AlgorithmId::Branching, e, None, 1, 0).is_err());
    }

    #[test]
    fn trend_overlap() {
        let a = Proportion::new(40, 200);
        assert!(halving_trend(&a, &Proportion::new(20, 200)).consistent);
        assert!(!halving_trend(&a, &Proportion::new(40, 200)).consistent);
    }
}

//! Trial runner and its schema-versioned JSON/CSV reports.
//!
//! Trial `i` streams with seed `seed + i`. Trials run in parallel and are
//! folded in index order, so a report depends only on its config.

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::audit::{deviation_flags, DeviationFlags};
use super::instance::{Instance, InstanceFile};
use super::streams::{sample_stream, Distribution};
use crate::algs::baselines::{greedy_over, SieveStreaming, StoreAll};
use crate::algs::driver::{validate_epsilon, GuessDriver};
use crate::algs::{run_stream, AlgReport, StreamAlgorithm};
use crate::error::{Error, Result};
use crate::oracle::{AccessPolicy, ElementId, OracleSession, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmId {
    /// Value-guessing driver over the branching trees, weak oracle.
    Branching,
    /// Offline greedy, strong oracle.
    Greedy,
    /// Threshold streaming, element-store oracle.
    Sieve,
    /// Keep everything, greedy at the end, element-store oracle.
    StoreAll,
}

impl AlgorithmId {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmId::Branching => "branching",
            AlgorithmId::Greedy => "greedy",
            AlgorithmId::Sieve => "sieve",
            AlgorithmId::StoreAll => "store-all",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "branching" => Ok(AlgorithmId::Branching),
            "greedy" => Ok(AlgorithmId::Greedy),
            "sieve" => Ok(AlgorithmId::Sieve),
            "store-all" => Ok(AlgorithmId::StoreAll),
            _ => Err(Error::InvalidParams(format!("unknown algorithm `{s}`"))),
        }
    }

    fn uses_element_store(self) -> bool {
        matches!(self, AlgorithmId::Sieve | AlgorithmId::StoreAll)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub instance: InstanceFile,
    pub algorithm: AlgorithmId,
    #[serde(with = "crate::serde_value::rational")]
    pub epsilon: BigRational,
    pub distribution: Distribution,
    pub seed: u64,
    pub trials: usize,
    /// Element budget for the sieve baseline.
    #[serde(default)]
    pub budget: Option<usize>,
    /// Instantiate trial `i` with instance seed `instance.seed + i`.
    #[serde(default)]
    pub vary_instance: bool,
    #[serde(default)]
    pub allow_large_rank: bool,
}

impl ExperimentConfig {
    pub fn new(instance: InstanceFile, algorithm: AlgorithmId, epsilon: BigRational, trials: usize) -> Result<Self> {
        let distribution = Distribution::natural_for(&instance.instantiate()?);
        Ok(ExperimentConfig {
            seed: instance.seed,
            instance,
            algorithm,
            epsilon,
            distribution,
            trials,
            budget: None,
            vary_instance: false,
            allow_large_rank: false,
        })
    }

    pub fn trial_seed(&self, i: usize) -> u64 {
        self.seed.wrapping_add(i as u64)
    }
}

/// Canonical-process outcome of one element-store run on a hard instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialAudit {
    pub flags: DeviationFlags,
    #[serde(with = "crate::serde_value::option")]
    pub max_observed: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    #[serde(with = "crate::serde_value")]
    pub value: Value,
    pub ratio: f64,
    pub queries: u64,
    pub max_stored: usize,
    pub violations: usize,
    pub feasible: bool,
    #[serde(with = "crate::serde_value")]
    pub optimum: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<TrialAudit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TrialRecord {
    fn failed(seed: u64, err: Error) -> Self {
        TrialRecord {
            seed,
            value: Value::zero(),
            ratio: 0.0,
            queries: 0,
            max_stored: 0,
            violations: 0,
            feasible: false,
            optimum: Value::zero(),
            audit: None,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub trials: usize,
    pub failed: usize,
    pub mean_ratio: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub mean_queries: f64,
    pub max_queries: u64,
    pub max_stored: usize,
    pub total_violations: usize,
    pub infeasible: usize,
    /// Trials that left the canonical process, when audited.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviations: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRecord>,
    pub aggregates: Aggregates,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    /// Header plus one row of aggregates.
    pub fn to_csv(&self) -> String {
        let a = &self.aggregates;
        format!(
            "schema_version,algorithm,instance,trials,failed,mean_ratio,min_ratio,max_ratio,mean_queries,max_queries,max_stored,total_violations,infeasible,deviations\n\
             {},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            self.schema_version,
            self.config.algorithm.name(),
            self.config.instance.kind.name(),
            a.trials,
            a.failed,
            a.mean_ratio,
            a.min_ratio,
            a.max_ratio,
            a.mean_queries,
            a.max_queries,
            a.max_stored,
            a.total_violations,
            a.infeasible,
            a.deviations.map_or_else(String::new, |d| d.to_string()),
        )
    }
}

/// `value / optimum` as a float; 1 when the optimum is 0.
pub fn ratio_of(value: &Value, optimum: &Value) -> f64 {
    if optimum.is_zero() {
        return 1.0;
    }
    BigRational::new(value.clone(), optimum.clone()).to_f64().unwrap_or(f64::NAN)
}

/// Runs one algorithm over one stream of one instance.
pub fn run_algorithm(
    instance: &Instance,
    algorithm: AlgorithmId,
    epsilon: &BigRational,
    budget: Option<usize>,
    allow_large_rank: bool,
    stream: &[ElementId],
) -> Result<(AlgReport, Option<TrialAudit>)> {
    let oracle = instance.oracle();
    let constraint = instance.constraint();
    let audited = algorithm.uses_element_store() && instance.output_bound().is_some();
    let policy = match algorithm {
        AlgorithmId::Branching => constraint.weak_policy(),
        AlgorithmId::Greedy => AccessPolicy::Strong,
        AlgorithmId::Sieve | AlgorithmId::StoreAll => AccessPolicy::ElementStore,
    };
    let mut sess = OracleSession::new(oracle, policy);
    if audited {
        sess = sess.with_logging();
    }
    let report = match algorithm {
        AlgorithmId::Branching => {
            let mut drv = GuessDriver::new(constraint, epsilon.clone(), allow_large_rank)?;
            run_stream(&mut drv, stream, &mut sess)
        }
        AlgorithmId::Greedy => {
            let mut all: Vec<ElementId> = stream.to_vec();
            all.sort();
            let (solution, value) = greedy_over(&mut sess, &all, constraint);
            let audit = sess.audit();
            AlgReport {
                solution,
                value,
                queries: audit.query_count,
                max_stored: all.len(),
                branches_spawned: 0,
                v_used: None,
                max_active_guesses: 0,
                violations: audit.rejected_queries.len(),
                discipline_violations: 0,
            }
        }
        AlgorithmId::Sieve => {
            let mut alg = SieveStreaming::new(constraint, epsilon.clone(), budget)?;
            run_stream(&mut alg as &mut dyn StreamAlgorithm, stream, &mut sess)
        }
        AlgorithmId::StoreAll => {
            let mut alg = StoreAll::new(constraint);
            run_stream(&mut alg, stream, &mut sess)
        }
    };
    let audit = audited.then(|| TrialAudit {
        flags: deviation_flags(sess.window_log().unwrap_or(&[]), stream.len(), |e| {
            instance.is_red(e).unwrap_or(false)
        }),
        max_observed: sess.audit().max_observed.clone(),
    });
    Ok((report, audit))
}

fn run_trial(config: &ExperimentConfig, shared: Option<&(Instance, Value)>, i: usize) -> TrialRecord {
    let seed = config.trial_seed(i);
    let owned;
    let (instance, optimum) = match shared {
        Some((inst, opt)) => (inst, opt.clone()),
        None => {
            let built = config
                .instance
                .with_seed(config.instance.seed.wrapping_add(i as u64))
                .instantiate()
                .and_then(|inst| inst.exact_optimum().map(|opt| (inst, opt)));
            match built {
                Ok(pair) => {
                    owned = pair;
                    (&owned.0, owned.1.clone())
                }
                Err(e) => return TrialRecord::failed(seed, e),
            }
        }
    };
    let outcome = sample_stream(instance, config.distribution, seed).and_then(|s| {
        run_algorithm(instance, config.algorithm, &config.epsilon, config.budget, config.allow_large_rank, &s.ordering)
    });
    match outcome {
        Ok((rep, audit)) => TrialRecord {
            seed,
            ratio: ratio_of(&rep.value, &optimum),
            feasible: instance.constraint().is_feasible(&rep.solution),
            value: rep.value,
            queries: rep.queries,
            max_stored: rep.max_stored,
            violations: rep.violations,
            optimum,
            audit,
            error: None,
        },
        Err(e) => TrialRecord::failed(seed, e),
    }
}

/// Executes every trial; per-trial errors land in the records.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    validate_epsilon(&config.epsilon)?;
    if config.trials == 0 {
        return Err(Error::InvalidParams("at least one trial is required".into()));
    }
    let shared = if config.vary_instance {
        None
    } else {
        let inst = config.instance.instantiate()?;
        let opt = inst.exact_optimum()?;
        Some((inst, opt))
    };
    let trials: Vec<TrialRecord> =
        (0..config.trials).into_par_iter().map(|i| run_trial(config, shared.as_ref(), i)).collect();
    let aggregates = aggregate(&trials);
    Ok(RunReport { schema_version: SCHEMA_VERSION, config: config.clone(), trials, aggregates })
}

/// Mean of `value / optimum` summed exactly, so equal ratios average to
/// themselves.
fn exact_mean_ratio(ok: &[&TrialRecord]) -> f64 {
    if ok.is_empty() {
        return 0.0;
    }
    let sum = ok.iter().fold(BigRational::zero(), |acc, t| {
        if t.optimum.is_zero() {
            acc + BigRational::one()
        } else {
            acc + BigRational::new(t.value.clone(), t.optimum.clone())
        }
    });
    (sum / BigRational::from_integer(ok.len().into())).to_f64().unwrap_or(f64::NAN)
}

fn aggregate(trials: &[TrialRecord]) -> Aggregates {
    let ok: Vec<&TrialRecord> = trials.iter().filter(|t| t.error.is_none()).collect();
    let count = ok.len().max(1) as f64;
    let audited = ok.iter().any(|t| t.audit.is_some());
    Aggregates {
        trials: trials.len(),
        failed: trials.len() - ok.len(),
        mean_ratio: exact_mean_ratio(&ok),
        min_ratio: if ok.is_empty() { 0.0 } else { ok.iter().map(|t| t.ratio).fold(f64::INFINITY, f64::min) },
        max_ratio: ok.iter().map(|t| t.ratio).fold(0.0, f64::max),
        mean_queries: ok.iter().map(|t| t.queries as f64).sum::<f64>() / count,
        max_queries: ok.iter().map(|t| t.queries).max().unwrap_or(0),
        max_stored: ok.iter().map(|t| t.max_stored).max().unwrap_or(0),
        total_violations: ok.iter().map(|t| t.violations).sum(),
        infeasible: ok.iter().filter(|t| !t.feasible).count(),
        deviations: audited
            .then(|| ok.iter().filter(|t| t.audit.as_ref().is_some_and(|a| a.flags.deviated())).count()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::instance::ConstraintKind;

    fn eps(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn greedy_on_hard_cardinality_is_optimal() {
        let f = InstanceFile::hard_cardinality(40, 4, 4, 3);
        let cfg = ExperimentConfig::new(f, AlgorithmId::Greedy, eps(1, 10), 1).unwrap();
        let rep = run_experiment(&cfg).unwrap();
        assert_eq!(rep.trials[0].value, Value::from(31));
        assert_eq!(rep.aggregates.min_ratio, 1.0);
    }

    #[test]
    fn reports_are_byte_identical() {
        let f = InstanceFile::coverage(7, 2, ConstraintKind::Cardinality, 5);
        let mut cfg = ExperimentConfig::new(f, AlgorithmId::Branching, eps(1, 10), 6).unwrap();
        cfg.vary_instance = true;
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.aggregates.failed, 0);
        assert_eq!(a.aggregates.total_violations, 0);
    }

    #[test]
    fn sieve_on_hard_matroid_is_audited() {
        let f = InstanceFile::hard_matroid(3, 20, 1);
        let mut cfg = ExperimentConfig::new(f, AlgorithmId::Sieve, eps(1, 10), 4).unwrap();
        cfg.budget = Some(6);
        let rep = run_experiment(&cfg).unwrap();
        assert!(rep.trials.iter().all(|t| t.audit.is_some() && t.max_stored <= 6));
        assert!(rep.aggregates.deviations.is_some());
        assert_eq!(rep.aggregates.total_violations, 0);
    }

    #[test]
    fn zero_trials_rejected() {
        let f = InstanceFile::hard_matroid(2, 3, 1);
        let cfg = ExperimentConfig::new(f, AlgorithmId::Greedy, eps(1, 10), 0).unwrap();
        assert!(run_experiment(&cfg).is_err());
    }
}

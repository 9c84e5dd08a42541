//! Instance files: a kind, its parameters and a seed. Everything random
//! about an instance is re-derived from the seed.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algs::baselines::brute_force_optimum;
use crate::algs::Constraint;
use crate::error::{Error, Result};
use crate::hard_card::{self, CardHardInstance, CardHardParams, Color};
use crate::hard_matroid::{self, MatHardInstance, MatHardParams};
use crate::matroid::Matroid;
use crate::oracle::{Coverage, ElementId, Value, ValueOracle};
use crate::rng::{rng_for, Purpose};

/// Random coverage instances use a universe of `2n` items, each covered
/// with this probability, weights in `1..=COVERAGE_MAX_WEIGHT`.
pub const COVERAGE_DENSITY: f64 = 0.35;
pub const COVERAGE_MAX_WEIGHT: u64 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    HardCardinality,
    HardMatroid,
    Coverage,
}

impl InstanceKind {
    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::HardCardinality => "hard-cardinality",
            InstanceKind::HardMatroid => "hard-matroid",
            InstanceKind::Coverage => "coverage",
        }
    }
}

/// Constraint attached to a coverage instance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    #[default]
    Cardinality,
    /// Capacity-1 partition into `K` classes, element `e` in class `e mod K`.
    Partition,
}

/// On-disk instance description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub kind: InstanceKind,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<ConstraintKind>,
}

impl InstanceFile {
    pub fn hard_cardinality(n: usize, k: usize, h: usize, seed: u64) -> Self {
        InstanceFile { kind: InstanceKind::HardCardinality, k, h: Some(h), m: None, n: Some(n), seed, constraint: None }
    }

    pub fn hard_matroid(k: usize, m: usize, seed: u64) -> Self {
        let n = k.saturating_sub(1) * m + 1;
        InstanceFile { kind: InstanceKind::HardMatroid, k, h: None, m: Some(m), n: Some(n), seed, constraint: None }
    }

    pub fn coverage(n: usize, k: usize, constraint: ConstraintKind, seed: u64) -> Self {
        InstanceFile { kind: InstanceKind::Coverage, k, h: None, m: None, n: Some(n), seed, constraint: Some(constraint) }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        InstanceFile { seed, ..self.clone() }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance files serialize") + "\n"
    }

    pub fn instantiate(&self) -> Result<Instance> {
        Instance::from_file(self)
    }
}

#[derive(Clone, Debug)]
pub enum InstanceBody {
    HardCardinality(CardHardInstance),
    HardMatroid(MatHardInstance),
    Coverage(Coverage),
}

/// A materialized instance with its constraint.
#[derive(Clone, Debug)]
pub struct Instance {
    file: InstanceFile,
    body: InstanceBody,
    constraint: Constraint,
}

impl Instance {
    pub fn from_file(file: &InstanceFile) -> Result<Self> {
        if file.constraint.is_some() && file.kind != InstanceKind::Coverage {
            return Err(Error::InvalidParams(format!("`constraint` is fixed for {} instances", file.kind.name())));
        }
        let (body, constraint) = match file.kind {
            InstanceKind::HardCardinality => {
                let n = file.n.ok_or_else(|| missing("n", file.kind))?;
                let h = file.h.ok_or_else(|| missing("h", file.kind))?;
                let inst = CardHardInstance::instantiate(CardHardParams::new(n, file.k, h)?, file.seed)?;
                (InstanceBody::HardCardinality(inst), Constraint::cardinality(n, file.k))
            }
            InstanceKind::HardMatroid => {
                let params = match file.m {
                    Some(m) => MatHardParams::new(file.k, m)?,
                    None => MatHardParams::with_default_m(file.k)?,
                };
                if file.n.is_some_and(|n| n != params.n()) {
                    return Err(Error::InvalidParams(format!(
                        "n = {} disagrees with (K−1)m+1 = {}",
                        file.n.unwrap_or(0),
                        params.n()
                    )));
                }
                let inst = MatHardInstance::instantiate(params, file.seed)?;
                let c = Constraint::matroid(inst.matroid().clone());
                (InstanceBody::HardMatroid(inst), c)
            }
            InstanceKind::Coverage => {
                let n = file.n.ok_or_else(|| missing("n", file.kind))?;
                if n == 0 || file.k == 0 {
                    return Err(Error::InvalidParams("coverage needs n ≥ 1 and K ≥ 1".into()));
                }
                let mut rng = rng_for(file.seed, Purpose::Coverage);
                let cov = Coverage::random(&mut rng, n, 2 * n, COVERAGE_DENSITY, COVERAGE_MAX_WEIGHT);
                let c = match file.constraint.unwrap_or_default() {
                    ConstraintKind::Cardinality => Constraint::cardinality(n, file.k),
                    ConstraintKind::Partition => {
                        Constraint::matroid(Matroid::unit_partition((0..n).map(|e| e % file.k).collect()))
                    }
                };
                (InstanceBody::Coverage(cov), c)
            }
        };
        Ok(Instance { file: file.clone(), body, constraint })
    }

    pub fn file(&self) -> &InstanceFile {
        &self.file
    }

    pub fn kind(&self) -> InstanceKind {
        self.file.kind
    }

    pub fn body(&self) -> &InstanceBody {
        &self.body
    }

    pub fn oracle(&self) -> &dyn ValueOracle {
        match &self.body {
            InstanceBody::HardCardinality(i) => i,
            InstanceBody::HardMatroid(i) => i,
            InstanceBody::Coverage(c) => c,
        }
    }

    pub fn constraint(&self) -> &Constraint {
        &self.constraint
    }

    pub fn ground_size(&self) -> usize {
        self.oracle().ground_size()
    }

    /// Closed form for hard instances, exhaustive search otherwise.
    pub fn exact_optimum(&self) -> Result<Value> {
        match &self.body {
            InstanceBody::HardCardinality(i) => Ok(hard_card::optimal_value(i.params())),
            InstanceBody::HardMatroid(i) => Ok(hard_matroid::optimal_value(i.params().k)),
            InstanceBody::Coverage(c) => Ok(brute_force_optimum(c, &self.constraint)?.1),
        }
    }

    /// Largest value reachable without ever holding a red pair, for hard
    /// instances.
    pub fn output_bound(&self) -> Option<Value> {
        match &self.body {
            InstanceBody::HardCardinality(i) => Some(hard_card::output_bound(i.params())),
            InstanceBody::HardMatroid(i) => Some(hard_matroid::output_bound(i.params().k)),
            InstanceBody::Coverage(_) => None,
        }
    }

    /// Hidden red flag of `e`; `None` for instances without a coloring.
    pub fn is_red(&self, e: ElementId) -> Option<bool> {
        match &self.body {
            InstanceBody::HardCardinality(i) => Some(i.color_of(e) == Color::Red),
            InstanceBody::HardMatroid(i) => Some(i.hidden_reds()[e.index()]),
            InstanceBody::Coverage(_) => None,
        }
    }
}

fn missing(field: &str, kind: InstanceKind) -> Error {
    Error::InvalidParams(format!("{} instances need `{field}`", kind.name()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let f = InstanceFile::hard_matroid(3, 4, 7);
        let text = f.to_json();
        assert!(text.contains("\"K\": 3"));
        assert!(text.contains("\"kind\": \"hard-matroid\""));
        let back: InstanceFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_unknown_fields_and_mismatched_n() {
        assert!(serde_json::from_str::<InstanceFile>(r#"{"kind":"coverage","K":2,"n":5,"seed":1,"x":0}"#).is_err());
        let mut f = InstanceFile::hard_matroid(3, 4, 7);
        f.n = Some(10);
        assert!(f.instantiate().is_err());
    }

    #[test]
    fn hard_matroid_default_m() {
        let f: InstanceFile = serde_json::from_str(r#"{"kind":"hard-matroid","K":3,"seed":0}"#).unwrap();
        let inst = f.instantiate().unwrap();
        assert_eq!(inst.ground_size(), 9);
        assert_eq!(inst.exact_optimum().unwrap(), Value::from(120));
    }

    #[test]
    fn coverage_is_deterministic() {
        let f = InstanceFile::coverage(6, 2, ConstraintKind::Partition, 11);
        let a = f.instantiate().unwrap();
        let b = f.instantiate().unwrap();
        assert_eq!(a.exact_optimum().unwrap(), b.exact_optimum().unwrap());
        assert_eq!(a.constraint().rank(), 2);
        assert!(a.is_red(ElementId(0)).is_none());
    }

    #[test]
    fn missing_fields() {
        let f: InstanceFile = serde_json::from_str(r#"{"kind":"hard-cardinality","K":3,"n":10,"seed":0}"#).unwrap();
        assert!(matches!(f.instantiate(), Err(Error::InvalidParams(_))));
    }
}

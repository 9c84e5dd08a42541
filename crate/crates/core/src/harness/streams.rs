//! Stream orderings: the two lower-bound distributions, uniform shuffles
//! and caller-supplied orders.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::instance::{Instance, InstanceBody};
use crate::error::{Error, Result};
use crate::hard_card::Color;
use crate::oracle::ElementId;
use crate::rng::{rng_for, Purpose};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    /// Uniform over orders of the reds and blues, purple element last.
    CardD,
    /// Class blocks in class order, uniform inside each block.
    MatroidD,
    Uniform,
    Custom,
}

impl Distribution {
    pub fn name(self) -> &'static str {
        match self {
            Distribution::CardD => "card-d",
            Distribution::MatroidD => "matroid-d",
            Distribution::Uniform => "uniform",
            Distribution::Custom => "custom",
        }
    }

    /// The lower-bound distribution natural for an instance, else uniform.
    pub fn natural_for(instance: &Instance) -> Self {
        match instance.body() {
            InstanceBody::HardCardinality(_) => Distribution::CardD,
            InstanceBody::HardMatroid(_) => Distribution::MatroidD,
            InstanceBody::Coverage(_) => Distribution::Uniform,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamSample {
    pub ordering: Vec<ElementId>,
    pub seed: u64,
    pub distribution: Distribution,
}

impl StreamSample {
    /// Wraps an explicit order after checking it is a permutation of `0..n`.
    pub fn custom(ordering: Vec<ElementId>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for e in &ordering {
            match seen.get_mut(e.index()) {
                Some(s) if !*s => *s = true,
                _ => return Err(Error::InvalidParams(format!("ordering is not a permutation of 0..{n}"))),
            }
        }
        if ordering.len() != n {
            return Err(Error::InvalidParams(format!("ordering has {} of {n} elements", ordering.len())));
        }
        Ok(StreamSample { ordering, seed: 0, distribution: Distribution::Custom })
    }
}

/// Deterministic ordering for `(instance, distribution, seed)`.
pub fn sample_stream(instance: &Instance, distribution: Distribution, seed: u64) -> Result<StreamSample> {
    let mut rng = rng_for(seed, Purpose::Stream);
    let incompatible = || Error::IncompatibleDistribution {
        distribution: distribution.name().into(),
        instance: instance.kind().name().into(),
    };
    let ordering = match (distribution, instance.body()) {
        (Distribution::CardD, InstanceBody::HardCardinality(inst)) => {
            let purple = inst.elements_of(Color::Purple);
            let mut rest: Vec<ElementId> = (0..inst.params().n)
                .map(ElementId::from)
                .filter(|e| inst.color_of(*e) != Color::Purple)
                .collect();
            rest.shuffle(&mut rng);
            rest.extend(purple);
            rest
        }
        (Distribution::MatroidD, InstanceBody::HardMatroid(inst)) => {
            let p = inst.params();
            let mut out = Vec::with_capacity(p.n());
            for class in 1..=p.k {
                let mut block: Vec<ElementId> = p.class_members(class).map(ElementId::from).collect();
                block.shuffle(&mut rng);
                out.extend(block);
            }
            out
        }
        (Distribution::Uniform, _) => {
            let mut all: Vec<ElementId> = (0..instance.ground_size()).map(ElementId::from).collect();
            all.shuffle(&mut rng);
            all
        }
        _ => return Err(incompatible()),
    };
    Ok(StreamSample { ordering, seed, distribution })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::instance::{ConstraintKind, InstanceFile};

    #[test]
    fn card_d_ends_with_purple() {
        let inst = InstanceFile::hard_cardinality(12, 3, 3, 5).instantiate().unwrap();
        let InstanceBody::HardCardinality(h) = inst.body() else { unreachable!() };
        for seed in 0..20 {
            let s = sample_stream(&inst, Distribution::CardD, seed).unwrap();
            assert_eq!(h.color_of(*s.ordering.last().unwrap()), Color::Purple);
            assert_eq!(s.ordering.len(), 12);
        }
    }

    #[test]
    fn matroid_d_blocks() {
        let inst = InstanceFile::hard_matroid(3, 5, 2).instantiate().unwrap();
        let InstanceBody::HardMatroid(h) = inst.body() else { unreachable!() };
        let s = sample_stream(&inst, Distribution::MatroidD, 9).unwrap();
        for (pos, e) in s.ordering.iter().enumerate() {
            assert_eq!(h.params().class_of(*e), (pos / 5 + 1).min(3));
        }
    }

    #[test]
    fn incompatible_pairs() {
        let cov = InstanceFile::coverage(5, 2, ConstraintKind::Cardinality, 0).instantiate().unwrap();
        assert!(matches!(
            sample_stream(&cov, Distribution::CardD, 0),
            Err(Error::IncompatibleDistribution { .. })
        ));
        assert!(sample_stream(&cov, Distribution::Custom, 0).is_err());
        assert!(sample_stream(&cov, Distribution::Uniform, 0).is_ok());
    }

    #[test]
    fn custom_validation() {
        assert!(StreamSample::custom(vec![ElementId(1), ElementId(0)], 2).is_ok());
        assert!(StreamSample::custom(vec![ElementId(1), ElementId(1)], 2).is_err());
        assert!(StreamSample::custom(vec![ElementId(0)], 2).is_err());
        assert!(StreamSample::custom(vec![ElementId(2)], 1).is_err());
    }
}

//! Independence oracles: uniform, partition and explicitly enumerated
//! matroids, plus exhaustive axiom checking for small ground sets.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{ElementId, ElementSet};

/// Largest ground set [`Matroid::check_axioms`] will enumerate.
pub const AXIOM_CHECK_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Matroid {
    /// `|S| ≤ rank`.
    Uniform { n: usize, rank: usize },
    /// At most `capacity[c]` elements from class `c`; `class_of[e]` gives
    /// the class of element `e`.
    Partition { class_of: Vec<usize>, capacity: Vec<usize> },
    /// Independent family given by bitmasks over `n ≤ 64` elements. The
    /// family is taken as given; [`Matroid::check_axioms`] validates it.
    Explicit { n: usize, family: BTreeSet<u64> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AxiomWitness {
    EmptySetMissing,
    /// `subset ⊆ superset`, superset independent, subset not.
    Heredity { subset: ElementSet, superset: ElementSet },
    /// `|small| < |large|` and no `e ∈ large \ small` extends `small`.
    Exchange { small: ElementSet, large: ElementSet },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AxiomReport {
    Ok,
    Violated(AxiomWitness),
}

impl Matroid {
    pub fn uniform(n: usize, rank: usize) -> Self {
        Matroid::Uniform { n, rank }
    }

    pub fn partition(class_of: Vec<usize>, capacity: Vec<usize>) -> Result<Self> {
        if let Some(&c) = class_of.iter().find(|&&c| c >= capacity.len()) {
            return Err(Error::InvalidParams(format!(
                "class {c} has no capacity entry ({} classes)",
                capacity.len()
            )));
        }
        Ok(Matroid::Partition { class_of, capacity })
    }

    /// Every class gets capacity 1.
    pub fn unit_partition(class_of: Vec<usize>) -> Self {
        let classes = class_of.iter().map(|&c| c + 1).max().unwrap_or(0);
        Matroid::Partition { class_of, capacity: vec![1; classes] }
    }

    /// Explicit matroid whose independent sets are all subsets of `bases`.
    pub fn from_bases(n: usize, bases: &[ElementSet]) -> Result<Self> {
        if n > 64 {
            return Err(Error::InvalidParams(format!("explicit matroid needs n ≤ 64, got {n}")));
        }
        let mut family = BTreeSet::new();
        family.insert(0u64);
        for b in bases {
            let mask = b
                .to_mask()
                .filter(|m| n == 64 || *m >> n == 0)
                .ok_or_else(|| Error::InvalidParams(format!("basis {b:?} outside ground set")))?;
            // all submasks
            let mut sub = mask;
            loop {
                family.insert(sub);
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & mask;
            }
        }
        Ok(Matroid::Explicit { n, family })
    }

    /// Explicit family taken verbatim (may violate the axioms).
    pub fn from_family(n: usize, family: impl IntoIterator<Item = ElementSet>) -> Result<Self> {
        if n > 64 {
            return Err(Error::InvalidParams(format!("explicit matroid needs n ≤ 64, got {n}")));
        }
        let family = family
            .into_iter()
            .map(|s| s.to_mask().ok_or_else(|| Error::InvalidParams(format!("{s:?} outside ground set"))))
            .collect::<Result<_>>()?;
        Ok(Matroid::Explicit { n, family })
    }

    pub fn ground_size(&self) -> usize {
        match self {
            Matroid::Uniform { n, .. } | Matroid::Explicit { n, .. } => *n,
            Matroid::Partition { class_of, .. } => class_of.len(),
        }
    }

    pub fn is_independent(&self, set: &ElementSet) -> bool {
        let n = self.ground_size();
        if set.max_id().is_some_and(|e| e.index() >= n) {
            return false;
        }
        match self {
            Matroid::Uniform { rank, .. } => set.len() <= *rank,
            Matroid::Partition { class_of, capacity } => {
                let mut used = vec![0usize; capacity.len()];
                set.iter().all(|e| {
                    let c = class_of[e.index()];
                    used[c] += 1;
                    used[c] <= capacity[c]
                })
            }
            Matroid::Explicit { family, .. } => set.to_mask().is_some_and(|m| family.contains(&m)),
        }
    }

    /// `is_independent(I + e)` for an independent `I`.
    pub fn can_extend(&self, independent: &ElementSet, e: ElementId) -> Result<bool> {
        if !self.is_independent(independent) {
            return Err(Error::NotIndependentInput(independent.clone()));
        }
        Ok(self.is_independent(&independent.with(e)))
    }

    pub fn rank(&self) -> usize {
        match self {
            Matroid::Uniform { n, rank } => (*rank).min(*n),
            Matroid::Partition { class_of, capacity } => {
                let mut sizes = vec![0usize; capacity.len()];
                for &c in class_of {
                    sizes[c] += 1;
                }
                sizes.iter().zip(capacity).map(|(s, c)| (*s).min(*c)).sum()
            }
            Matroid::Explicit { family, .. } => {
                family.iter().map(|m| m.count_ones() as usize).max().unwrap_or(0)
            }
        }
    }

    /// Checks non-emptiness, heredity and the exchange axiom by enumerating
    /// all `2^n` subsets.
    pub fn check_axioms(&self) -> Result<AxiomReport> {
        let n = self.ground_size();
        if n > AXIOM_CHECK_LIMIT {
            return Err(Error::GroundSetTooLarge { n, limit: AXIOM_CHECK_LIMIT });
        }
        let indep: Vec<u64> = (0..1u64 << n)
            .filter(|&m| self.is_independent(&ElementSet::from_mask(m)))
            .collect();
        let is_indep = |m: u64| indep.binary_search(&m).is_ok();

        if !is_indep(0) {
            return Ok(AxiomReport::Violated(AxiomWitness::EmptySetMissing));
        }
        for &m in &indep {
            let mut bits = m;
            while bits != 0 {
                let b = bits & bits.wrapping_neg();
                bits &= bits - 1;
                if !is_indep(m & !b) {
                    return Ok(AxiomReport::Violated(AxiomWitness::Heredity {
                        subset: ElementSet::from_mask(m & !b),
                        superset: ElementSet::from_mask(m),
                    }));
                }
            }
        }
        for &small in &indep {
            for &large in &indep {
                if small.count_ones() >= large.count_ones() {
                    continue;
                }
                let mut diff = large & !small;
                let mut found = false;
                while diff != 0 {
                    let b = diff & diff.wrapping_neg();
                    diff &= diff - 1;
                    if is_indep(small | b) {
                        found = true;
                        break;
                    }
                }
                if !found {
                    return Ok(AxiomReport::Violated(AxiomWitness::Exchange {
                        small: ElementSet::from_mask(small),
                        large: ElementSet::from_mask(large),
                    }));
                }
            }
        }
        Ok(AxiomReport::Ok)
    }

    /// Materialize as an explicit family (n ≤ 20).
    pub fn to_explicit(&self) -> Result<Matroid> {
        let n = self.ground_size();
        if n > 20 {
            return Err(Error::GroundSetTooLarge { n, limit: 20 });
        }
        let family = (0..1u64 << n)
            .filter(|&m| self.is_independent(&ElementSet::from_mask(m)))
            .collect();
        Ok(Matroid::Explicit { n, family })
    }
}

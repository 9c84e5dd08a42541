//! Hard instances and weak-oracle branching algorithms for single-pass
//! streaming submodular maximization under cardinality and matroid
//! constraints.

pub mod algs;
pub mod cli;
pub mod error;
pub mod hard_card;
pub mod harness;
pub mod hard_matroid;
pub mod matroid;
pub mod oracle;
pub mod rng;
pub mod serde_value;

pub use error::{Error, PolicyViolation, Result};
pub use matroid::Matroid;
pub use oracle::{ElementId, ElementSet, Value, ValueOracle};

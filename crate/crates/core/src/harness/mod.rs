//! Experiment plumbing: instance files, stream samplers, the trial runner,
//! canonical-process audits and table reproduction.

pub mod audit;
pub mod experiment;
pub mod instance;
pub mod streams;
pub mod tables;

//! Batch experiment harness: seeded corpora, experiment drivers, report
//! emission, and frozen regression baselines.

pub mod baseline;
pub mod config;
pub mod corpus;
pub mod experiments;
pub mod parallel;
pub mod report;
pub mod suite;

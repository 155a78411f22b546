//! Defect prediction from static-analysis metrics.
//!
//! The crate parses per-file metrics, per-class warning reports and a change
//! log, builds labeled file-level datasets, and evaluates Naive Bayes, PNN
//! and Random Forest classifiers with optional SMOTE balancing and wrapper
//! feature selection.

pub mod balancing;
pub mod builder;
pub mod classifiers;
pub mod dataset;
pub mod evaluation;
pub mod ingest;
pub mod pipeline;
pub mod plot;
pub mod rng;
pub mod selection;
pub mod synth;

pub use dataset::{Label, LabeledDataset, LabeledRecord, Provenance, SourceMix};

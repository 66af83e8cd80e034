//! Counterfactual detection and antecedent/consequent span extraction.

pub mod baseline_models;
pub mod clean_augment;
pub mod corpus;
pub mod ensemble;
pub mod metrics;
pub mod span_codec;
pub mod synth;
pub mod tokenizer;

//! Grammar-induction laboratory around ordered-neuron LSTM language models.
//!
//! The pipeline: ingest PTB-style treebanks ([`treebank`]), train a stacked
//! ON-LSTM language model ([`model`], [`training`]), induce binary parses
//! from master-forget-gate activations ([`induction`]), and score them
//! against gold trees ([`evaluation`]). [`synth`] generates seeded PCFG
//! corpora for desk-scale experiments.

pub mod error;
pub mod evaluation;
pub mod induction;
pub mod model;
pub mod synth;
pub mod training;
pub mod treebank;

pub use error::{Error, Result};

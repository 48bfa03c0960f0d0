//! Voice timbre attribute detection (vTAD).
//!
//! Given speaker embeddings of two utterances `A` and `B` and a timbre
//! descriptor such as *Bright* or *Hoarse*, decide whether `B` is stronger
//! than `A` in that descriptor. This crate holds the allocation-only core:
//!
//! - [`catalog`]: the fixed 34-dimension descriptor vocabulary.
//! - [`embedding`]: validated embedding sets and pair concatenation.
//! - [`dataset`]: annotation records, label vectors, scenario splits,
//!   training samples and evaluation trials.
//! - [`diffnet`]: the two-layer comparator with hand-written backprop,
//!   masked BCE loss, optimizers and the training loop.
//! - [`metrics`]: EER, accuracy and per-descriptor reports.
//! - [`synthetic`]: a planted-attribute data generator for end-to-end checks.
//!
//! File formats and the command-line front end live in the `vtad` crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod catalog;
pub mod dataset;
pub mod diffnet;
pub mod embedding;
pub mod error;
pub mod metrics;
pub mod synthetic;

mod rng;

pub use catalog::{Descriptor, DescriptorCatalog, Gender};
pub use dataset::{
    AnnotationRecord, Direction, LabelVector, Scenario, SplitConfig, SplitPlan, TrainingSample,
    Trial, UtteranceAllocation, UtteranceKey,
};
pub use diffnet::{DiffNetParams, Mode, Optimizer, TrainConfig};
pub use embedding::{Embedding, EmbeddingSet};
pub use error::{Error, Result};
pub use metrics::{DescriptorReport, Report, ScoredTrial};

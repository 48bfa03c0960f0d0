use alloc::string::String;

use crate::catalog::Gender;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown descriptor {name:?} for gender {gender}")]
    UnknownDescriptor { gender: Gender, name: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value at coordinate {index} of {speaker}/{utterance}")]
    NonFiniteValue {
        speaker: String,
        utterance: String,
        index: usize,
    },

    #[error("speaker {speaker} is tagged with both genders")]
    InconsistentGender { speaker: String },

    #[error("duplicate embedding key {speaker}/{utterance}")]
    DuplicateKey { speaker: String, utterance: String },

    #[error("no embedding for {speaker}/{utterance}")]
    MissingEmbedding { speaker: String, utterance: String },

    #[error("annotation pairs speaker {speaker} with itself")]
    SelfPair { speaker: String },

    #[error("annotation carries {count} descriptors; 1 to 3 allowed")]
    TooManyDescriptors { count: usize },

    #[error("speaker {speaker} is {found} but the annotation is {expected}")]
    GenderMismatch {
        speaker: String,
        expected: Gender,
        found: Gender,
    },

    #[error("speaker {speaker} has {have} utterances, {need} needed")]
    InsufficientUtterances {
        speaker: String,
        have: usize,
        need: usize,
    },

    #[error("infeasible split: {0}")]
    InfeasibleSplit(String),

    #[error("train-mode batch of size {size}; batch statistics need at least 2 samples")]
    DegenerateBatch { size: usize },

    #[error("shape mismatch in {what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("forward cache does not match the parameters it is applied to")]
    StaleCache,

    #[error("label vector has no labeled dimension")]
    AllUnlabeled,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("scores contain only one class{}", descriptor_suffix(.descriptor))]
    OneClassOnly { descriptor: Option<String> },

    #[error("empty input")]
    EmptyInput,

    #[error("catalog fingerprint mismatch: expected {expected}, found {found}")]
    CatalogMismatch { expected: String, found: String },
}

fn descriptor_suffix(descriptor: &Option<String>) -> String {
    match descriptor {
        Some(d) => alloc::format!(" (descriptor {d})"),
        None => String::new(),
    }
}

impl Error {
    /// Stable, machine-parsable name of the error class.
    pub fn class(&self) -> &'static str {
        match self {
            Error::UnknownDescriptor { .. } => "UnknownDescriptor",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonFiniteValue { .. } => "NonFiniteValue",
            Error::InconsistentGender { .. } => "InconsistentGender",
            Error::DuplicateKey { .. } => "DuplicateKey",
            Error::MissingEmbedding { .. } => "MissingEmbedding",
            Error::SelfPair { .. } => "SelfPair",
            Error::TooManyDescriptors { .. } => "TooManyDescriptors",
            Error::GenderMismatch { .. } => "GenderMismatch",
            Error::InsufficientUtterances { .. } => "InsufficientUtterances",
            Error::InfeasibleSplit(_) => "InfeasibleSplit",
            Error::DegenerateBatch { .. } => "DegenerateBatch",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::StaleCache => "StaleCache",
            Error::AllUnlabeled => "AllUnlabeled",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::NonFiniteLoss { .. } => "NonFiniteLoss",
            Error::OneClassOnly { .. } => "OneClassOnly",
            Error::EmptyInput => "EmptyInput",
            Error::CatalogMismatch { .. } => "CatalogMismatch",
        }
    }
}

//! Annotations, label vectors, scenario splits, training samples and trials.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::catalog::{DescriptorCatalog, Gender};
use crate::error::{Error, Result};

mod sampling;
mod split;

pub use crate::embedding::UtteranceKey;
pub use sampling::{build_training_samples, build_trials, SpeakerPools, UtteranceAllocation};
pub use split::{split_scenario, DescriptorStats, Scenario, SplitConfig, SplitPlan};

/// Most descriptors a single annotation may carry.
pub const MAX_DESCRIPTORS: usize = 3;

/// One annotated ordered speaker pair: `stronger` exceeds `weaker` in every
/// listed descriptor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub weaker: Arc<str>,
    pub stronger: Arc<str>,
    pub gender: Gender,
    /// Output indices, ascending, all inside `gender`'s block.
    pub descriptors: Vec<usize>,
}

impl AnnotationRecord {
    pub fn new(
        weaker: impl Into<Arc<str>>,
        stronger: impl Into<Arc<str>>,
        gender: Gender,
        names: &[&str],
        catalog: &DescriptorCatalog,
    ) -> Result<Self> {
        let dims = names
            .iter()
            .map(|name| catalog.index_of(gender, name))
            .collect::<Result<Vec<_>>>()?;
        Self::from_dims(weaker, stronger, gender, dims, catalog)
    }

    pub fn from_dims(
        weaker: impl Into<Arc<str>>,
        stronger: impl Into<Arc<str>>,
        gender: Gender,
        mut descriptors: Vec<usize>,
        catalog: &DescriptorCatalog,
    ) -> Result<Self> {
        let weaker = weaker.into();
        let stronger = stronger.into();
        if weaker == stronger {
            return Err(Error::SelfPair {
                speaker: (*weaker).into(),
            });
        }
        descriptors.sort_unstable();
        descriptors.dedup();
        if descriptors.is_empty() {
            return Err(Error::EmptyInput);
        }
        if descriptors.len() > MAX_DESCRIPTORS {
            return Err(Error::TooManyDescriptors {
                count: descriptors.len(),
            });
        }
        for &dim in &descriptors {
            if catalog.gender_of(dim) != Some(gender) {
                return Err(Error::UnknownDescriptor {
                    gender,
                    name: alloc::format!("#{dim}"),
                });
            }
        }
        Ok(Self {
            weaker,
            stronger,
            gender,
            descriptors,
        })
    }

    pub fn ordered_pair(&self) -> (&Arc<str>, &Arc<str>) {
        (&self.weaker, &self.stronger)
    }

    pub fn involves(&self, speaker: &str) -> bool {
        &*self.weaker == speaker || &*self.stronger == speaker
    }
}

/// Utterance order a training sample is presented in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `(weaker, stronger)`: annotated descriptors are labeled 1.
    Forward,
    /// `(stronger, weaker)`: annotated descriptors are labeled 0.
    Reversed,
}

/// Per-dimension comparison label: 1 = B stronger, 0 = B not stronger,
/// -1 = not labeled for this pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelVector(Vec<i8>);

impl LabelVector {
    pub const UNLABELED: i8 = -1;

    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|v| !(-1..=1).contains(*v)) {
            return Err(Error::InvalidConfig(alloc::format!(
                "label value {bad} outside {{-1, 0, 1}}"
            )));
        }
        Ok(Self(values))
    }

    pub fn unlabeled(n_dims: usize) -> Self {
        Self(alloc::vec![Self::UNLABELED; n_dims])
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_labeled(&self, dim: usize) -> bool {
        self.0.get(dim).is_some_and(|&v| v != Self::UNLABELED)
    }

    pub fn labeled_dims(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != Self::UNLABELED)
            .map(|(i, _)| i)
    }
}

pub fn make_label_vector(
    record: &AnnotationRecord,
    direction: Direction,
    catalog: &DescriptorCatalog,
) -> LabelVector {
    let mut label = LabelVector::unlabeled(catalog.n_dims());
    let value = match direction {
        Direction::Forward => 1,
        Direction::Reversed => 0,
    };
    for &dim in &record.descriptors {
        label.0[dim] = value;
    }
    label
}

/// An ordered utterance pair with its label vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    pub a: UtteranceKey,
    pub b: UtteranceKey,
    pub label: Arc<LabelVector>,
}

impl TrainingSample {
    /// Rejects same-speaker pairs and labels without any labeled dimension.
    pub fn new(a: UtteranceKey, b: UtteranceKey, label: Arc<LabelVector>) -> Result<Self> {
        if a.speaker == b.speaker {
            return Err(Error::SelfPair {
                speaker: (*a.speaker).into(),
            });
        }
        if label.labeled_dims().next().is_none() {
            return Err(Error::AllUnlabeled);
        }
        Ok(Self { a, b, label })
    }
}

/// One evaluation trial: is `b` stronger than `a` in `descriptor_dim`?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trial {
    pub a: UtteranceKey,
    pub b: UtteranceKey,
    pub descriptor_dim: usize,
    pub truth: bool,
}

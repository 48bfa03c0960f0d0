//! Validated speaker-embedding sets.

use alloc::collections::btree_map::{BTreeMap, Entry};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::catalog::Gender;
use crate::error::{Error, Result};

/// `(speaker, utterance)` identity of one recording.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UtteranceKey {
    pub speaker: Arc<str>,
    pub utterance: Arc<str>,
}

impl UtteranceKey {
    pub fn new(speaker: impl Into<Arc<str>>, utterance: impl Into<Arc<str>>) -> Self {
        Self {
            speaker: speaker.into(),
            utterance: utterance.into(),
        }
    }
}

impl fmt::Display for UtteranceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.speaker, self.utterance)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub key: UtteranceKey,
    pub gender: Gender,
    pub vector: Vec<f64>,
}

impl Embedding {
    pub fn new(
        speaker: impl Into<Arc<str>>,
        utterance: impl Into<Arc<str>>,
        gender: Gender,
        vector: Vec<f64>,
    ) -> Self {
        Self {
            key: UtteranceKey::new(speaker, utterance),
            gender,
            vector,
        }
    }

    pub fn speaker_id(&self) -> &str {
        &self.key.speaker
    }

    pub fn utterance_id(&self) -> &str {
        &self.key.utterance
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }
}

/// All embeddings of one encoder run, keyed by utterance.
///
/// Every entry has the set-wide dimension, only finite coordinates, and each
/// speaker carries one gender. Iteration order is key order, independent of
/// insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    dim: usize,
    encoder_tag: String,
    entries: BTreeMap<UtteranceKey, Embedding>,
    genders: BTreeMap<Arc<str>, Gender>,
}

impl EmbeddingSet {
    pub fn new(dim: usize, encoder_tag: impl Into<String>) -> Self {
        Self {
            dim,
            encoder_tag: encoder_tag.into(),
            entries: BTreeMap::new(),
            genders: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn encoder_tag(&self) -> &str {
        &self.encoder_tag
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, embedding: Embedding) -> Result<()> {
        if embedding.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: embedding.dim(),
            });
        }
        if let Some(index) = embedding.vector.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                speaker: embedding.speaker_id().into(),
                utterance: embedding.utterance_id().into(),
                index,
            });
        }
        match self.genders.get(&embedding.key.speaker) {
            Some(&g) if g != embedding.gender => {
                return Err(Error::InconsistentGender {
                    speaker: embedding.speaker_id().into(),
                })
            }
            _ => {}
        }
        match self.entries.entry(embedding.key.clone()) {
            Entry::Occupied(_) => Err(Error::DuplicateKey {
                speaker: embedding.speaker_id().into(),
                utterance: embedding.utterance_id().into(),
            }),
            Entry::Vacant(slot) => {
                self.genders
                    .insert(embedding.key.speaker.clone(), embedding.gender);
                slot.insert(embedding);
                Ok(())
            }
        }
    }

    pub fn get(&self, speaker: &str, utterance: &str) -> Result<&Embedding> {
        self.get_key(&UtteranceKey::new(speaker, utterance))
    }

    pub fn get_key(&self, key: &UtteranceKey) -> Result<&Embedding> {
        self.entries
            .get(key)
            .ok_or_else(|| Error::MissingEmbedding {
                speaker: String::from(&*key.speaker),
                utterance: String::from(&*key.utterance),
            })
    }

    pub fn iter(&self) -> impl Iterator<Item = &Embedding> {
        self.entries.values()
    }

    pub fn speakers(&self) -> impl Iterator<Item = (&Arc<str>, Gender)> {
        self.genders.iter().map(|(s, &g)| (s, g))
    }

    pub fn gender_of(&self, speaker: &str) -> Option<Gender> {
        self.genders.get(speaker).copied()
    }

    /// Utterance keys of `speaker`, in key order.
    pub fn utterances_of(&self, speaker: &str) -> Vec<UtteranceKey> {
        let Some((speaker, _)) = self.genders.get_key_value(speaker) else {
            return Vec::new();
        };
        let start = UtteranceKey {
            speaker: speaker.clone(),
            utterance: Arc::from(""),
        };
        self.entries
            .range(start..)
            .take_while(|(k, _)| k.speaker == *speaker)
            .map(|(k, _)| k.clone())
            .collect()
    }
}

/// Concatenate `[a ‖ b]`; order matters.
pub fn pair_embedding(a: &Embedding, b: &Embedding) -> Result<Vec<f64>> {
    let mut out = alloc::vec![0.0; 2 * a.dim()];
    pair_into(&a.vector, &b.vector, &mut out)?;
    Ok(out)
}

/// Write `[a ‖ b]` into `out`, which must hold `2 * a.len()` values.
pub fn pair_into(a: &[f64], b: &[f64], out: &mut [f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if out.len() != 2 * a.len() {
        return Err(Error::DimensionMismatch {
            expected: 2 * a.len(),
            found: out.len(),
        });
    }
    let (head, tail) = out.split_at_mut(a.len());
    head.copy_from_slice(a);
    tail.copy_from_slice(b);
    Ok(())
}

//! The timbre descriptor vocabulary and its layout in the model's output space.
//!
//! Sixteen descriptor names are shared by both genders; *Husky* is annotated
//! for male speakers only and *Shrill* for female speakers only. Each
//! `(gender, name)` pair is its own output dimension:
//!
//! | indices | block  |
//! |---------|--------|
//! | 0..=16  | male, in [`MALE_DESCRIPTORS`] order   |
//! | 17..=33 | female, in [`FEMALE_DESCRIPTORS`] order |

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Descriptors per gender block.
pub const DESCRIPTORS_PER_GENDER: usize = 17;

/// Total output dimensions of the comparator.
pub const N_DIMS: usize = 2 * DESCRIPTORS_PER_GENDER;

pub const MALE_DESCRIPTORS: [&str; DESCRIPTORS_PER_GENDER] = [
    "Bright",
    "Thin",
    "Coarse",
    "Slim",
    "Low",
    "Pure",
    "Rich",
    "Magnetic",
    "Muddy",
    "Hoarse",
    "Round",
    "Flat",
    "Shriveled",
    "Muffled",
    "Soft",
    "Transparent",
    "Husky",
];

pub const FEMALE_DESCRIPTORS: [&str; DESCRIPTORS_PER_GENDER] = [
    "Bright",
    "Thin",
    "Coarse",
    "Slim",
    "Low",
    "Pure",
    "Rich",
    "Magnetic",
    "Muddy",
    "Hoarse",
    "Round",
    "Flat",
    "Shriveled",
    "Muffled",
    "Soft",
    "Transparent",
    "Shrill",
];

/// Evaluation descriptors used for the unseen and seen-speaker scenarios.
pub const DEFAULT_EVAL_MALE: [&str; 5] = ["Bright", "Thin", "Low", "Magnetic", "Pure"];
pub const DEFAULT_EVAL_FEMALE: [&str; 5] = ["Bright", "Thin", "Low", "Coarse", "Slim"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub const ALL: [Gender; 2] = [Gender::Male, Gender::Female];

    /// Single-letter code used in the text formats.
    pub fn code(self) -> char {
        match self {
            Gender::Male => 'M',
            Gender::Female => 'F',
        }
    }

    pub fn from_code(code: &str) -> Option<Gender> {
        match code {
            "M" | "m" => Some(Gender::Male),
            "F" | "f" => Some(Gender::Female),
            _ => None,
        }
    }

    /// Output indices owned by this gender.
    pub fn block(self) -> Range<usize> {
        match self {
            Gender::Male => 0..DESCRIPTORS_PER_GENDER,
            Gender::Female => DESCRIPTORS_PER_GENDER..N_DIMS,
        }
    }

    fn names(self) -> &'static [&'static str; DESCRIPTORS_PER_GENDER] {
        match self {
            Gender::Male => &MALE_DESCRIPTORS,
            Gender::Female => &FEMALE_DESCRIPTORS,
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gender::Male => "male",
            Gender::Female => "female",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Descriptor {
    pub gender: Gender,
    pub name: &'static str,
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.gender.code(), self.name)
    }
}

/// The canonical descriptor catalog. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescriptorCatalog {
    entries: Vec<Descriptor>,
}

impl Default for DescriptorCatalog {
    fn default() -> Self {
        Self::new()
    }
}

impl DescriptorCatalog {
    pub fn new() -> Self {
        let entries = Gender::ALL
            .iter()
            .flat_map(|&gender| {
                gender
                    .names()
                    .iter()
                    .map(move |&name| Descriptor { gender, name })
            })
            .collect();
        Self { entries }
    }

    pub fn n_dims(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Descriptor] {
        &self.entries
    }

    pub fn descriptor(&self, index: usize) -> Option<Descriptor> {
        self.entries.get(index).copied()
    }

    /// Output index of `(gender, name)`. Names match case-insensitively.
    pub fn index_of(&self, gender: Gender, name: &str) -> Result<usize> {
        let block = gender.block();
        gender
            .names()
            .iter()
            .position(|candidate| candidate.eq_ignore_ascii_case(name.trim()))
            .map(|offset| block.start + offset)
            .ok_or_else(|| Error::UnknownDescriptor {
                gender,
                name: String::from(name),
            })
    }

    /// Canonical spelling of a descriptor name for `gender`.
    pub fn canonical_name(&self, gender: Gender, name: &str) -> Result<&'static str> {
        let index = self.index_of(gender, name)?;
        Ok(self.entries[index].name)
    }

    pub fn gender_of(&self, index: usize) -> Option<Gender> {
        self.descriptor(index).map(|d| d.gender)
    }

    /// Hex SHA-256 prefix over the ordered `(gender, name)` layout.
    ///
    /// Stored in checkpoints so a model trained against one layout is never
    /// read back against another.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for (index, d) in self.entries.iter().enumerate() {
            let line = alloc::format!("{index}\t{}\t{}\n", d.gender.code(), d.name);
            hasher.update(line.as_bytes());
        }
        let digest = hasher.finalize();
        digest[..8]
            .iter()
            .map(|byte| alloc::format!("{byte:02x}"))
            .collect()
    }
}

/// Convenience constructor mirroring [`DescriptorCatalog::new`].
pub fn build_catalog() -> DescriptorCatalog {
    DescriptorCatalog::new()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn has_34_dims() {
        assert_eq!(build_catalog().n_dims(), 34);
        assert_eq!(N_DIMS, 34);
    }

    #[test]
    fn male_bright_is_zero() {
        let catalog = build_catalog();
        assert_eq!(catalog.index_of(Gender::Male, "Bright").unwrap(), 0);
    }

    #[test]
    fn every_index_has_one_preimage() {
        let catalog = build_catalog();
        let mut hits = [0usize; N_DIMS];
        for d in catalog.entries() {
            hits[catalog.index_of(d.gender, d.name).unwrap()] += 1;
        }
        assert!(hits.iter().all(|&h| h == 1));
    }

    #[test]
    fn gender_exclusive_names() {
        let catalog = build_catalog();
        let shrill = catalog.index_of(Gender::Female, "Shrill").unwrap();
        assert!((17..34).contains(&shrill));
        assert!(matches!(
            catalog.index_of(Gender::Male, "Shrill"),
            Err(Error::UnknownDescriptor { .. })
        ));
        assert!(catalog.index_of(Gender::Male, "Husky").is_ok());
        assert!(catalog.index_of(Gender::Female, "Husky").is_err());
    }

    #[test]
    fn case_insensitive_lookup_returns_canonical_name() {
        let catalog = build_catalog();
        assert_eq!(
            catalog.index_of(Gender::Female, "sLiM").unwrap(),
            catalog.index_of(Gender::Female, "Slim").unwrap()
        );
        assert_eq!(
            catalog.canonical_name(Gender::Male, "hoarse").unwrap(),
            "Hoarse"
        );
    }

    #[test]
    fn eighteen_distinct_names() {
        let mut names: Vec<&str> = MALE_DESCRIPTORS
            .iter()
            .chain(FEMALE_DESCRIPTORS.iter())
            .copied()
            .collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), 18);
    }

    #[test]
    fn construction_is_deterministic() {
        let a = build_catalog();
        let b = build_catalog();
        assert_eq!(a, b);
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().len(), 16);
    }

    #[test]
    fn default_eval_descriptors_exist() {
        let catalog = build_catalog();
        for name in DEFAULT_EVAL_MALE {
            catalog.index_of(Gender::Male, name).unwrap();
        }
        for name in DEFAULT_EVAL_FEMALE {
            catalog.index_of(Gender::Female, name).unwrap();
        }
    }
}

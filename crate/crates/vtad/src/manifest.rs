//! Split manifests: the records, both sides' record indices, every speaker's
//! utterance pools and the seed, as JSON. A manifest plus the embedding file
//! reproduces all training samples and trials exactly.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use vtad_core::dataset::SpeakerPools;
use vtad_core::{
    AnnotationRecord, DescriptorCatalog, Gender, Scenario, SplitPlan, UtteranceAllocation,
    UtteranceKey,
};

use crate::error::{Error, Result};
use crate::fsio::{read_to_string, write_atomic};

pub const MANIFEST_FORMAT: &str = "vtad-split v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format: String,
    pub catalog: String,
    pub encoder: String,
    pub embedding_dim: usize,
    pub scenario: Scenario,
    pub seed: u64,
    pub k_train: usize,
    pub k_eval: usize,
    pub eval_pool_fraction: f64,
    /// Evaluated descriptors as `M/Bright`-style names.
    pub eval_descriptors: Vec<String>,
    pub records: Vec<ManifestRecord>,
    pub train: Vec<usize>,
    pub eval: Vec<usize>,
    pub pools: BTreeMap<String, ManifestPools>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRecord {
    pub weaker: String,
    pub stronger: String,
    pub gender: Gender,
    pub descriptors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestPools {
    pub train: Vec<String>,
    pub eval: Vec<String>,
}

impl Manifest {
    pub fn new(
        plan: &SplitPlan,
        alloc: &UtteranceAllocation,
        catalog: &DescriptorCatalog,
        encoder: &str,
        embedding_dim: usize,
    ) -> Self {
        let name = |d: usize| catalog.descriptor(d).expect("validated dimension");
        let utterances =
            |keys: &[UtteranceKey]| keys.iter().map(|k| k.utterance.to_string()).collect();
        Manifest {
            format: MANIFEST_FORMAT.into(),
            catalog: catalog.fingerprint(),
            encoder: encoder.into(),
            embedding_dim,
            scenario: plan.scenario,
            seed: plan.seed,
            k_train: plan.k_train,
            k_eval: plan.k_eval,
            eval_pool_fraction: plan.eval_pool_fraction,
            eval_descriptors: plan
                .eval_dims
                .iter()
                .map(|&d| name(d).to_string())
                .collect(),
            records: plan
                .records
                .iter()
                .map(|r| ManifestRecord {
                    weaker: r.weaker.to_string(),
                    stronger: r.stronger.to_string(),
                    gender: r.gender,
                    descriptors: r
                        .descriptors
                        .iter()
                        .map(|&d| name(d).name.to_string())
                        .collect(),
                })
                .collect(),
            train: plan.train.clone(),
            eval: plan.eval.clone(),
            pools: alloc
                .pools
                .iter()
                .map(|(s, p)| {
                    let pools = ManifestPools {
                        train: utterances(&p.train),
                        eval: utterances(&p.eval),
                    };
                    (s.to_string(), pools)
                })
                .collect(),
        }
    }

    /// Rebuild and validate the split and its utterance pools.
    pub fn to_plan(&self, catalog: &DescriptorCatalog) -> Result<(SplitPlan, UtteranceAllocation)> {
        if self.format != MANIFEST_FORMAT {
            return Err(vtad_core::Error::InvalidConfig(format!(
                "unsupported manifest format {:?}",
                self.format
            ))
            .into());
        }
        if self.catalog != catalog.fingerprint() {
            return Err(vtad_core::Error::CatalogMismatch {
                expected: catalog.fingerprint(),
                found: self.catalog.clone(),
            }
            .into());
        }
        let records = self
            .records
            .iter()
            .map(|r| {
                let names: Vec<&str> = r.descriptors.iter().map(String::as_str).collect();
                AnnotationRecord::new(
                    r.weaker.as_str(),
                    r.stronger.as_str(),
                    r.gender,
                    &names,
                    catalog,
                )
            })
            .collect::<vtad_core::Result<Vec<_>>>()?;
        let eval_dims = self
            .eval_descriptors
            .iter()
            .map(|s| parse_descriptor(s, catalog))
            .collect::<vtad_core::Result<Vec<_>>>()?;
        let plan = SplitPlan {
            scenario: self.scenario,
            records,
            train: self.train.clone(),
            eval: self.eval.clone(),
            eval_dims,
            k_train: self.k_train,
            k_eval: self.k_eval,
            eval_pool_fraction: self.eval_pool_fraction,
            seed: self.seed,
        };
        plan.validate()?;
        let keys = |speaker: &Arc<str>, utts: &[String]| -> Vec<UtteranceKey> {
            utts.iter()
                .map(|u| UtteranceKey::new(speaker.clone(), u.as_str()))
                .collect()
        };
        let pools = self
            .pools
            .iter()
            .map(|(s, p)| {
                let speaker: Arc<str> = s.as_str().into();
                let pools = SpeakerPools {
                    train: keys(&speaker, &p.train),
                    eval: keys(&speaker, &p.eval),
                };
                (speaker, pools)
            })
            .collect();
        let alloc = UtteranceAllocation { pools };
        alloc.validate(&plan)?;
        Ok((plan, alloc))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// Parse `M/Bright`-style descriptor names.
pub fn parse_descriptor(s: &str, catalog: &DescriptorCatalog) -> vtad_core::Result<usize> {
    let invalid = || {
        vtad_core::Error::InvalidConfig(format!(
            "descriptor {s:?} is not of the form M/<name> or F/<name>"
        ))
    };
    let (gender, name) = s.split_once('/').ok_or_else(invalid)?;
    let gender = Gender::from_code(gender.trim()).ok_or_else(invalid)?;
    catalog.index_of(gender, name)
}

pub fn save_manifest(manifest: &Manifest, path: &Path) -> Result<()> {
    write_atomic(path, manifest.to_json().as_bytes())
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    serde_json::from_str(&read_to_string(path)?).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

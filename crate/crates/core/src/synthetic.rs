//! Planted-attribute data for end-to-end checks.
//!
//! Every output dimension `n` owns a fixed unit direction `u_n`; the 34
//! directions are orthonormal in `R^dim`. A synthetic speaker carries one
//! scalar attribute `a_n ~ N(0, 1)` for each dimension of its gender's block
//! (the other block does not apply to it and stays zero). An utterance
//! embedding is `Σ_n a_n·u_n + σ·ε` with `ε ~ N(0, I)`.
//!
//! Same-gender speaker pairs are annotated for each descriptor of their
//! gender whose attributes differ by at least `min_gap`, weaker to stronger
//! by true attribute order, at most three descriptors per record.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::catalog::{DescriptorCatalog, Gender};
use crate::dataset::{AnnotationRecord, MAX_DESCRIPTORS};
use crate::embedding::{Embedding, EmbeddingSet};
use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

pub const SYNTHETIC_ENCODER_TAG: &str = "synthetic-planted";

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub speakers_per_gender: usize,
    pub dim: usize,
    pub utterances_per_speaker: usize,
    pub noise_sigma: f64,
    /// Standard deviation of planted attributes.
    pub attribute_std: f64,
    pub min_gap: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            speakers_per_gender: 50,
            dim: 64,
            utterances_per_speaker: 20,
            noise_sigma: 0.1,
            attribute_std: 1.0,
            min_gap: 0.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub records: Vec<AnnotationRecord>,
    pub embeddings: EmbeddingSet,
    /// Planted attributes per speaker, indexed by output dimension.
    pub attributes: BTreeMap<String, Vec<f64>>,
}

pub fn speaker_id(gender: Gender, index: usize) -> String {
    alloc::format!("syn{}{index:03}", gender.code())
}

pub fn generate(config: &SyntheticConfig, catalog: &DescriptorCatalog) -> Result<SyntheticData> {
    let n_dims = catalog.n_dims();
    if config.dim < n_dims {
        return Err(Error::InvalidConfig(alloc::format!(
            "synthetic dimension {} cannot hold {n_dims} orthogonal directions",
            config.dim
        )));
    }
    if config.speakers_per_gender < 2 || config.utterances_per_speaker == 0 {
        return Err(Error::InvalidConfig(
            "need two speakers per gender and one utterance each".into(),
        ));
    }
    let mut rng = stream(config.seed, Domain::Synthetic, 0);
    let directions = orthonormal_directions(n_dims, config.dim, &mut rng);

    let mut embeddings = EmbeddingSet::new(config.dim, SYNTHETIC_ENCODER_TAG);
    let mut attributes = BTreeMap::new();
    let mut records = Vec::new();
    for gender in Gender::ALL {
        let speakers: Vec<(String, Vec<f64>)> = (0..config.speakers_per_gender)
            .map(|i| {
                let mut attrs = alloc::vec![0.0; n_dims];
                for dim in gender.block() {
                    attrs[dim] = config.attribute_std * rng.sample::<f64, _>(StandardNormal);
                }
                (speaker_id(gender, i), attrs)
            })
            .collect();
        for (speaker, attrs) in &speakers {
            let mut mean = alloc::vec![0.0; config.dim];
            for (a, u) in attrs.iter().zip(&directions) {
                mean.iter_mut().zip(u).for_each(|(m, &x)| *m += a * x);
            }
            for u in 0..config.utterances_per_speaker {
                let vector = mean
                    .iter()
                    .map(|&m| m + config.noise_sigma * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                embeddings.insert(Embedding::new(
                    speaker.as_str(),
                    alloc::format!("{speaker}_{u:03}"),
                    gender,
                    vector,
                ))?;
            }
            attributes.insert(speaker.clone(), attrs.clone());
        }
        for i in 0..speakers.len() {
            for j in (i + 1)..speakers.len() {
                let (si, ai) = &speakers[i];
                let (sj, aj) = &speakers[j];
                let mut i_weaker = Vec::new();
                let mut j_weaker = Vec::new();
                for dim in gender.block() {
                    let gap = aj[dim] - ai[dim];
                    if gap >= config.min_gap {
                        i_weaker.push(dim);
                    } else if -gap >= config.min_gap {
                        j_weaker.push(dim);
                    }
                }
                for chunk in i_weaker.chunks(MAX_DESCRIPTORS) {
                    records.push(AnnotationRecord::from_dims(
                        si.as_str(),
                        sj.as_str(),
                        gender,
                        chunk.to_vec(),
                        catalog,
                    )?);
                }
                for chunk in j_weaker.chunks(MAX_DESCRIPTORS) {
                    records.push(AnnotationRecord::from_dims(
                        sj.as_str(),
                        si.as_str(),
                        gender,
                        chunk.to_vec(),
                        catalog,
                    )?);
                }
            }
        }
    }
    Ok(SyntheticData {
        records,
        embeddings,
        attributes,
    })
}

/// `count` orthonormal vectors in `R^dim` by Gram-Schmidt on Gaussian draws.
fn orthonormal_directions<R: Rng>(count: usize, dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
    while basis.len() < count {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    basis
}

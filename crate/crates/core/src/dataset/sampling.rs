use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand_chacha::ChaCha8Rng;

use super::{make_label_vector, AnnotationRecord, Direction, SplitPlan, TrainingSample, Trial};
use crate::catalog::DescriptorCatalog;
use crate::embedding::{EmbeddingSet, UtteranceKey};
use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

/// Utterances a speaker may contribute to each side of a split.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpeakerPools {
    pub train: Vec<UtteranceKey>,
    pub eval: Vec<UtteranceKey>,
}

/// Per-speaker utterance pools for a [`SplitPlan`].
///
/// A speaker present on both sides has its utterances partitioned, so no
/// utterance is ever both trained on and evaluated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UtteranceAllocation {
    pub pools: BTreeMap<Arc<str>, SpeakerPools>,
}

impl UtteranceAllocation {
    pub fn allocate(plan: &SplitPlan, embeddings: &EmbeddingSet) -> Result<Self> {
        let train_speakers = plan.train_speakers();
        let eval_speakers = plan.eval_speakers();
        check_genders(plan, embeddings)?;

        let all: BTreeSet<&Arc<str>> = train_speakers.iter().chain(&eval_speakers).collect();
        let mut pools = BTreeMap::new();
        for (i, speaker) in all.into_iter().enumerate() {
            let mut utts = embeddings.utterances_of(speaker);
            let in_train = train_speakers.contains(speaker);
            let in_eval = eval_speakers.contains(speaker);
            let need = usize::from(in_train) * plan.k_train + usize::from(in_eval) * plan.k_eval;
            if utts.len() < need {
                return Err(Error::InsufficientUtterances {
                    speaker: (**speaker).into(),
                    have: utts.len(),
                    need,
                });
            }
            let pool = match (in_train, in_eval) {
                (true, true) => {
                    let mut rng = stream(plan.seed, Domain::PoolSplit, i as u64);
                    utts.shuffle(&mut rng);
                    let n = utts.len();
                    let wanted = libm::round(n as f64 * plan.eval_pool_fraction) as usize;
                    let n_eval = wanted.clamp(plan.k_eval, n - plan.k_train);
                    let mut train = utts.split_off(n_eval);
                    let mut eval = utts;
                    train.sort_unstable();
                    eval.sort_unstable();
                    SpeakerPools { train, eval }
                }
                (true, false) => SpeakerPools {
                    train: utts,
                    eval: Vec::new(),
                },
                _ => SpeakerPools {
                    train: Vec::new(),
                    eval: utts,
                },
            };
            pools.insert(speaker.clone(), pool);
        }
        Ok(Self { pools })
    }

    /// Pools are sized for the plan and never share an utterance across sides.
    pub fn validate(&self, plan: &SplitPlan) -> Result<()> {
        for (speaker, pool) in &self.pools {
            let train: BTreeSet<&UtteranceKey> = pool.train.iter().collect();
            if let Some(k) = pool.eval.iter().find(|k| train.contains(k)) {
                return Err(Error::InfeasibleSplit(alloc::format!(
                    "utterance {k} allocated to both sides"
                )));
            }
            if pool
                .train
                .iter()
                .chain(&pool.eval)
                .any(|k| k.speaker != *speaker)
            {
                return Err(Error::InfeasibleSplit(alloc::format!(
                    "pool of {speaker} holds a foreign utterance"
                )));
            }
        }
        for speaker in plan.train_speakers() {
            self.pool(&speaker, false, plan.k_train)?;
        }
        for speaker in plan.eval_speakers() {
            self.pool(&speaker, true, plan.k_eval)?;
        }
        Ok(())
    }

    fn pool(&self, speaker: &Arc<str>, eval: bool, need: usize) -> Result<&[UtteranceKey]> {
        let pool = self
            .pools
            .get(speaker)
            .map(|p| if eval { &p.eval } else { &p.train })
            .map(Vec::as_slice)
            .unwrap_or(&[]);
        if pool.len() < need {
            return Err(Error::InsufficientUtterances {
                speaker: (**speaker).into(),
                have: pool.len(),
                need,
            });
        }
        Ok(pool)
    }

    fn sample(
        &self,
        speaker: &Arc<str>,
        eval: bool,
        k: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<UtteranceKey>> {
        let pool = self.pool(speaker, eval, k)?;
        Ok(index::sample(rng, pool.len(), k)
            .into_iter()
            .map(|i| pool[i].clone())
            .collect())
    }
}

fn check_genders(plan: &SplitPlan, embeddings: &EmbeddingSet) -> Result<()> {
    let used: BTreeSet<usize> = plan.train.iter().chain(&plan.eval).copied().collect();
    for record in used.into_iter().map(|i| &plan.records[i]) {
        for speaker in [&record.weaker, &record.stronger] {
            match embeddings.gender_of(speaker) {
                Some(g) if g != record.gender => {
                    return Err(Error::GenderMismatch {
                        speaker: (**speaker).into(),
                        expected: record.gender,
                        found: g,
                    })
                }
                _ => {}
            }
        }
    }
    Ok(())
}

fn sample_pair(
    alloc: &UtteranceAllocation,
    record: &AnnotationRecord,
    eval: bool,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<UtteranceKey>, Vec<UtteranceKey>)> {
    let weaker = alloc.sample(&record.weaker, eval, k, rng)?;
    let stronger = alloc.sample(&record.stronger, eval, k, rng)?;
    Ok((weaker, stronger))
}

/// Materialize `k_train²` forward and `k_train²` reversed samples per
/// training record.
///
/// Forward samples present `(weaker, stronger)` with the annotated
/// descriptors labeled 1; reversed samples swap the order and label them 0.
pub fn build_training_samples(
    plan: &SplitPlan,
    alloc: &UtteranceAllocation,
    catalog: &DescriptorCatalog,
) -> Result<Vec<TrainingSample>> {
    let k = plan.k_train;
    let mut samples = Vec::with_capacity(plan.train.len() * 2 * k * k);
    for (index, record) in plan.train_records() {
        let mut rng = stream(plan.seed, Domain::TrainSampling, index as u64);
        let (weaker, stronger) = sample_pair(alloc, record, false, k, &mut rng)?;
        let forward = Arc::new(make_label_vector(record, Direction::Forward, catalog));
        let reversed = Arc::new(make_label_vector(record, Direction::Reversed, catalog));
        for a in &weaker {
            for b in &stronger {
                samples.push(TrainingSample::new(a.clone(), b.clone(), forward.clone())?);
            }
        }
        for a in &weaker {
            for b in &stronger {
                samples.push(TrainingSample::new(b.clone(), a.clone(), reversed.clone())?);
            }
        }
    }
    Ok(samples)
}

/// Build `k_eval²` target trials (weaker first, truth 1) and as many reversed
/// nontarget trials (truth 0) per evaluation record and evaluated descriptor.
pub fn build_trials(plan: &SplitPlan, alloc: &UtteranceAllocation) -> Result<Vec<Trial>> {
    let k = plan.k_eval;
    let mut trials = Vec::with_capacity(2 * plan.target_trial_count());
    for (index, record) in plan.eval_records() {
        let dims: Vec<usize> = plan.eval_descriptors(record).collect();
        if dims.is_empty() {
            continue;
        }
        let mut rng = stream(plan.seed, Domain::TrialSampling, index as u64);
        let (weaker, stronger) = sample_pair(alloc, record, true, k, &mut rng)?;
        for &dim in &dims {
            for a in &weaker {
                for b in &stronger {
                    trials.push(Trial {
                        a: a.clone(),
                        b: b.clone(),
                        descriptor_dim: dim,
                        truth: true,
                    });
                }
            }
            for a in &weaker {
                for b in &stronger {
                    trials.push(Trial {
                        a: b.clone(),
                        b: a.clone(),
                        descriptor_dim: dim,
                        truth: false,
                    });
                }
            }
        }
    }
    Ok(trials)
}

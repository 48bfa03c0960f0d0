use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::AnnotationRecord;
use crate::catalog::{DescriptorCatalog, Gender, DEFAULT_EVAL_FEMALE, DEFAULT_EVAL_MALE};
use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

/// How much of the evaluated data the model saw during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Evaluation speakers never appear in training.
    Unseen,
    /// Evaluation speakers are trained on, but through other ordered pairs.
    SeenSpeaker,
    /// Evaluation ordered pairs are trained on, with other utterances.
    SeenSpeakerPair,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [
        Scenario::Unseen,
        Scenario::SeenSpeaker,
        Scenario::SeenSpeakerPair,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Unseen => "unseen",
            Scenario::SeenSpeaker => "seen-speaker",
            Scenario::SeenSpeakerPair => "seen-speaker-pair",
        }
    }

    /// Utterances drawn per speaker and evaluation pair.
    pub fn default_k_eval(self) -> usize {
        match self {
            Scenario::SeenSpeakerPair => 10,
            _ => 20,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(alloc::format!("unknown scenario {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitConfig {
    pub scenario: Scenario,
    /// Evaluated output dimensions (both genders). Ignored for
    /// [`Scenario::SeenSpeakerPair`], which evaluates every dimension.
    pub eval_dims: Vec<usize>,
    /// Fraction of each gender's speakers held out in [`Scenario::Unseen`].
    pub holdout_fraction: f64,
    /// Fraction of candidate ordered pairs moved to evaluation in
    /// [`Scenario::SeenSpeaker`].
    pub eval_pair_fraction: f64,
    /// Share of a seen speaker's utterances reserved for evaluation.
    pub eval_pool_fraction: f64,
    pub k_train: usize,
    pub k_eval: usize,
    pub seed: u64,
}

impl SplitConfig {
    pub fn new(scenario: Scenario, catalog: &DescriptorCatalog) -> Self {
        let mut eval_dims: Vec<usize> = DEFAULT_EVAL_MALE
            .iter()
            .map(|n| catalog.index_of(Gender::Male, n))
            .chain(
                DEFAULT_EVAL_FEMALE
                    .iter()
                    .map(|n| catalog.index_of(Gender::Female, n)),
            )
            .collect::<Result<_>>()
            .expect("default evaluation descriptors are in the catalog");
        eval_dims.sort_unstable();
        Self {
            scenario,
            eval_dims,
            holdout_fraction: 0.2,
            eval_pair_fraction: 0.2,
            eval_pool_fraction: 0.5,
            k_train: 20,
            k_eval: scenario.default_k_eval(),
            seed: 0,
        }
    }

    pub fn validate(&self, catalog: &DescriptorCatalog) -> Result<()> {
        let fraction_ok = |f: f64| f > 0.0 && f < 1.0;
        if !fraction_ok(self.holdout_fraction) {
            return Err(Error::InvalidConfig(
                "holdout_fraction must lie in (0, 1)".into(),
            ));
        }
        if !fraction_ok(self.eval_pair_fraction) {
            return Err(Error::InvalidConfig(
                "eval_pair_fraction must lie in (0, 1)".into(),
            ));
        }
        if !fraction_ok(self.eval_pool_fraction) {
            return Err(Error::InvalidConfig(
                "eval_pool_fraction must lie in (0, 1)".into(),
            ));
        }
        if self.k_train == 0 || self.k_eval == 0 {
            return Err(Error::InvalidConfig(
                "k_train and k_eval must be at least 1".into(),
            ));
        }
        if self.scenario != Scenario::SeenSpeakerPair && self.eval_dims.is_empty() {
            return Err(Error::InvalidConfig("no evaluation descriptors".into()));
        }
        if let Some(&bad) = self.eval_dims.iter().find(|&&d| d >= catalog.n_dims()) {
            return Err(Error::InvalidConfig(alloc::format!(
                "evaluation dimension {bad} out of range"
            )));
        }
        Ok(())
    }
}

/// Partition of annotation records into training and evaluation sides.
///
/// Record indices refer to [`SplitPlan::records`]. For
/// [`Scenario::SeenSpeakerPair`] both sides list the same records; the
/// utterance allocation keeps them apart.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan {
    pub scenario: Scenario,
    pub records: Vec<AnnotationRecord>,
    pub train: Vec<usize>,
    pub eval: Vec<usize>,
    /// Evaluated dimensions, ascending.
    pub eval_dims: Vec<usize>,
    pub k_train: usize,
    pub k_eval: usize,
    pub eval_pool_fraction: f64,
    pub seed: u64,
}

/// Per-descriptor pair and speaker counts of one side of a split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescriptorStats {
    pub dim: usize,
    pub pairs: usize,
    pub speakers: usize,
}

type PairKey = (Arc<str>, Arc<str>);

impl SplitPlan {
    pub fn train_records(&self) -> impl Iterator<Item = (usize, &AnnotationRecord)> {
        self.train.iter().map(|&i| (i, &self.records[i]))
    }

    pub fn eval_records(&self) -> impl Iterator<Item = (usize, &AnnotationRecord)> {
        self.eval.iter().map(|&i| (i, &self.records[i]))
    }

    pub fn train_speakers(&self) -> BTreeSet<Arc<str>> {
        speakers_of(self.train_records().map(|(_, r)| r))
    }

    pub fn eval_speakers(&self) -> BTreeSet<Arc<str>> {
        speakers_of(self.eval_records().map(|(_, r)| r))
    }

    pub fn train_pairs(&self) -> BTreeSet<PairKey> {
        pairs_of(self.train_records().map(|(_, r)| r))
    }

    pub fn eval_pairs(&self) -> BTreeSet<PairKey> {
        pairs_of(self.eval_records().map(|(_, r)| r))
    }

    /// Evaluated descriptors of an evaluation record.
    pub fn eval_descriptors<'a>(
        &'a self,
        record: &'a AnnotationRecord,
    ) -> impl Iterator<Item = usize> + 'a {
        record
            .descriptors
            .iter()
            .copied()
            .filter(|d| self.eval_dims.binary_search(d).is_ok())
    }

    /// Number of target trials the plan yields; nontargets match it.
    pub fn target_trial_count(&self) -> usize {
        let per_pair = self.k_eval * self.k_eval;
        self.eval_records()
            .map(|(_, r)| self.eval_descriptors(r).count() * per_pair)
            .sum()
    }

    /// Ordered pairs and speakers per evaluated descriptor on the evaluation
    /// side (or per annotated descriptor on the training side).
    pub fn descriptor_stats(&self, eval_side: bool) -> Vec<DescriptorStats> {
        let mut pairs: BTreeMap<usize, BTreeSet<PairKey>> = BTreeMap::new();
        let side: Vec<&AnnotationRecord> = if eval_side {
            self.eval_records().map(|(_, r)| r).collect()
        } else {
            self.train_records().map(|(_, r)| r).collect()
        };
        for record in side {
            let dims: Vec<usize> = if eval_side {
                self.eval_descriptors(record).collect()
            } else {
                record.descriptors.clone()
            };
            for dim in dims {
                pairs
                    .entry(dim)
                    .or_default()
                    .insert((record.weaker.clone(), record.stronger.clone()));
            }
        }
        pairs
            .into_iter()
            .map(|(dim, set)| {
                let speakers: BTreeSet<&Arc<str>> = set.iter().flat_map(|(a, b)| [a, b]).collect();
                DescriptorStats {
                    dim,
                    pairs: set.len(),
                    speakers: speakers.len(),
                }
            })
            .collect()
    }

    /// Check the scenario's disjointness conditions.
    pub fn validate(&self) -> Result<()> {
        let n = self.records.len();
        if let Some(&bad) = self.train.iter().chain(&self.eval).find(|&&i| i >= n) {
            return Err(Error::InfeasibleSplit(alloc::format!(
                "record index {bad} out of range"
            )));
        }
        if self.train.is_empty() || self.eval.is_empty() {
            return Err(Error::InfeasibleSplit("empty train or eval side".into()));
        }
        match self.scenario {
            Scenario::Unseen => {
                let train = self.train_speakers();
                if let Some(s) = self.eval_speakers().iter().find(|s| train.contains(*s)) {
                    return Err(Error::InfeasibleSplit(alloc::format!(
                        "unseen split evaluates training speaker {s}"
                    )));
                }
            }
            Scenario::SeenSpeaker => {
                let train = self.train_speakers();
                if let Some(s) = self.eval_speakers().iter().find(|s| !train.contains(*s)) {
                    return Err(Error::InfeasibleSplit(alloc::format!(
                        "seen-speaker split evaluates unseen speaker {s}"
                    )));
                }
                let train_pairs = self.train_pairs();
                if let Some((a, b)) = self.eval_pairs().iter().find(|p| train_pairs.contains(*p)) {
                    return Err(Error::InfeasibleSplit(alloc::format!(
                        "ordered pair {a}->{b} on both sides"
                    )));
                }
            }
            Scenario::SeenSpeakerPair => {
                let train_pairs = self.train_pairs();
                if let Some((a, b)) = self.eval_pairs().iter().find(|p| !train_pairs.contains(*p)) {
                    return Err(Error::InfeasibleSplit(alloc::format!(
                        "ordered pair {a}->{b} evaluated but never trained"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn speakers_of<'a>(records: impl Iterator<Item = &'a AnnotationRecord>) -> BTreeSet<Arc<str>> {
    records
        .flat_map(|r| [r.weaker.clone(), r.stronger.clone()])
        .collect()
}

fn pairs_of<'a>(records: impl Iterator<Item = &'a AnnotationRecord>) -> BTreeSet<PairKey> {
    records
        .map(|r| (r.weaker.clone(), r.stronger.clone()))
        .collect()
}

/// Partition `records` for `config.scenario`.
pub fn split_scenario(
    records: &[AnnotationRecord],
    config: &SplitConfig,
    catalog: &DescriptorCatalog,
) -> Result<SplitPlan> {
    config.validate(catalog)?;
    if records.is_empty() {
        return Err(Error::InfeasibleSplit("no annotation records".into()));
    }
    let mut eval_dims = match config.scenario {
        Scenario::SeenSpeakerPair => (0..catalog.n_dims()).collect(),
        _ => config.eval_dims.clone(),
    };
    eval_dims.sort_unstable();
    eval_dims.dedup();

    let mut plan = SplitPlan {
        scenario: config.scenario,
        records: records.to_vec(),
        train: Vec::new(),
        eval: Vec::new(),
        eval_dims,
        k_train: config.k_train,
        k_eval: config.k_eval,
        eval_pool_fraction: config.eval_pool_fraction,
        seed: config.seed,
    };

    match config.scenario {
        Scenario::Unseen => split_unseen(&mut plan, config),
        Scenario::SeenSpeaker => split_seen_speaker(&mut plan, config),
        Scenario::SeenSpeakerPair => {
            plan.train = (0..records.len()).collect();
            plan.eval = plan.train.clone();
        }
    }

    if config.scenario != Scenario::SeenSpeakerPair {
        let covered: BTreeSet<usize> = plan
            .eval_records()
            .flat_map(|(_, r)| plan.eval_descriptors(r).collect::<Vec<_>>())
            .collect();
        if let Some(&missing) = plan.eval_dims.iter().find(|d| !covered.contains(d)) {
            let name = catalog
                .descriptor(missing)
                .map(|d| alloc::format!("{d}"))
                .unwrap_or_default();
            return Err(Error::InfeasibleSplit(alloc::format!(
                "evaluation descriptor {name} has no {} pairs",
                config.scenario
            )));
        }
    }
    plan.validate()?;
    Ok(plan)
}

fn hits_eval(record: &AnnotationRecord, eval_dims: &[usize]) -> bool {
    record
        .descriptors
        .iter()
        .any(|d| eval_dims.binary_search(d).is_ok())
}

fn split_unseen(plan: &mut SplitPlan, config: &SplitConfig) {
    let mut held_out: BTreeSet<Arc<str>> = BTreeSet::new();
    for (g, gender) in Gender::ALL.into_iter().enumerate() {
        let mut speakers: Vec<Arc<str>> =
            speakers_of(plan.records.iter().filter(|r| r.gender == gender))
                .into_iter()
                .collect();
        if speakers.len() < 2 {
            continue;
        }
        let mut rng = stream(config.seed, Domain::SpeakerHoldout, g as u64);
        speakers.shuffle(&mut rng);
        let n = speakers.len();
        let take = (libm::round(n as f64 * config.holdout_fraction) as usize).clamp(1, n - 1);
        held_out.extend(speakers.into_iter().take(take));
    }
    for (i, record) in plan.records.iter().enumerate() {
        let weak_out = held_out.contains(&record.weaker);
        let strong_out = held_out.contains(&record.stronger);
        match (weak_out, strong_out) {
            (false, false) => plan.train.push(i),
            (true, true) if hits_eval(record, &plan.eval_dims) => plan.eval.push(i),
            _ => {}
        }
    }
}

fn split_seen_speaker(plan: &mut SplitPlan, config: &SplitConfig) {
    let mut groups: BTreeMap<PairKey, Vec<usize>> = BTreeMap::new();
    for (i, r) in plan.records.iter().enumerate() {
        groups
            .entry((r.weaker.clone(), r.stronger.clone()))
            .or_default()
            .push(i);
    }
    let mut train_count: BTreeMap<Arc<str>, usize> = BTreeMap::new();
    for r in &plan.records {
        *train_count.entry(r.weaker.clone()).or_default() += 1;
        *train_count.entry(r.stronger.clone()).or_default() += 1;
    }

    let mut candidates: Vec<&PairKey> = groups
        .iter()
        .filter(|(_, idx)| {
            idx.iter()
                .any(|&i| hits_eval(&plan.records[i], &plan.eval_dims))
        })
        .map(|(k, _)| k)
        .collect();
    let mut rng = stream(config.seed, Domain::PairSelection, 0);
    candidates.shuffle(&mut rng);
    let target = (libm::round(candidates.len() as f64 * config.eval_pair_fraction) as usize).max(1);

    let mut covered: BTreeSet<usize> = BTreeSet::new();
    let mut moved: BTreeSet<&PairKey> = BTreeSet::new();
    for key in candidates {
        let idx = &groups[key];
        let adds_coverage = idx.iter().any(|&i| {
            plan.records[i]
                .descriptors
                .iter()
                .any(|d| plan.eval_dims.binary_search(d).is_ok() && !covered.contains(d))
        });
        if moved.len() >= target && !adds_coverage {
            continue;
        }
        // Both speakers must keep at least one training record.
        let (a, b) = key;
        let n = idx.len();
        if train_count[a] <= n || train_count[b] <= n {
            continue;
        }
        *train_count.get_mut(a).unwrap() -= n;
        *train_count.get_mut(b).unwrap() -= n;
        for &i in idx {
            covered.extend(
                plan.records[i]
                    .descriptors
                    .iter()
                    .filter(|d| plan.eval_dims.binary_search(d).is_ok()),
            );
        }
        moved.insert(key);
    }

    for (key, idx) in &groups {
        if moved.contains(key) {
            plan.eval.extend(
                idx.iter()
                    .copied()
                    .filter(|&i| hits_eval(&plan.records[i], &plan.eval_dims)),
            );
        } else {
            plan.train.extend(idx.iter().copied());
        }
    }
    plan.train.sort_unstable();
    plan.eval.sort_unstable();
}

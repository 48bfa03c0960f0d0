//! Split, train and evaluate stages, in memory and against run directories.

use std::fmt::Write as _;

use rayon::prelude::*;
use vtad_core::dataset::{build_training_samples, build_trials, split_scenario};
use vtad_core::diffnet::{score_pairs, train, TrainingLog};
use vtad_core::metrics::{per_descriptor_report, Averaging};
use vtad_core::{
    AnnotationRecord, DescriptorCatalog, DiffNetParams, EmbeddingSet, Report, SplitConfig,
    SplitPlan, TrainConfig, Trial, UtteranceAllocation,
};

use crate::annotations::parse_annotations;
use crate::checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
use crate::config::RunConfig;
use crate::embeddings::load_embedding_set;
use crate::error::Result;
use crate::fsio::write_atomic;
use crate::manifest::{load_manifest, save_manifest, Manifest};
use crate::report::{render_split_table, save_report};

/// Trials per parallel work item. Fixed so results do not depend on the
/// thread count.
const SCORE_CHUNK: usize = 4096;

pub fn split(
    records: &[AnnotationRecord],
    embeddings: &EmbeddingSet,
    config: &SplitConfig,
    catalog: &DescriptorCatalog,
) -> Result<(SplitPlan, UtteranceAllocation)> {
    let plan = split_scenario(records, config, catalog)?;
    let alloc = UtteranceAllocation::allocate(&plan, embeddings)?;
    Ok((plan, alloc))
}

pub fn train_plan(
    plan: &SplitPlan,
    alloc: &UtteranceAllocation,
    embeddings: &EmbeddingSet,
    config: &TrainConfig,
    catalog: &DescriptorCatalog,
) -> Result<(DiffNetParams, TrainingLog)> {
    let samples = build_training_samples(plan, alloc, catalog)?;
    Ok(train(config, &samples, embeddings)?)
}

/// Infer-mode scores for `trials`, computed in parallel, in trial order.
pub fn score_trials(
    params: &DiffNetParams,
    embeddings: &EmbeddingSet,
    trials: &[Trial],
) -> Result<Vec<f64>> {
    let chunks = trials
        .par_chunks(SCORE_CHUNK)
        .map(|chunk| {
            score_pairs(
                params,
                embeddings,
                chunk.iter().map(|t| (&t.a, &t.b, t.descriptor_dim)),
            )
        })
        .collect::<vtad_core::Result<Vec<_>>>()?;
    Ok(chunks.concat())
}

pub fn evaluate(
    params: &DiffNetParams,
    plan: &SplitPlan,
    alloc: &UtteranceAllocation,
    embeddings: &EmbeddingSet,
    catalog: &DescriptorCatalog,
    averaging: Averaging,
) -> Result<Report> {
    let trials = build_trials(plan, alloc)?;
    let scores = score_trials(params, embeddings, &trials)?;
    let scored = trials
        .iter()
        .zip(&scores)
        .map(|(t, &s)| (t.descriptor_dim, s, t.truth));
    Ok(per_descriptor_report(scored, catalog, averaging)?)
}

fn check_encoder(
    expected: &str,
    expected_dim: usize,
    embeddings: &EmbeddingSet,
    what: &str,
) -> Result<()> {
    if expected != embeddings.encoder_tag() || expected_dim != embeddings.dim() {
        return Err(vtad_core::Error::InvalidConfig(format!(
            "{what} was built from {expected} embeddings of dimension {expected_dim}, \
             but the embedding file holds {} embeddings of dimension {}",
            embeddings.encoder_tag(),
            embeddings.dim()
        ))
        .into());
    }
    Ok(())
}

pub struct SplitOutcome {
    pub plan: SplitPlan,
    pub alloc: UtteranceAllocation,
    /// Per-descriptor pair and speaker counts.
    pub summary: String,
}

/// Read the inputs, split them and write the manifest.
pub fn run_split(config: &RunConfig, catalog: &DescriptorCatalog) -> Result<SplitOutcome> {
    let embeddings = load_embedding_set(&config.embeddings)?;
    let records = parse_annotations(&config.annotations, catalog)?;
    let (plan, alloc) = split(&records, &embeddings, &config.split, catalog)?;
    let manifest = Manifest::new(
        &plan,
        &alloc,
        catalog,
        embeddings.encoder_tag(),
        embeddings.dim(),
    );
    save_manifest(&manifest, &config.manifest_path())?;
    let summary = render_split_table(
        &plan.descriptor_stats(false),
        &plan.descriptor_stats(true),
        catalog,
    );
    Ok(SplitOutcome {
        plan,
        alloc,
        summary,
    })
}

/// Train on the manifest's training side; write the checkpoint and log.
pub fn run_train(config: &RunConfig, catalog: &DescriptorCatalog) -> Result<TrainingLog> {
    let manifest = load_manifest(&config.manifest_path())?;
    let (plan, alloc) = manifest.to_plan(catalog)?;
    let embeddings = load_embedding_set(&config.embeddings)?;
    check_encoder(
        &manifest.encoder,
        manifest.embedding_dim,
        &embeddings,
        "the split manifest",
    )?;
    let train_config = config.train_config(embeddings.encoder_tag());
    let (params, log) = train_plan(&plan, &alloc, &embeddings, &train_config, catalog)?;
    let ckpt = Checkpoint {
        params,
        encoder_tag: embeddings.encoder_tag().to_string(),
        train_config: Some(train_config),
    };
    save_checkpoint(&ckpt, &config.checkpoint_path())?;
    write_atomic(
        &config.training_log_path(),
        training_log_tsv(&log).as_bytes(),
    )?;
    Ok(log)
}

/// Score the manifest's trials with the saved checkpoint; write the reports.
pub fn run_eval(config: &RunConfig, catalog: &DescriptorCatalog) -> Result<Report> {
    let ckpt = load_checkpoint(&config.checkpoint_path(), catalog)?;
    let manifest = load_manifest(&config.manifest_path())?;
    let (plan, alloc) = manifest.to_plan(catalog)?;
    let embeddings = load_embedding_set(&config.embeddings)?;
    check_encoder(
        &manifest.encoder,
        manifest.embedding_dim,
        &embeddings,
        "the split manifest",
    )?;
    check_encoder(
        &ckpt.encoder_tag,
        ckpt.params.input_dim / 2,
        &embeddings,
        "the checkpoint",
    )?;
    let report = evaluate(
        &ckpt.params,
        &plan,
        &alloc,
        &embeddings,
        catalog,
        config.averaging,
    )?;
    let (tsv, json) = config.report_paths();
    save_report(&report, &tsv, &json)?;
    Ok(report)
}

pub fn training_log_tsv(log: &TrainingLog) -> String {
    let mut out = String::from("epoch\tmean_loss\tbatches\tdropped_samples\n");
    for e in &log.epochs {
        let _ = writeln!(
            out,
            "{}\t{:?}\t{}\t{}",
            e.epoch + 1,
            e.mean_loss,
            e.batches,
            e.dropped_samples
        );
    }
    out
}

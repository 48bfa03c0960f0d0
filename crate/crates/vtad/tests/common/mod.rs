#![allow(dead_code)]

use std::path::{Path, PathBuf};

use vtad::annotations::save_annotations;
use vtad::save_embedding_set;
use vtad_core::catalog::build_catalog;
use vtad_core::synthetic::{generate, SyntheticConfig, SyntheticData};

/// Write synthetic embeddings, annotations and a config into `dir`.
pub fn write_run_dir(
    dir: &Path,
    synthetic: &SyntheticConfig,
    extra_config: &str,
) -> (PathBuf, SyntheticData) {
    let catalog = build_catalog();
    let data = generate(synthetic, &catalog).unwrap();
    save_embedding_set(&data.embeddings, &dir.join("synthetic.emb")).unwrap();
    save_annotations(&data.records, &catalog, &dir.join("pairs.tsv")).unwrap();
    let config = dir.join("run.toml");
    std::fs::write(
        &config,
        format!("embeddings = \"synthetic.emb\"\nannotations = \"pairs.tsv\"\nout = \"out\"\n{extra_config}"),
    )
    .unwrap();
    (config, data)
}

pub fn small_synthetic() -> SyntheticConfig {
    SyntheticConfig {
        speakers_per_gender: 20,
        dim: 40,
        utterances_per_speaker: 8,
        seed: 3,
        ..SyntheticConfig::default()
    }
}

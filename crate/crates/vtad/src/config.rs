//! Run configuration: a flat TOML file, validated in full before any work.
//!
//! ```toml
//! embeddings = "ecapa.emb"
//! annotations = "pairs.tsv"
//! out = "runs/unseen"
//! scenario = "unseen"
//! eval_male = ["Bright", "Thin", "Low", "Magnetic", "Pure"]
//! eval_female = ["Bright", "Thin", "Low", "Coarse", "Slim"]
//! k_train = 20
//! seed = 0
//! epochs = 10
//! ```
//!
//! Relative paths resolve against the config file's directory. Every key
//! but `embeddings` and `annotations` is optional.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use vtad_core::catalog::{DEFAULT_EVAL_FEMALE, DEFAULT_EVAL_MALE};
use vtad_core::diffnet::default_learning_rate;
use vtad_core::metrics::Averaging;
use vtad_core::{DescriptorCatalog, Gender, Optimizer, Scenario, SplitConfig, TrainConfig};

use crate::error::{Error, Result};
use crate::fsio::read_to_string;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    embeddings: PathBuf,
    annotations: PathBuf,
    out: Option<PathBuf>,
    scenario: Option<String>,
    eval_male: Option<Vec<String>>,
    eval_female: Option<Vec<String>>,
    k_train: Option<usize>,
    k_eval: Option<usize>,
    seed: Option<u64>,
    holdout_fraction: Option<f64>,
    eval_pair_fraction: Option<f64>,
    eval_pool_fraction: Option<f64>,
    learning_rate: Option<f64>,
    batch_size: Option<usize>,
    epochs: Option<usize>,
    hidden_size: Option<usize>,
    dropout_rate: Option<f64>,
    bn_momentum: Option<f64>,
    optimizer: Option<String>,
    adam_beta1: Option<f64>,
    adam_beta2: Option<f64>,
    adam_eps: Option<f64>,
    averaging: Option<String>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub scenario: Option<Scenario>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub embeddings: PathBuf,
    pub annotations: PathBuf,
    pub out: PathBuf,
    pub split: SplitConfig,
    /// Training settings; `learning_rate` is `None` until the encoder is known.
    pub train: TrainConfig,
    pub learning_rate: Option<f64>,
    pub averaging: Averaging,
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides, catalog: &DescriptorCatalog) -> Result<Self> {
        let text = read_to_string(path)?;
        let raw: RawConfig = toml::from_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::resolve(raw, base, overrides, catalog).map_err(|message| Error::Config {
            path: path.to_path_buf(),
            message,
        })
    }

    fn resolve(
        raw: RawConfig,
        base: &Path,
        overrides: &Overrides,
        catalog: &DescriptorCatalog,
    ) -> Result<Self, String> {
        let scenario = match (overrides.scenario, &raw.scenario) {
            (Some(s), _) => s,
            (None, Some(s)) => s.parse().map_err(|e: vtad_core::Error| e.to_string())?,
            (None, None) => Scenario::Unseen,
        };
        let mut split = SplitConfig::new(scenario, catalog);
        let names = |gender: Gender,
                     given: &Option<Vec<String>>,
                     default: &[&str]|
         -> Result<Vec<usize>, String> {
            let defaults: Vec<String> = default.iter().map(|s| s.to_string()).collect();
            given
                .as_ref()
                .unwrap_or(&defaults)
                .iter()
                .map(|n| catalog.index_of(gender, n).map_err(|e| e.to_string()))
                .collect()
        };
        let mut eval_dims = names(Gender::Male, &raw.eval_male, &DEFAULT_EVAL_MALE)?;
        eval_dims.extend(names(
            Gender::Female,
            &raw.eval_female,
            &DEFAULT_EVAL_FEMALE,
        )?);
        eval_dims.sort_unstable();
        eval_dims.dedup();
        split.eval_dims = eval_dims;
        split.k_train = raw.k_train.unwrap_or(split.k_train);
        split.k_eval = raw.k_eval.unwrap_or(split.k_eval);
        split.seed = overrides.seed.or(raw.seed).unwrap_or(0);
        split.holdout_fraction = raw.holdout_fraction.unwrap_or(split.holdout_fraction);
        split.eval_pair_fraction = raw.eval_pair_fraction.unwrap_or(split.eval_pair_fraction);
        split.eval_pool_fraction = raw.eval_pool_fraction.unwrap_or(split.eval_pool_fraction);
        split.validate(catalog).map_err(|e| e.to_string())?;

        let defaults = TrainConfig::default();
        let optimizer = match raw.optimizer.as_deref() {
            None | Some("adam") => {
                let Optimizer::Adam { beta1, beta2, eps } = Optimizer::default() else {
                    unreachable!("default optimizer is Adam")
                };
                Optimizer::Adam {
                    beta1: raw.adam_beta1.unwrap_or(beta1),
                    beta2: raw.adam_beta2.unwrap_or(beta2),
                    eps: raw.adam_eps.unwrap_or(eps),
                }
            }
            Some("sgd")
                if raw.adam_beta1.is_none()
                    && raw.adam_beta2.is_none()
                    && raw.adam_eps.is_none() =>
            {
                Optimizer::Sgd
            }
            Some("sgd") => return Err("adam_* keys given with optimizer = \"sgd\"".into()),
            Some(other) => {
                return Err(format!("unknown optimizer {other:?}; expected adam or sgd"))
            }
        };
        if let Optimizer::Adam { beta1, beta2, eps } = optimizer {
            if !(0.0..1.0).contains(&beta1)
                || !(0.0..1.0).contains(&beta2)
                || !eps.is_finite()
                || eps <= 0.0
            {
                return Err(
                    "adam_beta1 and adam_beta2 must lie in [0, 1), adam_eps must be positive"
                        .into(),
                );
            }
        }
        let train = TrainConfig {
            learning_rate: raw.learning_rate.unwrap_or(defaults.learning_rate),
            batch_size: raw.batch_size.unwrap_or(defaults.batch_size),
            epochs: raw.epochs.unwrap_or(defaults.epochs),
            hidden_size: raw.hidden_size.unwrap_or(defaults.hidden_size),
            dropout_rate: raw.dropout_rate.unwrap_or(defaults.dropout_rate),
            bn_momentum: raw.bn_momentum.unwrap_or(defaults.bn_momentum),
            optimizer,
            seed: split.seed,
        };
        train.validate().map_err(|e| e.to_string())?;

        let averaging = match raw.averaging.as_deref() {
            None | Some("unweighted") => Averaging::Unweighted,
            Some("by-trials") => Averaging::ByTrials,
            Some(other) => {
                return Err(format!(
                    "unknown averaging {other:?}; expected unweighted or by-trials"
                ))
            }
        };
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let embeddings = resolve(raw.embeddings);
        let annotations = resolve(raw.annotations);
        for (key, p) in [("embeddings", &embeddings), ("annotations", &annotations)] {
            if !p.is_file() {
                return Err(format!("{key} file {} does not exist", p.display()));
            }
        }
        let out = overrides
            .out
            .clone()
            .unwrap_or_else(|| resolve(raw.out.unwrap_or_else(|| PathBuf::from("vtad-run"))));
        Ok(RunConfig {
            embeddings,
            annotations,
            out,
            split,
            train,
            learning_rate: raw.learning_rate,
            averaging,
        })
    }

    /// Training settings with the learning rate resolved for `encoder_tag`.
    pub fn train_config(&self, encoder_tag: &str) -> TrainConfig {
        TrainConfig {
            learning_rate: self
                .learning_rate
                .unwrap_or_else(|| default_learning_rate(encoder_tag)),
            ..self.train.clone()
        }
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.out.join("split.json")
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.out.join("model.ckpt")
    }

    pub fn training_log_path(&self) -> PathBuf {
        self.out.join("train_log.tsv")
    }

    pub fn report_paths(&self) -> (PathBuf, PathBuf) {
        (self.out.join("report.tsv"), self.out.join("report.json"))
    }
}

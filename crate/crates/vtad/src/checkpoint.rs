//! Model checkpoints.
//!
//! ```text
//! #vtad-ckpt v1
//! input_dim=<2D>
//! hidden=<H>
//! output_dim=<N>
//! catalog=<fingerprint>
//! encoder=<tag>
//! train.<field>=<value>      (training configuration echo, optional)
//! @<tensor> <len>
//! <values, whitespace separated, any line breaks>
//! ```
//!
//! Values are written as shortest round-trip decimals, so a reload is
//! bit-identical.

use std::fmt::Write as _;
use std::path::Path;

use vtad_core::diffnet::{DiffNetParams, Optimizer, TrainConfig};
use vtad_core::DescriptorCatalog;

use crate::error::{Error, Result};
use crate::fsio::{read_to_string, write_atomic};

pub const CHECKPOINT_MAGIC: &str = "#vtad-ckpt v1";
const VALUES_PER_LINE: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: DiffNetParams,
    pub encoder_tag: String,
    pub train_config: Option<TrainConfig>,
}

pub fn format_checkpoint(ckpt: &Checkpoint) -> String {
    let p = &ckpt.params;
    let mut out = String::new();
    let _ = writeln!(out, "{CHECKPOINT_MAGIC}");
    let _ = writeln!(out, "input_dim={}", p.input_dim);
    let _ = writeln!(out, "hidden={}", p.hidden);
    let _ = writeln!(out, "output_dim={}", p.output_dim);
    let _ = writeln!(out, "catalog={}", p.catalog_fingerprint);
    let _ = writeln!(out, "encoder={}", ckpt.encoder_tag);
    if let Some(c) = &ckpt.train_config {
        for (key, value) in train_config_fields(c) {
            let _ = writeln!(out, "train.{key}={value}");
        }
    }
    for (name, values) in p.tensors() {
        let _ = writeln!(out, "@{name} {}", values.len());
        for line in values.chunks(VALUES_PER_LINE) {
            let text: Vec<String> = line.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{}", text.join(" "));
        }
    }
    out
}

fn train_config_fields(c: &TrainConfig) -> Vec<(&'static str, String)> {
    let mut fields = vec![
        ("learning_rate", format!("{:?}", c.learning_rate)),
        ("batch_size", c.batch_size.to_string()),
        ("epochs", c.epochs.to_string()),
        ("hidden_size", c.hidden_size.to_string()),
        ("dropout_rate", format!("{:?}", c.dropout_rate)),
        ("bn_momentum", format!("{:?}", c.bn_momentum)),
        ("optimizer", c.optimizer.name().to_string()),
    ];
    if let Optimizer::Adam { beta1, beta2, eps } = c.optimizer {
        fields.push(("adam_beta1", format!("{beta1:?}")));
        fields.push(("adam_beta2", format!("{beta2:?}")));
        fields.push(("adam_eps", format!("{eps:?}")));
    }
    fields.push(("seed", c.seed.to_string()));
    fields
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: &Path) -> Result<()> {
    ckpt.params.validate()?;
    write_atomic(path, format_checkpoint(ckpt).as_bytes())
}

/// Load and check the checkpoint against `catalog`.
pub fn load_checkpoint(path: &Path, catalog: &DescriptorCatalog) -> Result<Checkpoint> {
    parse_checkpoint(&read_to_string(path)?, path, catalog)
}

pub fn parse_checkpoint(
    text: &str,
    path: &Path,
    catalog: &DescriptorCatalog,
) -> Result<Checkpoint> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    match lines.next() {
        Some((_, CHECKPOINT_MAGIC)) => {}
        other => {
            let found = other.map_or("", |(_, l)| l);
            return Err(Error::format(
                path,
                1,
                format!("expected `{CHECKPOINT_MAGIC}`, found {found:?}"),
            ));
        }
    }

    let mut header: Vec<(usize, String, String)> = Vec::new();
    let mut blocks: Vec<(usize, String, usize, Vec<f64>)> = Vec::new();
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('@') {
            let (name, len) = rest
                .split_once(' ')
                .and_then(|(n, l)| Some((n, l.trim().parse::<usize>().ok()?)))
                .ok_or_else(|| Error::format(path, line_no, "expected `@<tensor> <len>`"))?;
            blocks.push((line_no, name.to_string(), len, Vec::with_capacity(len)));
        } else if let Some((_, _, _, values)) = blocks.last_mut() {
            for token in line.split_whitespace() {
                let v = token.parse::<f64>().map_err(|_| {
                    Error::format(path, line_no, format!("not a number: {token:?}"))
                })?;
                values.push(v);
            }
        } else {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::format(path, line_no, "expected `key=value`"))?;
            header.push((line_no, key.trim().to_string(), value.trim().to_string()));
        }
    }

    let get = |key: &str| -> Result<&str> {
        header
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(_, _, v)| v.as_str())
            .ok_or_else(|| Error::format(path, 1, format!("missing header field {key}")))
    };
    let parse_usize = |key: &str| -> Result<usize> {
        let v = get(key)?;
        v.parse()
            .map_err(|_| Error::format(path, 1, format!("{key} is not an integer: {v:?}")))
    };
    let fingerprint = get("catalog")?.to_string();
    if fingerprint != catalog.fingerprint() {
        return Err(vtad_core::Error::CatalogMismatch {
            expected: catalog.fingerprint(),
            found: fingerprint,
        }
        .into());
    }
    let mut params = DiffNetParams::zeros(
        parse_usize("input_dim")?,
        parse_usize("hidden")?,
        parse_usize("output_dim")?,
    );
    params.catalog_fingerprint = fingerprint;
    if params.output_dim != catalog.n_dims() {
        return Err(vtad_core::Error::DimensionMismatch {
            expected: catalog.n_dims(),
            found: params.output_dim,
        }
        .into());
    }

    let mut seen = Vec::new();
    for (line_no, name, len, values) in blocks {
        if seen.contains(&name) {
            return Err(Error::format(
                path,
                line_no,
                format!("tensor {name} appears twice"),
            ));
        }
        let expected = params
            .expected_len(&name)
            .ok_or_else(|| Error::format(path, line_no, format!("unknown tensor {name}")))?;
        if len != expected || values.len() != expected {
            return Err(Error::format(
                path,
                line_no,
                format!(
                    "tensor {name} needs {expected} values, header says {len}, found {}",
                    values.len()
                ),
            ));
        }
        *params.tensor_mut(&name).expect("known tensor") = values;
        seen.push(name);
    }
    if let Some((name, _)) = params
        .tensors()
        .iter()
        .find(|(n, _)| !seen.iter().any(|s| s == n))
    {
        return Err(Error::format(path, 1, format!("missing tensor {name}")));
    }
    params.validate()?;

    let train_config = if header.iter().any(|(_, k, _)| k.starts_with("train.")) {
        Some(parse_train_echo(&header, path)?)
    } else {
        None
    };
    Ok(Checkpoint {
        params,
        encoder_tag: get("encoder")?.to_string(),
        train_config,
    })
}

fn parse_train_echo(header: &[(usize, String, String)], path: &Path) -> Result<TrainConfig> {
    let field = |key: &str| -> Result<(usize, &str)> {
        header
            .iter()
            .find(|(_, k, _)| k.strip_prefix("train.") == Some(key))
            .map(|(n, _, v)| (*n, v.as_str()))
            .ok_or_else(|| Error::format(path, 1, format!("missing header field train.{key}")))
    };
    fn parse<T: std::str::FromStr>(path: &Path, (line, v): (usize, &str), key: &str) -> Result<T> {
        v.parse()
            .map_err(|_| Error::format(path, line, format!("train.{key} has invalid value {v:?}")))
    }
    let optimizer = match field("optimizer")? {
        (_, "sgd") => Optimizer::Sgd,
        (_, "adam") => Optimizer::Adam {
            beta1: parse(path, field("adam_beta1")?, "adam_beta1")?,
            beta2: parse(path, field("adam_beta2")?, "adam_beta2")?,
            eps: parse(path, field("adam_eps")?, "adam_eps")?,
        },
        (line, other) => {
            return Err(Error::format(
                path,
                line,
                format!("unknown optimizer {other:?}"),
            ))
        }
    };
    Ok(TrainConfig {
        learning_rate: parse(path, field("learning_rate")?, "learning_rate")?,
        batch_size: parse(path, field("batch_size")?, "batch_size")?,
        epochs: parse(path, field("epochs")?, "epochs")?,
        hidden_size: parse(path, field("hidden_size")?, "hidden_size")?,
        dropout_rate: parse(path, field("dropout_rate")?, "dropout_rate")?,
        bn_momentum: parse(path, field("bn_momentum")?, "bn_momentum")?,
        optimizer,
        seed: parse(path, field("seed")?, "seed")?,
    })
}

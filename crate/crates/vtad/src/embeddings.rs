//! Embedding files.
//!
//! ```text
//! #vtad-emb v1 dim=<D> encoder=<tag>
//! <speaker>\t<utterance>\t<M|F>\t<v1>,<v2>,...,<vD>
//! ```
//!
//! Further `#` lines are comments. Record order carries no meaning.

use std::fmt::Write as _;
use std::path::Path;

use vtad_core::{Embedding, EmbeddingSet, Gender};

use crate::error::{Error, Result};
use crate::fsio::{content_lines, read_to_string, write_atomic};

pub const EMBEDDING_MAGIC: &str = "#vtad-emb v1";

pub fn load_embedding_set(path: &Path) -> Result<EmbeddingSet> {
    parse_embedding_set(&read_to_string(path)?, path)
}

/// Parse embedding text; `path` is only used in error messages.
pub fn parse_embedding_set(text: &str, path: &Path) -> Result<EmbeddingSet> {
    let header = text.lines().next().unwrap_or("").trim_end_matches('\r');
    let (dim, encoder) = parse_header(header).ok_or_else(|| {
        Error::format(
            path,
            1,
            format!("expected header `{EMBEDDING_MAGIC} dim=<D> encoder=<tag>`, found {header:?}"),
        )
    })?;
    let mut set = EmbeddingSet::new(dim, encoder);
    for (line_no, line) in content_lines(text).filter(|(n, _)| *n > 1) {
        let fields: Vec<&str> = line.split('\t').collect();
        let [speaker, utterance, gender, values] = fields[..] else {
            return Err(Error::format(
                path,
                line_no,
                format!("expected 4 tab-separated fields, found {}", fields.len()),
            ));
        };
        if speaker.is_empty() || utterance.is_empty() {
            return Err(Error::format(
                path,
                line_no,
                "empty speaker or utterance id",
            ));
        }
        let gender = Gender::from_code(gender).ok_or_else(|| {
            Error::format(
                path,
                line_no,
                format!("gender must be M or F, found {gender:?}"),
            )
        })?;
        let vector = values
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::format(path, line_no, format!("not a number: {v:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        set.insert(Embedding::new(speaker, utterance, gender, vector))
            .map_err(|e| Error::at_line(path, line_no, e))?;
    }
    Ok(set)
}

fn parse_header(line: &str) -> Option<(usize, String)> {
    let rest = line.strip_prefix(EMBEDDING_MAGIC)?;
    let rest = rest.strip_prefix(' ')?.trim();
    let rest = rest.strip_prefix("dim=")?;
    let (dim, rest) = rest.split_once(' ')?;
    let encoder = rest.trim().strip_prefix("encoder=")?;
    let dim = dim.parse().ok().filter(|&d: &usize| d > 0)?;
    (!encoder.is_empty()).then(|| (dim, encoder.to_string()))
}

/// Serialize in key order with round-trip exact decimals.
pub fn format_embedding_set(set: &EmbeddingSet) -> String {
    let mut out = format!(
        "{EMBEDDING_MAGIC} dim={} encoder={}\n",
        set.dim(),
        set.encoder_tag()
    );
    for e in set.iter() {
        let _ = write!(
            out,
            "{}\t{}\t{}\t",
            e.speaker_id(),
            e.utterance_id(),
            e.gender.code()
        );
        for (i, v) in e.vector.iter().enumerate() {
            let sep = if i == 0 { "" } else { "," };
            let _ = write!(out, "{sep}{v:?}");
        }
        out.push('\n');
    }
    out
}

pub fn save_embedding_set(set: &EmbeddingSet, path: &Path) -> Result<()> {
    write_atomic(path, format_embedding_set(set).as_bytes())
}

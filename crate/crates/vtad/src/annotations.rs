//! Annotation files: `<weaker>\t<stronger>\t<M|F>\t<d1>[,<d2>[,<d3>]]`.
//!
//! Each line says the second speaker is stronger than the first in every
//! listed descriptor. `#` lines are comments.

use std::path::Path;

use vtad_core::{AnnotationRecord, DescriptorCatalog, Gender};

use crate::error::{Error, Result};
use crate::fsio::{content_lines, read_to_string, write_atomic};

pub fn parse_annotations(
    path: &Path,
    catalog: &DescriptorCatalog,
) -> Result<Vec<AnnotationRecord>> {
    parse_annotation_text(&read_to_string(path)?, path, catalog)
}

pub fn parse_annotation_text(
    text: &str,
    path: &Path,
    catalog: &DescriptorCatalog,
) -> Result<Vec<AnnotationRecord>> {
    let mut records = Vec::new();
    for (line_no, line) in content_lines(text) {
        let fields: Vec<&str> = line.split('\t').collect();
        let [weaker, stronger, gender, descriptors] = fields[..] else {
            return Err(Error::format(
                path,
                line_no,
                format!("expected 4 tab-separated fields, found {}", fields.len()),
            ));
        };
        if weaker.is_empty() || stronger.is_empty() {
            return Err(Error::format(path, line_no, "empty speaker id"));
        }
        let gender = Gender::from_code(gender).ok_or_else(|| {
            Error::format(
                path,
                line_no,
                format!("gender must be M or F, found {gender:?}"),
            )
        })?;
        let names: Vec<&str> = descriptors.split(',').map(str::trim).collect();
        let record = AnnotationRecord::new(weaker, stronger, gender, &names, catalog)
            .map_err(|e| Error::at_line(path, line_no, e))?;
        records.push(record);
    }
    Ok(records)
}

pub fn format_annotations(records: &[AnnotationRecord], catalog: &DescriptorCatalog) -> String {
    let mut out = String::new();
    for r in records {
        let names: Vec<&str> = r
            .descriptors
            .iter()
            .map(|&d| catalog.descriptor(d).expect("validated dimension").name)
            .collect();
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            r.weaker,
            r.stronger,
            r.gender.code(),
            names.join(",")
        ));
    }
    out
}

pub fn save_annotations(
    records: &[AnnotationRecord],
    catalog: &DescriptorCatalog,
    path: &Path,
) -> Result<()> {
    write_atomic(path, format_annotations(records, catalog).as_bytes())
}

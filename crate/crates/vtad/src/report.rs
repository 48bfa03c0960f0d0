//! Report rendering: a TSV table, a JSON variant and a console table.

use std::fmt::Write as _;
use std::path::Path;

use vtad_core::dataset::DescriptorStats;
use vtad_core::{DescriptorCatalog, Gender, Report};

use crate::error::{Error, Result};
use crate::fsio::{read_to_string, write_atomic};

pub fn report_tsv(report: &Report) -> String {
    let mut out = String::from(
        "gender\tdescriptor\tn_target\tn_nontarget\tacc_percent\teer_percent\teer_threshold\n",
    );
    for gender in Gender::ALL {
        for r in report.rows.iter().filter(|r| r.gender == gender) {
            let _ = writeln!(
                out,
                "{gender}\t{}\t{}\t{}\t{:.2}\t{:.2}\t{:.6}",
                r.descriptor,
                r.n_target,
                r.n_nontarget,
                r.acc_percent,
                r.eer_percent,
                r.eer_threshold
            );
        }
        if let Some(avg) = report.average(gender) {
            let (targets, nontargets) = report
                .rows
                .iter()
                .filter(|r| r.gender == gender)
                .fold((0, 0), |(t, n), r| (t + r.n_target, n + r.n_nontarget));
            let _ = writeln!(
                out,
                "{gender}\tAvg\t{targets}\t{nontargets}\t{:.2}\t{:.2}\t",
                avg.acc_percent, avg.eer_percent
            );
        }
    }
    out
}

pub fn report_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn save_report(report: &Report, tsv: &Path, json: &Path) -> Result<()> {
    write_atomic(tsv, report_tsv(report).as_bytes())?;
    write_atomic(json, report_json(report).as_bytes())
}

pub fn load_report(path: &Path) -> Result<Report> {
    serde_json::from_str(&read_to_string(path)?).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Console table with male and female columns side by side.
pub fn render_report_table(report: &Report) -> String {
    let mut out = String::new();
    for gender in Gender::ALL {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.gender == gender).collect();
        if rows.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{gender}");
        let _ = writeln!(
            out,
            "  {:<12} {:>8} {:>8}",
            "Descriptor", "ACC (%)", "EER (%)"
        );
        for r in rows {
            let _ = writeln!(
                out,
                "  {:<12} {:>8.2} {:>8.2}",
                r.descriptor, r.acc_percent, r.eer_percent
            );
        }
        if let Some(avg) = report.average(gender) {
            let _ = writeln!(
                out,
                "  {:<12} {:>8.2} {:>8.2}",
                "Avg", avg.acc_percent, avg.eer_percent
            );
        }
    }
    out
}

/// Pair and speaker counts of each evaluated descriptor on both sides.
pub fn render_split_table(
    train: &[DescriptorStats],
    eval: &[DescriptorStats],
    catalog: &DescriptorCatalog,
) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<14} {:>11} {:>14} {:>10} {:>13}",
        "Descriptor", "train pairs", "train speakers", "eval pairs", "eval speakers"
    );
    for e in eval {
        let name = catalog
            .descriptor(e.dim)
            .map(|d| d.to_string())
            .unwrap_or_default();
        let (pairs, speakers) = train
            .iter()
            .find(|t| t.dim == e.dim)
            .map_or((0, 0), |t| (t.pairs, t.speakers));
        let _ = writeln!(
            out,
            "{name:<14} {pairs:>11} {speakers:>14} {:>10} {:>13}",
            e.pairs, e.speakers
        );
    }
    out
}

//! Equal error rate, accuracy and per-descriptor reports.
//!
//! A trial is accepted when its score is at least the threshold. Over the
//! sorted distinct scores plus an accept-all and a reject-all end point,
//! FPR falls and FNR rises monotonically. The EER is taken where
//! `FNR - FPR` first becomes non-negative: if it hits zero exactly on a run
//! of sweep points, the EER is that common rate and the threshold is the
//! midpoint of the run's scores; otherwise both rates are linearly
//! interpolated between the two sweep points bracketing the sign change.
//! The end points carry the extreme scores as threshold values.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::catalog::{DescriptorCatalog, Gender};
use crate::dataset::Trial;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eer {
    /// Error rate in `[0, 1]`.
    pub rate: f64,
    pub threshold: f64,
}

/// Compute the EER of `(score, is_target)` pairs.
pub fn compute_eer(scores: &[(f64, bool)]) -> Result<Eer> {
    let n_target = scores.iter().filter(|(_, t)| *t).count();
    let n_nontarget = scores.len() - n_target;
    if n_target == 0 || n_nontarget == 0 {
        return Err(Error::OneClassOnly { descriptor: None });
    }
    let mut sorted: Vec<(f64, bool)> = scores.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Sweep points: (threshold, fpr, fnr). Start at accept-all.
    let (nt, nn) = (n_target as f64, n_nontarget as f64);
    let mut points: Vec<(f64, f64, f64)> = Vec::with_capacity(sorted.len() + 2);
    points.push((sorted[0].0, 1.0, 0.0));
    let mut targets_below = 0usize;
    let mut nontargets_below = 0usize;
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        points.push((
            t,
            (n_nontarget - nontargets_below) as f64 / nn,
            targets_below as f64 / nt,
        ));
        while i < sorted.len() && sorted[i].0 == t {
            if sorted[i].1 {
                targets_below += 1;
            } else {
                nontargets_below += 1;
            }
            i += 1;
        }
    }
    points.push((sorted[sorted.len() - 1].0, 0.0, 1.0));
    Ok(crossing(&points))
}

/// Locate the FNR/FPR crossing on monotone sweep points.
fn crossing(points: &[(f64, f64, f64)]) -> Eer {
    let diff = |p: &(f64, f64, f64)| p.2 - p.1;
    let k = points
        .iter()
        .position(|p| diff(p) >= 0.0)
        .expect("reject-all end point has FNR - FPR = 1");
    if diff(&points[k]) == 0.0 {
        let end = points[k..]
            .iter()
            .position(|p| diff(p) != 0.0)
            .map_or(points.len() - 1, |off| k + off - 1);
        return Eer {
            rate: points[k].1,
            threshold: 0.5 * (points[k].0 + points[end].0),
        };
    }
    let (lo, hi) = (&points[k - 1], &points[k]);
    let alpha = -diff(lo) / (diff(hi) - diff(lo));
    Eer {
        rate: lo.1 + alpha * (hi.1 - lo.1),
        threshold: lo.0 + alpha * (hi.0 - lo.0),
    }
}

/// Fraction of trials decided correctly, deciding "true" when
/// `score > threshold`.
pub fn compute_accuracy(scores: &[(f64, bool)], threshold: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyInput);
    }
    let correct = scores
        .iter()
        .filter(|&&(s, truth)| (s > threshold) == truth)
        .count();
    Ok(correct as f64 / scores.len() as f64)
}

pub const ACC_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredTrial {
    pub trial: Trial,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorReport {
    pub descriptor_dim: usize,
    pub gender: Gender,
    pub descriptor: String,
    pub n_target: usize,
    pub n_nontarget: usize,
    pub acc_percent: f64,
    pub eer_percent: f64,
    pub eer_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageRow {
    pub gender: Gender,
    pub descriptors: usize,
    pub acc_percent: f64,
    pub eer_percent: f64,
}

/// Per-descriptor rows (ascending dimension) and one average row per gender.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<DescriptorReport>,
    pub averages: Vec<AverageRow>,
}

impl Report {
    pub fn average(&self, gender: Gender) -> Option<&AverageRow> {
        self.averages.iter().find(|a| a.gender == gender)
    }

    /// Unweighted mean over every descriptor row, regardless of gender.
    pub fn overall(&self) -> Option<(f64, f64)> {
        if self.rows.is_empty() {
            return None;
        }
        let n = self.rows.len() as f64;
        let acc = self.rows.iter().map(|r| r.acc_percent).sum::<f64>() / n;
        let eer = self.rows.iter().map(|r| r.eer_percent).sum::<f64>() / n;
        Some((acc, eer))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Averaging {
    /// Each descriptor counts once.
    #[default]
    Unweighted,
    /// Descriptors weighted by their trial counts.
    ByTrials,
}

/// Group `(descriptor_dim, score, truth)` by descriptor and report ACC and EER.
pub fn per_descriptor_report(
    scored: impl IntoIterator<Item = (usize, f64, bool)>,
    catalog: &DescriptorCatalog,
    averaging: Averaging,
) -> Result<Report> {
    let mut groups: BTreeMap<usize, Vec<(f64, bool)>> = BTreeMap::new();
    for (dim, score, truth) in scored {
        groups.entry(dim).or_default().push((score, truth));
    }
    if groups.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut rows = Vec::with_capacity(groups.len());
    for (dim, scores) in groups {
        let descriptor = catalog.descriptor(dim).ok_or(Error::DimensionMismatch {
            expected: catalog.n_dims(),
            found: dim,
        })?;
        let eer = compute_eer(&scores).map_err(|e| match e {
            Error::OneClassOnly { .. } => Error::OneClassOnly {
                descriptor: Some(alloc::format!("{descriptor}")),
            },
            other => other,
        })?;
        let n_target = scores.iter().filter(|(_, t)| *t).count();
        rows.push(DescriptorReport {
            descriptor_dim: dim,
            gender: descriptor.gender,
            descriptor: descriptor.name.into(),
            n_target,
            n_nontarget: scores.len() - n_target,
            acc_percent: 100.0 * compute_accuracy(&scores, ACC_THRESHOLD)?,
            eer_percent: 100.0 * eer.rate,
            eer_threshold: eer.threshold,
        });
    }
    let averages = Gender::ALL
        .into_iter()
        .filter_map(|gender| {
            let rows: Vec<&DescriptorReport> = rows.iter().filter(|r| r.gender == gender).collect();
            if rows.is_empty() {
                return None;
            }
            let weight = |r: &DescriptorReport| match averaging {
                Averaging::Unweighted => 1.0,
                Averaging::ByTrials => (r.n_target + r.n_nontarget) as f64,
            };
            let total: f64 = rows.iter().map(|r| weight(r)).sum();
            Some(AverageRow {
                gender,
                descriptors: rows.len(),
                acc_percent: rows.iter().map(|r| weight(r) * r.acc_percent).sum::<f64>() / total,
                eer_percent: rows.iter().map(|r| weight(r) * r.eer_percent).sum::<f64>() / total,
            })
        })
        .collect();
    Ok(Report { rows, averages })
}

/// Report over scored trials.
pub fn report_scored_trials(
    scored: &[ScoredTrial],
    catalog: &DescriptorCatalog,
    averaging: Averaging,
) -> Result<Report> {
    per_descriptor_report(
        scored
            .iter()
            .map(|s| (s.trial.descriptor_dim, s.score, s.trial.truth)),
        catalog,
        averaging,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::build_catalog;

    fn labeled(targets: &[f64], nontargets: &[f64]) -> Vec<(f64, bool)> {
        targets
            .iter()
            .map(|&s| (s, true))
            .chain(nontargets.iter().map(|&s| (s, false)))
            .collect()
    }

    #[test]
    fn eer_examples() {
        assert_eq!(
            compute_eer(&labeled(&[0.9, 0.8], &[0.2, 0.1]))
                .unwrap()
                .rate,
            0.0
        );
        assert_eq!(compute_eer(&labeled(&[0.1], &[0.9])).unwrap().rate, 1.0);
        assert_eq!(
            compute_eer(&labeled(&[0.9, 0.6], &[0.7, 0.1]))
                .unwrap()
                .rate,
            0.5
        );
    }

    #[test]
    fn eer_threshold_on_equality_run() {
        // Equality at the sweep point 0.8 only.
        let eer = compute_eer(&labeled(&[0.9, 0.8], &[0.2, 0.1])).unwrap();
        assert_eq!(eer.threshold, 0.8);
    }

    #[test]
    fn eer_interpolates_ties() {
        // All scores tied: accept-all (FPR 1, FNR 0) to reject-all (0, 1).
        let eer = compute_eer(&labeled(&[0.4, 0.4], &[0.4])).unwrap();
        assert!((eer.rate - 0.5).abs() < 1e-15);
        assert_eq!(eer.threshold, 0.4);
    }

    #[test]
    fn eer_one_class() {
        assert!(matches!(
            compute_eer(&labeled(&[0.3], &[])),
            Err(Error::OneClassOnly { descriptor: None })
        ));
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(
            compute_accuracy(&[(0.9, true), (0.1, false)], 0.5).unwrap(),
            1.0
        );
        assert_eq!(compute_accuracy(&[(0.5, true)], 0.5).unwrap(), 0.0);
        assert_eq!(
            compute_accuracy(&[(0.9, true), (0.9, false)], 0.5).unwrap(),
            0.5
        );
        assert_eq!(compute_accuracy(&[], 0.5).unwrap_err(), Error::EmptyInput);
    }

    #[test]
    fn report_averages_descriptors_unweighted() {
        let catalog = build_catalog();
        // dim 0: EER 0.5 with 4 trials; dim 1: EER 0 with 4 trials.
        let mut scored = Vec::new();
        for (s, t) in labeled(&[0.9, 0.6], &[0.7, 0.1]) {
            scored.push((0, s, t));
        }
        for (s, t) in labeled(&[0.9, 0.8], &[0.2, 0.1]) {
            scored.push((1, s, t));
        }
        let report =
            per_descriptor_report(scored.clone(), &catalog, Averaging::Unweighted).unwrap();
        assert_eq!(report.rows.len(), 2);
        let avg = report.average(Gender::Male).unwrap();
        assert!((avg.eer_percent - 25.0).abs() < 1e-12);
        assert!(report.average(Gender::Female).is_none());
        assert_eq!(report.rows[0].descriptor, "Bright");

        // Extra trials for dim 1 leave the unweighted average alone but move
        // the trial-weighted one.
        scored.extend([(1, 0.95, true), (1, 0.05, false)]);
        let un = per_descriptor_report(scored.clone(), &catalog, Averaging::Unweighted).unwrap();
        let by = per_descriptor_report(scored, &catalog, Averaging::ByTrials).unwrap();
        assert!((un.average(Gender::Male).unwrap().eer_percent - 25.0).abs() < 1e-12);
        assert!((by.average(Gender::Male).unwrap().eer_percent - 20.0).abs() < 1e-12);
    }

    #[test]
    fn single_descriptor_average_equals_row() {
        let catalog = build_catalog();
        let scored = labeled(&[0.9, 0.3], &[0.4, 0.1])
            .into_iter()
            .map(|(s, t)| (20, s, t));
        let report = per_descriptor_report(scored, &catalog, Averaging::Unweighted).unwrap();
        let avg = report.average(Gender::Female).unwrap();
        assert_eq!(avg.acc_percent, report.rows[0].acc_percent);
        assert_eq!(avg.eer_percent, report.rows[0].eer_percent);
    }

    #[test]
    fn one_class_descriptor_is_named() {
        let catalog = build_catalog();
        let err =
            per_descriptor_report([(3, 0.2, true)], &catalog, Averaging::Unweighted).unwrap_err();
        assert_eq!(
            err,
            Error::OneClassOnly {
                descriptor: Some("M/Slim".into())
            }
        );
    }
}

//! ROI averages and part-of-speech breakdowns.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::layers::layer_percentages;
use crate::error::{Error, Result};

/// Universal POS tags; anything else is reported as `other`.
pub const UPOS_TAGS: &[&str] = &[
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM", "PART", "PRON", "PROPN", "PUNCT",
    "SCONJ", "SYM", "VERB", "X",
];
pub const OTHER_TAG: &str = "other";
/// Normal quantile of a two-sided 95% interval.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiSummary {
    pub roi: String,
    pub n_voxels: usize,
    /// `None` when no voxel of the ROI had a finite score.
    pub mean: Option<f64>,
    /// Normal-approximation 95% interval across subjects.
    pub ci: Option<(f64, f64)>,
}

fn roi_members(labels: &[Option<String>]) -> BTreeMap<&str, Vec<usize>> {
    let mut out: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (v, l) in labels.iter().enumerate() {
        if let Some(l) = l {
            out.entry(l.as_str()).or_default().push(v);
        }
    }
    out
}

fn finite_mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.filter(|v| v.is_finite()).fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Mean score per ROI. Non-finite scores (e.g. undefined ceiling-normalised
/// values) and unlabeled voxels are excluded.
pub fn group_mean(scores: &[f64], labels: &[Option<String>]) -> Result<Vec<RoiSummary>> {
    group_mean_subjects(&[scores.to_vec()], labels)
}

/// Per-ROI mean across subjects of each subject's ROI mean, with
/// `mean ± 1.96·SE` when at least two subjects contribute.
pub fn group_mean_subjects(per_subject: &[Vec<f64>], labels: &[Option<String>]) -> Result<Vec<RoiSummary>> {
    if per_subject.iter().any(|s| s.len() != labels.len()) {
        return Err(Error::Input("score and label counts differ".into()));
    }
    Ok(roi_members(labels)
        .into_iter()
        .map(|(roi, members)| {
            let subject_means: Vec<f64> =
                per_subject.iter().filter_map(|s| finite_mean(members.iter().map(|&v| s[v]))).collect();
            let n = subject_means.len();
            let mean = finite_mean(subject_means.iter().copied());
            let ci = match (mean, n) {
                (Some(m), n) if n >= 2 => {
                    let var = subject_means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
                    let half = Z95 * (var / n as f64).sqrt();
                    Some((m - half, m + half))
                }
                _ => None,
            };
            RoiSummary { roi: roi.to_string(), n_voxels: members.len(), mean, ci }
        })
        .collect())
}

/// For each POS tag, the percentage of words whose most influential layer is
/// each layer. `word_best_layer` pairs a story word index with its layer.
pub fn pos_grouped_importance(
    word_best_layer: &[(usize, usize)],
    pos_tags: &BTreeMap<usize, String>,
    n_layers: usize,
) -> Result<BTreeMap<String, Vec<f64>>> {
    let mut by_tag: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for &(word, layer) in word_best_layer {
        let tag = pos_tags.get(&word).ok_or_else(|| Error::Input(format!("no POS tag for word {word}")))?;
        let tag = if UPOS_TAGS.contains(&tag.as_str()) { tag.as_str() } else { OTHER_TAG };
        by_tag.entry(tag.to_string()).or_default().push(layer);
    }
    by_tag.into_iter().map(|(tag, layers)| Ok((tag, layer_percentages(layers, n_layers)?))).collect()
}

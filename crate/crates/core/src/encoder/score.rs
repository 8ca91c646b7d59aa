use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::design::{add_fir_delays, resample_to_tr};
use super::preprocess::Preprocessor;
use super::ridge::{default_alphas, RidgeSolver};
use crate::dataio::container::{read_file, write_atomic, write_file};
use crate::dataio::BoldRun;
use crate::error::{Error, Result};
use crate::featurespace::{FeatureKind, FeatureMatrix, StoryTranscript};
use crate::linalg::{from_row_major, pearson, to_row_major, Mat};

/// Ceilings at or below this are too small to normalise by.
pub const DEFAULT_CEILING_EPSILON: f64 = 0.05;
pub const SCORES_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FoldScheme {
    /// Consecutive blocks of TRs.
    #[default]
    Contiguous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncodingConfig {
    pub n_folds: usize,
    /// FIR delays in TRs. The default `0..=6` is the current TR plus six
    /// preceding ones; `1..=6` drops the current TR.
    pub delays: Vec<usize>,
    pub alphas: Vec<f64>,
    /// Principal components kept for attention features; other kinds are
    /// never reduced.
    pub pca_components: Option<usize>,
    pub fold_scheme: FoldScheme,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        EncodingConfig {
            n_folds: 5,
            delays: (0..=6).collect(),
            alphas: default_alphas(),
            pca_components: Some(20),
            fold_scheme: FoldScheme::Contiguous,
        }
    }
}

impl EncodingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_folds < 2 {
            return Err(Error::Config(format!("n_folds {} must be at least 2", self.n_folds)));
        }
        if self.delays.is_empty() {
            return Err(Error::Config("delays must not be empty".into()));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::Config("alphas must be a nonempty list of positive values".into()));
        }
        if self.pca_components == Some(0) {
            return Err(Error::Config("pca_components must be positive".into()));
        }
        Ok(())
    }

    fn pca_for(&self, kind: FeatureKind) -> Option<usize> {
        match kind {
            FeatureKind::Attention => self.pca_components,
            _ => None,
        }
    }
}

/// Test rows of each contiguous fold.
pub fn contiguous_folds(n: usize, n_folds: usize) -> Result<Vec<Range<usize>>> {
    if n_folds < 2 || n < n_folds {
        return Err(Error::Input(format!("cannot split {n} TRs into {n_folds} folds")));
    }
    Ok((0..n_folds).map(|f| f * n / n_folds..(f + 1) * n / n_folds).collect())
}

struct PreparedFold {
    test: Range<usize>,
    train: Vec<usize>,
    x_test: Mat,
    solver: RidgeSolver,
}

/// Everything about a cross-validated encoding job that depends only on the
/// features: per-fold preprocessing and design decompositions. Scoring many
/// subjects against the same features reuses it.
pub struct EncodingDesign {
    kind: FeatureKind,
    n_trs: usize,
    tr_s: f64,
    folds: Vec<PreparedFold>,
}

impl EncodingDesign {
    pub fn prepare(
        features: &FeatureMatrix,
        transcript: &StoryTranscript,
        n_trs: usize,
        tr_s: f64,
        config: &EncodingConfig,
    ) -> Result<Self> {
        config.validate()?;
        let ranges = contiguous_folds(n_trs, config.n_folds)?;
        let design = add_fir_delays(&resample_to_tr(features, transcript, n_trs, tr_s)?, &config.delays)?;
        let pca = config.pca_for(features.kind);
        let folds = ranges
            .into_iter()
            .map(|test| {
                let train: Vec<usize> = (0..n_trs).filter(|t| !test.contains(t)).collect();
                let pre = Preprocessor::fit(&design.values, &train, pca)?;
                let x = pre.transform(&design.values)?;
                let x_train = x.select_rows(train.iter());
                let x_test = x.rows(test.start, test.len()).into_owned();
                let solver = RidgeSolver::new(&x_train, &config.alphas)?;
                Ok(PreparedFold { test, train, x_test, solver })
            })
            .collect::<Result<_>>()?;
        Ok(EncodingDesign { kind: features.kind, n_trs, tr_s, folds })
    }

    pub fn n_folds(&self) -> usize {
        self.folds.len()
    }

    pub fn score(&self, bold: &BoldRun) -> Result<BrainScoreMap> {
        bold.validate()?;
        if bold.n_trs() != self.n_trs {
            return Err(Error::Input(format!(
                "BOLD run {} has {} TRs, design has {}",
                bold.subject_id,
                bold.n_trs(),
                self.n_trs
            )));
        }
        if (bold.tr_s - self.tr_s).abs() > 1e-9 * self.tr_s {
            return Err(Error::Input(format!("BOLD TR {} differs from design TR {}", bold.tr_s, self.tr_s)));
        }
        let n_voxels = bold.n_voxels();
        let y = bold.values.transpose();
        let k = self.folds.len();
        let mut per_fold = Mat::zeros(k, n_voxels);
        let mut alphas = Mat::zeros(k, n_voxels);
        let mut degenerate = vec![false; n_voxels];
        for (f, fold) in self.folds.iter().enumerate() {
            let fit = fold.solver.fit(&y.select_rows(fold.train.iter()))?;
            let pred = fit.predict(&fold.x_test)?;
            for v in 0..n_voxels {
                alphas[(f, v)] = fit.alpha[v];
                let truth: Vec<f64> = fold.test.clone().map(|t| y[(t, v)]).collect();
                let guess: Vec<f64> = pred.column(v).iter().copied().collect();
                match pearson(&guess, &truth) {
                    Some(r) => per_fold[(f, v)] = r,
                    None => degenerate[v] = true,
                }
            }
        }
        let scores = (0..n_voxels).map(|v| per_fold.column(v).sum() / k as f64).collect();
        Ok(BrainScoreMap {
            subject_id: bold.subject_id.clone(),
            story_id: bold.story_id.clone(),
            kind: self.kind,
            scores,
            per_fold,
            alphas,
            degenerate,
        })
    }
}

/// Per-voxel held-out Pearson correlations of one subject for one feature
/// space.
#[derive(Debug, Clone, PartialEq)]
pub struct BrainScoreMap {
    pub subject_id: String,
    pub story_id: String,
    pub kind: FeatureKind,
    /// Mean over folds; folds with an undefined correlation count as 0.
    pub scores: Vec<f64>,
    /// `n_folds × n_voxels`.
    pub per_fold: Mat,
    /// Chosen penalty, `n_folds × n_voxels`.
    pub alphas: Mat,
    /// Voxels with a constant truth or prediction in some fold.
    pub degenerate: Vec<bool>,
}

impl BrainScoreMap {
    pub fn n_voxels(&self) -> usize {
        self.scores.len()
    }

    pub fn n_folds(&self) -> usize {
        self.per_fold.nrows()
    }

    /// Median (lower) chosen penalty across folds.
    pub fn median_alpha(&self, voxel: usize) -> f64 {
        let mut a: Vec<f64> = self.alphas.column(voxel).iter().copied().collect();
        a.sort_by(f64::total_cmp);
        a[(a.len() - 1) / 2]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("voxel_id,score");
        for f in 0..self.n_folds() {
            write!(out, ",fold_{f}").expect("write to string");
        }
        out.push_str(",alpha,flags\n");
        for v in 0..self.n_voxels() {
            write!(out, "{v},{}", self.scores[v]).expect("write to string");
            for f in 0..self.n_folds() {
                write!(out, ",{}", self.per_fold[(f, v)]).expect("write to string");
            }
            let flag = if self.degenerate[v] { "degenerate" } else { "" };
            writeln!(out, ",{},{flag}", self.median_alpha(v)).expect("write to string");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }
}

pub fn brain_score_cv(
    features: &FeatureMatrix,
    transcript: &StoryTranscript,
    bold: &BoldRun,
    config: &EncodingConfig,
) -> Result<BrainScoreMap> {
    EncodingDesign::prepare(features, transcript, bold.n_trs(), bold.tr_s, config)?.score(bold)
}

/// `score / ceiling × 100` per voxel; `None` where the ceiling is at or
/// below `epsilon`.
pub fn normalize_by_ceiling(scores: &[f64], ceiling: &[f64], epsilon: f64) -> Result<Vec<Option<f64>>> {
    if scores.len() != ceiling.len() {
        return Err(Error::Input(format!("{} scores but {} ceilings", scores.len(), ceiling.len())));
    }
    if ceiling.iter().any(|c| !c.is_finite()) {
        return Err(Error::Input("non-finite noise ceiling".into()));
    }
    Ok(scores.iter().zip(ceiling).map(|(&s, &c)| (c > epsilon).then(|| s / c * 100.0)).collect())
}

#[derive(Debug, Serialize, Deserialize)]
struct ScoresHeader {
    format: String,
    version: u32,
    subject_id: String,
    story_id: String,
    kind: FeatureKind,
    n_folds: usize,
    n_voxels: usize,
    degenerate: Vec<bool>,
}

/// Binary form: rows `scores`, then the per-fold scores, then the per-fold
/// penalties, each `n_voxels` wide.
pub fn write_scores(path: &Path, map: &BrainScoreMap) -> Result<()> {
    let header = ScoresHeader {
        format: "brain_scores".into(),
        version: SCORES_FORMAT_VERSION,
        subject_id: map.subject_id.clone(),
        story_id: map.story_id.clone(),
        kind: map.kind,
        n_folds: map.n_folds(),
        n_voxels: map.n_voxels(),
        degenerate: map.degenerate.clone(),
    };
    let mut payload = map.scores.clone();
    payload.extend(to_row_major(&map.per_fold));
    payload.extend(to_row_major(&map.alphas));
    write_file(path, &header, &payload)
}

pub fn read_scores(path: &Path) -> Result<BrainScoreMap> {
    let (h, values): (ScoresHeader, _) = read_file(path, |h: &ScoresHeader| {
        if h.format != "brain_scores" || h.version != SCORES_FORMAT_VERSION {
            return Err(Error::Format(format!("{}: unsupported score header", path.display())));
        }
        if h.degenerate.len() != h.n_voxels {
            return Err(Error::Format(format!("{}: flag count mismatch", path.display())));
        }
        Ok((1 + 2 * h.n_folds) * h.n_voxels)
    })?;
    let v = h.n_voxels;
    let k = h.n_folds;
    Ok(BrainScoreMap {
        subject_id: h.subject_id,
        story_id: h.story_id,
        kind: h.kind,
        scores: values[..v].to_vec(),
        per_fold: from_row_major(k, v, &values[v..v + k * v]),
        alphas: from_row_major(k, v, &values[v + k * v..]),
        degenerate: h.degenerate,
    })
}

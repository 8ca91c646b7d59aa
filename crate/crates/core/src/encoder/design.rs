use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featurespace::{FeatureKind, FeatureMatrix, StoryTranscript};
use crate::linalg::{all_finite, Mat};

/// TRs × features regressors for one story.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    #[serde(skip)]
    pub values: Mat,
    pub tr_s: f64,
    pub kind: FeatureKind,
    /// Processing steps applied so far, oldest first.
    pub provenance: Vec<String>,
}

impl DesignMatrix {
    pub fn n_trs(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }
}

/// Sums the feature rows of all words whose onset falls in each TR:
/// row `t` covers onsets in `[t·tr_s, (t+1)·tr_s)`.
pub fn resample_to_tr(
    features: &FeatureMatrix,
    transcript: &StoryTranscript,
    n_trs: usize,
    tr_s: f64,
) -> Result<DesignMatrix> {
    if n_trs == 0 || !(tr_s.is_finite() && tr_s > 0.0) {
        return Err(Error::Input(format!("invalid TR grid: {n_trs} TRs of {tr_s} s")));
    }
    if features.story_id != transcript.story_id {
        return Err(Error::Input(format!(
            "features belong to story {:?}, transcript to {:?}",
            features.story_id, transcript.story_id
        )));
    }
    let mut values = Mat::zeros(n_trs, features.n_cols());
    for (r, &w) in features.word_indices.iter().enumerate() {
        let word = transcript.words.get(w).ok_or_else(|| {
            Error::Input(format!("feature row for word {w} beyond transcript of {}", transcript.len()))
        })?;
        let t = (word.onset_s / tr_s).floor();
        if !(t >= 0.0 && (t as usize) < n_trs) {
            return Err(Error::Input(format!(
                "word {w} onset {} s outside the {n_trs} TRs of {tr_s} s",
                word.onset_s
            )));
        }
        let mut row = values.row_mut(t as usize);
        row += features.values.row(r);
    }
    Ok(DesignMatrix { values, tr_s, kind: features.kind, provenance: vec![format!("resample(tr_s={tr_s})")] })
}

/// Concatenates copies of `x` shifted down by each delay, zero-filled at the
/// top: block `b` row `t` is `x[t − delays[b]]`.
pub fn add_fir_delays(x: &DesignMatrix, delays: &[usize]) -> Result<DesignMatrix> {
    if delays.is_empty() {
        return Err(Error::Input("no FIR delays".into()));
    }
    let n = x.n_trs();
    let f = x.n_features();
    if let Some(&d) = delays.iter().find(|&&d| d >= n) {
        return Err(Error::Input(format!("delay {d} is not shorter than {n} TRs")));
    }
    let mut values = Mat::zeros(n, f * delays.len());
    for (b, &d) in delays.iter().enumerate() {
        values.view_mut((d, b * f), (n - d, f)).copy_from(&x.values.view((0, 0), (n - d, f)));
    }
    let mut provenance = x.provenance.clone();
    provenance.push(format!("fir(delays={delays:?})"));
    if !all_finite(&values) {
        return Err(Error::Input("non-finite design values".into()));
    }
    Ok(DesignMatrix { values, tr_s: x.tr_s, kind: x.kind, provenance })
}

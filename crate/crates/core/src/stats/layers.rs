//! Layer preference of voxels, layer importance of words, and how well the
//! two distributions agree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pearson, Mat};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerPreference {
    /// Best-scoring layer of each significant voxel.
    pub preferred: Vec<Option<usize>>,
    /// The maximum was shared by several layers (the first was taken).
    pub tied: Vec<bool>,
}

/// Argmax layer per significant voxel of an `n_layers × n_voxels` table.
pub fn layer_preference(scores: &Mat, significant: &[bool]) -> Result<LayerPreference> {
    if scores.ncols() != significant.len() {
        return Err(Error::Input(format!(
            "{} voxels in scores, {} in mask",
            scores.ncols(),
            significant.len()
        )));
    }
    if scores.nrows() == 0 {
        return Err(Error::Input("no layers".into()));
    }
    let mut preferred = vec![None; significant.len()];
    let mut tied = vec![false; significant.len()];
    for (v, &sig) in significant.iter().enumerate() {
        if !sig {
            continue;
        }
        let col = scores.column(v);
        let mut best = 0;
        for l in 1..col.len() {
            if col[l] > col[best] {
                best = l;
            }
        }
        tied[v] = (0..col.len()).any(|l| l != best && col[l] == col[best]);
        preferred[v] = Some(best);
    }
    Ok(LayerPreference { preferred, tied })
}

/// Percentage of items assigned to each of `n_layers` layers.
pub fn layer_percentages(assigned: impl IntoIterator<Item = usize>, n_layers: usize) -> Result<Vec<f64>> {
    let mut counts = vec![0usize; n_layers];
    let mut total = 0usize;
    for l in assigned {
        let slot =
            counts.get_mut(l).ok_or_else(|| Error::Input(format!("layer {l} out of range 0..{n_layers}")))?;
        *slot += 1;
        total += 1;
    }
    if total == 0 {
        return Err(Error::Input("no items to distribute over layers".into()));
    }
    Ok(counts.iter().map(|&c| 100.0 * c as f64 / total as f64).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDistributions {
    /// Share of significant voxels preferring each layer.
    pub voxel_pref_pct: Vec<f64>,
    /// Share of words whose most influential layer is each layer.
    pub word_importance_pct: Vec<f64>,
}

impl LayerDistributions {
    pub fn new(preference: &LayerPreference, word_best_layer: &[usize], n_layers: usize) -> Result<Self> {
        Ok(LayerDistributions {
            voxel_pref_pct: layer_percentages(preference.preferred.iter().flatten().copied(), n_layers)?,
            word_importance_pct: layer_percentages(word_best_layer.iter().copied(), n_layers)?,
        })
    }
}

/// Most influential layer per word from an `n_layers × n_words` importance
/// table (first layer on ties).
pub fn word_best_layers(importance: &Mat) -> Vec<usize> {
    importance
        .column_iter()
        .map(|c| {
            let mut best = 0;
            for l in 1..c.len() {
                if c[l] > c[best] {
                    best = l;
                }
            }
            best
        })
        .collect()
}

/// Pearson correlation of the two per-layer distributions; `None` if either
/// is constant.
pub fn importance_alignment(dists: &LayerDistributions) -> Result<Option<f64>> {
    if dists.voxel_pref_pct.len() != dists.word_importance_pct.len() {
        return Err(Error::Input("distributions cover different layer counts".into()));
    }
    Ok(pearson(&dists.voxel_pref_pct, &dists.word_importance_pct))
}

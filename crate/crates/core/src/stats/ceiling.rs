use serde::{Deserialize, Serialize};

use crate::dataio::BoldDataset;
use crate::encoder::contiguous_folds;
use crate::error::{Error, Result};
use crate::linalg::pearson;

/// Inter-subject-correlation noise ceiling per voxel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseCeiling {
    /// Mean correlation; `0.0` where undefined.
    pub ceiling: Vec<f64>,
    /// No subject/fold pair gave a defined correlation.
    pub undefined: Vec<bool>,
    pub n_folds: usize,
    pub n_subjects: usize,
}

/// For each contiguous TR fold and each subject, correlates the subject's
/// voxel series with the across-subject mean, the subject included. The
/// ceiling is the mean over folds and subjects of the defined correlations.
pub fn isc_noise_ceiling(bold: &BoldDataset, n_folds: usize) -> Result<NoiseCeiling> {
    let n_subjects = bold.n_subjects();
    if n_subjects < 2 {
        return Err(Error::Input("noise ceiling needs at least two subjects".into()));
    }
    let n_voxels = bold.n_voxels();
    let folds = contiguous_folds(bold.n_trs(), n_folds)?;
    let mut ceiling = vec![0.0; n_voxels];
    let mut undefined = vec![false; n_voxels];
    for v in 0..n_voxels {
        let mut sum = 0.0;
        let mut count = 0usize;
        for fold in &folds {
            let mean: Vec<f64> = fold
                .clone()
                .map(|t| bold.runs.iter().map(|r| r.values[(v, t)]).sum::<f64>() / n_subjects as f64)
                .collect();
            for run in &bold.runs {
                let own: Vec<f64> = fold.clone().map(|t| run.values[(v, t)]).collect();
                if let Some(r) = pearson(&own, &mean) {
                    sum += r;
                    count += 1;
                }
            }
        }
        if count == 0 {
            undefined[v] = true;
        } else {
            ceiling[v] = sum / count as f64;
        }
    }
    Ok(NoiseCeiling { ceiling, undefined, n_folds, n_subjects })
}

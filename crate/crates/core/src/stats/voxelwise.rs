use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fdr::bh_fdr;
use super::wilcoxon::wilcoxon_greater;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    WilcoxonGreater,
    Friedman,
}

/// One p-value per voxel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueSet {
    /// `1.0` where the test is undefined.
    pub p: Vec<f64>,
    pub undefined: Vec<bool>,
    pub test: TestKind,
    pub n_samples: usize,
}

/// Significance of each voxel across subjects.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelSignificance {
    pub pvalues: PValueSet,
    pub adjusted: Vec<f64>,
    pub reject: Vec<bool>,
}

/// Per-voxel Wilcoxon test that `scores − baseline` has a positive median
/// across subjects (`per_subject[s][v]`), then BH at level `q`. Without a
/// baseline, scores are tested against zero.
pub fn voxelwise_significance(
    per_subject: &[Vec<f64>],
    baseline: Option<&[Vec<f64>]>,
    q: f64,
) -> Result<VoxelSignificance> {
    let n_subjects = per_subject.len();
    let Some(n_voxels) = per_subject.first().map(Vec::len) else {
        return Err(Error::Input("no subjects".into()));
    };
    if per_subject.iter().any(|s| s.len() != n_voxels) {
        return Err(Error::Input("subjects have different voxel counts".into()));
    }
    if let Some(b) = baseline {
        if b.len() != n_subjects || b.iter().any(|s| s.len() != n_voxels) {
            return Err(Error::Input("baseline shape differs from scores".into()));
        }
    }
    let tested: Vec<Option<f64>> = (0..n_voxels)
        .into_par_iter()
        .map(|v| {
            let diffs: Vec<f64> =
                (0..n_subjects).map(|s| per_subject[s][v] - baseline.map_or(0.0, |b| b[s][v])).collect();
            Ok(wilcoxon_greater(&diffs)?.p)
        })
        .collect::<Result<_>>()?;
    let p: Vec<f64> = tested.iter().map(|p| p.unwrap_or(1.0)).collect();
    let bh = bh_fdr(&p, q)?;
    Ok(VoxelSignificance {
        pvalues: PValueSet {
            p,
            undefined: tested.iter().map(Option::is_none).collect(),
            test: TestKind::WilcoxonGreater,
            n_samples: n_subjects,
        },
        adjusted: bh.adjusted,
        reject: bh.reject,
    })
}

//! Synthetic BOLD with planted ground truth.
//!
//! Signal voxels read out word-level features through fixed random weights.
//! The read-out is placed at word onsets (summed per TR), convolved with a
//! double-gamma HRF, scaled to unit variance and shared by every subject.
//! Noise has variance `1 / snr`: a `shared_noise_fraction` of it is common
//! to all subjects, the rest is drawn per subject.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, Gamma};

use super::bold::{BoldDataset, BoldRun};
use crate::encoder::resample_to_tr;
use crate::error::{Error, Result};
use crate::featurespace::{FeatureKind, FeatureMatrix, StoryTranscript};
use crate::linalg::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HrfParams {
    /// Time of the positive peak.
    pub peak_s: f64,
    /// Time of the undershoot minimum.
    pub undershoot_s: f64,
    /// Peak-to-undershoot amplitude ratio.
    pub ratio: f64,
    /// Kernel support.
    pub length_s: f64,
}

impl Default for HrfParams {
    fn default() -> Self {
        HrfParams { peak_s: 6.0, undershoot_s: 16.0, ratio: 6.0, length_s: 32.0 }
    }
}

/// Double-gamma HRF sampled every `tr_s` seconds from `t = 0`. Each gamma
/// density has unit scale and its mode at the requested time.
pub fn hrf_kernel(params: &HrfParams, tr_s: f64) -> Result<Vec<f64>> {
    let ok = |v: f64| v.is_finite() && v > 0.0;
    if !(ok(params.peak_s) && ok(params.undershoot_s) && ok(params.ratio) && ok(params.length_s) && ok(tr_s))
    {
        return Err(Error::Validation(format!("invalid HRF parameters {params:?} at TR {tr_s}")));
    }
    let gamma =
        |mode: f64| Gamma::new(mode + 1.0, 1.0).map_err(|e| Error::Validation(format!("HRF gamma: {e}")));
    let peak = gamma(params.peak_s)?;
    let under = gamma(params.undershoot_s)?;
    let n = (params.length_s / tr_s).floor() as usize + 1;
    Ok((0..n)
        .map(|k| {
            let t = k as f64 * tr_s;
            peak.pdf(t) - under.pdf(t) / params.ratio
        })
        .collect())
}

/// Causal convolution of every column with `kernel`, truncated to the input
/// length.
pub fn convolve_columns(x: &Mat, kernel: &[f64]) -> Mat {
    let n = x.nrows();
    Mat::from_fn(n, x.ncols(), |t, j| {
        kernel.iter().enumerate().take(t + 1).map(|(k, h)| h * x[(t - k, j)]).sum()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_subjects: usize,
    pub n_voxels: usize,
    pub n_trs: usize,
    pub tr_s: f64,
    pub signal_voxel_fraction: f64,
    /// Signal variance over noise variance.
    pub snr: f64,
    pub shared_noise_fraction: f64,
    #[serde(default)]
    pub hrf: HrfParams,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_subjects == 0 || self.n_voxels == 0 || self.n_trs == 0 {
            return Err(Error::Validation("subjects, voxels and TRs must be positive".into()));
        }
        if !(self.tr_s.is_finite() && self.tr_s > 0.0) {
            return Err(Error::Validation(format!("tr_s {} must be positive", self.tr_s)));
        }
        if !(self.snr.is_finite() && self.snr > 0.0) {
            return Err(Error::Validation(format!("snr {} must be positive", self.snr)));
        }
        if !(0.0..=1.0).contains(&self.signal_voxel_fraction) {
            return Err(Error::Validation(format!(
                "signal_voxel_fraction {} outside [0, 1]",
                self.signal_voxel_fraction
            )));
        }
        if !(0.0..1.0).contains(&self.shared_noise_fraction) {
            return Err(Error::Validation(format!(
                "shared_noise_fraction {} outside [0, 1)",
                self.shared_noise_fraction
            )));
        }
        Ok(())
    }
}

/// What was planted: for each signal voxel, its generating feature space and
/// read-out weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthManifest {
    /// Sorted.
    pub signal_voxel_ids: Vec<usize>,
    pub feature_kinds: Vec<FeatureKind>,
    pub weights: Vec<Vec<f64>>,
    pub snr: f64,
    pub seed: u64,
}

impl GroundTruthManifest {
    pub fn is_signal(&self, voxel: usize) -> bool {
        self.signal_voxel_ids.binary_search(&voxel).is_ok()
    }

    /// Generating feature kind of `voxel`, if it carries signal.
    pub fn kind_of(&self, voxel: usize) -> Option<FeatureKind> {
        self.signal_voxel_ids.binary_search(&voxel).ok().map(|i| self.feature_kinds[i])
    }

    /// Sorted signal voxel ids generated from `kind`.
    pub fn voxels_of(&self, kind: FeatureKind) -> Vec<usize> {
        self.signal_voxel_ids
            .iter()
            .zip(&self.feature_kinds)
            .filter(|(_, k)| **k == kind)
            .map(|(&v, _)| v)
            .collect()
    }
}

pub fn generate_synthetic(
    spec: &SyntheticSpec,
    features: &FeatureMatrix,
    transcript: &StoryTranscript,
) -> Result<(BoldDataset, GroundTruthManifest)> {
    generate_synthetic_sources(spec, &[(features, 1.0)], transcript)
}

/// Like [`generate_synthetic`], with signal voxels split between several
/// feature spaces in proportion to the given shares.
pub fn generate_synthetic_sources(
    spec: &SyntheticSpec,
    sources: &[(&FeatureMatrix, f64)],
    transcript: &StoryTranscript,
) -> Result<(BoldDataset, GroundTruthManifest)> {
    spec.validate()?;
    if sources.is_empty() {
        return Err(Error::Input("no feature source for synthetic signal".into()));
    }
    let total_share: f64 = sources.iter().map(|(_, s)| *s).sum();
    if sources.iter().any(|(_, s)| !(s.is_finite() && *s >= 0.0)) || total_share <= 0.0 {
        return Err(Error::Validation("source shares must be non-negative with a positive sum".into()));
    }
    let kernel = hrf_kernel(&spec.hrf, spec.tr_s)?;
    let convolved: Vec<Mat> = sources
        .iter()
        .map(|(f, _)| {
            let design = resample_to_tr(f, transcript, spec.n_trs, spec.tr_s)?;
            Ok(convolve_columns(&design.values, &kernel))
        })
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_signal = (spec.signal_voxel_fraction * spec.n_voxels as f64).round() as usize;
    let mut order: Vec<usize> = (0..spec.n_voxels).collect();
    order.shuffle(&mut rng);

    // contiguous blocks of the shuffled order go to each source
    let mut assignment: Vec<(usize, usize)> = Vec::with_capacity(n_signal);
    let mut cum = 0.0;
    let mut next = 0;
    for (s, (_, share)) in sources.iter().enumerate() {
        cum += share / total_share;
        let end = if s + 1 == sources.len() {
            n_signal
        } else {
            ((cum * n_signal as f64).round() as usize).min(n_signal)
        };
        for &v in &order[next..end] {
            assignment.push((v, s));
        }
        next = end;
    }
    assignment.sort_unstable();

    let mut signal = Mat::zeros(spec.n_voxels, spec.n_trs);
    let mut weights = Vec::with_capacity(n_signal);
    for &(v, s) in &assignment {
        let design = &convolved[s];
        let w: Vec<f64> = (0..design.ncols()).map(|_| rng.sample(StandardNormal)).collect();
        let mut series: Vec<f64> =
            (0..spec.n_trs).map(|t| (0..design.ncols()).map(|j| design[(t, j)] * w[j]).sum()).collect();
        let mean = series.iter().sum::<f64>() / spec.n_trs as f64;
        let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / spec.n_trs as f64;
        if var.is_nan() || var <= 0.0 {
            return Err(Error::Validation(format!("planted signal for voxel {v} has zero variance")));
        }
        let sd = var.sqrt();
        for (t, x) in series.iter_mut().enumerate() {
            signal[(v, t)] = (*x - mean) / sd;
        }
        weights.push(w);
    }

    let noise_sd = (1.0 / spec.snr).sqrt();
    let shared_sd = noise_sd * spec.shared_noise_fraction.sqrt();
    let own_sd = noise_sd * (1.0 - spec.shared_noise_fraction).sqrt();
    let mut shared = Mat::zeros(spec.n_voxels, spec.n_trs);
    if spec.shared_noise_fraction > 0.0 {
        shared =
            Mat::from_fn(spec.n_voxels, spec.n_trs, |_, _| shared_sd * rng.sample::<f64, _>(StandardNormal));
    }
    let base = signal + shared;
    let runs = (0..spec.n_subjects)
        .map(|s| {
            let mut values = base.clone();
            for x in values.iter_mut() {
                *x += own_sd * rng.sample::<f64, _>(StandardNormal);
            }
            BoldRun {
                subject_id: format!("sub-{:02}", s + 1),
                story_id: transcript.story_id.clone(),
                tr_s: spec.tr_s,
                values,
            }
        })
        .collect();

    let manifest = GroundTruthManifest {
        signal_voxel_ids: assignment.iter().map(|&(v, _)| v).collect(),
        feature_kinds: assignment.iter().map(|&(_, s)| sources[s].0.kind).collect(),
        weights,
        snr: spec.snr,
        seed: spec.seed,
    };
    Ok((BoldDataset::new(runs)?, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hrf_peaks_near_peak_time() {
        let tr = 1.5;
        let h = hrf_kernel(&HrfParams::default(), tr).unwrap();
        let argmax = (0..h.len()).max_by(|&a, &b| h[a].total_cmp(&h[b])).unwrap();
        assert!((argmax as f64 * tr - 6.0).abs() <= tr);
        assert!(h.iter().sum::<f64>() > 0.0);
    }

    #[test]
    fn convolution_with_delta_is_identity() {
        let x = Mat::from_fn(5, 2, |i, j| (i * 2 + j) as f64);
        assert_eq!(convolve_columns(&x, &[1.0]), x);
        let shifted = convolve_columns(&x, &[0.0, 1.0]);
        assert_eq!(shifted[(0, 0)], 0.0);
        assert_eq!(shifted[(3, 1)], x[(2, 1)]);
    }
}

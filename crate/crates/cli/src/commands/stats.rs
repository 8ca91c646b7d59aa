use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Result};
use attrib_core::dataio::{labels_per_voxel, parse_roi_labels};
use attrib_core::encoder::{normalize_by_ceiling, BrainScoreMap};
use attrib_core::linalg::Mat;
use attrib_core::stats::tables::{roi_csv, significance_csv};
use attrib_core::stats::{bh_fdr, friedman, group_mean_subjects, voxelwise_significance};

use super::encode::{ceiling_path, read_ceiling, read_label_scores};
use super::{file_stem, require};
use crate::config::LoadedConfig;
use crate::stage::Stage;

fn score_labels(cfg: &LoadedConfig) -> Result<Vec<String>> {
    let dir = cfg.output_dir().join("scores");
    let mut labels: Vec<String> = match fs::read_dir(&dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_dir())
            .map(|e| file_stem(&e.path()))
            .collect(),
        Err(_) => Vec::new(),
    };
    labels.sort();
    if labels.is_empty() {
        return Err(super::usage(format!("no scores in {} (run `encode` first)", dir.display())));
    }
    Ok(labels)
}

fn per_subject(maps: &[BrainScoreMap]) -> Vec<Vec<f64>> {
    maps.iter().map(|m| m.scores.clone()).collect()
}

/// Per voxel Friedman test across feature spaces, then BH.
fn friedman_csv(all: &[Vec<BrainScoreMap>], q: f64) -> Result<String> {
    let n_subjects = all[0].len();
    let n_voxels = all[0][0].n_voxels();
    if all.iter().any(|maps| maps.len() != n_subjects) {
        bail!("feature spaces were scored on different subject sets");
    }
    let mut stat = vec![0.0; n_voxels];
    let mut p = vec![1.0; n_voxels];
    let mut undefined = vec![false; n_voxels];
    for v in 0..n_voxels {
        let m = Mat::from_fn(n_subjects, all.len(), |s, k| all[k][s].scores[v]);
        match friedman(&m) {
            Ok(o) => {
                stat[v] = o.statistic;
                p[v] = o.p;
            }
            Err(_) => undefined[v] = true,
        }
    }
    let bh = bh_fdr(&p, q)?;
    let mut out = String::from("voxel_id,statistic,p,p_adjusted,reject,flags\n");
    for v in 0..n_voxels {
        let flag = if undefined[v] { "undefined" } else { "" };
        writeln!(out, "{v},{},{},{},{},{flag}", stat[v], p[v], bh.adjusted[v], bh.reject[v] as u8)
            .expect("write to string");
    }
    Ok(out)
}

pub fn stats(cfg: &LoadedConfig) -> Result<()> {
    let s = &cfg.config.stats;
    let labels = score_labels(cfg)?;
    let all: Vec<Vec<BrainScoreMap>> =
        labels.iter().map(|l| read_label_scores(cfg, l)).collect::<Result<_>>()?;
    let n_voxels = all[0][0].n_voxels();
    let rois = match &cfg.config.paths.roi_labels {
        Some(p) => {
            require(p, "ROI label file")?;
            Some(labels_per_voxel(&parse_roi_labels(p)?, n_voxels)?)
        }
        None => None,
    };
    let ceiling = {
        let p = ceiling_path(cfg);
        if p.exists() {
            Some(read_ceiling(&p)?)
        } else {
            None
        }
    };

    let out_dir = cfg.output_dir().join("stats");
    let mut stage = Stage::begin(cfg.output_dir(), "stats")?;
    for (label, maps) in labels.iter().zip(&all) {
        let dir: PathBuf = out_dir.join(label);
        let scores = per_subject(maps);
        let sig = voxelwise_significance(&scores, None, s.q)?;
        fs::write(stage.file(&dir.join("significance.csv"))?, significance_csv(&sig))?;
        eprintln!(
            "stats: {label} {} of {n_voxels} voxels significant",
            sig.reject.iter().filter(|r| **r).count()
        );
        let Some(rois) = &rois else { continue };
        fs::write(stage.file(&dir.join("roi.csv"))?, roi_csv(&group_mean_subjects(&scores, rois)?))?;
        if let Some(c) = &ceiling {
            let pct: Vec<Vec<f64>> = scores
                .iter()
                .map(|sc| {
                    Ok(normalize_by_ceiling(sc, c, s.ceiling_epsilon)?
                        .into_iter()
                        .map(|x| x.unwrap_or(f64::NAN))
                        .collect())
                })
                .collect::<Result<_>>()?;
            fs::write(
                stage.file(&dir.join("roi_ceiling_pct.csv"))?,
                roi_csv(&group_mean_subjects(&pct, rois)?),
            )?;
        }
    }
    if all.len() >= 3 {
        fs::write(stage.file(&out_dir.join("friedman.csv"))?, friedman_csv(&all, s.q)?)?;
    }
    stage.commit(cfg)?;
    Ok(())
}

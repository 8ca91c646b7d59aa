use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use attrib_core::dataio::{read_features, BoldDataset};
use attrib_core::encoder::{read_scores, write_scores, BrainScoreMap, EncodingDesign};
use attrib_core::featurespace::{FeatureMatrix, StoryTranscript};
use attrib_core::stats::isc_noise_ceiling;
use rayon::prelude::*;

use super::{features_dir, list_files, load_bold, load_transcript};
use crate::config::LoadedConfig;
use crate::stage::Stage;

pub(super) fn scores_dir(cfg: &LoadedConfig, label: &str) -> PathBuf {
    cfg.output_dir().join("scores").join(label)
}

pub(super) fn ceiling_path(cfg: &LoadedConfig) -> PathBuf {
    cfg.output_dir().join("ceiling.csv")
}

/// One brain-score map per subject, in dataset order.
pub(super) fn score_subjects(
    cfg: &LoadedConfig,
    features: &FeatureMatrix,
    transcript: &StoryTranscript,
    bold: &BoldDataset,
) -> Result<Vec<BrainScoreMap>> {
    let design =
        EncodingDesign::prepare(features, transcript, bold.n_trs(), bold.tr_s(), &cfg.config.encoder)
            .with_context(|| format!("preparing the {} design", features.kind))?;
    Ok(bold.runs.par_iter().map(|run| design.score(run)).collect::<attrib_core::Result<_>>()?)
}

pub(super) fn stage_scores(cfg: &LoadedConfig, stage: &mut Stage, maps: &[BrainScoreMap]) -> Result<()> {
    for map in maps {
        let dir = scores_dir(cfg, &map.kind.label());
        map.write_csv(&stage.file(&dir.join(format!("{}.csv", map.subject_id)))?)?;
        write_scores(&stage.file(&dir.join(format!("{}.scores", map.subject_id)))?, map)?;
    }
    Ok(())
}

/// Scores of every subject for `label`, sorted by subject.
pub(super) fn read_label_scores(cfg: &LoadedConfig, label: &str) -> Result<Vec<BrainScoreMap>> {
    let files = list_files(&scores_dir(cfg, label), "scores")?;
    if files.is_empty() {
        bail!("no scores for {label} (run `encode` first)");
    }
    Ok(files.iter().map(|p| read_scores(p)).collect::<attrib_core::Result<_>>()?)
}

pub fn encode(cfg: &LoadedConfig) -> Result<()> {
    let transcript = load_transcript(cfg)?;
    let bold = load_bold(cfg)?;
    let feature_files = list_files(&features_dir(cfg), "feat")?;
    if feature_files.is_empty() {
        return Err(super::usage(format!(
            "no feature files in {} (run `features` first)",
            features_dir(cfg).display()
        )));
    }
    let maps: Vec<Vec<BrainScoreMap>> = feature_files
        .par_iter()
        .map(|p| {
            let f = read_features(p)?;
            score_subjects(cfg, &f, &transcript, &bold)
        })
        .collect::<Result<_>>()?;
    let mut stage = Stage::begin(cfg.output_dir(), "encode")?;
    for per_label in &maps {
        stage_scores(cfg, &mut stage, per_label)?;
        let n = per_label.len() as f64;
        let mean = per_label.iter().map(|m| attrib_core::linalg::mean(&m.scores)).sum::<f64>() / n;
        if let Some(m) = per_label.first() {
            eprintln!("encode: {} mean score {mean:.4}", m.kind);
        }
    }
    stage.commit(cfg)?;
    Ok(())
}

pub fn ceiling(cfg: &LoadedConfig) -> Result<()> {
    let bold = load_bold(cfg)?;
    let nc = isc_noise_ceiling(&bold, cfg.config.stats.ceiling_folds)?;
    let mut csv = String::from("voxel_id,ceiling,flags\n");
    for (v, (c, u)) in nc.ceiling.iter().zip(&nc.undefined).enumerate() {
        let flag = if *u { "undefined" } else { "" };
        writeln!(csv, "{v},{c},{flag}").expect("write to string");
    }
    let mut stage = Stage::begin(cfg.output_dir(), "ceiling")?;
    std::fs::write(stage.file(&ceiling_path(cfg))?, csv)?;
    stage.commit(cfg)?;
    Ok(())
}

/// Per-voxel ceilings from a `ceiling` CSV; undefined voxels read as 0.
pub(super) fn read_ceiling(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    text.lines()
        .skip(1)
        .enumerate()
        .map(|(i, line)| {
            let field = line.split(',').nth(1).unwrap_or("");
            field
                .parse::<f64>()
                .with_context(|| format!("{}:{}: bad ceiling value {field:?}", path.display(), i + 2))
        })
        .collect()
}

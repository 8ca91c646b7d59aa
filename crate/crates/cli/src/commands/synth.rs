use std::fs;

use anyhow::{Context, Result};
use attrib_core::dataio::{generate_synthetic_sources, write_bold, SyntheticSpec, BOLD_EXTENSION};
use attrib_core::featurespace::FeatureMatrix;

use super::{list_files, load_features, load_transcript, usage};
use crate::config::LoadedConfig;
use crate::stage::Stage;

pub fn synth(cfg: &LoadedConfig) -> Result<()> {
    let syn = cfg.config.synthetic.as_ref().ok_or_else(|| usage("config has no `synthetic` section"))?;
    let transcript = load_transcript(cfg)?;
    let sources: Vec<(FeatureMatrix, f64)> =
        syn.sources.iter().map(|s| Ok((load_features(cfg, &s.features)?, s.share))).collect::<Result<_>>()?;
    let spec = SyntheticSpec {
        n_subjects: syn.n_subjects,
        n_voxels: syn.n_voxels,
        n_trs: syn.n_trs,
        tr_s: syn.tr_s,
        signal_voxel_fraction: syn.signal_voxel_fraction,
        snr: syn.snr,
        shared_noise_fraction: syn.shared_noise_fraction,
        hrf: syn.hrf,
        seed: cfg.config.seed,
    };
    let refs: Vec<(&FeatureMatrix, f64)> = sources.iter().map(|(f, s)| (f, *s)).collect();
    let (dataset, truth) = generate_synthetic_sources(&spec, &refs, &transcript)?;

    let bold_dir = cfg.bold_dir();
    let mut stage = Stage::begin(cfg.output_dir(), "synth")?;
    let mut keep = Vec::new();
    for run in &dataset.runs {
        let target = bold_dir.join(format!("{}.{BOLD_EXTENSION}", run.subject_id));
        write_bold(&stage.file(&target)?, run)?;
        keep.push(target);
    }
    let truth_path = stage.file(&cfg.output_dir().join("ground_truth.json"))?;
    fs::write(truth_path, serde_json::to_string(&truth)? + "\n")?;
    stage.commit(cfg)?;
    for stale in list_files(&bold_dir, BOLD_EXTENSION)? {
        if !keep.contains(&stale) {
            fs::remove_file(&stale).with_context(|| format!("cannot remove {}", stale.display()))?;
        }
    }
    eprintln!(
        "synth: {} subjects x {} voxels x {} TRs, {} signal voxels",
        spec.n_subjects,
        spec.n_voxels,
        spec.n_trs,
        truth.signal_voxel_ids.len()
    );
    Ok(())
}

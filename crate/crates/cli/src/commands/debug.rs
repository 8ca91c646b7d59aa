use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::Result;
use attrib_core::attribution::Method;
use attrib_core::dataio::text::{timed_transcript, toy_story_words};
use attrib_core::dataio::write_transcript;
use attrib_core::featurespace::{plan_windows, window_token_scores, TokenizedStory};
use attrib_core::tinylm::TargetSpec;
use rayon::prelude::*;

use super::{load_lm, load_transcript};
use crate::config::LoadedConfig;
use crate::stage::Stage;

/// Per-window token scores of one method as CSV, for inspection.
pub fn attributions(cfg: &LoadedConfig, method: Method, max_windows: Option<usize>) -> Result<PathBuf> {
    let transcript = load_transcript(cfg)?;
    let (model, vocab) = load_lm(cfg)?;
    let settings = &cfg.config.attribution;
    let story = TokenizedStory::new(&transcript, &vocab)?;
    let plan = plan_windows(story.n_words(), settings.window_len)?;
    let windows = &plan.windows[..max_windows.unwrap_or(usize::MAX).min(plan.windows.len())];
    let rows: Vec<String> = windows
        .par_iter()
        .enumerate()
        .map(|(i, w)| {
            let span = story.span(w.words());
            let target =
                TargetSpec { target_token_id: story.first_token(w.target), kind: settings.target_kind };
            let v = window_token_scores(&model, &span, &target, method, settings)?;
            let mut out = String::new();
            for (t, score) in v.scores.iter().enumerate() {
                let word = w.start + span.token_word[t];
                writeln!(out, "{i},{t},{word},{},{score}", method.name()).expect("write to string");
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from("window_index,token_index,word_index,method,score\n");
    csv.extend(rows);
    let path = cfg.output_dir().join("debug").join(format!("attributions_{}.csv", method.name()));
    let mut stage = Stage::begin(cfg.output_dir(), "attributions")?;
    fs::write(stage.file(&path)?, csv)?;
    stage.commit(cfg)?;
    Ok(path)
}

#[derive(Debug, Clone)]
pub struct ToyDataArgs {
    pub out_dir: PathBuf,
    pub n_words: usize,
    pub duration_s: f64,
    pub n_voxels: usize,
    pub n_rois: usize,
    pub seed: u64,
}

/// Writes a toy story transcript, its POS tags and a contiguous ROI labelling.
pub fn toy_data(args: &ToyDataArgs) -> Result<()> {
    fs::create_dir_all(&args.out_dir)?;
    let words = toy_story_words(args.n_words, args.seed);
    let texts: Vec<&str> = words.iter().map(|(w, _)| w.as_str()).collect();
    let transcript = timed_transcript("story", &texts, args.duration_s, args.seed);
    write_transcript(&args.out_dir.join("story.tsv"), &transcript)?;

    let mut pos = String::from("# word_index\ttag\n");
    for (i, (_, tag)) in words.iter().enumerate() {
        writeln!(pos, "{i}\t{tag}").expect("write to string");
    }
    fs::write(args.out_dir.join("pos.tsv"), pos)?;

    let n_rois = args.n_rois.max(1);
    let mut rois = String::from("# voxel_id\troi\n");
    for v in 0..args.n_voxels {
        writeln!(rois, "{v}\troi_{}", v * n_rois / args.n_voxels).expect("write to string");
    }
    fs::write(args.out_dir.join("rois.tsv"), rois)?;
    Ok(())
}

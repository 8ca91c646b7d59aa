use std::fmt::Write as _;
use std::fs;

use anyhow::{bail, Context, Result};
use attrib_core::attribution::layer_importance;
use attrib_core::dataio::{parse_pos_tags, GroundTruthManifest};
use attrib_core::encoder::BrainScoreMap;
use attrib_core::featurespace::{FeatureKind, FeatureMatrix};
use attrib_core::linalg::{pearson, Mat};
use attrib_core::stats::tables::{distributions_csv, pos_csv, preference_csv};
use attrib_core::stats::{
    importance_alignment, layer_percentages, layer_preference, pos_grouped_importance,
    voxelwise_significance, word_best_layers, LayerDistributions, LayerPreference,
};
use serde::Serialize;

use super::encode::{read_label_scores, score_subjects, scores_dir, stage_scores};
use super::{features_path, list_files, load_bold, load_transcript, require};
use crate::config::LoadedConfig;
use crate::stage::Stage;

/// Conductance features of layers 0, 1, ... as far as they exist on disk.
fn conductance_layers(cfg: &LoadedConfig) -> Result<Vec<FeatureMatrix>> {
    let mut out = Vec::new();
    loop {
        let label = FeatureKind::Conductance { layer: out.len() }.label();
        let path = features_path(cfg, &label);
        if !path.exists() {
            break;
        }
        out.push(attrib_core::dataio::read_features(&path)?);
    }
    if out.len() < 2 {
        return Err(super::usage(
            "layer sweep needs conductance features for every layer (run `features --kind conductance`)",
        ));
    }
    if out.windows(2).any(|w| w[0].word_indices != w[1].word_indices) {
        bail!("conductance layers cover different words");
    }
    Ok(out)
}

/// Planted versus recovered layer assignment of synthetic signal voxels.
#[derive(Serialize)]
struct PlantedRecovery {
    /// Per layer: significant planted voxels, and how many prefer that layer.
    significant: Vec<usize>,
    correct: Vec<usize>,
    accuracy: Vec<Option<f64>>,
    planted_pct: Vec<f64>,
    recovered_pct: Option<Vec<f64>>,
    alignment: Option<f64>,
}

#[derive(Serialize)]
struct Alignment {
    n_layers: usize,
    n_significant: usize,
    /// Absent when no voxel is significant in any layer.
    voxel_pref_pct: Option<Vec<f64>>,
    word_importance_pct: Vec<f64>,
    importance_alignment: Option<f64>,
    planted: Option<PlantedRecovery>,
}

fn planted_recovery(
    truth: &GroundTruthManifest,
    pref: &LayerPreference,
    recovered_pct: Option<&[f64]>,
    n_layers: usize,
) -> PlantedRecovery {
    let mut significant = vec![0; n_layers];
    let mut correct = vec![0; n_layers];
    let mut planted = vec![0usize; n_layers];
    for (&v, kind) in truth.signal_voxel_ids.iter().zip(&truth.feature_kinds) {
        let FeatureKind::Conductance { layer } = *kind else { continue };
        if layer >= n_layers {
            continue;
        }
        planted[layer] += 1;
        if let Some(p) = pref.preferred[v] {
            significant[layer] += 1;
            correct[layer] += (p == layer) as usize;
        }
    }
    let total = planted.iter().sum::<usize>().max(1) as f64;
    let planted_pct: Vec<f64> = planted.iter().map(|&c| 100.0 * c as f64 / total).collect();
    PlantedRecovery {
        accuracy: significant
            .iter()
            .zip(&correct)
            .map(|(&s, &c)| (s > 0).then(|| c as f64 / s as f64))
            .collect(),
        alignment: recovered_pct.and_then(|r| pearson(&planted_pct, r)),
        significant,
        correct,
        planted_pct,
        recovered_pct: recovered_pct.map(<[f64]>::to_vec),
    }
}

pub fn layers(cfg: &LoadedConfig) -> Result<()> {
    let s = &cfg.config.stats;
    let feats = conductance_layers(cfg)?;
    let n_layers = feats.len();
    let bold = load_bold(cfg)?;

    // reuse encoded scores where present; encode the missing layers
    let mut fresh: Vec<Vec<BrainScoreMap>> = Vec::new();
    let mut per_layer: Vec<Vec<BrainScoreMap>> = Vec::with_capacity(n_layers);
    let mut transcript = None;
    for f in &feats {
        let label = f.kind.label();
        let complete = list_files(&scores_dir(cfg, &label), "scores")?.len() == bold.n_subjects();
        if complete {
            per_layer.push(read_label_scores(cfg, &label)?);
        } else {
            if transcript.is_none() {
                transcript = Some(load_transcript(cfg)?);
            }
            let maps = score_subjects(cfg, f, transcript.as_ref().expect("loaded"), &bold)?;
            fresh.push(maps.clone());
            per_layer.push(maps);
        }
    }

    let n_voxels = bold.n_voxels();
    let mut significant = vec![false; n_voxels];
    for maps in &per_layer {
        let scores: Vec<Vec<f64>> = maps.iter().map(|m| m.scores.clone()).collect();
        let sig = voxelwise_significance(&scores, None, s.layer_q)?;
        for (a, r) in significant.iter_mut().zip(&sig.reject) {
            *a |= *r;
        }
    }
    let n_subjects = per_layer[0].len() as f64;
    let mean_scores = Mat::from_fn(n_layers, n_voxels, |l, v| {
        per_layer[l].iter().map(|m| m.scores[v]).sum::<f64>() / n_subjects
    });
    let pref = layer_preference(&mean_scores, &significant)?;

    let n_words = feats[0].n_rows();
    let mut importance = Mat::zeros(n_layers, n_words);
    for w in 0..n_words {
        let cond = Mat::from_fn(n_layers, feats[0].n_cols(), |l, c| feats[l].values[(w, c)]);
        for (l, x) in layer_importance(&cond, s.importance_reduction)?.into_iter().enumerate() {
            importance[(l, w)] = x;
        }
    }
    let best = word_best_layers(&importance);
    let word_pct = layer_percentages(best.iter().copied(), n_layers)?;
    let dists = if pref.preferred.iter().any(Option::is_some) {
        Some(LayerDistributions::new(&pref, &best, n_layers)?)
    } else {
        None
    };
    let voxel_pct = dists.as_ref().map(|d| d.voxel_pref_pct.as_slice());

    let truth_path = cfg.output_dir().join("ground_truth.json");
    let planted = if truth_path.exists() {
        let text = fs::read_to_string(&truth_path)?;
        let truth: GroundTruthManifest =
            serde_json::from_str(&text).with_context(|| format!("cannot parse {}", truth_path.display()))?;
        Some(planted_recovery(&truth, &pref, voxel_pct, n_layers))
    } else {
        None
    };
    let summary = Alignment {
        n_layers,
        n_significant: significant.iter().filter(|x| **x).count(),
        voxel_pref_pct: voxel_pct.map(<[f64]>::to_vec),
        word_importance_pct: word_pct,
        importance_alignment: match &dists {
            Some(d) => importance_alignment(d)?,
            None => None,
        },
        planted,
    };

    let mut word_csv = String::from("word_index,best_layer");
    for l in 0..n_layers {
        write!(word_csv, ",layer_{l}").expect("write to string");
    }
    word_csv.push('\n');
    for (w, &word) in feats[0].word_indices.iter().enumerate() {
        write!(word_csv, "{word},{}", best[w]).expect("write to string");
        for l in 0..n_layers {
            write!(word_csv, ",{}", importance[(l, w)]).expect("write to string");
        }
        word_csv.push('\n');
    }

    let dir = cfg.output_dir().join("layers");
    let mut stage = Stage::begin(cfg.output_dir(), "layers")?;
    for maps in &fresh {
        stage_scores(cfg, &mut stage, maps)?;
    }
    fs::write(stage.file(&dir.join("preference.csv"))?, preference_csv(&pref))?;
    if let Some(d) = &dists {
        fs::write(stage.file(&dir.join("distributions.csv"))?, distributions_csv(d))?;
    }
    fs::write(stage.file(&dir.join("word_importance.csv"))?, word_csv)?;
    fs::write(stage.file(&dir.join("alignment.json"))?, serde_json::to_string_pretty(&summary)? + "\n")?;
    if let Some(p) = &cfg.config.paths.pos_tags {
        require(p, "POS tag file")?;
        let tags = parse_pos_tags(p)?;
        let pairs: Vec<(usize, usize)> =
            feats[0].word_indices.iter().copied().zip(best.iter().copied()).collect();
        fs::write(
            stage.file(&dir.join("pos.csv"))?,
            pos_csv(&pos_grouped_importance(&pairs, &tags, n_layers)?),
        )?;
    }
    stage.commit(cfg)?;
    let pref = summary.voxel_pref_pct.as_ref().map_or("none".to_string(), |pct| {
        pct.iter().map(|p| format!("{p:.1}%")).collect::<Vec<_>>().join(" / ")
    });
    let alignment = summary.importance_alignment.map_or("undefined".to_string(), |r| format!("{r:.3}"));
    eprintln!(
        "layers: {} significant voxels, layer preference {pref}, importance alignment {alignment}",
        summary.n_significant
    );
    Ok(())
}

//! Feature-space builders. All windows are independent and run on the rayon
//! pool; results are assembled by word index, so output is deterministic.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tokens::{Span, TokenizedStory};
use super::windows::{plan_windows, Window};
use super::{FeatureKind, FeatureMatrix, StoryTranscript};
use crate::attribution::{
    erasure_groups, gradient_norm, gradient_x_input, integrated_gradients, layer_conductance,
    tokens_to_words, word_token_groups, AttributionModel, AttributionVector, ErasureMode, Method,
    RiemannRule, DEFAULT_STEPS,
};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::tinylm::{Model, TargetKind, TargetSpec, Vocabulary};

/// Words per attribution window.
pub const DEFAULT_WINDOW_LEN: usize = 10;
/// Words per attention window (the scored word plus ten words of context).
pub const ATTENTION_WINDOW: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttributionSettings {
    pub window_len: usize,
    pub target_kind: TargetKind,
    pub steps_m: usize,
    pub rule: RiemannRule,
    pub erasure_mode: ErasureMode,
}

impl Default for AttributionSettings {
    fn default() -> Self {
        AttributionSettings {
            window_len: DEFAULT_WINDOW_LEN,
            target_kind: TargetKind::Logit,
            steps_m: DEFAULT_STEPS,
            rule: RiemannRule::Midpoint,
            erasure_mode: ErasureMode::ZeroEmbedding,
        }
    }
}

fn window_target(story: &TokenizedStory, window: &Window, kind: TargetKind) -> TargetSpec {
    TargetSpec { target_token_id: story.first_token(window.target), kind }
}

/// Token-level scores of one window, as produced by the attribution method.
pub fn window_token_scores<M: AttributionModel + ?Sized>(
    model: &M,
    span: &Span,
    target: &TargetSpec,
    method: Method,
    settings: &AttributionSettings,
) -> Result<AttributionVector> {
    let ids = &span.token_ids;
    match method {
        Method::GradNorm => gradient_norm(model, ids, target),
        Method::GradXInput => gradient_x_input(model, ids, target),
        Method::IntegratedGradients => {
            integrated_gradients(model, ids, target, settings.steps_m, settings.rule)
        }
        Method::Erasure => crate::attribution::erasure(model, ids, target, settings.erasure_mode),
    }
}

/// Word-level scores of one window. Erasure removes whole words; the other
/// methods sum their token scores per word.
pub fn window_word_scores<M: AttributionModel + ?Sized>(
    model: &M,
    span: &Span,
    target: &TargetSpec,
    method: Method,
    settings: &AttributionSettings,
) -> Result<Vec<f64>> {
    if method == Method::Erasure {
        let groups = word_token_groups(&span.token_word);
        return erasure_groups(model, &span.token_ids, target, &groups, settings.erasure_mode);
    }
    let v = window_token_scores(model, span, target, method, settings)?;
    Ok(tokens_to_words(&v.scores, &span.token_word, 0)?.into_iter().map(|w| w.score).collect())
}

/// Runs `compute` on every window needed by the retained words and arranges
/// its outputs into one `(W − 2·window_len) × window_len` matrix per output.
///
/// Row `r` is story word `window_len + r`; column `c` holds that word's score
/// in the window where it sits `c` words before the window end.
fn windowed_features<F>(
    n_words: usize,
    window_len: usize,
    n_outputs: usize,
    compute: F,
) -> Result<(Vec<usize>, Vec<Mat>)>
where
    F: Fn(&Window) -> Result<Vec<Vec<f64>>> + Sync,
{
    if n_words < 2 * window_len + 1 {
        return Err(Error::Input(format!(
            "windowed features need at least {} words, transcript has {n_words}",
            2 * window_len + 1
        )));
    }
    let plan = plan_windows(n_words, window_len)?;
    // window 0 only covers dropped words
    let needed = &plan.windows[1..];
    let per_window: Vec<Vec<Vec<f64>>> = needed
        .par_iter()
        .map(|w| {
            let out = compute(w)?;
            if out.len() != n_outputs || out.iter().any(|v| v.len() != window_len) {
                return Err(Error::Numerical {
                    step: w.start,
                    msg: "window produced scores of the wrong shape".into(),
                });
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let rows: Vec<usize> = (window_len..n_words - window_len).collect();
    let mut mats = vec![Mat::zeros(rows.len(), window_len); n_outputs];
    for (r, &word) in rows.iter().enumerate() {
        for c in 0..window_len {
            let start = word + c + 1 - window_len;
            let local = word - start;
            let scores = &per_window[start - 1];
            for (o, m) in mats.iter_mut().enumerate() {
                m[(r, c)] = scores[o][local];
            }
        }
    }
    Ok((rows, mats))
}

/// Attribution feature space: `(W − 2·window_len) × window_len`.
pub fn attribution_features<M: AttributionModel + ?Sized>(
    transcript: &StoryTranscript,
    model: &M,
    vocab: &Vocabulary,
    method: Method,
    settings: &AttributionSettings,
) -> Result<FeatureMatrix> {
    let story = TokenizedStory::new(transcript, vocab)?;
    let (rows, mut mats) = windowed_features(story.n_words(), settings.window_len, 1, |w| {
        let span = story.span(w.words());
        let target = window_target(&story, w, settings.target_kind);
        Ok(vec![window_word_scores(model, &span, &target, method, settings)?])
    })?;
    FeatureMatrix::new(mats.remove(0), FeatureKind::Attribution { method }, rows, transcript.story_id.clone())
}

/// Conductance feature spaces for every layer `0..=n_layers` from a single
/// sweep over the windows.
pub fn conductance_feature_set<M: AttributionModel + ?Sized>(
    transcript: &StoryTranscript,
    model: &M,
    vocab: &Vocabulary,
    settings: &AttributionSettings,
) -> Result<Vec<FeatureMatrix>> {
    let story = TokenizedStory::new(transcript, vocab)?;
    let n_out = model.n_layers() + 1;
    let (rows, mats) = windowed_features(story.n_words(), settings.window_len, n_out, |w| {
        let span = story.span(w.words());
        let target = window_target(&story, w, settings.target_kind);
        let cond = layer_conductance(model, &span.token_ids, &target, settings.steps_m, settings.rule)?;
        (0..n_out)
            .map(|l| {
                let per_token: Vec<f64> = cond.scores.row(l).iter().copied().collect();
                Ok(tokens_to_words(&per_token, &span.token_word, 0)?.into_iter().map(|s| s.score).collect())
            })
            .collect()
    })?;
    mats.into_iter()
        .enumerate()
        .map(|(layer, values)| {
            FeatureMatrix::new(
                values,
                FeatureKind::Conductance { layer },
                rows.clone(),
                transcript.story_id.clone(),
            )
        })
        .collect()
}

/// Conductance feature space of one layer (`0` = embedding output).
pub fn conductance_features<M: AttributionModel + ?Sized>(
    transcript: &StoryTranscript,
    model: &M,
    vocab: &Vocabulary,
    layer: usize,
    settings: &AttributionSettings,
) -> Result<FeatureMatrix> {
    if layer > model.n_layers() {
        return Err(Error::Input(format!("layer {layer} out of range 0..={}", model.n_layers())));
    }
    let mut all = conductance_feature_set(transcript, model, vocab, settings)?;
    Ok(all.swap_remove(layer))
}

/// Column means of every attention map over an 11-word window ending at
/// each word, summed over each word's tokens and concatenated over layers
/// and heads. Words without ten words of left context are dropped.
///
/// Column `(layer · n_heads + head) · 11 + d` is the attention received by
/// the word `d` positions before the scored word.
pub fn attention_features(
    transcript: &StoryTranscript,
    model: &Model,
    vocab: &Vocabulary,
) -> Result<FeatureMatrix> {
    let n_words = transcript.len();
    if n_words <= ATTENTION_WINDOW {
        return Err(Error::Input(format!(
            "attention features need at least {} words, transcript has {n_words}",
            ATTENTION_WINDOW + 1
        )));
    }
    let story = TokenizedStory::new(transcript, vocab)?;
    let n_layers = model.config.n_layers;
    let n_heads = model.config.n_heads;
    let n_cols = n_layers * n_heads * ATTENTION_WINDOW;
    let rows: Vec<usize> = (ATTENTION_WINDOW - 1..n_words).collect();
    let per_row: Vec<Vec<f64>> = rows
        .par_iter()
        .map(|&word| {
            let first = word + 1 - ATTENTION_WINDOW;
            let span = story.span(first..word + 1);
            let rec = model.forward(&span.token_ids)?;
            let mut out = vec![0.0; n_cols];
            for (l, maps) in rec.attention_maps.iter().enumerate() {
                for (h, m) in maps.iter().enumerate() {
                    let means = column_means(m);
                    let base = (l * n_heads + h) * ATTENTION_WINDOW;
                    for (tok, &v) in means.iter().enumerate() {
                        let dist = ATTENTION_WINDOW - 1 - span.token_word[tok];
                        out[base + dist] += v;
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let values = Mat::from_fn(rows.len(), n_cols, |r, c| per_row[r][c]);
    FeatureMatrix::new(values, FeatureKind::Attention, rows, transcript.story_id.clone())
}

/// Mean of each column: the average attention a token receives.
pub fn column_means(m: &Mat) -> Vec<f64> {
    let n = m.nrows() as f64;
    m.column_iter().map(|c| c.sum() / n).collect()
}

/// Hidden state of `layer`, summed over each word's tokens, with the forward
/// pass ending at the word's last token and covering at most `context_len`
/// tokens. One row per word.
pub fn activation_features(
    transcript: &StoryTranscript,
    model: &Model,
    vocab: &Vocabulary,
    layer: usize,
    context_len: usize,
) -> Result<FeatureMatrix> {
    let n_layers = model.config.n_layers;
    if layer > n_layers {
        return Err(Error::Input(format!("layer {layer} out of range 0..={n_layers}")));
    }
    if context_len == 0 || context_len > model.config.max_seq_len {
        return Err(Error::Input(format!(
            "context_len {context_len} outside 1..={}",
            model.config.max_seq_len
        )));
    }
    let story = TokenizedStory::new(transcript, vocab)?;
    let d = model.config.d_model;
    let per_row: Vec<Vec<f64>> = (0..story.n_words())
        .into_par_iter()
        .map(|word| {
            let own = story.word_tokens(word);
            if own.len() > context_len {
                return Err(Error::Input(format!(
                    "word {word} has {} tokens, more than context_len {context_len}",
                    own.len()
                )));
            }
            let start = own.end.saturating_sub(context_len);
            let rec = model.forward(&story.token_ids[start..own.end])?;
            let hs = &rec.hidden_states[layer];
            let mut out = vec![0.0; d];
            for t in own {
                for (j, o) in out.iter_mut().enumerate() {
                    *o += hs[(t - start, j)];
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let values = Mat::from_fn(per_row.len(), d, |r, c| per_row[r][c]);
    FeatureMatrix::new(
        values,
        FeatureKind::Activation { layer },
        (0..story.n_words()).collect(),
        transcript.story_id.clone(),
    )
}

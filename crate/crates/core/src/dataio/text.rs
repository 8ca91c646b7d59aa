//! Deterministic toy story text with part-of-speech tags and word timing.
//!
//! Used for the bundled example data and by tests; real transcripts are read
//! with [`super::parse_transcript`].

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::featurespace::{StoryTranscript, Word};

const DETS: &[&str] = &["the", "a", "every", "that"];
const ADJS: &[&str] = &["old", "quiet", "wonderful", "small", "mysterious", "red", "tired"];
const NOUNS: &[&str] =
    &["piper", "storyteller", "dog", "river", "village", "baker", "mountains", "window", "letter"];
const VERBS: &[&str] = &["watched", "carried", "found", "remembered", "followed", "opened"];
const PREPS: &[&str] = &["near", "under", "beyond", "with"];
const ADVS: &[&str] = &["slowly", "carefully", "again", "suddenly"];

/// `n_words` words of template sentences, each paired with a universal POS
/// tag.
pub fn toy_story_words(n_words: usize, seed: u64) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<(String, String)> = Vec::with_capacity(n_words + 16);
    while out.len() < n_words {
        let mut push = |w: &str, tag: &str| out.push((w.to_string(), tag.to_string()));
        let pick = |rng: &mut ChaCha8Rng, xs: &[&'static str]| *xs.choose(rng).expect("nonempty");
        push(pick(&mut rng, DETS), "DET");
        if rng.random_bool(0.5) {
            push(pick(&mut rng, ADJS), "ADJ");
        }
        push(pick(&mut rng, NOUNS), "NOUN");
        if rng.random_bool(0.3) {
            push(pick(&mut rng, ADVS), "ADV");
        }
        push(pick(&mut rng, VERBS), "VERB");
        push(pick(&mut rng, DETS), "DET");
        push(pick(&mut rng, NOUNS), "NOUN");
        if rng.random_bool(0.5) {
            push(pick(&mut rng, PREPS), "ADP");
            push(pick(&mut rng, DETS), "DET");
            push(pick(&mut rng, NOUNS), "NOUN");
        }
    }
    out.truncate(n_words);
    out
}

/// Spreads `texts` evenly (with jitter) over `duration_s` seconds, leaving
/// half a second of silence at the start and one second at the end.
pub fn timed_transcript<S: AsRef<str>>(
    story_id: &str,
    texts: &[S],
    duration_s: f64,
    seed: u64,
) -> StoryTranscript {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n = texts.len().max(1) as f64;
    let start = 0.5_f64.min(duration_s * 0.1);
    let span = (duration_s - start - 1.0_f64.min(duration_s * 0.1)).max(0.0);
    let gap = span / n;
    let words = texts
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let onset = start + gap * (k as f64 + 0.3 * rng.random::<f64>());
            Word { text: t.as_ref().to_string(), onset_s: onset, offset_s: onset + 0.6 * gap }
        })
        .collect();
    StoryTranscript { story_id: story_id.to_string(), words }
}

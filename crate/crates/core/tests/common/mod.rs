#![allow(dead_code)]

use attrib_core::dataio::text::{timed_transcript, toy_story_words};
use attrib_core::featurespace::StoryTranscript;
use attrib_core::tinylm::{train, Model, ModelConfig, Vocabulary};

pub const TR_S: f64 = 1.5;

/// Toy story with POS tags, spread over `n_trs` TRs.
pub fn story(n_words: usize, n_trs: usize, seed: u64) -> (StoryTranscript, Vec<String>) {
    let tagged = toy_story_words(n_words, seed);
    let texts: Vec<&str> = tagged.iter().map(|(w, _)| w.as_str()).collect();
    let t = timed_transcript("toy", &texts, n_trs as f64 * TR_S, seed);
    (t, tagged.into_iter().map(|(_, tag)| tag).collect())
}

pub fn config(n_layers: usize, n_heads: usize, vocab_size: usize, seed: u64) -> ModelConfig {
    ModelConfig { n_layers, n_heads, d_model: 16, d_ff: 32, vocab_size, max_seq_len: 32, seed }
}

/// Vocabulary of the story plus a model trained briefly on it.
pub fn trained(
    transcript: &StoryTranscript,
    n_layers: usize,
    steps: usize,
    seed: u64,
) -> (Model, Vocabulary) {
    let vocab = Vocabulary::build(&transcript.texts(), 8);
    let model = Model::build(config(n_layers, 2, vocab.len(), seed)).unwrap();
    let corpus = vocab.encode_words(&transcript.texts()).token_ids;
    let model = train(&model, &corpus, steps, 0.1, seed).unwrap();
    (model, vocab)
}

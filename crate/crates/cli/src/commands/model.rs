use anyhow::Result;
use attrib_core::tinylm::{corpus_loss, save_model, train, Model, ModelConfig, Vocabulary};
use serde::Serialize;

use super::load_transcript;
use crate::config::LoadedConfig;
use crate::stage::Stage;

#[derive(Serialize)]
struct TrainingSummary {
    steps: usize,
    learning_rate: f64,
    corpus_tokens: usize,
    vocab_size: usize,
    parameters: usize,
    initial_loss: f64,
    final_loss: f64,
}

pub fn train_lm(cfg: &LoadedConfig) -> Result<()> {
    let transcript = load_transcript(cfg)?;
    let m = &cfg.config.model;
    let texts = transcript.texts();
    let vocab = Vocabulary::build(&texts, m.split_len);
    let config = ModelConfig {
        n_layers: m.n_layers,
        n_heads: m.n_heads,
        d_model: m.d_model,
        d_ff: m.d_ff,
        vocab_size: vocab.len(),
        max_seq_len: m.max_seq_len,
        seed: cfg.config.seed,
    };
    let corpus = vocab.encode_words(&texts).token_ids;
    let initial = Model::build(config)?;
    let trained = train(&initial, &corpus, m.train_steps, m.learning_rate, cfg.config.seed)?;
    let summary = TrainingSummary {
        steps: m.train_steps,
        learning_rate: m.learning_rate,
        corpus_tokens: corpus.len(),
        vocab_size: vocab.len(),
        parameters: trained.params.count(),
        initial_loss: corpus_loss(&initial, &corpus)?,
        final_loss: corpus_loss(&trained, &corpus)?,
    };

    let mut stage = Stage::begin(cfg.output_dir(), "train-lm")?;
    save_model(&stage.file(&cfg.model_path())?, &trained, Some(&vocab))?;
    let summary_path = stage.file(&cfg.output_dir().join("training.json"))?;
    std::fs::write(summary_path, serde_json::to_string_pretty(&summary)? + "\n")?;
    stage.commit(cfg)?;
    eprintln!(
        "train-lm: loss {:.4} -> {:.4} over {} steps",
        summary.initial_loss, summary.final_loss, summary.steps
    );
    Ok(())
}

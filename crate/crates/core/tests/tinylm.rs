mod common;

use attrib_core::tinylm::{corpus_loss, load_model, save_model, train, Model, TargetSpec, Vocabulary};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small(seed: u64) -> Model {
    let mut cfg = common::config(2, 2, 64, seed);
    cfg.max_seq_len = 16;
    Model::build(cfg).unwrap()
}

#[test]
fn parameter_count_matches_hand_tally() {
    let m = small(0);
    // embeddings 64·16 + 16·16, per block 2224, final LN 32, unembedding 16·64
    let expected = 64 * 16 + 16 * 16 + 2 * 2224 + 32 + 16 * 64;
    assert_eq!(expected, 6784);
    assert_eq!(m.config.param_count(), expected);
    assert_eq!(m.params.count(), expected);
    let summed: usize = m.params.named_tensors().iter().map(|(_, t)| t.len()).sum();
    assert_eq!(summed, expected);
}

#[test]
fn build_is_deterministic_per_seed() {
    let (a, b, c) = (small(3), small(3), small(4));
    assert_eq!(a.params.token_embedding, b.params.token_embedding);
    assert_eq!(a.params.blocks[1].w_fc, b.params.blocks[1].w_fc);
    assert_ne!(a.params.token_embedding, c.params.token_embedding);
    let toks = [1, 5, 9, 2];
    assert_eq!(a.forward(&toks).unwrap().logits, b.forward(&toks).unwrap().logits);
}

#[test]
fn forward_shapes_and_attention_rows() {
    let m = small(1);
    let toks = [3, 1, 4, 1, 5, 9, 2, 6];
    let rec = m.forward(&toks).unwrap();
    assert_eq!(rec.logits.shape(), (8, 64));
    assert_eq!(rec.hidden_states.len(), 3);
    assert_eq!(rec.attention_maps.len(), 2);
    for layer in &rec.attention_maps {
        assert_eq!(layer.len(), 2);
        for a in layer {
            for i in 0..8 {
                let row_sum: f64 = (0..8).map(|j| a[(i, j)]).sum();
                assert!((row_sum - 1.0).abs() < 1e-12);
                for j in i + 1..8 {
                    assert_eq!(a[(i, j)], 0.0, "attention to a future position");
                }
            }
        }
    }
}

#[test]
fn rejects_bad_inputs() {
    let m = small(1);
    assert!(m.forward(&[]).is_err());
    assert!(m.forward(&[64]).is_err());
    assert!(m.forward(&[0; 17]).is_err());
}

/// Central finite difference of `f` at coordinate `(i, j)` of `x`.
fn central_diff(
    f: impl Fn(&attrib_core::linalg::Mat) -> f64,
    x: &attrib_core::linalg::Mat,
    i: usize,
    j: usize,
) -> f64 {
    let h = 1e-5;
    let mut plus = x.clone();
    plus[(i, j)] += h;
    let mut minus = x.clone();
    minus[(i, j)] -= h;
    (f(&plus) - f(&minus)) / (2.0 * h)
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

#[test]
fn embedding_gradient_matches_finite_differences() {
    let (t, _) = common::story(120, 60, 5);
    let (model, vocab) = common::trained(&t, 2, 60, 5);
    let ids = vocab.encode_words(&t.texts()).token_ids;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for target in [TargetSpec::logit(ids[12]), TargetSpec::log_prob(ids[12])] {
        let window = &ids[..12];
        let x = model.embed(window).unwrap();
        let g = model.grad_wrt_embeddings(window, &target).unwrap();
        for _ in 0..20 {
            let (i, j) = (rng.random_range(0..12), rng.random_range(0..16));
            let fd = central_diff(|e| model.score_embeddings(e, &target).unwrap(), &x, i, j);
            assert!(rel_err(g[(i, j)], fd) < 1e-5, "({i},{j}) analytic {} fd {fd}", g[(i, j)]);
        }
    }
}

#[test]
fn hidden_state_gradients_match_finite_differences() {
    let m = small(9);
    let toks = [7, 3, 3, 12, 40, 8];
    let target = TargetSpec::logit(5);
    let rec = m.forward(&toks).unwrap();
    for layer in 0..=2 {
        let g = m.grad_wrt_layer(&toks, &target, layer).unwrap();
        let h = &rec.hidden_states[layer];
        for (i, j) in [(0, 0), (2, 7), (5, 15), (5, 3)] {
            let fd = central_diff(|x| m.score_from_layer(x, layer, &target).unwrap(), h, i, j);
            assert!(rel_err(g[(i, j)], fd) < 1e-5, "layer {layer} ({i},{j})");
        }
    }
}

#[test]
fn training_lowers_corpus_loss() {
    let (t, _) = common::story(200, 100, 2);
    let vocab = Vocabulary::build(&t.texts(), 8);
    let corpus = vocab.encode_words(&t.texts()).token_ids;
    let m = Model::build(common::config(2, 2, vocab.len(), 2)).unwrap();
    let before = corpus_loss(&m, &corpus).unwrap();
    // small initial logits put the starting loss near ln V
    let uniform = (vocab.len() as f64).ln();
    assert!((before - uniform).abs() < 0.1 * uniform, "{before} vs {uniform}");
    let trained = train(&m, &corpus, 150, 0.1, 2).unwrap();
    let after = corpus_loss(&trained, &corpus).unwrap();
    assert!(after < before - 0.5, "loss {before} -> {after}");
    let again = train(&m, &corpus, 150, 0.1, 2).unwrap();
    assert_eq!(trained.params.unembedding, again.params.unembedding);
}

#[test]
fn save_load_roundtrip() {
    let (t, _) = common::story(60, 30, 4);
    let (model, vocab) = common::trained(&t, 1, 10, 4);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bin");
    save_model(&path, &model, Some(&vocab)).unwrap();
    let (back, v) = load_model(&path).unwrap();
    let v = v.unwrap();
    assert_eq!(back.config, model.config);
    assert_eq!(v.len(), vocab.len());
    let ids = vocab.encode_words(&t.texts()).token_ids;
    assert_eq!(v.encode_words(&t.texts()).token_ids, ids);
    assert_eq!(back.forward(&ids[..20]).unwrap().logits, model.forward(&ids[..20]).unwrap().logits);

    save_model(&path, &model, None).unwrap();
    assert!(load_model(&path).unwrap().1.is_none());
    std::fs::write(&path, b"not a model").unwrap();
    assert!(load_model(&path).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prefix_outputs_ignore_later_tokens(toks in prop::collection::vec(0usize..64, 2..16), cut in 1usize..15) {
        let cut = cut.min(toks.len() - 1);
        let m = small(21);
        let full = m.forward(&toks).unwrap();
        let prefix = m.forward(&toks[..cut]).unwrap();
        for i in 0..cut {
            for j in 0..64 {
                prop_assert!((full.logits[(i, j)] - prefix.logits[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn log_prob_is_logit_minus_logsumexp(toks in prop::collection::vec(0usize..64, 1..10), target in 0usize..64) {
        let m = small(22);
        let x = m.embed(&toks).unwrap();
        let logit = m.score_embeddings(&x, &TargetSpec::logit(target)).unwrap();
        let lp = m.score_embeddings(&x, &TargetSpec::log_prob(target)).unwrap();
        let rec = m.forward(&toks).unwrap();
        let last = rec.logits.row(toks.len() - 1);
        let lse = last.iter().map(|v| v.exp()).sum::<f64>().ln();
        prop_assert!((lp - (logit - lse)).abs() < 1e-10);
        prop_assert!(lp <= 0.0);
    }
}

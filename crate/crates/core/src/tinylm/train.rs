use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::{Model, Params};
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Gradients are clipped to this global L2 norm before each update.
const CLIP_NORM: f64 = 1.0;

fn chunk_len(model: &Model, corpus_len: usize) -> usize {
    model.config.max_seq_len.min(corpus_len - 1)
}

/// Mean next-token cross-entropy and its gradient with respect to the logits.
fn loss_and_dlogits(logits: &Mat, targets: &[usize]) -> (f64, Mat) {
    let (t, v) = logits.shape();
    let mut dlogits = DMatrix::zeros(t, v);
    let mut loss = 0.0;
    for i in 0..t {
        let row = logits.row(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|x| (x - max).exp()).sum();
        let lse = max + sum.ln();
        loss += lse - row[targets[i]];
        for j in 0..v {
            dlogits[(i, j)] = (row[j] - lse).exp() / t as f64;
        }
        dlogits[(i, targets[i])] -= 1.0 / t as f64;
    }
    (loss / t as f64, dlogits)
}

/// Mean next-token cross-entropy over the whole corpus, evaluated on
/// consecutive non-overlapping chunks of up to `max_seq_len` tokens.
pub fn corpus_loss(model: &Model, corpus: &[usize]) -> Result<f64> {
    if corpus.len() < 2 {
        return Err(Error::Input("corpus needs at least two tokens".into()));
    }
    let len = chunk_len(model, corpus.len());
    let mut total = 0.0;
    let mut count = 0usize;
    let mut start = 0;
    while start + 1 < corpus.len() {
        let end = (start + len).min(corpus.len() - 1);
        let inputs = &corpus[start..end];
        let targets = &corpus[start + 1..end + 1];
        let rec = model.forward(inputs)?;
        let (loss, _) = loss_and_dlogits(&rec.logits, targets);
        total += loss * inputs.len() as f64;
        count += inputs.len();
        start = end;
    }
    Ok(total / count as f64)
}

fn parameter_gradients(model: &Model, inputs: &[usize], targets: &[usize]) -> Result<(f64, Params)> {
    let x = model.embed(inputs)?;
    let trace = model.trace(&x);
    let (loss, dlogits) = loss_and_dlogits(&trace.record.logits, targets);
    let mut grads = Params::zeros(&model.config);
    let h_final = trace.record.hidden_states.last().expect("nonempty");
    grads.unembedding = h_final.tr_mul(&dlogits);
    let d_final = &dlogits * model.params.unembedding.transpose();
    let d_hidden = model.backward(&trace, d_final, Some(&mut grads));
    let d_x = &d_hidden[0];
    for (pos, &tok) in inputs.iter().enumerate() {
        for j in 0..model.config.d_model {
            grads.token_embedding[(tok, j)] += d_x[(pos, j)];
            grads.positional_embedding[(pos, j)] += d_x[(pos, j)];
        }
    }
    Ok((loss, grads))
}

/// Plain SGD on randomly placed corpus chunks with global-norm clipping.
///
/// Returns the updated model; the input is left untouched.
pub fn train(model: &Model, corpus: &[usize], steps: usize, learning_rate: f64, seed: u64) -> Result<Model> {
    if corpus.len() < 2 {
        return Err(Error::Input("corpus needs at least two tokens".into()));
    }
    model.check_tokens(&corpus[..1])?;
    if let Some(bad) = corpus.iter().find(|&&t| t >= model.config.vocab_size) {
        return Err(Error::Input(format!("corpus token {bad} out of vocabulary range")));
    }
    let mut out = model.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = chunk_len(model, corpus.len());
    for step in 0..steps {
        let start = rng.random_range(0..=corpus.len() - 1 - len);
        let inputs = &corpus[start..start + len];
        let targets = &corpus[start + 1..start + len + 1];
        let (loss, grads) = parameter_gradients(&out, inputs, targets)?;
        if !loss.is_finite() {
            return Err(Error::Training { step, loss });
        }
        let norm = grads.named_tensors().iter().map(|(_, g)| g.norm_squared()).sum::<f64>().sqrt();
        let scale = if norm > CLIP_NORM { CLIP_NORM / norm } else { 1.0 };
        let mut grads = grads;
        for (p, g) in out.params.tensors_mut().into_iter().zip(grads.tensors_mut()) {
            *p -= &*g * (learning_rate * scale);
        }
        if !out.params.all_finite() {
            return Err(Error::Training { step, loss: f64::NAN });
        }
    }
    Ok(out)
}

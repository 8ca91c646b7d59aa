use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::model::{Block, Model, LN_EPS};
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Outputs of one forward pass over `T` positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardRecord {
    /// `T × vocab_size`.
    pub logits: Mat,
    /// `n_layers + 1` matrices of shape `T × d_model`; index 0 is the
    /// embedding output.
    pub hidden_states: Vec<Mat>,
    /// `[layer][head]`, each `T × T`, row-stochastic and causal.
    pub attention_maps: Vec<Vec<Mat>>,
}

impl ForwardRecord {
    pub fn seq_len(&self) -> usize {
        self.logits.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// Raw logit of the target token at the final position.
    #[default]
    Logit,
    /// Log-softmax probability of the target token at the final position.
    LogProb,
}

/// The scalar `f(x)` that every attribution method differentiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub target_token_id: usize,
    pub kind: TargetKind,
}

impl TargetSpec {
    pub fn logit(target_token_id: usize) -> Self {
        TargetSpec { target_token_id, kind: TargetKind::Logit }
    }

    pub fn log_prob(target_token_id: usize) -> Self {
        TargetSpec { target_token_id, kind: TargetKind::LogProb }
    }

    pub(crate) fn check(&self, vocab_size: usize) -> Result<()> {
        if self.target_token_id >= vocab_size {
            return Err(Error::Input(format!(
                "target token {} out of range for vocabulary of {vocab_size}",
                self.target_token_id
            )));
        }
        Ok(())
    }

    /// Value of the target and its gradient with respect to the final
    /// position's logits.
    pub(crate) fn value_and_grad(&self, final_logits: &[f64]) -> (f64, Vec<f64>) {
        let t = self.target_token_id;
        match self.kind {
            TargetKind::Logit => {
                let mut g = vec![0.0; final_logits.len()];
                g[t] = 1.0;
                (final_logits[t], g)
            }
            TargetKind::LogProb => {
                let max = final_logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = final_logits.iter().map(|v| (v - max).exp()).sum();
                let lse = max + sum.ln();
                let mut g: Vec<f64> = final_logits.iter().map(|v| -(v - lse).exp()).collect();
                g[t] += 1.0;
                (final_logits[t] - lse, g)
            }
        }
    }
}

/// Evaluates the target scalar on a forward record.
pub fn target_scalar(record: &ForwardRecord, target: &TargetSpec) -> Result<f64> {
    let t = record.seq_len();
    if t == 0 {
        return Err(Error::Input("empty forward record".into()));
    }
    target.check(record.logits.ncols())?;
    let last: Vec<f64> = record.logits.row(t - 1).iter().cloned().collect();
    Ok(target.value_and_grad(&last).0)
}

#[derive(Debug, Clone)]
pub(crate) struct LnCache {
    pub xhat: Mat,
    pub inv_std: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct BlockCache {
    pub ln1: LnCache,
    pub a: Mat,
    pub qkv: Mat,
    pub concat: Mat,
    pub ln2: LnCache,
    pub b: Mat,
    pub u: Mat,
    pub g: Mat,
}

#[derive(Debug, Clone)]
pub(crate) struct Trace {
    pub record: ForwardRecord,
    pub blocks: Vec<BlockCache>,
    pub lnf: LnCache,
}

pub(crate) fn layer_norm(x: &Mat, gain: &Mat, bias: &Mat) -> (Mat, LnCache) {
    let (t, d) = x.shape();
    let mut xhat = DMatrix::zeros(t, d);
    let mut y = DMatrix::zeros(t, d);
    let mut inv_std = Vec::with_capacity(t);
    for i in 0..t {
        let mu = (0..d).map(|j| x[(i, j)]).sum::<f64>() / d as f64;
        let var = (0..d).map(|j| (x[(i, j)] - mu).powi(2)).sum::<f64>() / d as f64;
        let inv = 1.0 / (var + LN_EPS).sqrt();
        inv_std.push(inv);
        for j in 0..d {
            let z = (x[(i, j)] - mu) * inv;
            xhat[(i, j)] = z;
            y[(i, j)] = z * gain[(0, j)] + bias[(0, j)];
        }
    }
    (y, LnCache { xhat, inv_std })
}

pub(crate) fn add_row_bias(m: &mut Mat, bias: &Mat) {
    for j in 0..m.ncols() {
        let b = bias[(0, j)];
        for i in 0..m.nrows() {
            m[(i, j)] += b;
        }
    }
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044_715;

pub(crate) fn gelu(u: f64) -> f64 {
    0.5 * u * (1.0 + (GELU_C * (u + GELU_A * u * u * u)).tanh())
}

pub(crate) fn gelu_grad(u: f64) -> f64 {
    let th = (GELU_C * (u + GELU_A * u * u * u)).tanh();
    0.5 * (1.0 + th) + 0.5 * u * (1.0 - th * th) * GELU_C * (1.0 + 3.0 * GELU_A * u * u)
}

fn softmax_causal_row(scores: &mut Mat, i: usize) {
    let t = scores.ncols();
    let max = (0..=i).map(|j| scores[(i, j)]).fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for j in 0..=i {
        let e = (scores[(i, j)] - max).exp();
        scores[(i, j)] = e;
        sum += e;
    }
    for j in 0..=i {
        scores[(i, j)] /= sum;
    }
    for j in (i + 1)..t {
        scores[(i, j)] = 0.0;
    }
}

impl Model {
    /// Summed token and positional embeddings, `T × d_model`.
    pub fn embed(&self, token_ids: &[usize]) -> Result<Mat> {
        self.check_tokens(token_ids)?;
        let d = self.config.d_model;
        let p = &self.params;
        Ok(DMatrix::from_fn(token_ids.len(), d, |i, j| {
            p.token_embedding[(token_ids[i], j)] + p.positional_embedding[(i, j)]
        }))
    }

    pub(crate) fn check_tokens(&self, token_ids: &[usize]) -> Result<()> {
        if token_ids.is_empty() {
            return Err(Error::Input("empty token sequence".into()));
        }
        if token_ids.len() > self.config.max_seq_len {
            return Err(Error::Input(format!(
                "sequence of {} tokens exceeds max_seq_len {}",
                token_ids.len(),
                self.config.max_seq_len
            )));
        }
        if let Some(bad) = token_ids.iter().find(|&&t| t >= self.config.vocab_size) {
            return Err(Error::Input(format!(
                "token id {bad} out of range for vocabulary of {}",
                self.config.vocab_size
            )));
        }
        Ok(())
    }

    pub(crate) fn check_embeddings(&self, x: &Mat) -> Result<()> {
        if x.nrows() == 0 || x.nrows() > self.config.max_seq_len {
            return Err(Error::Input(format!(
                "embedding sequence length {} outside 1..={}",
                x.nrows(),
                self.config.max_seq_len
            )));
        }
        if x.ncols() != self.config.d_model {
            return Err(Error::Input(format!(
                "embedding width {} does not match d_model {}",
                x.ncols(),
                self.config.d_model
            )));
        }
        Ok(())
    }

    pub fn forward(&self, token_ids: &[usize]) -> Result<ForwardRecord> {
        let x = self.embed(token_ids)?;
        Ok(self.trace(&x).record)
    }

    /// Forward pass starting from (possibly interpolated) input embeddings.
    pub fn forward_embeddings(&self, x: &Mat) -> Result<ForwardRecord> {
        self.check_embeddings(x)?;
        Ok(self.trace(x).record)
    }

    /// Target scalar evaluated directly on input embeddings.
    pub fn score_embeddings(&self, x: &Mat, target: &TargetSpec) -> Result<f64> {
        target.check(self.config.vocab_size)?;
        let rec = self.forward_embeddings(x)?;
        target_scalar(&rec, target)
    }

    /// Target scalar as a function of `hidden_states[layer]` alone: runs the
    /// remaining blocks (and the final LayerNorm when `layer < n_layers`).
    pub fn score_from_layer(&self, hidden: &Mat, layer: usize, target: &TargetSpec) -> Result<f64> {
        let n_layers = self.config.n_layers;
        if layer > n_layers {
            return Err(Error::Input(format!("layer {layer} out of range 0..={n_layers}")));
        }
        self.check_embeddings(hidden)?;
        target.check(self.config.vocab_size)?;
        let h_final = if layer == n_layers {
            hidden.clone()
        } else {
            let mut h = hidden.clone();
            for block in &self.params.blocks[layer..] {
                h = self.block_forward(block, &h).0;
            }
            layer_norm(&h, &self.params.lnf_gain, &self.params.lnf_bias).0
        };
        let t = h_final.nrows();
        let last = h_final.row(t - 1) * &self.params.unembedding;
        let last: Vec<f64> = last.iter().cloned().collect();
        Ok(target.value_and_grad(&last).0)
    }

    pub(crate) fn trace(&self, x: &Mat) -> Trace {
        let cfg = &self.config;
        let mut hidden = Vec::with_capacity(cfg.n_layers + 1);
        let mut attention_maps = Vec::with_capacity(cfg.n_layers);
        let mut caches = Vec::with_capacity(cfg.n_layers);
        let mut h = x.clone();
        hidden.push(h.clone());
        for block in &self.params.blocks {
            let (next, cache, maps) = self.block_forward(block, &h);
            h = next;
            caches.push(cache);
            attention_maps.push(maps);
            hidden.push(h.clone());
        }
        let (h_final, lnf) = layer_norm(&h, &self.params.lnf_gain, &self.params.lnf_bias);
        let logits = &h_final * &self.params.unembedding;
        *hidden.last_mut().expect("at least the embedding layer") = h_final;
        Trace { record: ForwardRecord { logits, hidden_states: hidden, attention_maps }, blocks: caches, lnf }
    }

    fn block_forward(&self, p: &Block, h: &Mat) -> (Mat, BlockCache, Vec<Mat>) {
        let cfg = &self.config;
        let (t, d) = (h.nrows(), cfg.d_model);
        let dh = cfg.head_dim();
        let scale = 1.0 / (dh as f64).sqrt();

        let (a, ln1) = layer_norm(h, &p.ln1_gain, &p.ln1_bias);
        let mut qkv = &a * &p.w_qkv;
        add_row_bias(&mut qkv, &p.b_qkv);

        let mut concat = DMatrix::zeros(t, d);
        let mut maps = Vec::with_capacity(cfg.n_heads);
        for head in 0..cfg.n_heads {
            let q = qkv.columns(head * dh, dh);
            let k = qkv.columns(d + head * dh, dh);
            let v = qkv.columns(2 * d + head * dh, dh);
            let mut probs = (q * k.transpose()) * scale;
            for i in 0..t {
                softmax_causal_row(&mut probs, i);
            }
            let out = &probs * v;
            concat.columns_mut(head * dh, dh).copy_from(&out);
            maps.push(probs);
        }
        let mut attn = &concat * &p.w_out;
        add_row_bias(&mut attn, &p.b_out);
        let h_mid = h + attn;

        let (b, ln2) = layer_norm(&h_mid, &p.ln2_gain, &p.ln2_bias);
        let mut u = &b * &p.w_fc;
        add_row_bias(&mut u, &p.b_fc);
        let g = u.map(gelu);
        let mut m = &g * &p.w_proj;
        add_row_bias(&mut m, &p.b_proj);
        let out = h_mid + m;

        (out, BlockCache { ln1, a, qkv, concat, ln2, b, u, g }, maps)
    }
}

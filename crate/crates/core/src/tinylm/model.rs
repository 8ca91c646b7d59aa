//! Parameters of the toy transformer.
//!
//! Block layout (pre-normalisation, GPT-2 style):
//!
//! ```text
//! h0 = token_embedding[ids] + positional_embedding[0..T]
//! for each block:
//!     a  = LN1(h)
//!     h  = h + Attn(a) · W_out + b_out        (causal, n_heads heads)
//!     b  = LN2(h)
//!     h  = h + GELU(b · W_fc + b_fc) · W_proj + b_proj
//! hL = LN_f(h)
//! logits = hL · unembedding
//! ```
//!
//! `hidden_states[0]` is `h0`, `hidden_states[l]` for `1 <= l < L` is the
//! residual stream after block `l`, and `hidden_states[L]` is the normalised
//! output `hL`, so the head is linear in the last hidden state. LayerNorm uses
//! the population variance with epsilon [`LN_EPS`]; GELU is the tanh form.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::ModelConfig;
use crate::error::Result;
use crate::linalg::Mat;

pub const LN_EPS: f64 = 1e-2;

/// Initial standard deviations. `LN_EPS` is large relative to the embedding
/// scale so that the target stays smooth along the straight path from the
/// zero baseline; with `1e-5` the first LayerNorm jumps near the origin and
/// no fixed-grid path integral converges.
const EMBED_STD: f64 = 0.02;
const WEIGHT_STD: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub ln1_gain: Mat,
    pub ln1_bias: Mat,
    pub w_qkv: Mat,
    pub b_qkv: Mat,
    pub w_out: Mat,
    pub b_out: Mat,
    pub ln2_gain: Mat,
    pub ln2_bias: Mat,
    pub w_fc: Mat,
    pub b_fc: Mat,
    pub w_proj: Mat,
    pub b_proj: Mat,
}

/// All trainable tensors. Vectors are stored as `1 × n` matrices so that
/// every tensor can be visited uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub token_embedding: Mat,
    pub positional_embedding: Mat,
    pub blocks: Vec<Block>,
    pub lnf_gain: Mat,
    pub lnf_bias: Mat,
    pub unembedding: Mat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub params: Params,
}

impl Block {
    fn zeros(cfg: &ModelConfig) -> Self {
        let (d, f) = (cfg.d_model, cfg.d_ff);
        Block {
            ln1_gain: DMatrix::zeros(1, d),
            ln1_bias: DMatrix::zeros(1, d),
            w_qkv: DMatrix::zeros(d, 3 * d),
            b_qkv: DMatrix::zeros(1, 3 * d),
            w_out: DMatrix::zeros(d, d),
            b_out: DMatrix::zeros(1, d),
            ln2_gain: DMatrix::zeros(1, d),
            ln2_bias: DMatrix::zeros(1, d),
            w_fc: DMatrix::zeros(d, f),
            b_fc: DMatrix::zeros(1, f),
            w_proj: DMatrix::zeros(f, d),
            b_proj: DMatrix::zeros(1, d),
        }
    }

    fn tensors(&self) -> [(&'static str, &Mat); 12] {
        [
            ("ln1.gain", &self.ln1_gain),
            ("ln1.bias", &self.ln1_bias),
            ("attn.w_qkv", &self.w_qkv),
            ("attn.b_qkv", &self.b_qkv),
            ("attn.w_out", &self.w_out),
            ("attn.b_out", &self.b_out),
            ("ln2.gain", &self.ln2_gain),
            ("ln2.bias", &self.ln2_bias),
            ("mlp.w_fc", &self.w_fc),
            ("mlp.b_fc", &self.b_fc),
            ("mlp.w_proj", &self.w_proj),
            ("mlp.b_proj", &self.b_proj),
        ]
    }

    fn tensors_mut(&mut self) -> [&mut Mat; 12] {
        [
            &mut self.ln1_gain,
            &mut self.ln1_bias,
            &mut self.w_qkv,
            &mut self.b_qkv,
            &mut self.w_out,
            &mut self.b_out,
            &mut self.ln2_gain,
            &mut self.ln2_bias,
            &mut self.w_fc,
            &mut self.b_fc,
            &mut self.w_proj,
            &mut self.b_proj,
        ]
    }
}

impl Params {
    /// All-zero parameters with the shapes implied by `cfg`.
    pub fn zeros(cfg: &ModelConfig) -> Self {
        Params {
            token_embedding: DMatrix::zeros(cfg.vocab_size, cfg.d_model),
            positional_embedding: DMatrix::zeros(cfg.max_seq_len, cfg.d_model),
            blocks: (0..cfg.n_layers).map(|_| Block::zeros(cfg)).collect(),
            lnf_gain: DMatrix::zeros(1, cfg.d_model),
            lnf_bias: DMatrix::zeros(1, cfg.d_model),
            unembedding: DMatrix::zeros(cfg.d_model, cfg.vocab_size),
        }
    }

    /// Tensors in the fixed serialisation order, with their names.
    pub fn named_tensors(&self) -> Vec<(String, &Mat)> {
        let mut out = vec![
            ("token_embedding".to_string(), &self.token_embedding),
            ("positional_embedding".to_string(), &self.positional_embedding),
        ];
        for (i, b) in self.blocks.iter().enumerate() {
            for (name, t) in b.tensors() {
                out.push((format!("blocks.{i}.{name}"), t));
            }
        }
        out.push(("ln_f.gain".to_string(), &self.lnf_gain));
        out.push(("ln_f.bias".to_string(), &self.lnf_bias));
        out.push(("unembedding".to_string(), &self.unembedding));
        out
    }

    /// Mutable tensors in the same order as [`Params::named_tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut Mat> {
        let mut out = vec![&mut self.token_embedding, &mut self.positional_embedding];
        for b in &mut self.blocks {
            out.extend(b.tensors_mut());
        }
        out.push(&mut self.lnf_gain);
        out.push(&mut self.lnf_bias);
        out.push(&mut self.unembedding);
        out
    }

    pub fn count(&self) -> usize {
        self.named_tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.named_tensors().iter().all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }
}

impl Model {
    /// Deterministic initialisation from `config.seed`.
    pub fn build(config: ModelConfig) -> Result<Model> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut params = Params::zeros(&config);
        let embed = Normal::new(0.0, EMBED_STD).expect("valid std");
        let weight = Normal::new(0.0, WEIGHT_STD).expect("valid std");
        // residual projections are scaled down with depth, as in GPT-2
        let proj = Normal::new(0.0, WEIGHT_STD / (2.0 * config.n_layers as f64).sqrt()).expect("valid std");

        let mut fill = |m: &mut Mat, dist: &Normal<f64>| {
            // row-major fill keeps the draw order independent of storage layout
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    m[(i, j)] = dist.sample(&mut rng);
                }
            }
        };
        fill(&mut params.token_embedding, &embed);
        fill(&mut params.positional_embedding, &embed);
        for b in &mut params.blocks {
            b.ln1_gain.fill(1.0);
            b.ln2_gain.fill(1.0);
            fill(&mut b.w_qkv, &weight);
            fill(&mut b.w_out, &proj);
            fill(&mut b.w_fc, &weight);
            fill(&mut b.w_proj, &proj);
        }
        params.lnf_gain.fill(1.0);
        fill(&mut params.unembedding, &weight);
        Ok(Model { config, params })
    }

    /// Wraps existing parameters, checking their shapes against `config`.
    pub fn from_params(config: ModelConfig, params: Params) -> Result<Model> {
        config.validate()?;
        let expected = Params::zeros(&config);
        let got = params.named_tensors();
        let want = expected.named_tensors();
        if got.len() != want.len() {
            return Err(crate::Error::Config(format!(
                "expected {} tensors, found {}",
                want.len(),
                got.len()
            )));
        }
        for ((name, g), (_, w)) in got.iter().zip(&want) {
            if g.shape() != w.shape() {
                return Err(crate::Error::Config(format!(
                    "tensor {name} has shape {:?}, expected {:?}",
                    g.shape(),
                    w.shape()
                )));
            }
        }
        Ok(Model { config, params })
    }

    pub fn n_layers(&self) -> usize {
        self.config.n_layers
    }

    pub fn d_model(&self) -> usize {
        self.config.d_model
    }
}

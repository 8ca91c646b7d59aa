//! Hand-written reverse-mode differentiation of the forward pass.

use nalgebra::DMatrix;

use super::forward::{gelu_grad, LnCache, TargetSpec, Trace};
use super::model::{Block, Model, Params};
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Everything one backward pass from the target scalar yields.
#[derive(Debug, Clone)]
pub struct TargetGradients {
    pub value: f64,
    /// Forward hidden states, as in [`super::ForwardRecord::hidden_states`].
    pub hidden_states: Vec<Mat>,
    /// Gradient of the target with respect to each hidden state.
    pub d_hidden: Vec<Mat>,
}

fn layer_norm_backward(
    dy: &Mat,
    cache: &LnCache,
    gain: &Mat,
    mut grads: Option<(&mut Mat, &mut Mat)>,
) -> Mat {
    let (t, d) = dy.shape();
    let mut dx = DMatrix::zeros(t, d);
    let dn = d as f64;
    for i in 0..t {
        let mut mean_dxhat = 0.0;
        let mut mean_dxhat_xhat = 0.0;
        for j in 0..d {
            let dxh = dy[(i, j)] * gain[(0, j)];
            mean_dxhat += dxh;
            mean_dxhat_xhat += dxh * cache.xhat[(i, j)];
        }
        mean_dxhat /= dn;
        mean_dxhat_xhat /= dn;
        let inv = cache.inv_std[i];
        for j in 0..d {
            let dxh = dy[(i, j)] * gain[(0, j)];
            dx[(i, j)] = inv * (dxh - mean_dxhat - cache.xhat[(i, j)] * mean_dxhat_xhat);
        }
        if let Some((dg, db)) = grads.as_mut() {
            for j in 0..d {
                dg[(0, j)] += dy[(i, j)] * cache.xhat[(i, j)];
                db[(0, j)] += dy[(i, j)];
            }
        }
    }
    dx
}

fn accumulate_col_sums(dst: &mut Mat, src: &Mat) {
    for j in 0..src.ncols() {
        dst[(0, j)] += src.column(j).sum();
    }
}

impl Model {
    /// Backpropagates `d_final` (gradient with respect to the last hidden
    /// state) through the network. Returns gradients with respect to every
    /// hidden state, and accumulates parameter gradients into `grads` when
    /// given. The unembedding gradient is the caller's responsibility.
    pub(crate) fn backward(&self, trace: &Trace, d_final: Mat, mut grads: Option<&mut Params>) -> Vec<Mat> {
        let n_layers = self.config.n_layers;
        let mut d_hidden = vec![DMatrix::zeros(0, 0); n_layers + 1];

        let mut dh = {
            let g = grads.as_deref_mut().map(|g| (&mut g.lnf_gain, &mut g.lnf_bias));
            let dh = layer_norm_backward(&d_final, &trace.lnf, &self.params.lnf_gain, g);
            d_hidden[n_layers] = d_final;
            dh
        };

        for l in (0..n_layers).rev() {
            let block_grads = grads.as_deref_mut().map(|g| &mut g.blocks[l]);
            dh = self.block_backward(
                &self.params.blocks[l],
                &trace.blocks[l],
                &trace.record.attention_maps[l],
                dh,
                block_grads,
            );
            if l > 0 {
                d_hidden[l] = dh.clone();
            }
        }
        d_hidden[0] = dh;
        d_hidden
    }

    fn block_backward(
        &self,
        p: &Block,
        c: &super::forward::BlockCache,
        maps: &[Mat],
        d_out: Mat,
        mut grads: Option<&mut Block>,
    ) -> Mat {
        let cfg = &self.config;
        let (t, d) = (d_out.nrows(), cfg.d_model);
        let dh_head = cfg.head_dim();
        let scale = 1.0 / (dh_head as f64).sqrt();

        // MLP branch
        let dm = &d_out;
        let dg = dm * p.w_proj.transpose();
        let mut du = dg;
        for (du, u) in du.iter_mut().zip(c.u.iter()) {
            *du *= gelu_grad(*u);
        }
        let db = &du * p.w_fc.transpose();
        if let Some(g) = grads.as_deref_mut() {
            g.w_proj += c.g.tr_mul(dm);
            accumulate_col_sums(&mut g.b_proj, dm);
            g.w_fc += c.b.tr_mul(&du);
            accumulate_col_sums(&mut g.b_fc, &du);
        }
        let ln2_grads = grads.as_deref_mut().map(|g| (&mut g.ln2_gain, &mut g.ln2_bias));
        let mut d_mid = layer_norm_backward(&db, &c.ln2, &p.ln2_gain, ln2_grads);
        d_mid += &d_out;

        // attention branch
        let d_attn = &d_mid;
        let d_concat = d_attn * p.w_out.transpose();
        let mut d_qkv = DMatrix::zeros(t, 3 * d);
        for (head, probs) in maps.iter().enumerate() {
            let q = c.qkv.columns(head * dh_head, dh_head);
            let k = c.qkv.columns(d + head * dh_head, dh_head);
            let v = c.qkv.columns(2 * d + head * dh_head, dh_head);
            let d_o = d_concat.columns(head * dh_head, dh_head);
            let d_p = d_o * v.transpose();
            let d_v = probs.tr_mul(&d_o);
            let mut d_s = DMatrix::zeros(t, t);
            for i in 0..t {
                let dot: f64 = (0..=i).map(|j| probs[(i, j)] * d_p[(i, j)]).sum();
                for j in 0..=i {
                    d_s[(i, j)] = probs[(i, j)] * (d_p[(i, j)] - dot) * scale;
                }
            }
            let d_q = &d_s * k;
            let d_k = d_s.tr_mul(&q);
            d_qkv.columns_mut(head * dh_head, dh_head).copy_from(&d_q);
            d_qkv.columns_mut(d + head * dh_head, dh_head).copy_from(&d_k);
            d_qkv.columns_mut(2 * d + head * dh_head, dh_head).copy_from(&d_v);
        }
        let da = &d_qkv * p.w_qkv.transpose();
        if let Some(g) = grads.as_deref_mut() {
            g.w_out += c.concat.tr_mul(d_attn);
            accumulate_col_sums(&mut g.b_out, d_attn);
            g.w_qkv += c.a.tr_mul(&d_qkv);
            accumulate_col_sums(&mut g.b_qkv, &d_qkv);
        }
        let ln1_grads = grads.map(|g| (&mut g.ln1_gain, &mut g.ln1_bias));
        let mut d_in = layer_norm_backward(&da, &c.ln1, &p.ln1_gain, ln1_grads);
        d_in += &d_mid;
        d_in
    }

    /// Value of the target and its gradient with respect to every hidden
    /// state, for input embeddings `x`.
    pub fn target_gradients(&self, x: &Mat, target: &TargetSpec) -> Result<TargetGradients> {
        self.check_embeddings(x)?;
        target.check(self.config.vocab_size)?;
        let trace = self.trace(x);
        let t = x.nrows();
        let last: Vec<f64> = trace.record.logits.row(t - 1).iter().cloned().collect();
        let (value, d_logit) = target.value_and_grad(&last);

        let d = self.config.d_model;
        let mut d_final = DMatrix::zeros(t, d);
        for j in 0..d {
            let w = self.params.unembedding.row(j);
            d_final[(t - 1, j)] = w.iter().zip(&d_logit).map(|(a, b)| a * b).sum();
        }
        let d_hidden = self.backward(&trace, d_final, None);
        Ok(TargetGradients { value, hidden_states: trace.record.hidden_states, d_hidden })
    }

    /// Gradient of the target with respect to the summed token + positional
    /// embedding of every position.
    pub fn grad_wrt_embeddings(&self, token_ids: &[usize], target: &TargetSpec) -> Result<Mat> {
        self.grad_wrt_layer(token_ids, target, 0)
    }

    /// Gradient of the target with respect to `hidden_states[layer]`.
    pub fn grad_wrt_layer(&self, token_ids: &[usize], target: &TargetSpec, layer: usize) -> Result<Mat> {
        if layer > self.config.n_layers {
            return Err(Error::Input(format!("layer {layer} out of range 0..={}", self.config.n_layers)));
        }
        let x = self.embed(token_ids)?;
        let mut grads = self.target_gradients(&x, target)?;
        Ok(grads.d_hidden.swap_remove(layer))
    }
}

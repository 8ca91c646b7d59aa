//! Layer conductance: how much of the path-integrated attribution flows
//! through each layer's neurons, summed per token position.

use serde::{Deserialize, Serialize};

use super::model::AttributionModel;
use super::riemann::RiemannRule;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::tinylm::TargetSpec;

/// Per-layer, per-position conductance. Row `l` is hidden state `l`
/// (`0` = embedding output, `n_layers` = final normalised output).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerConductanceMatrix {
    pub scores: Mat,
    pub steps_m: usize,
}

impl LayerConductanceMatrix {
    pub fn n_layers(&self) -> usize {
        self.scores.nrows()
    }

    pub fn seq_len(&self) -> usize {
        self.scores.ncols()
    }

    pub fn layer_total(&self, layer: usize) -> f64 {
        self.scores.row(layer).sum()
    }
}

/// Conductance of every layer between `baseline` and `x`.
///
/// For cell `k` of `m`, the gradient `∂f/∂y` is taken at the rule's sample
/// point and multiplied by the change of `y` across the cell, so each layer's
/// total telescopes to `f(x) − f(x′)` as `m` grows.
pub fn layer_conductance_between<M: AttributionModel + ?Sized>(
    model: &M,
    x: &Mat,
    baseline: &Mat,
    target: &TargetSpec,
    steps_m: usize,
    rule: RiemannRule,
) -> Result<LayerConductanceMatrix> {
    if steps_m == 0 {
        return Err(Error::Input("steps_m must be at least 1".into()));
    }
    if x.shape() != baseline.shape() {
        return Err(Error::Input("baseline shape differs from input shape".into()));
    }
    let n_layers = model.n_layers() + 1;
    let t = x.nrows();
    let delta = x - baseline;
    let at = |alpha: f64| baseline + &delta * alpha;

    let mut scores = Mat::zeros(n_layers, t);
    // hidden states at the cell's left edge, carried between cells
    let mut left = model.gradients(&at(0.0), target)?.hidden_states;
    for k in 0..steps_m {
        let right_alpha = (k + 1) as f64 / steps_m as f64;
        let right = model.gradients(&at(right_alpha), target)?;
        let sample = match rule {
            RiemannRule::Right => None,
            _ => Some(model.gradients(&at(rule.point(k, steps_m)), target)?),
        };
        let grads = match &sample {
            Some(s) => &s.d_hidden,
            None => &right.d_hidden,
        };
        for l in 0..n_layers {
            let inc = &right.hidden_states[l] - &left[l];
            let contrib = grads[l].component_mul(&inc);
            for i in 0..t {
                let s: f64 = contrib.row(i).sum();
                if !s.is_finite() {
                    return Err(Error::Numerical {
                        step: k,
                        msg: format!("non-finite conductance in layer {l}"),
                    });
                }
                scores[(l, i)] += s;
            }
        }
        left = right.hidden_states;
    }
    Ok(LayerConductanceMatrix { scores, steps_m })
}

/// Layer conductance from the zero baseline for a token sequence.
pub fn layer_conductance<M: AttributionModel + ?Sized>(
    model: &M,
    token_ids: &[usize],
    target: &TargetSpec,
    steps_m: usize,
    rule: RiemannRule,
) -> Result<LayerConductanceMatrix> {
    let x = model.embed(token_ids)?;
    let baseline = Mat::zeros(x.nrows(), x.ncols());
    layer_conductance_between(model, &x, &baseline, target, steps_m, rule)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    /// Average over all elements of the layer's conductance vector.
    #[default]
    Mean,
    /// Sum over all input features.
    Sum,
}

/// One importance score per layer (row) of `conductance`.
pub fn layer_importance(conductance: &Mat, reduction: Reduction) -> Result<Vec<f64>> {
    if conductance.nrows() == 0 || conductance.ncols() == 0 {
        return Err(Error::Input("empty conductance matrix".into()));
    }
    let n = conductance.ncols() as f64;
    Ok(conductance
        .row_iter()
        .map(|row| match reduction {
            Reduction::Mean => row.sum() / n,
            Reduction::Sum => row.sum(),
        })
        .collect())
}

//! Input-attribution methods. Each returns one score per input token.

use serde::{Deserialize, Serialize};

use super::model::AttributionModel;
use super::riemann::RiemannRule;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::tinylm::TargetSpec;

/// Default number of interpolation steps for path methods.
pub const DEFAULT_STEPS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GradNorm,
    GradXInput,
    IntegratedGradients,
    Erasure,
}

impl Method {
    pub const ALL: [Method; 4] =
        [Method::GradNorm, Method::GradXInput, Method::IntegratedGradients, Method::Erasure];

    pub fn name(self) -> &'static str {
        match self {
            Method::GradNorm => "grad_norm",
            Method::GradXInput => "grad_x_input",
            Method::IntegratedGradients => "integrated_gradients",
            Method::Erasure => "erasure",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown attribution method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    #[default]
    Zero,
}

/// How erasure produces `x₋ᵢ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ErasureMode {
    /// Replace the erased rows of the input embedding with the zero
    /// baseline; sequence length and positions are preserved.
    #[default]
    ZeroEmbedding,
    /// Drop the erased tokens and re-embed the shorter sequence.
    Delete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributionVector {
    pub scores: Vec<f64>,
    pub method: Method,
    pub target: TargetSpec,
    pub baseline_kind: BaselineKind,
    /// Interpolation steps (integrated gradients only).
    pub steps_m: Option<usize>,
    /// Signed per-coordinate attributions `T × d` before the per-token norm
    /// (integrated gradients only).
    pub signed: Option<Mat>,
}

impl AttributionVector {
    fn new(scores: Vec<f64>, method: Method, target: &TargetSpec) -> Self {
        AttributionVector {
            scores,
            method,
            target: *target,
            baseline_kind: BaselineKind::Zero,
            steps_m: None,
            signed: None,
        }
    }
}

fn row_l1(m: &Mat, i: usize) -> f64 {
    m.row(i).iter().map(|v| v.abs()).sum()
}

fn row_l2(m: &Mat, i: usize) -> f64 {
    m.row(i).iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `s(xᵢ) = ‖∇ₓᵢ f(x)‖₁`.
pub fn gradient_norm<M: AttributionModel + ?Sized>(
    model: &M,
    token_ids: &[usize],
    target: &TargetSpec,
) -> Result<AttributionVector> {
    let x = model.embed(token_ids)?;
    let g = model.gradients(&x, target)?;
    let grad = &g.d_hidden[0];
    let scores = (0..x.nrows()).map(|i| row_l1(grad, i)).collect();
    Ok(AttributionVector::new(scores, Method::GradNorm, target))
}

/// `s(xᵢ) = ‖∇ₓᵢ f(x) ⊙ xᵢ‖₂`.
pub fn gradient_x_input<M: AttributionModel + ?Sized>(
    model: &M,
    token_ids: &[usize],
    target: &TargetSpec,
) -> Result<AttributionVector> {
    let x = model.embed(token_ids)?;
    let g = model.gradients(&x, target)?;
    let prod = g.d_hidden[0].component_mul(&x);
    let scores = (0..x.nrows()).map(|i| row_l2(&prod, i)).collect();
    Ok(AttributionVector::new(scores, Method::GradXInput, target))
}

/// Signed integrated-gradients attributions `T × d` between `baseline` and
/// `x`: the Riemann approximation of `(x − x′) ⊙ ∫₀¹ ∇f(x′ + α(x − x′)) dα`.
pub fn integrated_gradients_signed<M: AttributionModel + ?Sized>(
    model: &M,
    x: &Mat,
    baseline: &Mat,
    target: &TargetSpec,
    steps_m: usize,
    rule: RiemannRule,
) -> Result<Mat> {
    if steps_m == 0 {
        return Err(Error::Input("steps_m must be at least 1".into()));
    }
    if x.shape() != baseline.shape() {
        return Err(Error::Input(format!(
            "baseline shape {:?} differs from input shape {:?}",
            baseline.shape(),
            x.shape()
        )));
    }
    let delta = x - baseline;
    let mut grad_sum = Mat::zeros(x.nrows(), x.ncols());
    for k in 0..steps_m {
        let alpha = rule.point(k, steps_m);
        let point = baseline + &delta * alpha;
        let g = model.gradients(&point, target)?;
        if !g.value.is_finite() || g.d_hidden[0].iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical { step: k, msg: format!("non-finite gradient at alpha = {alpha}") });
        }
        grad_sum += &g.d_hidden[0];
    }
    Ok((grad_sum / steps_m as f64).component_mul(&delta))
}

/// Integrated gradients from the zero baseline; per-token score is the L1
/// norm of the token's signed attribution vector.
pub fn integrated_gradients<M: AttributionModel + ?Sized>(
    model: &M,
    token_ids: &[usize],
    target: &TargetSpec,
    steps_m: usize,
    rule: RiemannRule,
) -> Result<AttributionVector> {
    let x = model.embed(token_ids)?;
    let baseline = Mat::zeros(x.nrows(), x.ncols());
    let signed = integrated_gradients_signed(model, &x, &baseline, target, steps_m, rule)?;
    let scores = (0..x.nrows()).map(|i| row_l1(&signed, i)).collect();
    let mut out = AttributionVector::new(scores, Method::IntegratedGradients, target);
    out.steps_m = Some(steps_m);
    out.signed = Some(signed);
    Ok(out)
}

/// `s(G) = f(x) − f(x₋G)` for each group `G` of token positions. One forward
/// pass for the full input plus one per group.
pub fn erasure_groups<M: AttributionModel + ?Sized>(
    model: &M,
    token_ids: &[usize],
    target: &TargetSpec,
    groups: &[Vec<usize>],
    mode: ErasureMode,
) -> Result<Vec<f64>> {
    let x = model.embed(token_ids)?;
    let full = model.score(&x, target)?;
    let t = token_ids.len();
    groups
        .iter()
        .map(|group| {
            if let Some(bad) = group.iter().find(|&&i| i >= t) {
                return Err(Error::Input(format!("erasure position {bad} out of range")));
            }
            let erased = match mode {
                ErasureMode::ZeroEmbedding => {
                    let mut xe = x.clone();
                    for &i in group {
                        xe.row_mut(i).fill(0.0);
                    }
                    model.score(&xe, target)?
                }
                ErasureMode::Delete => {
                    let kept: Vec<usize> = token_ids
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| !group.contains(i))
                        .map(|(_, &tok)| tok)
                        .collect();
                    if kept.is_empty() {
                        return Err(Error::Input("deletion would empty the sequence".into()));
                    }
                    model.score(&model.embed(&kept)?, target)?
                }
            };
            Ok(full - erased)
        })
        .collect()
}

/// Token-level erasure: `s(xᵢ) = f(x) − f(x₋ᵢ)`.
pub fn erasure<M: AttributionModel + ?Sized>(
    model: &M,
    token_ids: &[usize],
    target: &TargetSpec,
    mode: ErasureMode,
) -> Result<AttributionVector> {
    let groups: Vec<Vec<usize>> = (0..token_ids.len()).map(|i| vec![i]).collect();
    let scores = erasure_groups(model, token_ids, target, &groups, mode)?;
    Ok(AttributionVector::new(scores, Method::Erasure, target))
}

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::tinylm::{Model, TargetGradients, TargetSpec};

/// What the attribution methods need from a model: an embedding lookup, the
/// target scalar on input embeddings, and gradients of that scalar with
/// respect to every layer output.
pub trait AttributionModel: Sync {
    fn d_model(&self) -> usize;

    /// Number of layers above the embedding layer; hidden states are indexed
    /// `0..=n_layers`.
    fn n_layers(&self) -> usize;

    fn embed(&self, token_ids: &[usize]) -> Result<Mat>;

    fn score(&self, x: &Mat, target: &TargetSpec) -> Result<f64>;

    fn gradients(&self, x: &Mat, target: &TargetSpec) -> Result<TargetGradients>;
}

impl AttributionModel for Model {
    fn d_model(&self) -> usize {
        self.config.d_model
    }

    fn n_layers(&self) -> usize {
        self.config.n_layers
    }

    fn embed(&self, token_ids: &[usize]) -> Result<Mat> {
        Model::embed(self, token_ids)
    }

    fn score(&self, x: &Mat, target: &TargetSpec) -> Result<f64> {
        self.score_embeddings(x, target)
    }

    fn gradients(&self, x: &Mat, target: &TargetSpec) -> Result<TargetGradients> {
        self.target_gradients(x, target)
    }
}

/// `f(x) = Σᵢ wᵢ · xᵢ`: a stand-in with constant gradients whose
/// attributions have closed forms. Token embeddings carry no positional
/// component and the only layer is the input itself.
#[derive(Debug, Clone)]
pub struct LinearModel {
    /// `max_len × d`; row `i` is `wᵢ`.
    pub weights: Mat,
    /// `vocab × d`.
    pub token_embedding: Mat,
}

impl LinearModel {
    fn check(&self, x: &Mat) -> Result<()> {
        if x.nrows() == 0 || x.nrows() > self.weights.nrows() || x.ncols() != self.weights.ncols() {
            return Err(Error::Input(format!(
                "embedding shape {:?} incompatible with linear weights {:?}",
                x.shape(),
                self.weights.shape()
            )));
        }
        Ok(())
    }
}

impl AttributionModel for LinearModel {
    fn d_model(&self) -> usize {
        self.weights.ncols()
    }

    fn n_layers(&self) -> usize {
        0
    }

    fn embed(&self, token_ids: &[usize]) -> Result<Mat> {
        if token_ids.is_empty() || token_ids.len() > self.weights.nrows() {
            return Err(Error::Input("bad sequence length for linear model".into()));
        }
        if token_ids.iter().any(|&t| t >= self.token_embedding.nrows()) {
            return Err(Error::Input("token id out of range".into()));
        }
        Ok(Mat::from_fn(token_ids.len(), self.d_model(), |i, j| self.token_embedding[(token_ids[i], j)]))
    }

    fn score(&self, x: &Mat, _target: &TargetSpec) -> Result<f64> {
        self.check(x)?;
        Ok(x.component_mul(&self.weights.rows(0, x.nrows())).sum())
    }

    fn gradients(&self, x: &Mat, target: &TargetSpec) -> Result<TargetGradients> {
        let value = self.score(x, target)?;
        Ok(TargetGradients {
            value,
            hidden_states: vec![x.clone()],
            d_hidden: vec![self.weights.rows(0, x.nrows()).into_owned()],
        })
    }
}

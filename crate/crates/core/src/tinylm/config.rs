use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest context the model must accept: attention feature windows are
/// eleven words long.
pub const MIN_SEQ_LEN: usize = 11;

/// Architecture hyperparameters of the toy decoder-only transformer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n_layers: usize,
    pub n_heads: usize,
    pub d_model: usize,
    pub d_ff: usize,
    pub vocab_size: usize,
    pub max_seq_len: usize,
    pub seed: u64,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_layers", self.n_layers),
            ("n_heads", self.n_heads),
            ("d_model", self.d_model),
            ("d_ff", self.d_ff),
            ("vocab_size", self.vocab_size),
            ("max_seq_len", self.max_seq_len),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if !self.d_model.is_multiple_of(self.n_heads) {
            return Err(Error::Config(format!(
                "d_model ({}) is not divisible by n_heads ({})",
                self.d_model, self.n_heads
            )));
        }
        if self.max_seq_len < MIN_SEQ_LEN {
            return Err(Error::Config(format!(
                "max_seq_len ({}) must be at least {MIN_SEQ_LEN}",
                self.max_seq_len
            )));
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.n_heads
    }

    /// Closed-form parameter count of the architecture built by
    /// [`super::Model::build`].
    pub fn param_count(&self) -> usize {
        let (d, f, v, s) = (self.d_model, self.d_ff, self.vocab_size, self.max_seq_len);
        let per_block = 2 * d          // ln1
            + d * 3 * d + 3 * d        // fused qkv
            + d * d + d                // attention output
            + 2 * d                    // ln2
            + d * f + f                // mlp up
            + f * d + d; // mlp down
        v * d + s * d + self.n_layers * per_block + 2 * d + d * v
    }
}

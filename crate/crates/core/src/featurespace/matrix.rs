use std::fmt;

use serde::{Deserialize, Serialize};

use crate::attribution::Method;
use crate::error::{Error, Result};
use crate::linalg::{all_finite, Mat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FeatureKind {
    Attribution { method: Method },
    Conductance { layer: usize },
    Attention,
    Activation { layer: usize },
}

impl FeatureKind {
    /// Short identifier used in file names and tables.
    pub fn label(&self) -> String {
        match self {
            FeatureKind::Attribution { method } => format!("attribution_{}", method.name()),
            FeatureKind::Conductance { layer } => format!("conductance_l{layer}"),
            FeatureKind::Attention => "attention".to_string(),
            FeatureKind::Activation { layer } => format!("activation_l{layer}"),
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Words × features, one row per retained story word.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub values: Mat,
    pub kind: FeatureKind,
    /// Story position of each row; strictly increasing.
    pub word_indices: Vec<usize>,
    pub story_id: String,
}

impl FeatureMatrix {
    pub fn new(
        values: Mat,
        kind: FeatureKind,
        word_indices: Vec<usize>,
        story_id: impl Into<String>,
    ) -> Result<Self> {
        let m = FeatureMatrix { values, kind, word_indices, story_id: story_id.into() };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.nrows() != self.word_indices.len() {
            return Err(Error::Validation(format!(
                "{} rows but {} word indices",
                self.values.nrows(),
                self.word_indices.len()
            )));
        }
        if self.word_indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("word indices not strictly increasing".into()));
        }
        if !all_finite(&self.values) {
            return Err(Error::Validation(format!("non-finite values in {} features", self.kind)));
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    /// Keeps only the rows whose word index is in `keep` (sorted).
    pub fn restrict_to(&self, keep: &[usize]) -> Result<FeatureMatrix> {
        let rows: Vec<usize> = keep
            .iter()
            .map(|w| {
                self.word_indices
                    .binary_search(w)
                    .map_err(|_| Error::Input(format!("word {w} not present in {} features", self.kind)))
            })
            .collect::<Result<_>>()?;
        FeatureMatrix::new(
            self.values.select_rows(rows.iter()),
            self.kind,
            keep.to_vec(),
            self.story_id.clone(),
        )
    }
}

/// Word indices present in every matrix, in story order.
pub fn common_word_indices(mats: &[&FeatureMatrix]) -> Vec<usize> {
    let Some((first, rest)) = mats.split_first() else {
        return Vec::new();
    };
    first
        .word_indices
        .iter()
        .copied()
        .filter(|w| rest.iter().all(|m| m.word_indices.binary_search(w).is_ok()))
        .collect()
}

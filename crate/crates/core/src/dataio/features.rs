//! Feature-matrix codec. Also the import path for features computed
//! elsewhere, e.g. from a full-size pretrained model.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::container::{read_file, write_file};
use crate::error::{Error, Result};
use crate::featurespace::{FeatureKind, FeatureMatrix};
use crate::linalg::{from_row_major, to_row_major};

pub const FEATURES_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct FeatureHeader {
    format: String,
    version: u32,
    kind: FeatureKind,
    story_id: String,
    shape: [usize; 2],
    word_indices: Vec<usize>,
}

pub fn write_features(path: &Path, features: &FeatureMatrix) -> Result<()> {
    features.validate()?;
    let header = FeatureHeader {
        format: "features".into(),
        version: FEATURES_FORMAT_VERSION,
        kind: features.kind,
        story_id: features.story_id.clone(),
        shape: [features.n_rows(), features.n_cols()],
        word_indices: features.word_indices.clone(),
    };
    write_file(path, &header, &to_row_major(&features.values))
}

pub fn read_features(path: &Path) -> Result<FeatureMatrix> {
    let (h, values): (FeatureHeader, _) = read_file(path, |h: &FeatureHeader| {
        if h.format != "features" || h.version != FEATURES_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "{}: unsupported feature header (format {:?}, version {})",
                path.display(),
                h.format,
                h.version
            )));
        }
        if h.word_indices.len() != h.shape[0] {
            return Err(Error::Format(format!(
                "{}: {} word indices for {} rows",
                path.display(),
                h.word_indices.len(),
                h.shape[0]
            )));
        }
        h.shape[0].checked_mul(h.shape[1]).ok_or_else(|| Error::Format("header shape overflows".into()))
    })?;
    FeatureMatrix::new(from_row_major(h.shape[0], h.shape[1], &values), h.kind, h.word_indices, h.story_id)
}

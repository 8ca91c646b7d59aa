//! Two-column label files: `voxel_id<TAB>roi_name` and `word_index<TAB>tag`.
//! Blank lines and lines starting with `#` are skipped.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

fn parse_index_labels(path: &Path, what: &str) -> Result<BTreeMap<usize, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_index_labels_str(&text, path, what)
}

fn parse_index_labels_str(text: &str, path: &Path, what: &str) -> Result<BTreeMap<usize, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { path: path.to_path_buf(), line: i + 1, msg };
        let (idx, label) = line.split_once('\t').ok_or_else(|| err(format!("expected {what}<TAB>label")))?;
        let idx: usize =
            idx.trim().parse().map_err(|_| err(format!("{what} {idx:?} is not a non-negative integer")))?;
        let label = label.trim();
        if label.is_empty() || label.contains('\t') {
            return Err(err("label must be a single non-empty field".into()));
        }
        if out.insert(idx, label.to_string()).is_some() {
            return Err(err(format!("duplicate {what} {idx}")));
        }
    }
    Ok(out)
}

/// ROI name per voxel id.
pub fn parse_roi_labels(path: &Path) -> Result<BTreeMap<usize, String>> {
    parse_index_labels(path, "voxel_id")
}

/// POS tag per story word index.
pub fn parse_pos_tags(path: &Path) -> Result<BTreeMap<usize, String>> {
    parse_index_labels(path, "word_index")
}

/// Dense per-voxel labels; voxels absent from the file are unlabeled.
pub fn labels_per_voxel(labels: &BTreeMap<usize, String>, n_voxels: usize) -> Result<Vec<Option<String>>> {
    if let Some((&v, _)) = labels.range(n_voxels..).next() {
        return Err(Error::Input(format!("label for voxel {v} but only {n_voxels} voxels")));
    }
    Ok((0..n_voxels).map(|v| labels.get(&v).cloned()).collect())
}

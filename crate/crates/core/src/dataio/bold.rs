//! BOLD runs (voxels × TRs) and their binary codec.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::container::{read_file, write_file};
use crate::error::{Error, Result};
use crate::linalg::{all_finite, from_row_major, to_row_major, Mat};

pub const BOLD_FORMAT_VERSION: u32 = 1;
pub const BOLD_EXTENSION: &str = "bold";

/// One subject's response to one story: `n_voxels × n_trs`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoldRun {
    pub subject_id: String,
    pub story_id: String,
    pub tr_s: f64,
    pub values: Mat,
}

impl BoldRun {
    pub fn n_voxels(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_trs(&self) -> usize {
        self.values.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trs() == 0 || self.n_voxels() == 0 {
            return Err(Error::Validation(format!(
                "run {}/{} has shape {} × {}",
                self.subject_id,
                self.story_id,
                self.n_voxels(),
                self.n_trs()
            )));
        }
        if !(self.tr_s.is_finite() && self.tr_s > 0.0) {
            return Err(Error::Validation(format!("tr_s {} must be positive", self.tr_s)));
        }
        if !all_finite(&self.values) {
            return Err(Error::Validation(format!(
                "run {}/{} has non-finite values",
                self.subject_id, self.story_id
            )));
        }
        Ok(())
    }
}

/// All subjects' runs for one story.
#[derive(Debug, Clone, PartialEq)]
pub struct BoldDataset {
    pub runs: Vec<BoldRun>,
}

impl BoldDataset {
    pub fn new(runs: Vec<BoldRun>) -> Result<Self> {
        let Some(first) = runs.first() else {
            return Err(Error::Validation("dataset has no runs".into()));
        };
        for r in &runs {
            r.validate()?;
            if r.values.shape() != first.values.shape() || r.tr_s != first.tr_s {
                return Err(Error::Validation(format!(
                    "run of {} does not match the shape/TR of {}",
                    r.subject_id, first.subject_id
                )));
            }
        }
        Ok(BoldDataset { runs })
    }

    pub fn n_subjects(&self) -> usize {
        self.runs.len()
    }

    pub fn n_voxels(&self) -> usize {
        self.runs[0].n_voxels()
    }

    pub fn n_trs(&self) -> usize {
        self.runs[0].n_trs()
    }

    pub fn tr_s(&self) -> f64 {
        self.runs[0].tr_s
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct BoldHeader {
    format: String,
    version: u32,
    subject_id: String,
    story_id: String,
    n_voxels: usize,
    #[serde(rename = "n_TRs")]
    n_trs: usize,
    tr_s: f64,
    endianness: String,
}

pub fn write_bold(path: &Path, run: &BoldRun) -> Result<()> {
    run.validate()?;
    let header = BoldHeader {
        format: "bold".into(),
        version: BOLD_FORMAT_VERSION,
        subject_id: run.subject_id.clone(),
        story_id: run.story_id.clone(),
        n_voxels: run.n_voxels(),
        n_trs: run.n_trs(),
        tr_s: run.tr_s,
        endianness: "little".into(),
    };
    write_file(path, &header, &to_row_major(&run.values))
}

pub fn read_bold(path: &Path) -> Result<BoldRun> {
    let (h, values): (BoldHeader, _) = read_file(path, |h: &BoldHeader| {
        if h.format != "bold" || h.version != BOLD_FORMAT_VERSION || h.endianness != "little" {
            return Err(Error::Format(format!(
                "{}: unsupported BOLD header (format {:?}, version {}, {} endian)",
                path.display(),
                h.format,
                h.version,
                h.endianness
            )));
        }
        if h.n_trs == 0 || h.n_voxels == 0 {
            return Err(Error::Validation(format!(
                "{}: header declares {} voxels × {} TRs",
                path.display(),
                h.n_voxels,
                h.n_trs
            )));
        }
        h.n_voxels.checked_mul(h.n_trs).ok_or_else(|| Error::Format("header shape overflows".into()))
    })?;
    let run = BoldRun {
        subject_id: h.subject_id,
        story_id: h.story_id,
        tr_s: h.tr_s,
        values: from_row_major(h.n_voxels, h.n_trs, &values),
    };
    run.validate()?;
    Ok(run)
}

/// Writes each run to `dir/<subject_id>.bold`.
pub fn write_dataset(dir: &Path, dataset: &BoldDataset) -> Result<Vec<PathBuf>> {
    dataset
        .runs
        .iter()
        .map(|r| {
            let p = dir.join(format!("{}.{BOLD_EXTENSION}", r.subject_id));
            write_bold(&p, r)?;
            Ok(p)
        })
        .collect()
}

/// Reads every `*.bold` file in `dir`, ordered by file name.
pub fn read_dataset(dir: &Path) -> Result<BoldDataset> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.extension().is_some_and(|x| x == BOLD_EXTENSION))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Input(format!("no .{BOLD_EXTENSION} files in {}", dir.display())));
    }
    BoldDataset::new(paths.iter().map(|p| read_bold(p)).collect::<Result<_>>()?)
}

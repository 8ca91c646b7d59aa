use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::StoryTranscript;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    /// Story position of the first word in the span.
    pub start: usize,
    pub len: usize,
    /// Story position of the word that follows the span.
    pub target: usize,
}

impl Window {
    pub fn words(&self) -> Range<usize> {
        self.start..self.start + self.len
    }

    /// Distance of story word `word` from the end of the span (0 = last
    /// word), if it lies in the span.
    pub fn distance_from_end(&self, word: usize) -> Option<usize> {
        self.words().contains(&word).then(|| self.start + self.len - 1 - word)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowPlan {
    pub window_len: usize,
    pub windows: Vec<Window>,
}

/// One window per feasible prediction target: window `i` spans words
/// `i..i + window_len` and predicts word `i + window_len`.
pub fn build_windows(transcript: &StoryTranscript, window_len: usize) -> Result<WindowPlan> {
    plan_windows(transcript.len(), window_len)
}

pub fn plan_windows(n_words: usize, window_len: usize) -> Result<WindowPlan> {
    if window_len == 0 {
        return Err(Error::Input("window_len must be positive".into()));
    }
    if n_words <= window_len {
        return Err(Error::Input(format!(
            "transcript of {n_words} words has no prediction target for windows of {window_len}"
        )));
    }
    let windows = (0..n_words - window_len)
        .map(|start| Window { start, len: window_len, target: start + window_len })
        .collect();
    Ok(WindowPlan { window_len, windows })
}

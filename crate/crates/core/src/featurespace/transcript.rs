use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Word {
    pub text: String,
    pub onset_s: f64,
    pub offset_s: f64,
}

/// Ordered words of one story with their timing in scanner time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoryTranscript {
    pub story_id: String,
    pub words: Vec<Word>,
}

impl StoryTranscript {
    /// Checks timing invariants: finite, non-decreasing onsets and
    /// `offset >= onset` for every word.
    pub fn new(story_id: impl Into<String>, words: Vec<Word>) -> Result<Self> {
        let t = StoryTranscript { story_id: story_id.into(), words };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let mut prev = f64::NEG_INFINITY;
        for (i, w) in self.words.iter().enumerate() {
            if !w.onset_s.is_finite() || !w.offset_s.is_finite() {
                return Err(Error::Validation(format!("word {i}: non-finite timing")));
            }
            if w.onset_s < prev {
                return Err(Error::Validation(format!(
                    "word {i}: onset {} precedes previous onset {prev}",
                    w.onset_s
                )));
            }
            if w.offset_s < w.onset_s {
                return Err(Error::Validation(format!(
                    "word {i}: offset {} before onset {}",
                    w.offset_s, w.onset_s
                )));
            }
            prev = w.onset_s;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.words.iter().map(|w| w.text.as_str()).collect()
    }
}

use std::ops::Range;

use super::StoryTranscript;
use crate::error::{Error, Result};
use crate::tinylm::Vocabulary;

/// A transcript encoded once, with the token range of every word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedStory {
    pub token_ids: Vec<usize>,
    /// `word_start[w]..word_start[w + 1]` are the tokens of word `w`.
    pub word_start: Vec<usize>,
}

/// Tokens of a run of consecutive words, with each token's word index
/// relative to the first word of the run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span {
    pub token_ids: Vec<usize>,
    pub token_word: Vec<usize>,
}

impl TokenizedStory {
    pub fn new(transcript: &StoryTranscript, vocab: &Vocabulary) -> Result<Self> {
        let mut token_ids = Vec::new();
        let mut word_start = Vec::with_capacity(transcript.len() + 1);
        for (i, w) in transcript.words.iter().enumerate() {
            word_start.push(token_ids.len());
            let ids = vocab.encode_word(&w.text);
            if ids.is_empty() {
                return Err(Error::Input(format!("word {i} ({:?}) produced no tokens", w.text)));
            }
            token_ids.extend(ids);
        }
        word_start.push(token_ids.len());
        Ok(TokenizedStory { token_ids, word_start })
    }

    pub fn n_words(&self) -> usize {
        self.word_start.len() - 1
    }

    pub fn word_tokens(&self, word: usize) -> Range<usize> {
        self.word_start[word]..self.word_start[word + 1]
    }

    /// First token of `word`: the next-token target when `word` follows a
    /// window.
    pub fn first_token(&self, word: usize) -> usize {
        self.token_ids[self.word_start[word]]
    }

    pub fn span(&self, words: Range<usize>) -> Span {
        let first = words.start;
        let tokens = self.word_start[words.start]..self.word_start[words.end];
        let token_word =
            words.flat_map(|w| std::iter::repeat_n(w - first, self.word_tokens(w).len())).collect();
        Span { token_ids: self.token_ids[tokens].to_vec(), token_word }
    }
}

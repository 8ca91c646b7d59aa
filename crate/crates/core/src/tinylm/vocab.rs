//! Word-level vocabulary with a deterministic sub-word rule.
//!
//! Words are lower-cased and stripped of everything except alphanumerics
//! and apostrophes. A word longer than `split_len` characters becomes two
//! tokens, `head` and `##tail`, split at the middle character, so that the
//! token → word summation path is exercised.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub const UNK: &str = "<unk>";

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VocabularyFile {
    split_len: usize,
    tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyFile", into = "VocabularyFile")]
pub struct Vocabulary {
    split_len: usize,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

/// Token ids of a word sequence and, for each token, the index of the word
/// it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoded {
    pub token_ids: Vec<usize>,
    pub token_word: Vec<usize>,
}

impl From<VocabularyFile> for Vocabulary {
    fn from(f: VocabularyFile) -> Self {
        let index = f.tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary { split_len: f.split_len, tokens: f.tokens, index }
    }
}

impl From<Vocabulary> for VocabularyFile {
    fn from(v: Vocabulary) -> Self {
        VocabularyFile { split_len: v.split_len, tokens: v.tokens }
    }
}

pub fn normalize(word: &str) -> String {
    let w: String =
        word.chars().filter(|c| c.is_alphanumeric() || *c == '\'').flat_map(char::to_lowercase).collect();
    if w.is_empty() {
        UNK.to_string()
    } else {
        w
    }
}

impl Vocabulary {
    /// Builds a vocabulary from `words` in first-occurrence order; id 0 is
    /// reserved for unknown pieces.
    pub fn build<S: AsRef<str>>(words: &[S], split_len: usize) -> Self {
        let mut tokens = vec![UNK.to_string()];
        let mut index = HashMap::from([(UNK.to_string(), 0)]);
        for w in words {
            for piece in pieces(w.as_ref(), split_len) {
                if !index.contains_key(&piece) {
                    index.insert(piece.clone(), tokens.len());
                    tokens.push(piece);
                }
            }
        }
        Vocabulary { split_len, tokens, index }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn split_len(&self) -> usize {
        self.split_len
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn encode_word(&self, word: &str) -> Vec<usize> {
        pieces(word, self.split_len).iter().map(|p| self.index.get(p).copied().unwrap_or(0)).collect()
    }

    pub fn encode_words<S: AsRef<str>>(&self, words: &[S]) -> Encoded {
        let mut token_ids = Vec::new();
        let mut token_word = Vec::new();
        for (i, w) in words.iter().enumerate() {
            for id in self.encode_word(w.as_ref()) {
                token_ids.push(id);
                token_word.push(i);
            }
        }
        Encoded { token_ids, token_word }
    }
}

/// Sub-word pieces of a single word.
pub fn pieces(word: &str, split_len: usize) -> Vec<String> {
    let w = normalize(word);
    let chars: Vec<char> = w.chars().collect();
    if w != UNK && split_len > 0 && chars.len() > split_len {
        let k = chars.len().div_ceil(2);
        let head: String = chars[..k].iter().collect();
        let tail: String = chars[k..].iter().collect();
        vec![head, format!("##{tail}")]
    } else {
        vec![w]
    }
}

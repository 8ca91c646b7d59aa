use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WordScore {
    /// Story position of the word.
    pub word_index: usize,
    pub score: f64,
}

/// Sums token scores into word scores.
///
/// `token_word[i]` is the local word of token `i`; words must be numbered
/// from zero, each word's tokens contiguous and no word skipped.
/// `first_word` is the story position of local word 0.
pub fn tokens_to_words(
    token_scores: &[f64],
    token_word: &[usize],
    first_word: usize,
) -> Result<Vec<WordScore>> {
    if token_scores.len() != token_word.len() {
        return Err(Error::Input(format!(
            "{} token scores but {} map entries",
            token_scores.len(),
            token_word.len()
        )));
    }
    let mut out: Vec<WordScore> = Vec::new();
    for (i, (&s, &w)) in token_scores.iter().zip(token_word).enumerate() {
        let expected_new = out.len();
        if w + 1 == expected_new {
            out.last_mut().expect("nonempty").score += s;
        } else if w == expected_new {
            out.push(WordScore { word_index: first_word + w, score: s });
        } else if w > expected_new {
            return Err(Error::Input(format!("token {i} maps to word {w}, skipping word {expected_new}")));
        } else {
            return Err(Error::Input(format!("token {i} maps back to word {w} after later words (overlap)")));
        }
    }
    Ok(out)
}

/// Groups token positions by local word, for word-granular erasure.
pub fn word_token_groups(token_word: &[usize]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &w) in token_word.iter().enumerate() {
        if groups.len() <= w {
            groups.resize(w + 1, Vec::new());
        }
        groups[w].push(i);
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_token_per_word_is_identity() {
        let s = [0.1, 0.2, 0.3];
        let out = tokens_to_words(&s, &[0, 1, 2], 5).unwrap();
        assert_eq!(out.iter().map(|w| w.score).collect::<Vec<_>>(), s);
        assert_eq!(out[0].word_index, 5);
    }

    #[test]
    fn split_word_sums() {
        let out = tokens_to_words(&[1.0, 0.2, 0.3], &[0, 1, 1], 0).unwrap();
        assert_eq!(out.len(), 2);
        assert!((out[1].score - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gaps_and_overlaps_are_errors() {
        assert!(tokens_to_words(&[1.0, 1.0], &[0, 2], 0).is_err());
        assert!(tokens_to_words(&[1.0, 1.0, 1.0], &[0, 1, 0], 0).is_err());
        assert!(tokens_to_words(&[1.0], &[1], 0).is_err());
        assert!(tokens_to_words(&[1.0], &[0, 0], 0).is_err());
    }

    #[test]
    fn groups_follow_words() {
        assert_eq!(word_token_groups(&[0, 1, 1, 2]), vec![vec![0], vec![1, 2], vec![3]]);
    }
}

//! Whitespace tokenization and sentence-boundary augmentation.
//!
//! Input corpora are expected to be pre-tokenized: punctuation is already
//! separated by spaces, so a token is any maximal run of non-whitespace.

use crate::error::{Error, Result};
use crate::ngram::TokenId;

/// Splits a line into whitespace-separated tokens. Never allocates.
pub fn tokenize_line(line: &str) -> Vec<&str> {
    line.split(is_separator).filter(|t| !t.is_empty()).collect()
}

// ASCII space, tab, CR, LF plus every other Unicode whitespace char.
fn is_separator(c: char) -> bool {
    c.is_whitespace()
}

/// Returns `[BOS, BOS, w_1 .. w_m, EOS]`.
pub fn with_boundaries(sentence: &[TokenId]) -> Result<Vec<TokenId>> {
    if sentence.is_empty() {
        return Err(Error::EmptySentence);
    }
    let mut out = Vec::with_capacity(sentence.len() + 3);
    out.push(TokenId::BOS);
    out.push(TokenId::BOS);
    out.extend_from_slice(sentence);
    out.push(TokenId::EOS);
    Ok(out)
}

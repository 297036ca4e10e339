//! Scoring restored sentences against references.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tokenizer::tokenize_line;

/// Edit distance between two sequences (unit-cost insert/delete/substitute).
pub fn levenshtein_seq<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if x == y {
                diag
            } else {
                1 + diag.min(above).min(row[j])
            };
            diag = above;
        }
    }
    row[b.len()]
}

/// Character-level Levenshtein distance.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_seq(&a, &b)
}

/// One line of an annotation file: the gap the word was removed from
/// (1-based, in the damaged sentence) and the removed word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldEdit {
    pub gap_index: usize,
    pub word: String,
}

impl GoldEdit {
    pub fn parse(line: &str) -> Result<Self> {
        let (gap, word) = line
            .split_once('\t')
            .ok_or_else(|| Error::Data(format!("annotation without tab: {line:?}")))?;
        let gap_index = gap
            .trim()
            .parse()
            .map_err(|_| Error::Data(format!("bad gap index in annotation: {line:?}")))?;
        let word = word.trim_end_matches(['\r', '\n']);
        if word.is_empty() || word.contains(char::is_whitespace) {
            return Err(Error::Data(format!("bad word in annotation: {line:?}")));
        }
        Ok(GoldEdit {
            gap_index,
            word: word.to_string(),
        })
    }
}

impl fmt::Display for GoldEdit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}", self.gap_index, self.word)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub n_sentences: usize,
    pub avg_levenshtein: f64,
    pub exact_match_rate: f64,
    pub position_accuracy: Option<f64>,
    pub word_accuracy: Option<f64>,
    pub no_insert_rate: f64,
    pub avg_token_levenshtein: Option<f64>,
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"));
        writeln!(f, "{:<22}{}", "sentences", self.n_sentences)?;
        writeln!(f, "{:<22}{:.6}", "avg_levenshtein", self.avg_levenshtein)?;
        writeln!(f, "{:<22}{:.6}", "exact_match_rate", self.exact_match_rate)?;
        writeln!(f, "{:<22}{}", "position_accuracy", opt(self.position_accuracy))?;
        writeln!(f, "{:<22}{}", "word_accuracy", opt(self.word_accuracy))?;
        writeln!(f, "{:<22}{:.6}", "no_insert_rate", self.no_insert_rate)?;
        if self.avg_token_levenshtein.is_some() {
            writeln!(f, "{:<22}{}", "avg_token_levenshtein", opt(self.avg_token_levenshtein))?;
        }
        Ok(())
    }
}

fn without<'a>(tokens: &[&'a str], i: usize) -> Vec<&'a str> {
    tokens
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &t)| t)
        .collect()
}

/// The word `hyp` adds to `base`, if `hyp` is `base` plus one token.
fn inserted_word<'a>(hyp: &[&'a str], base: &[&str]) -> Option<&'a str> {
    if hyp.len() != base.len() + 1 {
        return None;
    }
    let split = hyp.iter().zip(base).take_while(|(a, b)| a == b).count();
    (hyp[split + 1..] == base[split..]).then(|| hyp[split])
}

/// Compares hypotheses with references line by line. Lines are normalized
/// to single-space-joined tokens before character distances are taken.
pub fn evaluate<H: AsRef<str>, R: AsRef<str>>(
    hypotheses: &[H],
    references: &[R],
    annotations: Option<&[GoldEdit]>,
    token_level: bool,
) -> Result<EvalReport> {
    if hypotheses.len() != references.len() {
        return Err(Error::LineCountMismatch {
            hypotheses: hypotheses.len(),
            references: references.len(),
        });
    }
    if let Some(a) = annotations {
        if a.len() != references.len() {
            return Err(Error::Data(format!(
                "{} annotations for {} references",
                a.len(),
                references.len()
            )));
        }
    }
    let n = references.len();
    let (mut dist, mut tok_dist, mut exact, mut no_insert) = (0usize, 0usize, 0usize, 0usize);
    let (mut pos_ok, mut word_ok) = (0usize, 0usize);
    for i in 0..n {
        let h = tokenize_line(hypotheses[i].as_ref());
        let r = tokenize_line(references[i].as_ref());
        let (hs, rs) = (h.join(" "), r.join(" "));
        dist += levenshtein(&hs, &rs);
        if token_level {
            tok_dist += levenshtein_seq(&h, &r);
        }
        if hs == rs {
            exact += 1;
        }
        if h.len() < r.len() {
            no_insert += 1;
        }
        if let Some(gold) = annotations.map(|a| &a[i]) {
            let g = gold.gap_index;
            if g < r.len() {
                let damaged = without(&r, g);
                if h.len() == r.len() && without(&h, g) == damaged {
                    pos_ok += 1;
                }
                if inserted_word(&h, &damaged) == Some(gold.word.as_str()) {
                    word_ok += 1;
                }
            }
        }
    }
    let rate = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    Ok(EvalReport {
        n_sentences: n,
        avg_levenshtein: rate(dist),
        exact_match_rate: if n == 0 { 1.0 } else { rate(exact) },
        position_accuracy: annotations.map(|_| rate(pos_ok)),
        word_accuracy: annotations.map(|_| rate(word_ok)),
        no_insert_rate: rate(no_insert),
        avg_token_levenshtein: token_level.then(|| rate(tok_dist)),
    })
}

//! Gap detection and single-word insertion.
//!
//! A gap between adjacent tokens is a candidate insertion point when its
//! separation ratio is strictly above `hyper_v`. Every candidate point is
//! tried with its candidate words and the insertion with the largest
//! log-probability gain wins. Ties fall back to the more frequent word, then
//! the lexicographically smaller surface, then the earlier position.

use std::borrow::Cow;
use std::cmp::Ordering;

use rayon::prelude::*;

use crate::candidates::{candidate_set, CandidateMode, StaticLexicon, DEFAULT_DYNAMIC_CAP};
use crate::error::{Error, Result};
use crate::gaps::GapTables;
use crate::model::{Model, DEFAULT_HYPER_V};
use crate::ngram::TokenId;
use crate::scalar::Scalar;
use crate::tokenizer::tokenize_line;

pub const DEFAULT_CHUNK_SIZE: usize = 1000;

/// Per-line outcome of a batch: the corrected line or that line's error.
pub type LineResult<F> = Result<(String, Correction<F>)>;

#[derive(Clone, Debug, PartialEq)]
pub struct CorrectorConfig<F> {
    pub hyper_v: F,
    pub mode: CandidateMode,
    /// Overrides the lexicon size stored in the model.
    pub static_k: Option<usize>,
    pub dynamic_cap: usize,
    pub force_insert: bool,
}

impl<F: Scalar> Default for CorrectorConfig<F> {
    fn default() -> Self {
        CorrectorConfig {
            hyper_v: F::from_f64_lossy(DEFAULT_HYPER_V),
            mode: CandidateMode::Combined,
            static_k: None,
            dynamic_cap: DEFAULT_DYNAMIC_CAP,
            force_insert: false,
        }
    }
}

impl<F: Scalar> CorrectorConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if self.hyper_v.is_nan() || self.hyper_v <= F::zero() {
            return Err(Error::Config("hyper_v must be positive".into()));
        }
        if self.static_k == Some(0) {
            return Err(Error::Config("static lexicon size must be at least 1".into()));
        }
        Ok(())
    }
}

/// One chosen insertion. `position` is the 1-based gap index: the word goes
/// between original tokens `position` and `position + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Insertion<F> {
    pub position: usize,
    pub word: TokenId,
    pub surface: String,
    /// Log-probability gain of the corrected sentence.
    pub score: F,
    /// Separation ratio of the gap.
    pub ratio: F,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Correction<F> {
    pub insertion: Option<Insertion<F>>,
}

impl<F> Correction<F> {
    pub fn none() -> Self {
        Correction { insertion: None }
    }

    pub fn is_empty(&self) -> bool {
        self.insertion.is_none()
    }
}

/// Interior gaps whose separation ratio exceeds `hyper_v`, highest ratio
/// first (ties: smaller index first). Gap `i` sits between tokens `i` and
/// `i + 1` (1-based).
pub fn detect_positions<F: Scalar>(
    sentence: &[TokenId],
    tables: &GapTables,
    hyper_v: F,
) -> Vec<(usize, F)> {
    let mut out: Vec<(usize, F)> = gap_ratios(sentence, tables)
        .filter(|&(_, r)| r > hyper_v)
        .collect();
    sort_by_ratio(&mut out);
    out
}

fn gap_ratios<'a, F: Scalar>(
    sentence: &'a [TokenId],
    tables: &'a GapTables,
) -> impl Iterator<Item = (usize, F)> + 'a {
    sentence
        .windows(2)
        .enumerate()
        .map(|(i, w)| (i + 1, tables.separation_ratio(w[0], w[1])))
}

fn sort_by_ratio<F: Scalar>(gaps: &mut [(usize, F)]) {
    gaps.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
}

pub struct Corrector<'m, F> {
    model: &'m Model<F>,
    lexicon: Cow<'m, StaticLexicon>,
    config: CorrectorConfig<F>,
}

struct Best<F> {
    position: usize,
    word: TokenId,
    score: F,
    ratio: F,
}

impl<'m, F: Scalar> Corrector<'m, F> {
    pub fn new(model: &'m Model<F>, config: CorrectorConfig<F>) -> Result<Self> {
        config.validate()?;
        let lexicon = match config.static_k {
            Some(k) if k != model.lexicon.k() => {
                Cow::Owned(StaticLexicon::build(&model.vocab, k)?)
            }
            _ => Cow::Borrowed(&model.lexicon),
        };
        Ok(Corrector {
            model,
            lexicon,
            config,
        })
    }

    pub fn config(&self) -> &CorrectorConfig<F> {
        &self.config
    }

    pub fn detect_positions(&self, sentence: &[TokenId]) -> Vec<(usize, F)> {
        detect_positions(sentence, &self.model.gaps, self.config.hyper_v)
    }

    /// Gaps that will be searched: the detected ones, or with `force_insert`
    /// and nothing detected, the single best gap with a positive ratio.
    pub fn search_positions(&self, sentence: &[TokenId]) -> Vec<(usize, F)> {
        let detected = self.detect_positions(sentence);
        if !detected.is_empty() || !self.config.force_insert {
            return detected;
        }
        let mut all: Vec<(usize, F)> = gap_ratios(sentence, &self.model.gaps)
            .filter(|&(_, r)| r > F::zero())
            .collect();
        sort_by_ratio(&mut all);
        all.truncate(1);
        all
    }

    fn beats(&self, a: &Best<F>, b: &Best<F>) -> bool {
        let vocab = &self.model.vocab;
        let ord = a
            .score
            .partial_cmp(&b.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| vocab.count(a.word).cmp(&vocab.count(b.word)))
            .then_with(|| vocab.surface(b.word).cmp(vocab.surface(a.word)))
            .then_with(|| b.position.cmp(&a.position));
        ord == Ordering::Greater
    }

    /// Restores at most one word in a sentence of token ids.
    pub fn correct_ids(&self, sentence: &[TokenId]) -> Result<Correction<F>> {
        if sentence.is_empty() {
            return Err(Error::EmptySentence);
        }
        let model = self.model;
        let mut best: Option<Best<F>> = None;
        for (position, ratio) in self.search_positions(sentence) {
            let gap = (sentence[position - 1], sentence[position]);
            let candidates = candidate_set(
                gap,
                &self.lexicon,
                &model.gaps,
                &model.vocab,
                self.config.mode,
                self.config.dynamic_cap,
            );
            if candidates.is_empty() {
                continue;
            }
            let scorer = model.lm.gap_scorer(sentence, position)?;
            for word in candidates.ids() {
                let cand = Best {
                    position,
                    word,
                    score: scorer.delta(word),
                    ratio,
                };
                if best.as_ref().is_none_or(|b| self.beats(&cand, b)) {
                    best = Some(cand);
                }
            }
        }
        Ok(Correction {
            insertion: best.map(|b| Insertion {
                position: b.position,
                word: b.word,
                surface: model.vocab.surface(b.word).to_string(),
                score: b.score,
                ratio: b.ratio,
            }),
        })
    }

    /// Corrects a tokenized sentence, keeping the original surfaces.
    pub fn correct_tokens(&self, tokens: &[&str]) -> Result<(Vec<String>, Correction<F>)> {
        let ids = self.model.vocab.ids(tokens);
        let correction = self.correct_ids(&ids)?;
        let mut out: Vec<String> = tokens.iter().map(|t| t.to_string()).collect();
        if let Some(ins) = &correction.insertion {
            out.insert(ins.position, ins.surface.clone());
        }
        Ok((out, correction))
    }

    pub fn correct_line(&self, line: &str) -> Result<(String, Correction<F>)> {
        let (tokens, correction) = self.correct_tokens(&tokenize_line(line))?;
        Ok((tokens.join(" "), correction))
    }

    /// Corrects `lines` on `threads` workers, `chunk_size` sentences per
    /// task. Output order matches input order and does not depend on the
    /// thread count or chunk size.
    pub fn correct_batch<S: AsRef<str> + Sync>(
        &self,
        lines: &[S],
        threads: usize,
        chunk_size: usize,
    ) -> Result<Vec<LineResult<F>>> {
        if threads < 1 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if chunk_size < 1 {
            return Err(Error::Config("chunk size must be at least 1".into()));
        }
        if threads == 1 {
            return Ok(lines.iter().map(|l| self.correct_line(l.as_ref())).collect());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        let chunks: Vec<Vec<_>> = pool.install(|| {
            lines
                .par_chunks(chunk_size)
                .map(|chunk| {
                    chunk
                        .iter()
                        .map(|l| self.correct_line(l.as_ref()))
                        .collect()
                })
                .collect()
        });
        Ok(chunks.into_iter().flatten().collect())
    }
}

impl<F: Scalar> Model<F> {
    pub fn corrector(&self, config: CorrectorConfig<F>) -> Result<Corrector<'_, F>> {
        Corrector::new(self, config)
    }
}

//! Static (global frequency) and dynamic (gap-conditioned) candidate words.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gaps::GapTables;
use crate::ngram::{TokenId, Vocabulary};

pub const DEFAULT_STATIC_K: usize = 100;
pub const DEFAULT_DYNAMIC_CAP: usize = 50;

/// The `K` most frequent corpus tokens, punctuation included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaticLexicon {
    k: usize,
    entries: Vec<TokenId>,
}

impl StaticLexicon {
    /// Top-`k` words ordered by (count desc, surface asc).
    pub fn build(vocab: &Vocabulary, k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::Config("static lexicon size must be at least 1".into()));
        }
        let mut words: Vec<TokenId> = vocab.words().collect();
        words.sort_by(|&a, &b| {
            vocab
                .count(b)
                .cmp(&vocab.count(a))
                .then_with(|| vocab.surface(a).cmp(vocab.surface(b)))
        });
        words.truncate(k);
        Ok(StaticLexicon { k, entries: words })
    }

    pub(crate) fn from_entries(k: usize, entries: Vec<TokenId>) -> Self {
        StaticLexicon { k, entries }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[TokenId] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Words seen between `gap.0` and `gap.1` in training, ranked by
/// (gap count desc, unigram count desc, surface asc) and truncated to `cap`.
pub fn dynamic_candidates(
    gap: (TokenId, TokenId),
    tables: &GapTables,
    vocab: &Vocabulary,
    cap: usize,
) -> Vec<TokenId> {
    let mut mids: Vec<(TokenId, u64)> = tables
        .middles(gap.0, gap.1)
        .iter()
        .copied()
        .filter(|&(t, _)| !t.is_reserved())
        .collect();
    mids.sort_by(|&(a, ca), &(b, cb)| {
        cb.cmp(&ca)
            .then_with(|| vocab.count(b).cmp(&vocab.count(a)))
            .then_with(|| vocab.surface(a).cmp(vocab.surface(b)))
    });
    mids.truncate(cap);
    mids.into_iter().map(|(t, _)| t).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum CandidateMode {
    Static,
    Dynamic,
    #[default]
    Combined,
}

impl CandidateMode {
    pub fn uses_static(self) -> bool {
        matches!(self, CandidateMode::Static | CandidateMode::Combined)
    }

    pub fn uses_dynamic(self) -> bool {
        matches!(self, CandidateMode::Dynamic | CandidateMode::Combined)
    }
}

impl fmt::Display for CandidateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CandidateMode::Static => "static",
            CandidateMode::Dynamic => "dynamic",
            CandidateMode::Combined => "combined",
        })
    }
}

impl FromStr for CandidateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" | "static-only" => Ok(CandidateMode::Static),
            "dynamic" | "dynamic-only" => Ok(CandidateMode::Dynamic),
            "combined" => Ok(CandidateMode::Combined),
            other => Err(Error::Config(format!("unknown candidate mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Source {
    Static,
    Dynamic,
    Both,
}

/// Deduplicated candidates for one gap, dynamic ones first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CandidateSet {
    items: Vec<(TokenId, Source)>,
}

impl CandidateSet {
    pub fn items(&self) -> &[(TokenId, Source)] {
        &self.items
    }

    pub fn ids(&self) -> impl Iterator<Item = TokenId> + '_ {
        self.items.iter().map(|&(t, _)| t)
    }

    pub fn source(&self, t: TokenId) -> Option<Source> {
        self.items.iter().find(|&&(x, _)| x == t).map(|&(_, s)| s)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

pub fn candidate_set(
    gap: (TokenId, TokenId),
    lexicon: &StaticLexicon,
    tables: &GapTables,
    vocab: &Vocabulary,
    mode: CandidateMode,
    cap: usize,
) -> CandidateSet {
    let mut items: Vec<(TokenId, Source)> = Vec::new();
    if mode.uses_dynamic() {
        items.extend(
            dynamic_candidates(gap, tables, vocab, cap)
                .into_iter()
                .map(|t| (t, Source::Dynamic)),
        );
    }
    if mode.uses_static() {
        let n_dynamic = items.len();
        for &t in lexicon.entries() {
            match items[..n_dynamic].iter_mut().find(|(x, _)| *x == t) {
                Some(slot) => slot.1 = Source::Both,
                None => items.push((t, Source::Static)),
            }
        }
    }
    items.retain(|&(t, _)| !t.is_reserved());
    CandidateSet { items }
}

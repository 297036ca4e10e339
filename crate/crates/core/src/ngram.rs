//! Vocabulary and order-1..3 n-gram count tables.
//!
//! Counting is done over boundary-augmented sentences `[BOS, BOS, w.., EOS]`.
//! Tokens are first interned with provisional ids in arrival order; when the
//! pass finishes, surviving surfaces are sorted and renumbered so the final
//! tables do not depend on ingestion order or on how work was sharded.

use std::fmt;

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::gaps::{GapAccumulator, GapTables};
use crate::tokenizer::tokenize_line;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenId(pub u32);

impl TokenId {
    pub const UNK: TokenId = TokenId(0);
    pub const BOS: TokenId = TokenId(1);
    pub const EOS: TokenId = TokenId(2);
    /// First id available to corpus surfaces.
    pub const FIRST_WORD: u32 = 3;

    pub fn is_sentinel(self) -> bool {
        self == Self::BOS || self == Self::EOS
    }

    pub fn is_reserved(self) -> bool {
        self.0 < Self::FIRST_WORD
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

pub const UNK_SURFACE: &str = "<unk>";
pub const BOS_SURFACE: &str = "<s>";
pub const EOS_SURFACE: &str = "</s>";

#[inline]
pub(crate) fn pack2(a: TokenId, b: TokenId) -> u64 {
    (u64::from(a.0) << 32) | u64::from(b.0)
}

#[inline]
pub(crate) fn unpack2(key: u64) -> (TokenId, TokenId) {
    (TokenId((key >> 32) as u32), TokenId(key as u32))
}

#[inline]
pub(crate) fn pack3(a: TokenId, b: TokenId, c: TokenId) -> u128 {
    (u128::from(a.0) << 64) | (u128::from(b.0) << 32) | u128::from(c.0)
}

#[inline]
pub(crate) fn unpack3(key: u128) -> (TokenId, TokenId, TokenId) {
    (
        TokenId((key >> 64) as u32),
        TokenId((key >> 32) as u32),
        TokenId(key as u32),
    )
}

/// Surface <-> id mapping plus unigram counts.
///
/// `counts[id]` is the number of times `id` occupies a position of a
/// boundary-augmented sentence, so BOS is counted twice per sentence and EOS
/// once. `total_tokens` counts only corpus tokens (UNK included).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    surfaces: Vec<String>,
    index: FxHashMap<String, TokenId>,
    counts: Vec<u64>,
    total_tokens: u64,
    lowercase: bool,
}

impl Vocabulary {
    /// Builds a vocabulary from `(surface, count)` pairs for corpus words,
    /// in id order starting at [`TokenId::FIRST_WORD`].
    pub(crate) fn from_parts(
        words: Vec<(String, u64)>,
        unk_count: u64,
        sentences: u64,
        lowercase: bool,
    ) -> Self {
        let mut surfaces = vec![
            UNK_SURFACE.to_string(),
            BOS_SURFACE.to_string(),
            EOS_SURFACE.to_string(),
        ];
        let mut counts = vec![unk_count, 2 * sentences, sentences];
        let mut total_tokens = unk_count;
        for (s, c) in words {
            surfaces.push(s);
            counts.push(c);
            total_tokens += c;
        }
        let index = surfaces
            .iter()
            .enumerate()
            .skip(TokenId::FIRST_WORD as usize)
            .map(|(i, s)| (s.clone(), TokenId(i as u32)))
            .collect();
        Vocabulary {
            surfaces,
            index,
            counts,
            total_tokens,
            lowercase,
        }
    }

    /// Rebuilds a vocabulary from its complete id-ordered surface and count
    /// lists, reserved ids included.
    pub(crate) fn from_full(
        surfaces: Vec<String>,
        counts: Vec<u64>,
        lowercase: bool,
    ) -> Result<Self> {
        let first = TokenId::FIRST_WORD as usize;
        if surfaces.len() != counts.len() || surfaces.len() < first {
            return Err(Error::Format("vocabulary size mismatch".into()));
        }
        if surfaces[..first] != [UNK_SURFACE, BOS_SURFACE, EOS_SURFACE] {
            return Err(Error::Format("reserved vocabulary entries are wrong".into()));
        }
        let mut index = FxHashMap::default();
        for (i, s) in surfaces.iter().enumerate().skip(first) {
            if s.is_empty() || s.contains(char::is_whitespace) {
                return Err(Error::Format(format!("invalid token surface {s:?}")));
            }
            if index.insert(s.clone(), TokenId(i as u32)).is_some() {
                return Err(Error::Format(format!("duplicate token surface {s:?}")));
            }
        }
        let total_tokens = counts
            .iter()
            .enumerate()
            .filter(|&(i, _)| !TokenId(i as u32).is_sentinel())
            .map(|(_, &c)| c)
            .sum();
        Ok(Vocabulary {
            surfaces,
            index,
            counts,
            total_tokens,
            lowercase,
        })
    }

    /// Total number of ids, reserved ones included.
    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.len() <= TokenId::FIRST_WORD as usize
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn sentences(&self) -> u64 {
        self.counts[TokenId::EOS.index()]
    }

    pub fn lowercase(&self) -> bool {
        self.lowercase
    }

    /// Looks a surface up, mapping unknown words to UNK.
    pub fn id(&self, surface: &str) -> TokenId {
        if self.lowercase && surface.chars().any(char::is_uppercase) {
            let folded = surface.to_lowercase();
            return self.index.get(&folded).copied().unwrap_or(TokenId::UNK);
        }
        self.index.get(surface).copied().unwrap_or(TokenId::UNK)
    }

    /// Exact lookup without UNK fallback.
    pub fn get(&self, surface: &str) -> Option<TokenId> {
        self.index.get(surface).copied()
    }

    pub fn surface(&self, id: TokenId) -> &str {
        self.surfaces
            .get(id.index())
            .map(String::as_str)
            .unwrap_or(UNK_SURFACE)
    }

    pub fn count(&self, id: TokenId) -> u64 {
        self.counts.get(id.index()).copied().unwrap_or(0)
    }

    pub fn ids(&self, tokens: &[&str]) -> Vec<TokenId> {
        tokens.iter().map(|t| self.id(t)).collect()
    }

    /// Corpus word ids (excludes UNK and sentinels).
    pub fn words(&self) -> impl Iterator<Item = TokenId> + '_ {
        (TokenId::FIRST_WORD..self.surfaces.len() as u32).map(TokenId)
    }

    pub(crate) fn raw_counts(&self) -> &[u64] {
        &self.counts
    }

    pub(crate) fn surfaces(&self) -> &[String] {
        &self.surfaces
    }
}

/// Order-1..3 count tables. Zero counts are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NGramCounts {
    pub(crate) unigrams: Vec<u64>,
    pub(crate) bigrams: FxHashMap<u64, u64>,
    pub(crate) trigrams: FxHashMap<u128, u64>,
}

impl NGramCounts {
    pub fn count(&self, ngram: &[TokenId]) -> Result<u64> {
        Ok(match *ngram {
            [a] => self.unigram(a),
            [a, b] => self.bigram(a, b),
            [a, b, c] => self.trigram(a, b, c),
            _ => return Err(Error::InvalidOrder(ngram.len())),
        })
    }

    #[inline]
    pub fn unigram(&self, a: TokenId) -> u64 {
        self.unigrams.get(a.index()).copied().unwrap_or(0)
    }

    #[inline]
    pub fn bigram(&self, a: TokenId, b: TokenId) -> u64 {
        self.bigrams.get(&pack2(a, b)).copied().unwrap_or(0)
    }

    #[inline]
    pub fn trigram(&self, a: TokenId, b: TokenId, c: TokenId) -> u64 {
        self.trigrams.get(&pack3(a, b, c)).copied().unwrap_or(0)
    }

    pub fn vocab_len(&self) -> usize {
        self.unigrams.len()
    }

    pub fn bigram_entries(&self) -> impl Iterator<Item = ((TokenId, TokenId), u64)> + '_ {
        self.bigrams.iter().map(|(&k, &c)| (unpack2(k), c))
    }

    pub fn trigram_entries(
        &self,
    ) -> impl Iterator<Item = ((TokenId, TokenId, TokenId), u64)> + '_ {
        self.trigrams.iter().map(|(&k, &c)| (unpack3(k), c))
    }

    pub fn num_bigrams(&self) -> usize {
        self.bigrams.len()
    }

    pub fn num_trigrams(&self) -> usize {
        self.trigrams.len()
    }

    /// `N_r` for `r` in `0..=max_r` over the n-grams that predict a word.
    ///
    /// BOS is never predicted, so the unigram BOS entry and the bigram
    /// `(BOS, BOS)` are left out; index 0 is always zero.
    pub fn counts_of_counts(&self, order: usize, max_r: usize) -> Result<Vec<u64>> {
        let mut n = vec![0u64; max_r + 1];
        let mut bump = |c: u64| {
            if c > 0 && (c as usize) <= max_r {
                n[c as usize] += 1;
            }
        };
        match order {
            1 => self
                .unigrams
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != TokenId::BOS.index())
                .for_each(|(_, &c)| bump(c)),
            2 => self
                .bigram_entries()
                .filter(|((_, b), _)| *b != TokenId::BOS)
                .for_each(|(_, c)| bump(c)),
            3 => self.trigrams.values().for_each(|&c| bump(c)),
            o => return Err(Error::InvalidOrder(o)),
        }
        Ok(n)
    }

    /// Drops all trigram entries.
    pub fn without_trigrams(&self) -> Self {
        NGramCounts {
            unigrams: self.unigrams.clone(),
            bigrams: self.bigrams.clone(),
            trigrams: FxHashMap::default(),
        }
    }

    /// Overwrites one trigram count (zero removes it). The caller is
    /// responsible for keeping lower orders consistent if it cares.
    pub fn set_trigram(&mut self, a: TokenId, b: TokenId, c: TokenId, count: u64) {
        if count == 0 {
            self.trigrams.remove(&pack3(a, b, c));
        } else {
            self.trigrams.insert(pack3(a, b, c), count);
        }
    }

    pub(crate) fn from_tables(
        unigrams: Vec<u64>,
        bigrams: FxHashMap<u64, u64>,
        trigrams: FxHashMap<u128, u64>,
    ) -> Self {
        NGramCounts {
            unigrams,
            bigrams,
            trigrams,
        }
    }
}

#[derive(Default)]
struct LocalCounts {
    bigrams: FxHashMap<u64, u64>,
    trigrams: FxHashMap<u128, u64>,
    gaps: Option<GapAccumulator>,
}

impl LocalCounts {
    fn merge(mut self, other: LocalCounts) -> LocalCounts {
        let (mut big, small) = if self.trigrams.len() >= other.trigrams.len() {
            (std::mem::take(&mut self), other)
        } else {
            (other, self)
        };
        for (k, c) in small.bigrams {
            *big.bigrams.entry(k).or_insert(0) += c;
        }
        for (k, c) in small.trigrams {
            *big.trigrams.entry(k).or_insert(0) += c;
        }
        big.gaps = match (big.gaps, small.gaps) {
            (Some(a), Some(b)) => Some(a.merge(b)),
            (a, b) => a.or(b),
        };
        big
    }
}

/// Streaming n-gram counter.
///
/// Feed lines with [`CorpusCounter::add_lines`] (batches are counted in
/// parallel on the current rayon pool) and call [`CorpusCounter::finish`].
pub struct CorpusCounter {
    lowercase: bool,
    interner: FxHashMap<String, u32>,
    surfaces: Vec<String>,
    unigrams: Vec<u64>,
    sentences: u64,
    counts: LocalCounts,
    with_gaps: bool,
}

impl CorpusCounter {
    pub fn new(lowercase: bool) -> Self {
        CorpusCounter {
            lowercase,
            interner: FxHashMap::default(),
            surfaces: vec![
                UNK_SURFACE.to_string(),
                BOS_SURFACE.to_string(),
                EOS_SURFACE.to_string(),
            ],
            unigrams: vec![0; TokenId::FIRST_WORD as usize],
            sentences: 0,
            counts: LocalCounts::default(),
            with_gaps: false,
        }
    }

    /// Also accumulate together/separate/middle tables in the same pass.
    pub fn with_gap_tables(mut self) -> Self {
        self.with_gaps = true;
        self.counts.gaps = Some(GapAccumulator::default());
        self
    }

    fn intern(&mut self, token: &str) -> TokenId {
        if let Some(&id) = self.interner.get(token) {
            return TokenId(id);
        }
        let id = self.surfaces.len() as u32;
        self.surfaces.push(token.to_string());
        self.unigrams.push(0);
        self.interner.insert(token.to_string(), id);
        TokenId(id)
    }

    /// Adds a batch of raw text lines. Blank lines are skipped.
    pub fn add_lines<S: AsRef<str>>(&mut self, lines: &[S]) {
        let mut batch: Vec<Vec<TokenId>> = Vec::with_capacity(lines.len());
        for line in lines {
            let toks = tokenize_line(line.as_ref());
            if toks.is_empty() {
                continue;
            }
            let ids = toks
                .into_iter()
                .map(|t| {
                    if self.lowercase {
                        self.intern(&t.to_lowercase())
                    } else {
                        self.intern(t)
                    }
                })
                .collect::<Vec<_>>();
            batch.push(ids);
        }
        self.add_sentences(&batch);
    }

    fn add_sentences(&mut self, batch: &[Vec<TokenId>]) {
        for s in batch {
            for &t in s {
                self.unigrams[t.index()] += 1;
            }
        }
        self.sentences += batch.len() as u64;
        let with_gaps = self.with_gaps;
        let local = batch
            .par_iter()
            .fold(
                || LocalCounts {
                    gaps: with_gaps.then(GapAccumulator::default),
                    ..LocalCounts::default()
                },
                |mut acc, s| {
                    count_sentence(&mut acc.bigrams, &mut acc.trigrams, s);
                    if let Some(g) = acc.gaps.as_mut() {
                        g.add_sentence(s, None);
                    }
                    acc
                },
            )
            .reduce(LocalCounts::default, LocalCounts::merge);
        let current = std::mem::take(&mut self.counts);
        self.counts = current.merge(local);
    }

    pub fn sentences(&self) -> u64 {
        self.sentences
    }

    /// Applies the frequency cutoff, renumbers ids deterministically and
    /// returns the final tables.
    pub fn finish(
        self,
        min_count: u64,
        gap_min_count: u64,
    ) -> Result<(Vocabulary, NGramCounts, Option<GapTables>)> {
        if min_count < 1 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        if self.sentences == 0 {
            return Err(Error::NoTrainingData);
        }
        let first = TokenId::FIRST_WORD as usize;
        let mut kept: Vec<u32> = (first as u32..self.surfaces.len() as u32)
            .filter(|&i| self.unigrams[i as usize] >= min_count)
            .collect();
        kept.sort_unstable_by(|&a, &b| self.surfaces[a as usize].cmp(&self.surfaces[b as usize]));

        // provisional id -> final id; reserved ids map to themselves, dropped words to UNK.
        let mut remap = vec![TokenId::UNK; self.surfaces.len()];
        for (i, slot) in remap.iter_mut().enumerate().take(first) {
            *slot = TokenId(i as u32);
        }
        for (rank, &p) in kept.iter().enumerate() {
            remap[p as usize] = TokenId(first as u32 + rank as u32);
        }
        let kept_set: FxHashSet<u32> = kept.iter().copied().collect();
        let unk_count: u64 = (first..self.surfaces.len())
            .filter(|i| !kept_set.contains(&(*i as u32)))
            .map(|i| self.unigrams[i])
            .sum::<u64>()
            + self.unigrams[TokenId::UNK.index()];

        let mut surfaces = self.surfaces;
        let words = kept
            .iter()
            .map(|&p| (std::mem::take(&mut surfaces[p as usize]), self.unigrams[p as usize]))
            .collect::<Vec<_>>();
        let vocab = Vocabulary::from_parts(words, unk_count, self.sentences, self.lowercase);

        let map = |t: TokenId| remap[t.index()];
        let mut bigrams = FxHashMap::default();
        bigrams.reserve(self.counts.bigrams.len());
        for (k, c) in self.counts.bigrams {
            let (a, b) = unpack2(k);
            *bigrams.entry(pack2(map(a), map(b))).or_insert(0) += c;
        }
        let mut trigrams = FxHashMap::default();
        trigrams.reserve(self.counts.trigrams.len());
        for (k, c) in self.counts.trigrams {
            let (a, b, d) = unpack3(k);
            *trigrams.entry(pack3(map(a), map(b), map(d))).or_insert(0) += c;
        }
        let counts = NGramCounts::from_tables(vocab.raw_counts().to_vec(), bigrams, trigrams);
        let gaps = self
            .counts
            .gaps
            .map(|g| g.remap(&remap).finish(gap_min_count, false));
        Ok((vocab, counts, gaps))
    }
}

fn count_sentence(
    bigrams: &mut FxHashMap<u64, u64>,
    trigrams: &mut FxHashMap<u128, u64>,
    s: &[TokenId],
) {
    let (mut u, mut v) = (TokenId::BOS, TokenId::BOS);
    *bigrams.entry(pack2(u, v)).or_insert(0) += 1;
    for &w in s.iter().chain(std::iter::once(&TokenId::EOS)) {
        *bigrams.entry(pack2(v, w)).or_insert(0) += 1;
        *trigrams.entry(pack3(u, v, w)).or_insert(0) += 1;
        u = v;
        v = w;
    }
}

/// Counts a whole in-memory corpus of text lines.
pub fn build_counts<S: AsRef<str>>(
    lines: &[S],
    min_count: u64,
) -> Result<(Vocabulary, NGramCounts)> {
    let mut counter = CorpusCounter::new(false);
    for chunk in lines.chunks(BATCH_LINES) {
        counter.add_lines(chunk);
    }
    let (v, c, _) = counter.finish(min_count, 1)?;
    Ok((v, c))
}

/// Lines handed to the parallel counter at a time.
pub const BATCH_LINES: usize = 65_536;

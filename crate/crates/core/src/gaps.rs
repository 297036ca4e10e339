//! "Together", "separate" and middle-word tables.
//!
//! For each sentence `w_1 .. w_m`, every adjacent pair `(w_i, w_{i+1})`
//! increments `together`, and every skip pattern `(w_i, _, w_{i+2})`
//! increments `separate(w_i, w_{i+2})` and `middles(w_i, w_{i+2})[w_{i+1}]`.
//! Sentinels never take part and patterns never cross sentence boundaries.

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::ngram::{pack2, pack3, unpack2, unpack3, TokenId};
use crate::scalar::Scalar;

/// Set of gap bigrams to restrict storage to.
pub type PairFilter = FxHashSet<u64>;

/// Builds a filter from the adjacent pairs of the given sentences.
pub fn pair_filter<'a, I>(sentences: I) -> PairFilter
where
    I: IntoIterator<Item = &'a [TokenId]>,
{
    let mut f = PairFilter::default();
    for s in sentences {
        for w in s.windows(2) {
            f.insert(pack2(w[0], w[1]));
        }
    }
    f
}

#[derive(Clone, Debug, Default)]
pub(crate) struct GapAccumulator {
    together: FxHashMap<u64, u64>,
    // (left, middle, right)
    middles: FxHashMap<u128, u64>,
}

impl GapAccumulator {
    pub(crate) fn add_sentence(&mut self, s: &[TokenId], filter: Option<&PairFilter>) {
        let keep = |a: TokenId, b: TokenId| filter.is_none_or(|f| f.contains(&pack2(a, b)));
        for w in s.windows(2) {
            if keep(w[0], w[1]) {
                *self.together.entry(pack2(w[0], w[1])).or_insert(0) += 1;
            }
        }
        for w in s.windows(3) {
            if keep(w[0], w[2]) {
                *self.middles.entry(pack3(w[0], w[1], w[2])).or_insert(0) += 1;
            }
        }
    }

    pub(crate) fn merge(mut self, other: GapAccumulator) -> GapAccumulator {
        if self.middles.len() < other.middles.len() {
            return other.merge(self);
        }
        for (k, c) in other.together {
            *self.together.entry(k).or_insert(0) += c;
        }
        for (k, c) in other.middles {
            *self.middles.entry(k).or_insert(0) += c;
        }
        self
    }

    pub(crate) fn remap(self, map: &[TokenId]) -> GapAccumulator {
        let m = |t: TokenId| map[t.index()];
        let mut out = GapAccumulator::default();
        for (k, c) in self.together {
            let (a, b) = unpack2(k);
            *out.together.entry(pack2(m(a), m(b))).or_insert(0) += c;
        }
        for (k, c) in self.middles {
            let (a, x, b) = unpack3(k);
            *out.middles.entry(pack3(m(a), m(x), m(b))).or_insert(0) += c;
        }
        out
    }

    pub(crate) fn finish(self, min_count: u64, filtered: bool) -> GapTables {
        let mut separate: FxHashMap<u64, u64> = FxHashMap::default();
        let mut middles: FxHashMap<u64, Vec<(TokenId, u64)>> = FxHashMap::default();
        for (k, c) in self.middles {
            let (a, x, b) = unpack3(k);
            let pair = pack2(a, b);
            *separate.entry(pair).or_insert(0) += c;
            if c >= min_count {
                middles.entry(pair).or_default().push((x, c));
            }
        }
        for list in middles.values_mut() {
            list.sort_unstable();
        }
        GapTables {
            together: self.together,
            separate,
            middles,
            filtered,
        }
    }
}

/// Streaming builder for [`GapTables`] over already-resolved token ids.
#[derive(Default)]
pub struct GapCounter {
    acc: GapAccumulator,
    filter: Option<PairFilter>,
}

impl GapCounter {
    pub fn new(filter: Option<PairFilter>) -> Self {
        GapCounter {
            acc: GapAccumulator::default(),
            filter,
        }
    }

    /// Counts a batch of sentences on the current rayon pool.
    pub fn add_batch(&mut self, batch: &[Vec<TokenId>]) {
        let filter = self.filter.as_ref();
        let local = batch
            .par_iter()
            .fold(GapAccumulator::default, |mut acc, s| {
                acc.add_sentence(s, filter);
                acc
            })
            .reduce(GapAccumulator::default, GapAccumulator::merge);
        let cur = std::mem::take(&mut self.acc);
        self.acc = cur.merge(local);
    }

    pub fn finish(self, min_count: u64) -> GapTables {
        let filtered = self.filter.is_some();
        self.acc.finish(min_count.max(1), filtered)
    }
}

/// Builds gap tables over an in-memory corpus of id sentences.
pub fn build_gap_tables(
    sentences: &[Vec<TokenId>],
    filter: Option<PairFilter>,
    min_count: u64,
) -> GapTables {
    let mut counter = GapCounter::new(filter);
    counter.add_batch(sentences);
    counter.finish(min_count)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GapTables {
    pub(crate) together: FxHashMap<u64, u64>,
    /// Raw skip-pattern counts, taken before middle-word pruning.
    pub(crate) separate: FxHashMap<u64, u64>,
    /// Middle words per pair, sorted by id.
    pub(crate) middles: FxHashMap<u64, Vec<(TokenId, u64)>>,
    pub(crate) filtered: bool,
}

impl GapTables {
    pub fn together(&self, a: TokenId, b: TokenId) -> u64 {
        self.together.get(&pack2(a, b)).copied().unwrap_or(0)
    }

    pub fn separate(&self, a: TokenId, b: TokenId) -> u64 {
        self.separate.get(&pack2(a, b)).copied().unwrap_or(0)
    }

    /// Words seen between `a` and `b`, with counts, ordered by id.
    pub fn middles(&self, a: TokenId, b: TokenId) -> &[(TokenId, u64)] {
        self.middles
            .get(&pack2(a, b))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn middle_count(&self, a: TokenId, x: TokenId, b: TokenId) -> u64 {
        let list = self.middles(a, b);
        list.binary_search_by_key(&x, |&(t, _)| t)
            .map(|i| list[i].1)
            .unwrap_or(0)
    }

    /// `separate(a, b) / together(a, b)`; +inf when only the skip pattern
    /// was seen, 0 when neither was.
    pub fn separation_ratio<F: Scalar>(&self, a: TokenId, b: TokenId) -> F {
        ratio(self.separate(a, b), self.together(a, b))
    }

    pub fn is_filtered(&self) -> bool {
        self.filtered
    }

    pub fn together_entries(&self) -> impl Iterator<Item = ((TokenId, TokenId), u64)> + '_ {
        self.together.iter().map(|(&k, &c)| (unpack2(k), c))
    }

    pub fn separate_entries(&self) -> impl Iterator<Item = ((TokenId, TokenId), u64)> + '_ {
        self.separate.iter().map(|(&k, &c)| (unpack2(k), c))
    }

    pub fn middle_entries(
        &self,
    ) -> impl Iterator<Item = ((TokenId, TokenId), &[(TokenId, u64)])> + '_ {
        self.middles
            .iter()
            .map(|(&k, v)| (unpack2(k), v.as_slice()))
    }

    pub fn num_pairs(&self) -> usize {
        self.separate.len()
    }
}

pub fn ratio<F: Scalar>(separate: u64, together: u64) -> F {
    match (separate, together) {
        (0, _) => F::zero(),
        (_, 0) => F::infinity(),
        (s, t) => F::from_count(s) / F::from_count(t),
    }
}

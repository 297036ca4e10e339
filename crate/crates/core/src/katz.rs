//! Katz back-off trigram model with Good-Turing discounts.
//!
//! Observed n-grams of raw count `r < k` are scaled by
//! `d_r = (r*/r - k N_k / N_1) / (1 - k N_k / N_1)` where
//! `r* = (r + 1) N_{r+1} / N_r`; counts `>= k` are kept as is. Mass freed by
//! discounting in a context is handed to the next lower order through a
//! per-context weight `alpha` so each conditional distribution sums to one
//! over the predictable vocabulary (everything except BOS). The unigram
//! level gives its leftover mass to UNK.
//!
//! Backoff weights are computed once at construction; afterwards the model
//! is immutable and may be shared freely between threads.

use log::warn;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::ngram::{pack2, NGramCounts, TokenId};
use crate::scalar::{compensated_sum, Scalar};
use crate::tokenizer::with_boundaries;

/// Counts at or above this value are not discounted.
pub const DEFAULT_DISCOUNT_THRESHOLD: u32 = 5;

/// Lower clamp for a discount coefficient.
pub const MIN_DISCOUNT: f64 = 1e-9;

/// A discount coefficient plus whether the counts-of-counts were too sparse
/// to compute it (in which case it is 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Discount {
    pub value: f64,
    pub degenerate: bool,
}

/// Katz discount `d_r` from counts-of-counts (`coc[r] = N_r`).
pub fn katz_discount(r: u64, k: u64, coc: &[u64]) -> Discount {
    let n = |i: u64| coc.get(i as usize).copied().unwrap_or(0) as f64;
    let undiscounted = |degenerate| Discount {
        value: 1.0,
        degenerate,
    };
    if r == 0 || r >= k {
        return undiscounted(false);
    }
    let (n1, nr, nr1, nk) = (n(1), n(r), n(r + 1), n(k));
    if n1 == 0.0 {
        return undiscounted(true);
    }
    if nr == 0.0 {
        return undiscounted(false);
    }
    if nr1 == 0.0 {
        return undiscounted(true);
    }
    let common = k as f64 * nk / n1;
    if common >= 1.0 {
        return undiscounted(true);
    }
    let r_star = (r + 1) as f64 * nr1 / nr;
    let d = (r_star / r as f64 - common) / (1.0 - common);
    Discount {
        value: d.clamp(MIN_DISCOUNT, 1.0),
        degenerate: false,
    }
}

#[derive(Clone, Copy, Debug)]
struct Backoff<F> {
    /// Denominator for discounted counts seen in this context.
    denom: F,
    /// Weight applied to the lower-order estimate for unseen words.
    alpha: F,
}

#[derive(Default)]
struct ContextAcc<F> {
    total: F,
    discounted: F,
    lower_seen: F,
    seen: usize,
}

impl<F: Scalar> ContextAcc<F> {
    fn finish(&self, predictable: usize) -> Backoff<F> {
        if self.seen >= predictable {
            return Backoff {
                denom: self.discounted,
                alpha: F::zero(),
            };
        }
        // Nothing was discounted away: reserve one pseudo-event so unseen
        // words keep non-zero probability.
        let denom = if self.discounted >= self.total {
            self.total + F::one()
        } else {
            self.total
        };
        let reserved = (denom - self.discounted) / denom;
        let unseen_lower = (F::one() - self.lower_seen).max(F::epsilon());
        Backoff {
            denom,
            alpha: reserved / unseen_lower,
        }
    }
}

#[derive(Clone, Debug)]
pub struct KatzModel<F> {
    counts: NGramCounts,
    k: u32,
    discounts: [Vec<F>; 3],
    unigram: Vec<F>,
    bigram_ctx: FxHashMap<u32, Backoff<F>>,
    trigram_ctx: FxHashMap<u64, Backoff<F>>,
    warnings: Vec<String>,
}

impl<F: Scalar> KatzModel<F> {
    pub fn new(counts: NGramCounts, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("discount threshold must be at least 1".into()));
        }
        if counts.vocab_len() <= TokenId::FIRST_WORD as usize {
            return Err(Error::NoTrainingData);
        }
        let mut warnings = Vec::new();
        let mut discounts: [Vec<F>; 3] = Default::default();
        for (i, slot) in discounts.iter_mut().enumerate() {
            let order = i + 1;
            let coc = counts.counts_of_counts(order, k as usize + 1)?;
            let mut ds = vec![F::one(); k as usize];
            for r in 1..k as u64 {
                let d = katz_discount(r, k as u64, &coc);
                if d.degenerate {
                    warnings.push(format!(
                        "order {order}: counts-of-counts too sparse for d_{r}, using 1"
                    ));
                }
                ds[r as usize] = F::from_f64_lossy(d.value);
            }
            *slot = ds;
        }
        for w in &warnings {
            warn!("{w}");
        }

        let mut model = KatzModel {
            counts,
            k,
            discounts,
            unigram: Vec::new(),
            bigram_ctx: FxHashMap::default(),
            trigram_ctx: FxHashMap::default(),
            warnings,
        };
        model.unigram = model.build_unigram();
        model.bigram_ctx = model.build_bigram_contexts();
        model.trigram_ctx = model.build_trigram_contexts();
        Ok(model)
    }

    fn discount(&self, order: usize, c: u64) -> F {
        if c >= u64::from(self.k) {
            F::one()
        } else {
            self.discounts[order - 1][c as usize]
        }
    }

    /// Discount coefficient for raw count `r` at `order` (1..=3).
    pub fn discount_coefficient(&self, r: u64, order: usize) -> Result<F> {
        if !(1..=3).contains(&order) {
            return Err(Error::InvalidOrder(order));
        }
        Ok(self.discount(order, r))
    }

    pub fn discount_threshold(&self) -> u32 {
        self.k
    }

    pub fn counts(&self) -> &NGramCounts {
        &self.counts
    }

    pub fn into_counts(self) -> NGramCounts {
        self.counts
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Size of the predictable vocabulary (all ids except BOS).
    pub fn predictable(&self) -> usize {
        self.counts.vocab_len() - 1
    }

    fn build_unigram(&self) -> Vec<F> {
        let n = self.counts.vocab_len();
        let c = |i: usize| self.counts.unigrams[i];
        let mut total = 0u64;
        let mut known = F::zero();
        let mut all = F::zero();
        for i in 0..n {
            if i == TokenId::BOS.index() {
                continue;
            }
            total += c(i);
            let d = self.discount(1, c(i)) * F::from_count(c(i));
            all = all + d;
            if i != TokenId::UNK.index() {
                known = known + d;
            }
        }
        let total = F::from_count(total);
        let denom = if all >= total && c(TokenId::UNK.index()) == 0 {
            total + F::one()
        } else {
            total
        };
        let mut p = vec![F::zero(); n];
        for (i, slot) in p.iter_mut().enumerate() {
            if i == TokenId::BOS.index() || i == TokenId::UNK.index() {
                continue;
            }
            *slot = self.discount(1, c(i)) * F::from_count(c(i)) / denom;
        }
        p[TokenId::UNK.index()] = (denom - known) / denom;
        p
    }

    fn build_bigram_contexts(&self) -> FxHashMap<u32, Backoff<F>> {
        let mut acc: FxHashMap<u32, ContextAcc<F>> = FxHashMap::default();
        for ((v, w), c) in self.counts.bigram_entries() {
            if w == TokenId::BOS {
                continue;
            }
            let e = acc.entry(v.0).or_default();
            e.total = e.total + F::from_count(c);
            e.discounted = e.discounted + self.discount(2, c) * F::from_count(c);
            e.lower_seen = e.lower_seen + self.p1(w);
            e.seen += 1;
        }
        let predictable = self.predictable();
        acc.into_iter()
            .map(|(v, a)| (v, a.finish(predictable)))
            .collect()
    }

    fn build_trigram_contexts(&self) -> FxHashMap<u64, Backoff<F>> {
        let mut acc: FxHashMap<u64, ContextAcc<F>> = FxHashMap::default();
        for ((u, v, w), c) in self.counts.trigram_entries() {
            let e = acc.entry(pack2(u, v)).or_default();
            e.total = e.total + F::from_count(c);
            e.discounted = e.discounted + self.discount(3, c) * F::from_count(c);
            e.lower_seen = e.lower_seen + self.p2(v, w);
            e.seen += 1;
        }
        let predictable = self.predictable();
        acc.into_iter()
            .map(|(k, a)| (k, a.finish(predictable)))
            .collect()
    }

    #[inline]
    fn known(&self, w: TokenId) -> TokenId {
        if w.index() < self.counts.vocab_len() {
            w
        } else {
            TokenId::UNK
        }
    }

    #[inline]
    fn p1(&self, w: TokenId) -> F {
        self.unigram[self.known(w).index()]
    }

    #[inline]
    fn p2(&self, v: TokenId, w: TokenId) -> F {
        let (v, w) = (self.known(v), self.known(w));
        match self.bigram_ctx.get(&v.0) {
            Some(ctx) => {
                let c = self.counts.bigram(v, w);
                if c > 0 {
                    self.discount(2, c) * F::from_count(c) / ctx.denom
                } else {
                    ctx.alpha * self.p1(w)
                }
            }
            None => self.p1(w),
        }
    }

    #[inline]
    fn p3(&self, u: TokenId, v: TokenId, w: TokenId) -> F {
        let (u, v, w) = (self.known(u), self.known(v), self.known(w));
        match self.trigram_ctx.get(&pack2(u, v)) {
            Some(ctx) => {
                let c = self.counts.trigram(u, v, w);
                if c > 0 {
                    self.discount(3, c) * F::from_count(c) / ctx.denom
                } else {
                    ctx.alpha * self.p2(v, w)
                }
            }
            None => self.p2(v, w),
        }
    }

    /// `P(w | context)` using at most the last two context tokens.
    /// BOS is not a predictable word and gets probability 0; every other id
    /// gets a strictly positive value.
    pub fn prob(&self, w: TokenId, context: &[TokenId]) -> F {
        if w == TokenId::BOS {
            return F::zero();
        }
        match *context {
            [] => self.p1(w),
            [v] => self.p2(v, w),
            [.., u, v] => self.p3(u, v, w),
        }
    }

    #[inline]
    fn ln3(&self, u: TokenId, v: TokenId, w: TokenId) -> F {
        self.p3(u, v, w).ln()
    }

    /// Natural-log probability of the sentence including its end marker.
    pub fn sentence_logprob(&self, sentence: &[TokenId]) -> Result<F> {
        let aug = with_boundaries(sentence)?;
        Ok(compensated_sum(
            aug.windows(3).map(|t| self.ln3(t[0], t[1], t[2])),
        ))
    }

    /// Scorer for insertions into gap `position` (between tokens `position`
    /// and `position + 1`, 1-based) of `sentence`.
    pub fn gap_scorer(&self, sentence: &[TokenId], position: usize) -> Result<GapScorer<'_, F>> {
        let m = sentence.len();
        if m < 2 || position < 1 || position > m - 1 {
            return Err(Error::PositionOutOfRange {
                position,
                max: m.saturating_sub(1),
                len: m,
            });
        }
        let at = |j: usize| -> TokenId {
            // 1-based real token index; 0 and below are BOS, m+1 is EOS
            if j == 0 {
                TokenId::BOS
            } else if j > m {
                TokenId::EOS
            } else {
                sentence[j - 1]
            }
        };
        let (x, y, z, t) = (at(position - 1), at(position), at(position + 1), at(position + 2));
        Ok(GapScorer {
            model: self,
            x,
            y,
            z,
            t,
            old: [self.ln3(x, y, z), self.ln3(y, z, t)],
        })
    }

    /// `sentence_logprob(s with w inserted at position) - sentence_logprob(s)`.
    pub fn insertion_delta(&self, sentence: &[TokenId], position: usize, w: TokenId) -> Result<F> {
        Ok(self.gap_scorer(sentence, position)?.delta(w))
    }

    /// Sum of `P(w | context)` over the predictable vocabulary.
    pub fn total_mass(&self, context: &[TokenId]) -> F {
        compensated_sum(
            (0..self.counts.vocab_len() as u32)
                .map(TokenId)
                .filter(|&w| w != TokenId::BOS)
                .map(|w| self.prob(w, context)),
        )
    }

    /// Contexts with at least one observed bigram continuation.
    pub fn bigram_contexts(&self) -> impl Iterator<Item = TokenId> + '_ {
        self.bigram_ctx.keys().map(|&v| TokenId(v))
    }

    /// Contexts with at least one observed trigram continuation.
    pub fn trigram_contexts(&self) -> impl Iterator<Item = (TokenId, TokenId)> + '_ {
        self.trigram_ctx
            .keys()
            .map(|&k| crate::ngram::unpack2(k))
    }
}

/// Scores single-word insertions into one gap from the five trigram terms
/// the insertion touches.
pub struct GapScorer<'m, F> {
    model: &'m KatzModel<F>,
    x: TokenId,
    y: TokenId,
    z: TokenId,
    t: TokenId,
    old: [F; 2],
}

impl<F: Scalar> GapScorer<'_, F> {
    pub fn delta(&self, w: TokenId) -> F {
        let m = self.model;
        compensated_sum([
            m.ln3(self.x, self.y, w),
            m.ln3(self.y, w, self.z),
            m.ln3(w, self.z, self.t),
            -self.old[0],
            -self.old[1],
        ])
    }
}

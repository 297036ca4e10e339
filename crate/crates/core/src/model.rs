//! A trained model: vocabulary, Katz language model, gap tables and the
//! static lexicon, plus the settings they were built with.

use crate::candidates::{StaticLexicon, DEFAULT_STATIC_K};
use crate::error::{Error, Result};
use crate::gaps::GapTables;
use crate::katz::{KatzModel, DEFAULT_DISCOUNT_THRESHOLD};
use crate::ngram::{CorpusCounter, NGramCounts, Vocabulary, BATCH_LINES};
use crate::scalar::Scalar;

pub const DEFAULT_HYPER_V: f64 = 27.0;

#[derive(Clone, Debug, PartialEq)]
pub struct BuildConfig {
    pub min_count: u64,
    pub discount_threshold: u32,
    pub static_k: usize,
    pub gap_min_count: u64,
    pub hyper_v: f64,
    pub lowercase: bool,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            min_count: 1,
            discount_threshold: DEFAULT_DISCOUNT_THRESHOLD,
            static_k: DEFAULT_STATIC_K,
            gap_min_count: 1,
            hyper_v: DEFAULT_HYPER_V,
            lowercase: false,
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_count < 1 {
            return Err(Error::Config("--min-count must be at least 1".into()));
        }
        if self.gap_min_count < 1 {
            return Err(Error::Config("--gap-min-count must be at least 1".into()));
        }
        if self.static_k < 1 {
            return Err(Error::Config("--static-k must be at least 1".into()));
        }
        if self.discount_threshold < 1 {
            return Err(Error::Config("discount threshold must be at least 1".into()));
        }
        if self.hyper_v.is_nan() || self.hyper_v <= 0.0 {
            return Err(Error::Config("hyper_v must be positive".into()));
        }
        Ok(())
    }
}

pub struct Model<F> {
    pub vocab: Vocabulary,
    pub lm: KatzModel<F>,
    pub gaps: GapTables,
    pub lexicon: StaticLexicon,
    pub config: BuildConfig,
}

impl<F: Scalar> Model<F> {
    pub fn from_parts(
        vocab: Vocabulary,
        counts: NGramCounts,
        gaps: GapTables,
        config: BuildConfig,
    ) -> Result<Self> {
        config.validate()?;
        let lexicon = StaticLexicon::build(&vocab, config.static_k)?;
        Self::with_lexicon(vocab, counts, gaps, lexicon, config)
    }

    pub(crate) fn with_lexicon(
        vocab: Vocabulary,
        counts: NGramCounts,
        gaps: GapTables,
        lexicon: StaticLexicon,
        config: BuildConfig,
    ) -> Result<Self> {
        let lm = KatzModel::new(counts, config.discount_threshold)?;
        Ok(Model {
            vocab,
            lm,
            gaps,
            lexicon,
            config,
        })
    }

    /// Trains on in-memory text lines in a single counting pass.
    pub fn train<S: AsRef<str>>(lines: &[S], config: BuildConfig) -> Result<Self> {
        config.validate()?;
        let mut counter = CorpusCounter::new(config.lowercase).with_gap_tables();
        for chunk in lines.chunks(BATCH_LINES) {
            counter.add_lines(chunk);
        }
        let (vocab, counts, gaps) = counter.finish(config.min_count, config.gap_min_count)?;
        let gaps = gaps.expect("gap tables requested");
        Self::from_parts(vocab, counts, gaps, config)
    }

    pub fn counts(&self) -> &NGramCounts {
        self.lm.counts()
    }
}

//! Single missing-word restoration.
//!
//! A sentence is scanned for gaps whose "separate" count (the two words seen
//! with exactly one word between them) dwarfs their "together" count (seen
//! adjacent). Candidate words for those gaps come from a global frequency
//! lexicon and from the words observed inside the same gap in training; the
//! insertion that most improves a Katz back-off trigram score is kept.
//!
//! The probability model and the corrector are generic over the float type;
//! [`Katz`], [`Restorer`] and [`Corrector`] are the `f64` instantiations the
//! command-line tool uses.

pub mod artifact;
pub mod candidates;
pub mod cli;
pub mod corpus;
pub mod corrector;
pub mod error;
pub mod eval;
pub mod gaps;
pub mod katz;
pub mod model;
pub mod ngram;
pub mod scalar;
pub mod testset;
pub mod tokenizer;

pub use candidates::{CandidateMode, CandidateSet, StaticLexicon};
pub use corrector::{Correction, CorrectorConfig, Insertion};
pub use error::{Error, Result};
pub use eval::{evaluate, levenshtein, EvalReport, GoldEdit};
pub use gaps::GapTables;
pub use katz::KatzModel;
pub use model::{BuildConfig, Model};
pub use ngram::{NGramCounts, TokenId, Vocabulary};
pub use scalar::Scalar;

pub type Katz = katz::KatzModel<f64>;
pub type Katz32 = katz::KatzModel<f32>;
pub type Restorer = model::Model<f64>;
pub type Restorer32 = model::Model<f32>;
pub type Corrector<'m> = corrector::Corrector<'m, f64>;
pub type Corrector32<'m> = corrector::Corrector<'m, f32>;

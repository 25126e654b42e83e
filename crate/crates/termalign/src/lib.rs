//! Terminology extraction and bilingual term alignment.
//!
//! The pipeline: load tokenized domain and background corpora, compute
//! corpus-comparison termhood (frequency and rank differences at word and
//! sentence level), feed the scores as features to a linear-chain CRF (or
//! an n-gram baseline), evaluate with span-level P/R/F1 under k-fold
//! cross-validation, and align bilingual term pairs over a
//! sentence-aligned corpus with termhood-weighted log-likelihood
//! association.

pub mod align;
pub mod corpus;
pub mod crf;
pub mod error;
pub mod eval;
pub mod features;
pub mod ngram;
pub mod synth;
pub mod termhood;

pub use error::{Result, TermError};

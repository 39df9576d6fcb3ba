//! Measures concept bias (e.g. gender bias of occupation words) in a text
//! corpus by training word embeddings, reconstructing the explicit first-order
//! co-occurrence representations they encode, and comparing first-order
//! against second-order bias measures.
//!
//! The crate is organized along the pipeline:
//!
//! * [`corpus`] — tokenization, vocabulary, subsampling, counterfactual
//!   augmentation, concept lexicons
//! * [`cooccur`] — windowed co-occurrence counting and PPMI construction
//! * [`sgns`] / [`glove`] — the two embedding trainers, sharing
//!   [`model::EmbeddingModel`]
//! * [`explicit`] — eSG / eGloVe / initGloVe explicit views reconstructed
//!   from trained models
//! * [`bias`] — the four bias measures, thresholding and classification
//! * [`eval`] — correlation against occupation statistics, the augmentation
//!   experiment, histograms
//! * [`lexicons`] — the bundled gender and occupation word lists
//! * [`synth`] — synthetic corpora with planted bias for calibration

pub mod bias;
pub mod cooccur;
pub mod corpus;
mod error;
pub mod eval;
pub mod explicit;
pub mod glove;
pub mod lexicons;
pub mod model;
pub mod sgns;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};

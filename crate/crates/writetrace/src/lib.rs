//! Writing-process analytics for test security.
//!
//! `writetrace` analyzes timestamped writing-process logs (keystrokes, edits,
//! pastes) and essay text to flag three kinds of test-security anomalies:
//!
//! - **AI-generated essays**, scored by perplexity under a trainable word-level
//!   n-gram language model ([`lm`], [`detect::ai_text_score`]);
//! - **impostor test takers**, verified by keystroke-dynamics biometrics over
//!   pairs of sessions ([`features`], [`detect::fit_biometric_verifier`]);
//! - **copy-typing** (transcribing an existing text instead of drafting),
//!   detected from writing-process features ([`detect::fit_copy_typing_detector`]).
//!
//! Supporting machinery: a from-scratch gradient-boosted tree learner
//! ([`gbm`]), a binary-classifier evaluation toolkit with ROC/AUC/EER
//! ([`eval`]), and a seeded synthetic-data generator for desk-scale
//! verification ([`simgen`]).
//!
//! Everything is deterministic given its inputs and seeds: parsing, replay,
//! feature extraction, and scoring are pure functions; model training and
//! data generation are seeded.
//!
//! Start with the runnable examples (`cargo run --example <name>`); the
//! `writetrace` binary wires the same library calls into a file-based
//! pipeline.

pub mod cli;
pub mod detect;
pub mod error;
pub mod eval;
pub mod event_log;
pub mod features;
pub mod gbm;
pub mod lm;
pub mod manifest;
pub mod simgen;

pub use error::{Error, Result};

//! Learning interpretable Horn-clause rule sets from natural-language
//! classification data.
//!
//! The crate is organised as a pipeline:
//!
//! * [`logic`]: terms, clauses, language biases, fact bases, and their
//!   Prolog-style syntax, plus join-based clause coverage.
//! * [`ilp`]: candidate clause enumeration under a bias and minimum
//!   description length rule-set search (size + false positives + false
//!   negatives).
//! * [`llm`]: chat-completion backends (OpenAI-compatible HTTP and a
//!   scripted backend for offline runs).
//! * [`agents`]: the Actor/Critic bias construction loop, the Translator
//!   that turns text into facts, and the end-to-end pipeline controller.
//! * [`datagen`]: the SHOES and ZENDO synthetic benchmark generators.
//! * [`eval`]: prediction, accuracy/F1 and experiment sweeps.

pub mod agents;
pub mod datagen;
pub mod eval;
pub mod ilp;
pub mod llm;
pub mod logic;

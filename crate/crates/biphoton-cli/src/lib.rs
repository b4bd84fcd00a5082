//! Command-line companion to `biphoton-core`: validated sweep jobs over one
//! physical axis, deterministic CSV/JSONL serialization, canned figure-style
//! bundles, resonance reports, and a self-validation suite.

pub mod config;
pub mod figures;
pub mod output;
pub mod sweep;
pub mod validate;

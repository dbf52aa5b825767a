//! Rank prediction for battle-royale matches.
//!
//! Raw per-player match rows are grouped into solo matches, streamed in
//! chronological order, and used to compare two families of predictors:
//! nine behavioral features accumulated per player, and three rating
//! systems (Elo, Glicko, TrueSkill) extended to many-player matches. Each
//! model orders a match's participants before the match is revealed, and
//! the ordering is scored with NDCG against the observed placements.
//!
//! Start with [`ingest::load_matches`], then [`evaluation::run_experiments`].

pub mod cli;
pub mod error;
pub mod evaluation;
pub mod ingest;
pub mod prediction;
pub mod profile;
pub mod rating;
pub mod synth;

pub use error::{Error, Result};

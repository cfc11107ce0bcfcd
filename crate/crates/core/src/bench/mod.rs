//! Synthetic tiered benchmark: timeline generation, tier rendering with
//! controlled corruption, question construction with timeline-derived gold,
//! and the evaluation harness with FP/FN diagnostics and the ablation
//! runner.

mod harness;
mod questions;
mod render;
mod timeline;

pub use harness::{
    evaluate, run_ablation, solve_instance, variant_options, AblationRow, AblationTable,
    Diagnostics, LocalizationRecord, SolveResult, SystemVariant, TierStats,
};
pub use questions::{make_questions, GoldAnswer, QAInstance};
pub use render::{render_tier, Tier, TierSpec};
pub use timeline::{generate_timeline, Timeline, DISTRACTOR_LABELS, EVENT_LABELS};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("n_events must be in 2..=12, got {0}")]
    InvalidSize(usize),
    #[error("invalid tier spec: {0}")]
    InvalidSpec(String),
    #[error("unknown variant `{0}`")]
    UnknownVariant(String),
    #[error("could not build a valid instance for seed stream {0}")]
    GenerationFailed(u64),
}

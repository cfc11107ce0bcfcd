//! Neuro-symbolic temporal question answering over Allen-algebra event graphs.
//!
//! The pipeline lifts controlled-grammar text into an event graph with
//! qualitative interval constraints, scores every proof step with a fused
//! inconsistency signal (credal interval bounds + Dirichlet epistemic
//! uncertainty), searches proof traces with MCTS, and repairs structural
//! contradictions by replanning evidence or mutating the graph. A synthetic
//! tiered benchmark reproduces the structured → semi-structured →
//! unstructured degradation regime with exact FP/FN diagnostics.
//!
//! Module map:
//! - [`temporal`] — Allen's 13 relations, composition algebra, constraint
//!   graphs, path consistency, scenario enumeration.
//! - [`credal`] — belief/plausibility support bounds `[L, U]` and the
//!   contradiction penalty Φ.
//! - [`evidential`] — Dirichlet evidence, entropy/vacuity measures, and the
//!   pluggable evidence-provider contract.
//! - [`pis`] — step fusion `L_inc`, continuity penalty Ψ, discounted trace
//!   objective `J_PIS`, threshold/cause logic.
//! - [`compiler`] — retrieval, controlled-grammar parsing, graph compilation,
//!   date arithmetic.
//! - [`orchestrator`] — blackboard, proof steps, MCTS search, repairs.
//! - [`bench`] — tiered instance generation, evaluation harness, ablations.

pub mod bench;
pub mod compiler;
pub mod config;
pub mod credal;
pub mod evidential;
pub mod orchestrator;
pub mod pis;
pub mod temporal;
pub(crate) mod util;

pub use config::RunConfig;

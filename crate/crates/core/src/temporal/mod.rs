//! Exact qualitative temporal reasoning.
//!
//! Allen's 13 basic interval relations, set-valued edge labels, composition
//! and converse algebra, immutable constraint graphs, path consistency with
//! conflict witnesses, and a complete backtracking scenario enumerator used
//! both as a decision procedure and as a brute-force oracle.

mod consistency;
mod graph;
mod interval;
mod relation;
mod scenario;

pub use consistency::{path_consistency, ConsistencyOutcome, ConsistencyStatus};
pub(crate) use consistency::inconsistency_score;
pub use graph::{Constraint, ConstraintId, Event, EventGraph};
pub use interval::{basic_relation_of, Interval, TimePoint};
pub use relation::{AllenRelation, RelationSet};
pub use scenario::{
    enumerate_scenarios, entails, find_scenario, possible, realize_scenario, Scenario,
    DEFAULT_SCENARIO_BOUND,
};
pub(crate) use scenario::{grid_possible, grid_satisfiable, LabelGrid};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemporalError {
    #[error("interval start {start} is not strictly before end {end}")]
    InvalidInterval { start: i64, end: i64 },
    #[error("graph has {n} vertices, exceeding the bound {max}")]
    SizeExceeded { n: usize, max: usize },
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate event id `{0}`")]
    DuplicateEvent(String),
    #[error("constraint relation set is empty")]
    EmptyRelation,
    #[error("scenario enumeration exceeded {0} scenarios")]
    ScenarioOverflow(usize),
}

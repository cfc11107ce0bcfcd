//! The master orchestrator: blackboard state, proof steps, MCTS search over
//! step sequences minimizing the trace inconsistency objective, and the two
//! repair mechanisms (evidence replanning, structural mutation).

mod mcts;
mod repair;
mod steps;
mod trace_io;

pub use mcts::{mcts_search, MCTSConfig, SearchOptions, SearchOutcome};
pub use repair::{trigger_repair, RepairTargeting};
pub use steps::{applicable_steps, apply_step, replay_trace, StepTemplate};
pub use trace_io::{read_trace_records, write_trace_jsonl, StepRecord, TraceSummary};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compiler::{eval_arithmetic, CompileError, CompileOutput, Document, Question};
use crate::credal::{credal_support_bounded, Assertion, CredalError, CredalInterval};
use crate::evidential::DirichletEvidence;
use crate::pis::{Cause, PisError, StepSignal};
use crate::temporal::{entails, possible, ConstraintId, EventGraph, TemporalError};

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("step is not applicable in the current state")]
    InapplicableStep,
    #[error(transparent)]
    Credal(#[from] CredalError),
    #[error(transparent)]
    Pis(#[from] PisError),
    #[error(transparent)]
    Temporal(#[from] TemporalError),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Composition,
    AnswerAssertion,
}

/// Final answer: yes/no/unknown for entailment questions, an exact tick
/// value for arithmetic ones. Serializes as `"yes"`, `"no"`, `"unknown"`,
/// or a bare integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    Unknown,
    Value(i64),
}

impl Verdict {
    pub fn as_display(&self) -> String {
        match self {
            Verdict::Yes => "yes".to_string(),
            Verdict::No => "no".to_string(),
            Verdict::Unknown => "unknown".to_string(),
            Verdict::Value(n) => n.to_string(),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_display())
    }
}

impl Serialize for Verdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Verdict::Yes => s.serialize_str("yes"),
            Verdict::No => s.serialize_str("no"),
            Verdict::Unknown => s.serialize_str("unknown"),
            Verdict::Value(n) => s.serialize_i64(*n),
        }
    }
}

impl<'de> Deserialize<'de> for Verdict {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let v = serde_json::Value::deserialize(d)?;
        match &v {
            serde_json::Value::String(s) => match s.as_str() {
                "yes" => Ok(Verdict::Yes),
                "no" => Ok(Verdict::No),
                "unknown" => Ok(Verdict::Unknown),
                other => Err(D::Error::custom(format!("bad verdict `{other}`"))),
            },
            serde_json::Value::Number(n) => n
                .as_i64()
                .map(Verdict::Value)
                .ok_or_else(|| D::Error::custom("verdict number out of range")),
            _ => Err(D::Error::custom("verdict must be a string or integer")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub verdict: Verdict,
    pub supporting_credal: CredalInterval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_ref: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairKind {
    Replan,
    Mutate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairOutcome {
    Applied,
    Rejected,
    Exhausted,
}

/// One repair event, carrying enough detail to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairAction {
    pub kind: RepairKind,
    pub target: String,
    pub outcome: RepairOutcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub removed_constraint: Option<ConstraintId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub added_docs: Vec<String>,
}

/// One proof step: a triangle composition strictly refining an edge, or the
/// final answer assertion. The signal, cause and any triggered repair are
/// recorded on the step for telemetry and replay.
#[derive(Debug, Clone, PartialEq)]
pub struct ProofStep {
    pub kind: StepKind,
    pub premises: Vec<(usize, usize)>,
    pub conclusion: Assertion,
    pub signal: StepSignal,
    pub evidence: DirichletEvidence,
    pub psi: f64,
    pub cause: Cause,
    pub repair: Option<RepairAction>,
}

impl ProofStep {
    /// Vertices touched by premises and conclusion, for Ψ.
    pub fn vertices(&self) -> Vec<usize> {
        let mut vs = BTreeSet::new();
        for &(i, j) in &self.premises {
            vs.insert(i);
            vs.insert(j);
        }
        vs.insert(self.conclusion.src);
        vs.insert(self.conclusion.dst);
        vs.into_iter().collect()
    }
}

/// An executable certificate: replaying the repairs and steps from the
/// initial graph reproduces the final graph and every signal exactly.
#[derive(Debug, Clone, Default)]
pub struct ProofTrace {
    pub steps: Vec<ProofStep>,
    pub final_verdict: Option<Answer>,
    /// Repairs of collapses already present at compile time, fired before
    /// any step was applied.
    pub root_repairs: Vec<RepairAction>,
}

/// Shared orchestration state.
#[derive(Debug, Clone)]
pub struct Blackboard {
    pub graph: EventGraph,
    /// Per-constraint evidence from the provider (and anchor derivation).
    pub evidence: BTreeMap<ConstraintId, DirichletEvidence>,
    /// Evidence attached to derived (composed) edges.
    pub derived_evidence: BTreeMap<(usize, usize), DirichletEvidence>,
    /// Full document pool available to replanning; shared across the many
    /// value-semantic blackboard clones a search creates.
    pub pool: Arc<Vec<Document>>,
    /// Ids of documents already compiled into the graph.
    pub active_docs: BTreeSet<String>,
    pub trace: ProofTrace,
    pub repair_log: Vec<RepairAction>,
    pub question: Question,
    pub mutations_used: usize,
    /// Set after a rejected/exhausted repair so the same state does not
    /// re-offer it.
    pub repair_blocked: bool,
}

impl Blackboard {
    pub fn new(
        question: Question,
        pool: Vec<Document>,
        active: &[&Document],
        compiled: CompileOutput,
    ) -> Blackboard {
        Blackboard {
            graph: compiled.graph,
            evidence: compiled.evidence,
            derived_evidence: BTreeMap::new(),
            active_docs: active.iter().map(|d| d.id.clone()).collect(),
            pool: Arc::new(pool),
            trace: ProofTrace::default(),
            repair_log: Vec::new(),
            question,
            mutations_used: 0,
            repair_blocked: false,
        }
    }

    /// Telemetry view: one signal per applied step.
    pub fn telemetry(&self) -> Vec<&StepSignal> {
        self.trace.steps.iter().map(|s| &s.signal).collect()
    }

    /// Evidence backing an edge: derived evidence if a composition wrote the
    /// label, else the fusion of the extracted constraints on the pair, else
    /// vacuous.
    pub fn edge_evidence(&self, i: usize, j: usize) -> DirichletEvidence {
        let key = if i < j { (i, j) } else { (j, i) };
        if let Some(d) = self.derived_evidence.get(&key) {
            return d.clone();
        }
        let cs = self.graph.constraints_on(i, j);
        if cs.is_empty() {
            return DirichletEvidence::uniform();
        }
        let sources: Vec<&DirichletEvidence> = cs
            .iter()
            .filter_map(|c| self.evidence.get(&c.id))
            .collect();
        if sources.is_empty() {
            DirichletEvidence::uniform()
        } else {
            DirichletEvidence::fuse(sources)
        }
    }

    /// The question's vertex pair and relation set, when both events exist.
    pub fn question_edge(&self) -> Option<(usize, usize, crate::temporal::RelationSet)> {
        match &self.question {
            Question::Entailment {
                subject,
                object,
                relations,
            } => {
                let i = self.graph.vertex(subject)?;
                let j = self.graph.vertex(object)?;
                Some((i, j, *relations))
            }
            Question::Arithmetic { .. } => None,
        }
    }

    /// Stable key over everything signal computation depends on.
    pub fn cache_key(&self) -> u64 {
        let mut bytes = Vec::with_capacity(64);
        bytes.extend_from_slice(&self.graph.content_key().to_le_bytes());
        for (&(i, j), d) in &self.derived_evidence {
            bytes.extend_from_slice(&(i as u32).to_le_bytes());
            bytes.extend_from_slice(&(j as u32).to_le_bytes());
            for a in d.alpha() {
                bytes.extend_from_slice(&a.to_bits().to_le_bytes());
            }
        }
        for id in &self.active_docs {
            bytes.extend_from_slice(id.as_bytes());
            bytes.push(0);
        }
        crate::util::fnv1a64(&bytes)
    }
}

/// Semantic verdict extraction on a final blackboard: `yes` iff the question
/// relation is entailed, `no` iff it is impossible (including on globally
/// inconsistent graphs), `unknown` otherwise; arithmetic questions evaluate
/// exactly or come back `unknown`. Never a crash: missing events and
/// unanchored operands map to `unknown`.
pub fn answer_question(bb: &Blackboard, scenario_bound: usize) -> Answer {
    match &bb.question {
        Question::Entailment { .. } => {
            let Some((i, j, rels)) = bb.question_edge() else {
                return Answer {
                    verdict: Verdict::Unknown,
                    supporting_credal: CredalInterval::vacuous(),
                    trace_ref: None,
                };
            };
            let verdict = if entails(&bb.graph, i, j, rels) {
                Verdict::Yes
            } else if !possible(&bb.graph, i, j, rels) {
                Verdict::No
            } else {
                Verdict::Unknown
            };
            let assertion = Assertion::new(i, j, rels).expect("non-empty question relations");
            let supporting_credal = credal_support_bounded(&bb.graph, &assertion, scenario_bound)
                .unwrap_or_else(|_| CredalInterval::vacuous());
            Answer {
                verdict,
                supporting_credal,
                trace_ref: None,
            }
        }
        Question::Arithmetic { expr } => match eval_arithmetic(&bb.graph, expr) {
            Ok(v) => Answer {
                verdict: Verdict::Value(v),
                supporting_credal: CredalInterval::certain(),
                trace_ref: None,
            },
            Err(_) => Answer {
                verdict: Verdict::Unknown,
                supporting_credal: CredalInterval::vacuous(),
                trace_ref: None,
            },
        },
    }
}

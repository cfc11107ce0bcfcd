//! Retrieval, parsing, graph compilation and date arithmetic.
//!
//! The retriever ranks documents by event-label lexical overlap with the
//! query. The compiler turns parsed statements into an event graph: relation
//! statements become extracted constraints with provider evidence, anchors
//! instantiate concrete intervals (paired with a duration when only one
//! endpoint is given), and every pair of absolutely anchored events gains
//! the endpoint-determined basic relation as a high-evidence constraint.

mod arith;
mod grammar;

pub use arith::{parse_arith_expr, ArithExpr};
pub use grammar::{
    parse_sentence, render_relation_sentence, render_statement, ParsedStatement, SourceRef,
    StatementKind,
};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evidential::{DirichletEvidence, EvidenceProvider, StatementContext};
use crate::temporal::{
    basic_relation_of, ConstraintId, EventGraph, Interval, RelationSet, TemporalError,
};

/// Evidence concentration attached to anchor-derived relation constraints;
/// deliberately above the rule-based 50 so numeric anchors out-rank single
/// relation statements during culprit selection.
pub const ANCHOR_EVIDENCE: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("zero-length interval for event `{0}`")]
    ZeroLengthInterval(String),
    #[error("document pool is empty")]
    EmptyPool,
    #[error("event `{0}` has no anchored interval")]
    Unanchored(String),
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error(transparent)]
    Temporal(#[from] TemporalError),
}

/// A retrievable evidence document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub tier: String,
    pub sentences: Vec<String>,
}

/// A question posed to the system. Entailment questions ask whether an edge
/// relation holds; arithmetic questions evaluate expressions over anchors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Question {
    Entailment {
        subject: String,
        object: String,
        relations: RelationSet,
    },
    Arithmetic {
        expr: ArithExpr,
    },
}

impl Question {
    /// Event labels mentioned by the question, for retrieval and replanning.
    pub fn event_labels(&self) -> Vec<String> {
        match self {
            Question::Entailment {
                subject, object, ..
            } => vec![subject.clone(), object.clone()],
            Question::Arithmetic { expr } => expr.events(),
        }
    }
}

/// Parse a natural question: `does <E1> happen <phrase> <E2>?` or an
/// arithmetic expression such as `start(b) - end(a)`.
pub fn parse_question(text: &str) -> Option<Question> {
    use std::sync::OnceLock;
    static Q: OnceLock<regex::Regex> = OnceLock::new();
    let re = Q.get_or_init(|| {
        regex::Regex::new(
            r"(?i)^\s*does\s+(.+?)\s+happen\s+(before|after|meets|during|contains|overlaps|starts\s+with|finishes\s+with|equals)\s+(.+?)\s*\??\s*$",
        )
        .unwrap()
    });
    if let Some(c) = re.captures(text) {
        // Reuse the statement grammar for phrase mapping and normalization.
        let sentence = format!("{} {} {}", &c[1], &c[2], &c[3]);
        if let Some(StatementKind::Relation {
            subject,
            relation,
            object,
        }) = parse_sentence(&sentence)
        {
            return Some(Question::Entailment {
                subject,
                object,
                relations: RelationSet::singleton(relation),
            });
        }
    }
    parse_arith_expr(text).map(|expr| Question::Arithmetic { expr })
}

/// Rank documents by how many of the query's event labels they mention;
/// deterministic tie-break by document id; returns at most `k`.
pub fn retrieve<'a>(
    pool: &'a [Document],
    query: &Question,
    k: usize,
) -> Result<Vec<&'a Document>, CompileError> {
    if pool.is_empty() {
        return Err(CompileError::EmptyPool);
    }
    let labels: Vec<String> = query
        .event_labels()
        .iter()
        .map(|l| l.to_ascii_lowercase())
        .collect();
    let mut scored: Vec<(usize, &Document)> = pool
        .iter()
        .map(|d| {
            let text = d.sentences.join(" ").to_ascii_lowercase();
            let overlap = labels.iter().filter(|l| text.contains(l.as_str())).count();
            (overlap, d)
        })
        .collect();
    scored.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.id.cmp(&b.1.id)));
    Ok(scored.into_iter().take(k).map(|(_, d)| d).collect())
}

/// Parse every sentence of every document; out-of-grammar sentences are
/// collected, not guessed at.
pub fn parse_documents(docs: &[&Document]) -> (Vec<ParsedStatement>, Vec<SourceRef>) {
    let mut statements = Vec::new();
    let mut unparsed = Vec::new();
    for doc in docs {
        for (k, sentence) in doc.sentences.iter().enumerate() {
            let source = SourceRef {
                doc: doc.id.clone(),
                sentence: k,
            };
            match parse_sentence(sentence) {
                Some(kind) => statements.push(ParsedStatement {
                    kind,
                    text: sentence.clone(),
                    source: Some(source),
                }),
                None => unparsed.push(source),
            }
        }
    }
    (statements, unparsed)
}

/// Result of compilation: the event graph plus per-constraint evidence.
#[derive(Debug, Clone)]
pub struct CompileOutput {
    pub graph: EventGraph,
    pub evidence: BTreeMap<ConstraintId, DirichletEvidence>,
}

impl CompileOutput {
    fn empty() -> CompileOutput {
        CompileOutput {
            graph: EventGraph::new(),
            evidence: BTreeMap::new(),
        }
    }
}

/// Compile parsed statements into a constraint graph.
///
/// Statement order does not affect the resulting structure: events are
/// created in sorted order and edge labels are intersections.
pub fn compile(
    statements: &[ParsedStatement],
    provider: &dyn EvidenceProvider,
) -> Result<CompileOutput, CompileError> {
    let mut out = CompileOutput::empty();
    compile_into(&mut out, statements, provider)?;
    Ok(out)
}

/// Merge additional statements into an existing compilation (evidence
/// replanning path). New constraints intersect with existing edges.
pub fn compile_into(
    out: &mut CompileOutput,
    statements: &[ParsedStatement],
    provider: &dyn EvidenceProvider,
) -> Result<usize, CompileError> {
    // Events first, in sorted order, so permutations agree.
    let mut names: BTreeSet<String> = BTreeSet::new();
    for st in statements {
        match &st.kind {
            StatementKind::Relation {
                subject, object, ..
            } => {
                names.insert(subject.clone());
                names.insert(object.clone());
            }
            StatementKind::Anchor { event, .. } | StatementKind::Duration { event, .. } => {
                names.insert(event.clone());
            }
        }
    }
    for name in &names {
        out.graph.ensure_event(name);
    }

    // Merge anchor knowledge per event; first value wins, conflicts logged.
    #[derive(Default, Clone)]
    struct AnchorInfo {
        start: Option<i64>,
        end: Option<i64>,
        duration: Option<i64>,
    }
    let mut anchors: BTreeMap<String, AnchorInfo> = BTreeMap::new();
    for st in statements {
        match &st.kind {
            StatementKind::Anchor { event, start, end } => {
                let info = anchors.entry(event.clone()).or_default();
                merge_field(&mut info.start, *start, event, "start");
                merge_field(&mut info.end, *end, event, "end");
            }
            StatementKind::Duration { event, days } => {
                let info = anchors.entry(event.clone()).or_default();
                merge_field(&mut info.duration, Some(*days), event, "duration");
            }
            StatementKind::Relation { .. } => {}
        }
    }
    for (event, info) in &anchors {
        let interval = match (info.start, info.end, info.duration) {
            (Some(s), Some(e), _) => Some((s, e)),
            (Some(s), None, Some(d)) => Some((s, s + d)),
            (None, Some(e), Some(d)) => Some((e - d, e)),
            _ => None,
        };
        if let Some((s, e)) = interval {
            let iv = Interval::new(s, e)
                .map_err(|_| CompileError::ZeroLengthInterval(event.clone()))?;
            let v = out.graph.ensure_event(event);
            if let Some(existing) = out.graph.event(v).interval {
                if existing != iv {
                    log::warn!("conflicting anchors for `{event}`: keeping {existing}");
                }
            } else {
                out.graph.set_interval(v, iv);
            }
        }
    }

    // Relation statements, each through the evidence provider.
    let mut added = 0usize;
    for st in statements {
        if let StatementKind::Relation {
            subject,
            relation,
            object,
        } = &st.kind
        {
            if subject == object {
                log::warn!("skipping self-relation statement `{}`", st.text);
                continue;
            }
            let (proposal, evidence) = provider.propose(&StatementContext {
                sentence: &st.text,
                subject,
                object,
                relation: *relation,
            });
            let i = out.graph.ensure_event(subject);
            let j = out.graph.ensure_event(object);
            let provenance = match &st.source {
                Some(s) => format!("{}#{}", s.doc, s.sentence),
                None => format!("inline:{}", st.text),
            };
            let cid = out.graph.push_constraint(i, j, proposal, &provenance);
            out.evidence.insert(cid, evidence);
            added += 1;
        }
    }

    // Endpoint-determined relations between absolutely anchored events.
    let anchored: Vec<usize> = (0..out.graph.len())
        .filter(|&v| out.graph.event(v).interval.is_some())
        .collect();
    for (a_pos, &i) in anchored.iter().enumerate() {
        for &j in &anchored[a_pos + 1..] {
            let provenance = format!(
                "anchors:{}~{}",
                out.graph.event(i).id,
                out.graph.event(j).id
            );
            if out
                .graph
                .constraints()
                .iter()
                .any(|c| c.provenance == provenance)
            {
                continue; // already derived in an earlier merge
            }
            let rel = basic_relation_of(
                &out.graph.event(i).interval.expect("anchored"),
                &out.graph.event(j).interval.expect("anchored"),
            );
            let cid = out
                .graph
                .push_constraint(i, j, RelationSet::singleton(rel), &provenance);
            out.evidence
                .insert(cid, DirichletEvidence::concentrated(rel, ANCHOR_EVIDENCE));
            added += 1;
        }
    }
    Ok(added)
}

fn merge_field(slot: &mut Option<i64>, value: Option<i64>, event: &str, what: &str) {
    if let Some(v) = value {
        match slot {
            None => *slot = Some(v),
            Some(old) if *old != v => {
                log::warn!("conflicting {what} anchors for `{event}`: keeping {old}");
            }
            _ => {}
        }
    }
}

/// Exact integer evaluation over anchored events.
pub fn eval_arithmetic(graph: &EventGraph, expr: &ArithExpr) -> Result<i64, CompileError> {
    let anchored = |name: &str| -> Result<Interval, CompileError> {
        let v = graph
            .vertex(name)
            .ok_or_else(|| CompileError::Unanchored(name.to_string()))?;
        graph
            .event(v)
            .interval
            .ok_or_else(|| CompileError::Unanchored(name.to_string()))
    };
    Ok(match expr {
        ArithExpr::Start(e) => anchored(e)?.start().0,
        ArithExpr::End(e) => anchored(e)?.end().0,
        ArithExpr::Duration(e) => anchored(e)?.duration(),
        ArithExpr::Const(n) => *n,
        ArithExpr::Add(a, b) => eval_arithmetic(graph, a)? + eval_arithmetic(graph, b)?,
        ArithExpr::Sub(a, b) => eval_arithmetic(graph, a)? - eval_arithmetic(graph, b)?,
    })
}

//! Proof-step enumeration and application.
//!
//! Candidate steps are triangle compositions that strictly refine some edge
//! (including refinements to the empty set, which surface contradictions),
//! plus an answer assertion once the question edge's stored label decides
//! the question, the graph has collapsed, or the arithmetic operands are
//! anchored. Ordering is deterministic: answer first, then compositions in
//! lexicographic (i, j, k) order.

use crate::compiler::{eval_arithmetic, Question};
use crate::credal::{Assertion, CredalInterval};
use crate::evidential::{vacuity, DirichletEvidence};
use crate::pis::{classify_cause, continuity_penalty, step_inconsistency, PISConfig};
use crate::temporal::RelationSet;

use super::{
    Answer, Blackboard, OrchestratorError, ProofStep, RepairAction, StepKind, Verdict,
};

/// Evidence mass standing in for exact arithmetic over anchors: the
/// symmetric vector at the s_max cap, which normalizes to zero epistemic
/// uncertainty under the entropy measure.
const ARITHMETIC_EVIDENCE_TOTAL: f64 = 100.0;

/// A candidate step before signals are computed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepTemplate {
    pub kind: StepKind,
    pub premises: Vec<(usize, usize)>,
    /// Target edge for compositions; question edge for entailment answers;
    /// (0, 0) for arithmetic answers.
    pub edge: (usize, usize),
    /// What the step claims: the composition product, or the question set.
    pub claimed: RelationSet,
    /// `claimed ∩ prior label`; empty means the step surfaces a
    /// contradiction.
    pub resulting: RelationSet,
}

impl StepTemplate {
    /// Stable ordering key: answers sort first, then compositions by
    /// (i, j, k).
    pub fn order_key(&self) -> u64 {
        match self.kind {
            StepKind::AnswerAssertion => 0,
            StepKind::Composition => {
                let (i, j) = self.edge;
                let k = self.premises[0].1;
                1 << 48 | (i as u64) << 32 | (j as u64) << 16 | k as u64
            }
        }
    }
}

/// Deterministic candidate enumeration. Empty both when the trace already
/// carries a verdict and when nothing refines (terminal states).
pub fn applicable_steps(bb: &Blackboard) -> Vec<StepTemplate> {
    if bb.trace.final_verdict.is_some() {
        return Vec::new();
    }
    let mut out = Vec::new();
    if let Some(t) = answer_template(bb) {
        out.push(t);
    }
    let n = bb.graph.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let prior = bb.graph.edge(i, j);
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let claimed = bb.graph.edge(i, k).compose(bb.graph.edge(k, j));
                // Composing through a collapsed edge derives nothing; the
                // collapse itself is surfaced by the answer step or repair.
                if claimed.is_empty() {
                    continue;
                }
                let resulting = claimed.intersect(prior);
                if resulting != prior {
                    out.push(StepTemplate {
                        kind: StepKind::Composition,
                        premises: vec![(i, k), (k, j)],
                        edge: (i, j),
                        claimed,
                        resulting,
                    });
                }
            }
        }
    }
    out
}

fn answer_template(bb: &Blackboard) -> Option<StepTemplate> {
    match &bb.question {
        Question::Entailment { .. } => {
            let (i, j, rels) = bb.question_edge()?;
            let stored = bb.graph.edge(i, j);
            let decided = bb.graph.has_empty_edge()
                || stored.is_subset(rels)
                || stored.intersect(rels).is_empty();
            if !decided {
                return None;
            }
            Some(StepTemplate {
                kind: StepKind::AnswerAssertion,
                premises: vec![(i, j)],
                edge: (i, j),
                claimed: rels,
                resulting: stored.intersect(rels),
            })
        }
        Question::Arithmetic { expr } => {
            eval_arithmetic(&bb.graph, expr).ok()?;
            Some(StepTemplate {
                kind: StepKind::AnswerAssertion,
                premises: Vec::new(),
                edge: (0, 0),
                claimed: RelationSet::UNIVERSAL,
                resulting: RelationSet::UNIVERSAL,
            })
        }
    }
}

/// Everything needed to apply a step: its health signal, its evidence, and
/// (for answer steps) the credal support of the question relation itself.
#[derive(Debug, Clone)]
pub struct StepPlan {
    pub signal: crate::pis::StepSignal,
    pub evidence: DirichletEvidence,
    pub answer_credal: Option<CredalInterval>,
}

/// Signal and evidence a template would produce, without mutating state.
/// The step's evidence is its most reliable premise (minimum vacuity):
/// a collapse derived from a rock-solid premise is a logic conflict, while
/// one whose best premise is diffuse is a perception problem.
///
/// An answer step asserts what the graph actually derived (the stored
/// label), so a well-founded "no" scores as healthy; the question
/// relation's own support is computed separately for the final answer.
pub fn plan_step(
    bb: &Blackboard,
    tmpl: &StepTemplate,
    cfg: &PISConfig,
    scenario_bound: usize,
) -> Result<StepPlan, OrchestratorError> {
    let evidence = match tmpl.kind {
        StepKind::Composition => tmpl
            .premises
            .iter()
            .map(|&(a, b)| bb.edge_evidence(a, b))
            .min_by(|x, y| {
                vacuity(x)
                    .partial_cmp(&vacuity(y))
                    .expect("vacuity is finite")
            })
            .expect("composition has premises"),
        StepKind::AnswerAssertion => match &bb.question {
            Question::Entailment { .. } => {
                let (i, j) = tmpl.edge;
                bb.edge_evidence(i, j)
            }
            Question::Arithmetic { .. } => {
                DirichletEvidence::symmetric(ARITHMETIC_EVIDENCE_TOTAL)
            }
        },
    };

    let (credal, answer_credal) = match tmpl.kind {
        StepKind::AnswerAssertion if matches!(bb.question, Question::Arithmetic { .. }) => {
            (CredalInterval::certain(), Some(CredalInterval::certain()))
        }
        _ => {
            // Score the conclusion against the post-application graph.
            let (i, j) = tmpl.edge;
            let conclusion = signal_relations(bb, tmpl);
            let assertion = Assertion::new(i, j, conclusion)?;
            if bb.graph.len() > scenario_bound {
                (CredalInterval::vacuous(), Some(CredalInterval::vacuous()))
            } else {
                let mut grid = crate::temporal::LabelGrid::from_graph(&bb.graph);
                if tmpl.kind == StepKind::Composition {
                    grid.set_edge(i, j, tmpl.resulting);
                }
                let extracted = bb.graph.extracted_edges();
                let credal =
                    crate::credal::credal_support_grid(grid.clone(), &extracted, &assertion);
                let answer_credal = if tmpl.kind == StepKind::AnswerAssertion {
                    let question = Assertion::new(i, j, tmpl.claimed)?;
                    Some(crate::credal::credal_support_grid(grid, &extracted, &question))
                } else {
                    None
                };
                (credal, answer_credal)
            }
        }
    };

    let signal = step_inconsistency(&credal, &evidence, cfg)?;
    Ok(StepPlan {
        signal,
        evidence,
        answer_credal,
    })
}

/// The assertion a step makes. Compositions assert the refined label (or
/// the raw claim when the edge collapses); answer steps assert the stored
/// label actually derived for the question edge.
fn signal_relations(bb: &Blackboard, tmpl: &StepTemplate) -> RelationSet {
    match tmpl.kind {
        StepKind::Composition => {
            if tmpl.resulting.is_empty() {
                tmpl.claimed
            } else {
                tmpl.resulting
            }
        }
        StepKind::AnswerAssertion => {
            if matches!(bb.question, Question::Arithmetic { .. }) {
                return tmpl.claimed;
            }
            let stored = bb.graph.edge(tmpl.edge.0, tmpl.edge.1);
            if stored.is_empty() {
                tmpl.claimed
            } else {
                stored
            }
        }
    }
}

/// Apply a step, producing a new blackboard (value-semantic). Fails with
/// `InapplicableStep` when the template no longer matches the state, e.g. a
/// composition applied twice.
pub fn apply_step(
    bb: &Blackboard,
    tmpl: &StepTemplate,
    cfg: &PISConfig,
    scenario_bound: usize,
) -> Result<Blackboard, OrchestratorError> {
    if !applicable_steps(bb).iter().any(|t| t == tmpl) {
        return Err(OrchestratorError::InapplicableStep);
    }
    let plan = plan_step(bb, tmpl, cfg, scenario_bound)?;
    Ok(apply_with_plan(bb, tmpl, plan, cfg))
}

/// Application with a precomputed plan; callers guarantee applicability
/// (the search enumerates fresh templates every state).
pub(super) fn apply_with_plan(
    bb: &Blackboard,
    tmpl: &StepTemplate,
    plan: StepPlan,
    cfg: &PISConfig,
) -> Blackboard {
    let StepPlan {
        signal,
        evidence,
        answer_credal,
    } = plan;
    let mut next = bb.clone();
    let (i, j) = tmpl.edge;
    let conclusion =
        Assertion::new(i, j, signal_relations(bb, tmpl)).expect("conclusion set is non-empty");

    if tmpl.kind == StepKind::Composition {
        next.graph.set_edge(i, j, tmpl.resulting);
        let key = if i < j { (i, j) } else { (j, i) };
        next.derived_evidence.insert(key, evidence.clone());
    }

    let step = ProofStep {
        kind: tmpl.kind,
        premises: tmpl.premises.clone(),
        conclusion,
        signal: signal.clone(),
        evidence,
        psi: 0.0,
        cause: classify_cause(&signal, cfg),
        repair: None,
    };
    let psi = match next.trace.steps.last() {
        None => 0.0,
        Some(prev) => continuity_penalty(&prev.vertices(), &step.vertices(), cfg),
    };

    if tmpl.kind == StepKind::AnswerAssertion {
        let verdict = answer_verdict(&next, tmpl);
        next.trace.final_verdict = Some(Answer {
            verdict,
            supporting_credal: answer_credal.unwrap_or(signal.credal),
            trace_ref: None,
        });
    }

    next.trace.steps.push(ProofStep { psi, ..step });
    // Fresh state: repairs become available again after the graph changed.
    next.repair_blocked = false;
    next
}

fn answer_verdict(bb: &Blackboard, tmpl: &StepTemplate) -> Verdict {
    match &bb.question {
        Question::Entailment { .. } => {
            if bb.graph.has_empty_edge() {
                return Verdict::No;
            }
            let (i, j) = tmpl.edge;
            let stored = bb.graph.edge(i, j);
            if stored.is_subset(tmpl.claimed) {
                Verdict::Yes
            } else if stored.intersect(tmpl.claimed).is_empty() {
                Verdict::No
            } else {
                Verdict::Unknown
            }
        }
        Question::Arithmetic { expr } => match eval_arithmetic(&bb.graph, expr) {
            Ok(v) => Verdict::Value(v),
            Err(_) => Verdict::Unknown,
        },
    }
}

/// Re-execute a trace from an initial blackboard; used to check the
/// executable-certificate invariant. Repairs recorded on steps are re-run
/// and must reproduce the recorded action exactly.
pub fn replay_trace(
    initial: &Blackboard,
    trace: &super::ProofTrace,
    cfg: &PISConfig,
    scenario_bound: usize,
    provider: &dyn crate::evidential::EvidenceProvider,
) -> Result<Blackboard, OrchestratorError> {
    let mut bb = initial.clone();
    for expected in &trace.root_repairs {
        let (next, action) = trigger_repair_for_replay(
            &bb,
            crate::pis::Cause::CredalDominant,
            super::RepairTargeting::StepLocal,
            cfg,
            provider,
            expected,
        )?;
        bb = next;
        if &action != expected {
            return Err(OrchestratorError::InapplicableStep);
        }
    }
    for step in &trace.steps {
        let tmpl = rebuild_template(&bb, step)?;
        bb = apply_step(&bb, &tmpl, cfg, scenario_bound)?;
        if let Some(expected) = &step.repair {
            let cause = step.cause;
            let targeting = super::RepairTargeting::StepLocal;
            let (next, action) = trigger_repair_for_replay(
                &bb,
                cause,
                targeting,
                cfg,
                provider,
                expected,
            )?;
            bb = next;
            if &action != expected {
                return Err(OrchestratorError::InapplicableStep);
            }
        }
    }
    Ok(bb)
}

fn rebuild_template(
    bb: &Blackboard,
    step: &ProofStep,
) -> Result<StepTemplate, OrchestratorError> {
    match step.kind {
        StepKind::Composition => {
            let (i, j) = (step.conclusion.src, step.conclusion.dst);
            let (a, b) = (step.premises[0], step.premises[1]);
            let claimed = bb.graph.edge(a.0, a.1).compose(bb.graph.edge(b.0, b.1));
            let resulting = claimed.intersect(bb.graph.edge(i, j));
            Ok(StepTemplate {
                kind: StepKind::Composition,
                premises: step.premises.clone(),
                edge: (i, j),
                claimed,
                resulting,
            })
        }
        StepKind::AnswerAssertion => {
            applicable_steps(bb)
                .into_iter()
                .find(|t| t.kind == StepKind::AnswerAssertion)
                .ok_or(OrchestratorError::InapplicableStep)
        }
    }
}

fn trigger_repair_for_replay(
    bb: &Blackboard,
    cause: crate::pis::Cause,
    targeting: super::RepairTargeting,
    cfg: &PISConfig,
    provider: &dyn crate::evidential::EvidenceProvider,
    expected: &RepairAction,
) -> Result<(Blackboard, RepairAction), OrchestratorError> {
    // Budget from the recorded action's perspective: replay keeps the same
    // max_mutations the search used; infer "enough budget" from the record.
    let budget = match expected.outcome {
        super::RepairOutcome::Exhausted if expected.kind == super::RepairKind::Mutate => {
            bb.mutations_used
        }
        _ => bb.mutations_used + 1,
    };
    super::trigger_repair(bb, cause, targeting, cfg, provider, budget)
        .map_err(OrchestratorError::from)
}

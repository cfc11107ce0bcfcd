//! The two repair mechanisms.
//!
//! Structural mutation removes the least-trusted (highest-vacuity) extracted
//! constraint on the conflict triangle reported by path consistency, falling
//! back to a global scan when no triangle is available; a mutation is
//! accepted only if it strictly decreases the number of locally broken
//! triangles. Evidence replanning retrieves additional documents mentioning
//! the uncertain step's event labels and merges their statements by
//! constraint intersection.

use crate::compiler::{compile_into, parse_documents, CompileOutput, Document};
use crate::evidential::{vacuity, EvidenceProvider};
use crate::pis::{Cause, PISConfig};
use crate::temporal::inconsistency_score;

use super::{Blackboard, OrchestratorError, RepairAction, RepairKind, RepairOutcome};

/// How a repair picks its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairTargeting {
    /// Use the flagged step's conflict triangle / event labels.
    StepLocal,
    /// Trace-level ablation: global highest-vacuity constraint, question
    /// labels for replanning. Deliberately blind.
    TraceGlobal,
}

/// Execute one repair for a non-`none` cause. Always returns a new
/// blackboard (possibly graph-identical, with the repair recorded and
/// further repairs blocked until the next step) plus the action taken.
pub fn trigger_repair(
    bb: &Blackboard,
    cause: Cause,
    targeting: RepairTargeting,
    cfg: &PISConfig,
    provider: &dyn EvidenceProvider,
    max_mutations: usize,
) -> Result<(Blackboard, RepairAction), OrchestratorError> {
    debug_assert_ne!(cause, Cause::None, "repairs need a non-none cause");
    let _ = cfg;
    let (mut next, action) = match cause {
        Cause::CredalDominant => mutate(bb, targeting, max_mutations),
        _ => replan(bb, targeting, provider)?,
    };
    next.repair_log.push(action.clone());
    match next.trace.steps.last_mut() {
        Some(last) => last.repair = Some(action.clone()),
        None => next.trace.root_repairs.push(action.clone()),
    }
    // Applied repairs changed the state, so further repairs stay available;
    // rejected/exhausted ones block until the next step to avoid loops.
    next.repair_blocked = action.outcome != RepairOutcome::Applied;
    Ok((next, action))
}

fn mutate(
    bb: &Blackboard,
    targeting: RepairTargeting,
    max_mutations: usize,
) -> (Blackboard, RepairAction) {
    if bb.mutations_used >= max_mutations {
        return (
            bb.clone(),
            RepairAction {
                kind: RepairKind::Mutate,
                target: "mutation budget".to_string(),
                outcome: RepairOutcome::Exhausted,
                removed_constraint: None,
                added_docs: Vec::new(),
            },
        );
    }

    // Candidate constraints: those on the conflict triangle when step-local
    // targeting has one, otherwise every extracted constraint.
    let mut candidate_ids: Vec<u32> = Vec::new();
    if targeting == RepairTargeting::StepLocal {
        let pc = crate::temporal::path_consistency(&bb.graph);
        if let Some((i, k, j)) = pc.conflict {
            let mut pairs = vec![(i, k), (k, j), (i, j)];
            pairs.retain(|(a, b)| a != b);
            pairs.sort_unstable();
            pairs.dedup();
            for (a, b) in pairs {
                for c in bb.graph.constraints_on(a, b) {
                    candidate_ids.push(c.id);
                }
            }
        }
    }
    if candidate_ids.is_empty() {
        candidate_ids = bb.graph.constraints().iter().map(|c| c.id).collect();
    }
    candidate_ids.sort_unstable();
    candidate_ids.dedup();

    let culprit = candidate_ids.into_iter().max_by(|&a, &b| {
        let va = constraint_vacuity(bb, a);
        let vb = constraint_vacuity(bb, b);
        va.partial_cmp(&vb)
            .expect("vacuity is finite")
            // Stable choice on ties: prefer the lower id.
            .then_with(|| b.cmp(&a))
    });
    let Some(cid) = culprit else {
        return (
            bb.clone(),
            RepairAction {
                kind: RepairKind::Mutate,
                target: "no extracted constraints".to_string(),
                outcome: RepairOutcome::Rejected,
                removed_constraint: None,
                added_docs: Vec::new(),
            },
        );
    };

    let target = {
        let c = bb.graph.constraint(cid).expect("candidate exists");
        format!(
            "constraint#{cid} {}~{} {}",
            bb.graph.event(c.src).id,
            bb.graph.event(c.dst).id,
            c.relations
        )
    };

    // Compare broken-triangle counts on constraint-derived labels so the
    // before/after scores are on the same footing.
    let mut fresh = bb.graph.clone();
    fresh.rebuild_labels();
    let before = inconsistency_score(&fresh);
    let trial = bb.graph.remove_constraint(cid);
    let after = inconsistency_score(&trial);

    if after < before {
        let mut next = bb.clone();
        next.graph = trial;
        next.evidence.remove(&cid);
        // Derived labels may have depended on the removed constraint; drop
        // them and let subsequent composition steps re-derive.
        next.derived_evidence.clear();
        next.mutations_used += 1;
        (
            next,
            RepairAction {
                kind: RepairKind::Mutate,
                target,
                outcome: RepairOutcome::Applied,
                removed_constraint: Some(cid),
                added_docs: Vec::new(),
            },
        )
    } else {
        (
            bb.clone(),
            RepairAction {
                kind: RepairKind::Mutate,
                target,
                outcome: RepairOutcome::Rejected,
                removed_constraint: None,
                added_docs: Vec::new(),
            },
        )
    }
}

fn constraint_vacuity(bb: &Blackboard, cid: u32) -> f64 {
    bb.evidence
        .get(&cid)
        .map(vacuity)
        // Constraints with no recorded evidence are maximally suspect.
        .unwrap_or(1.0)
}

/// Documents worth fetching for the given labels: inactive pool entries
/// mentioning at least one label, ranked by overlap then id.
pub(super) fn replan_candidates<'a>(bb: &'a Blackboard, labels: &[String]) -> Vec<&'a Document> {
    let lowered: Vec<String> = labels.iter().map(|l| l.to_ascii_lowercase()).collect();
    let mut scored: Vec<(usize, &Document)> = bb
        .pool
        .iter()
        .filter(|d| !bb.active_docs.contains(&d.id))
        .filter_map(|d| {
            let text = d.sentences.join(" ").to_ascii_lowercase();
            let overlap = lowered.iter().filter(|l| text.contains(l.as_str())).count();
            (overlap > 0).then_some((overlap, d))
        })
        .collect();
    scored.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.id.cmp(&b.1.id)));
    scored.into_iter().map(|(_, d)| d).collect()
}

/// Labels a repair should query for, given the targeting mode.
pub(super) fn replan_labels(bb: &Blackboard, targeting: RepairTargeting) -> Vec<String> {
    match targeting {
        RepairTargeting::StepLocal => match bb.trace.steps.last() {
            Some(step) => {
                let mut labels = vec![
                    bb.graph.event(step.conclusion.src).label.clone(),
                    bb.graph.event(step.conclusion.dst).label.clone(),
                ];
                labels.dedup();
                labels
            }
            None => bb.question.event_labels(),
        },
        RepairTargeting::TraceGlobal => bb.question.event_labels(),
    }
}

fn replan(
    bb: &Blackboard,
    targeting: RepairTargeting,
    provider: &dyn EvidenceProvider,
) -> Result<(Blackboard, RepairAction), OrchestratorError> {
    let labels = replan_labels(bb, targeting);
    let candidates: Vec<&Document> = replan_candidates(bb, &labels).into_iter().take(2).collect();
    let target = format!("docs:{}", labels.join("+"));
    if candidates.is_empty() {
        return Ok((
            bb.clone(),
            RepairAction {
                kind: RepairKind::Replan,
                target,
                outcome: RepairOutcome::Exhausted,
                removed_constraint: None,
                added_docs: Vec::new(),
            },
        ));
    }

    let (statements, _) = parse_documents(&candidates);
    let mut out = CompileOutput {
        graph: bb.graph.clone(),
        evidence: bb.evidence.clone(),
    };
    let added = compile_into(&mut out, &statements, provider)?;
    let mut next = bb.clone();
    next.graph = out.graph;
    next.evidence = out.evidence;
    let added_docs: Vec<String> = candidates.iter().map(|d| d.id.clone()).collect();
    for id in &added_docs {
        next.active_docs.insert(id.clone());
    }
    let outcome = if added > 0 {
        RepairOutcome::Applied
    } else {
        RepairOutcome::Exhausted
    };
    Ok((
        next,
        RepairAction {
            kind: RepairKind::Replan,
            target,
            outcome,
            removed_constraint: None,
            added_docs,
        },
    ))
}

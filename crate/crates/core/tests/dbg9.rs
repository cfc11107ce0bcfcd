use std::collections::BTreeMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ansb_core::bench::EVENT_LABELS;
use ansb_core::compiler::{parse_question, CompileOutput};
use ansb_core::evidential::{DirichletEvidence, RuleBasedProvider};
use ansb_core::orchestrator::*;
use ansb_core::temporal::{AllenRelation, EventGraph, RelationSet};
use ansb_core::RunConfig;

fn fixture(k: u64) -> (Blackboard, u32, usize, usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF1C0 + k);
    let n = rng.gen_range(4..=6usize);
    let mut graph = EventGraph::new();
    let mut evidence = BTreeMap::new();
    for v in 0..n { graph.ensure_event(EVENT_LABELS[v]); }
    for v in 0..n - 1 {
        let cid = graph.push_constraint(v, v + 1, RelationSet::singleton(AllenRelation::Before), "chain");
        evidence.insert(cid, DirichletEvidence::concentrated(AllenRelation::Before, 50.0));
    }
    let i = rng.gen_range(0..n - 2);
    let j = rng.gen_range(i + 2..n);
    let culprit = graph.push_constraint(i, j, RelationSet::singleton(AllenRelation::After), "culprit");
    evidence.insert(culprit, DirichletEvidence::concentrated(AllenRelation::After, 6.0));
    let question = parse_question(&format!("does {} happen before {}?", EVENT_LABELS[i], EVENT_LABELS[j])).unwrap();
    let bb = Blackboard::new(question, Vec::new(), &[], CompileOutput { graph, evidence });
    (bb, culprit, i, j, n)
}

#[test]
fn debug_failures() {
    let cfg = RunConfig::default();
    let mut fails = vec![];
    for k in 0..200u64 {
        let (bb, culprit, i, j, n) = fixture(k);
        let opts = SearchOptions::new(cfg.pis, MCTSConfig::default());
        let out = mcts_search(&bb, &opts, &RuleBasedProvider).unwrap();
        let hit = out.bb.repair_log.iter().any(|r| r.removed_constraint == Some(culprit));
        if !hit { fails.push((k, i, j, n, out.bb.repair_log.len(), out.bb.trace.final_verdict.as_ref().unwrap().verdict, out.j_pis, out.bb.trace.steps.len(), out.iterations_run)); }
    }
    println!("fails: {}", fails.len());
    for f in fails.iter().take(10) { println!("{f:?}"); }
    // Deep dive on the first failure
    if let Some(&(k, i, j, _n, _, _, _, _, _)) = fails.first() {
        let (bb, culprit, ..) = fixture(k);
        let opts = SearchOptions::new(cfg.pis, MCTSConfig::default());
        let out = mcts_search(&bb, &opts, &RuleBasedProvider).unwrap();
        println!("== case k={k} culprit edge ({i},{j}) culprit_id={culprit}");
        println!("repair_log: {:?}", out.bb.repair_log);
        for (s, step) in out.bb.trace.steps.iter().enumerate() {
            println!("step {s}: {:?} {:?} l={:.4} cause={:?} repair={:?}", step.kind, step.premises, step.signal.l_inc, step.cause, step.repair.as_ref().map(|r| (&r.kind, &r.outcome)));
        }
    }
}

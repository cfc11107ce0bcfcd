use std::collections::BTreeMap;
use ansb_core::bench::EVENT_LABELS;
use ansb_core::compiler::{parse_question, CompileOutput};
use ansb_core::evidential::{DirichletEvidence, RuleBasedProvider};
use ansb_core::orchestrator::*;
use ansb_core::pis::PISConfig;
use ansb_core::temporal::{AllenRelation, EventGraph, RelationSet, DEFAULT_SCENARIO_BOUND};

#[test]
fn manual_walk() {
    // n=4 chain, culprit on (0,3)
    let mut graph = EventGraph::new();
    let mut evidence = BTreeMap::new();
    for v in 0..4 { graph.ensure_event(EVENT_LABELS[v]); }
    for v in 0..3 {
        let cid = graph.push_constraint(v, v + 1, RelationSet::singleton(AllenRelation::Before), "chain");
        evidence.insert(cid, DirichletEvidence::concentrated(AllenRelation::Before, 50.0));
    }
    let culprit = graph.push_constraint(0, 3, RelationSet::singleton(AllenRelation::After), "culprit");
    evidence.insert(culprit, DirichletEvidence::concentrated(AllenRelation::After, 6.0));
    let question = parse_question("does alpha happen before delta?").unwrap();
    let bb = Blackboard::new(question, Vec::new(), &[], CompileOutput { graph, evidence });

    let cfg = PISConfig::default();
    println!("root candidates:");
    for t in applicable_steps(&bb) {
        let plan_l = {
            // peek signal via apply on a clone
            let nb = apply_step(&bb, &t, &cfg, DEFAULT_SCENARIO_BOUND).unwrap();
            nb.trace.steps.last().unwrap().signal.l_inc
        };
        println!("  {:?} edge={:?} claimed={} resulting={} l={:.4}", t.kind, t.edge, t.claimed, t.resulting, plan_l);
    }
    let opts = SearchOptions::new(cfg, MCTSConfig::default());
    let out = mcts_search(&bb, &opts, &RuleBasedProvider).unwrap();
    println!("search verdict {:?} j={} iters={} repairs={:?}", out.bb.trace.final_verdict.as_ref().unwrap().verdict, out.j_pis, out.iterations_run, out.bb.repair_log);
    for (s, step) in out.bb.trace.steps.iter().enumerate() {
        println!("step {s}: {:?} prem={:?} l={:.4} cause={:?} repair={:?}", step.kind, step.premises, step.signal.l_inc, step.cause, step.repair.as_ref().map(|r| (&r.kind, &r.outcome, &r.removed_constraint)));
    }
}

//! UCT search over proof-step sequences minimizing the trace objective.
//!
//! Node value is the negated objective of the best completed descendant;
//! rollouts follow a greedy lowest-signal policy with deterministic
//! tie-breaks; repairs appear as ordinary search actions whenever the latest
//! step's cause is non-`none` (or, for the trace-level ablation, whenever
//! the running aggregate crosses τ). Everything is deterministic under a
//! fixed configuration: candidate ordering, expansion order, tie-breaking
//! and the greedy policy contain no hidden randomness.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::evidential::EvidenceProvider;
use crate::pis::{trace_inconsistency, Cause, PISConfig, TraceStep};
use crate::temporal::DEFAULT_SCENARIO_BOUND;

use super::repair::{replan_candidates, replan_labels};
use super::steps::{applicable_steps, apply_with_plan, plan_step, StepPlan, StepTemplate};
use super::{Answer, Blackboard, CredalInterval, OrchestratorError, RepairTargeting, Verdict};

/// Search bounds. `iterations` caps simulations, `max_depth` caps trace
/// length, `max_mutations` caps cumulative graph mutations per instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MCTSConfig {
    pub iterations: usize,
    pub c_uct: f64,
    pub max_depth: usize,
    pub max_mutations: usize,
    pub seed: u64,
}

impl Default for MCTSConfig {
    fn default() -> Self {
        MCTSConfig {
            iterations: 400,
            c_uct: 1.4,
            max_depth: 24,
            max_mutations: 3,
            seed: 42,
        }
    }
}

/// Search behavior switches; the ablation variants flip these.
#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub pis: PISConfig,
    pub mcts: MCTSConfig,
    /// When false, repair actions are never offered.
    pub repairs_enabled: bool,
    /// Compare τ against the running trace-level aggregate instead of the
    /// step signal, with deliberately untargeted repairs.
    pub trace_level_tau: bool,
    /// Treat the objective as zero during search (signals still recorded).
    pub ignore_signals: bool,
    /// Vertex bound for the credal scenario oracle.
    pub scenario_bound: usize,
}

impl SearchOptions {
    pub fn new(pis: PISConfig, mcts: MCTSConfig) -> SearchOptions {
        SearchOptions {
            pis,
            mcts,
            repairs_enabled: true,
            trace_level_tau: false,
            ignore_signals: false,
            scenario_bound: DEFAULT_SCENARIO_BOUND,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// Blackboard of the returned trace (verdict-bearing when any completed
    /// simulation reached one, otherwise the best effort with `unknown`).
    pub bb: Blackboard,
    /// Actual trace objective of the returned trace.
    pub j_pis: f64,
    pub iterations_run: usize,
    /// The iteration budget ran out before the tree was exhausted or an
    /// optimal trace was proven.
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq)]
enum SearchAction {
    Step(StepTemplate),
    Repair(Cause),
}

impl SearchAction {
    fn key(&self) -> u64 {
        match self {
            SearchAction::Step(t) => t.order_key(),
            SearchAction::Repair(c) => (1 << 60) | *c as u64,
        }
    }
}

struct Node {
    bb: Blackboard,
    keys: Vec<u64>,
    depth: usize,
    actions: Vec<SearchAction>,
    children: Vec<usize>,
    visits: u64,
    best: f64,
    terminal: bool,
    exhausted: bool,
}

struct BestTrace {
    has_verdict: bool,
    effective: f64,
    keys: Vec<u64>,
    j: f64,
    bb: Blackboard,
}

struct Search<'a> {
    opts: SearchOptions,
    provider: &'a dyn EvidenceProvider,
    nodes: Vec<Node>,
    plan_cache: HashMap<(u64, u64), StepPlan>,
    best: Option<BestTrace>,
}

/// Search proof traces from the given blackboard, returning the trace with
/// minimal objective among those reaching a verdict. Deterministic under a
/// fixed configuration; the seed is carried into trace serialization.
pub fn mcts_search(
    initial: &Blackboard,
    opts: &SearchOptions,
    provider: &dyn EvidenceProvider,
) -> Result<SearchOutcome, OrchestratorError> {
    opts.pis.validate()?;
    let mut search = Search {
        opts: *opts,
        provider,
        nodes: Vec::new(),
        plan_cache: HashMap::new(),
        best: None,
    };
    search.push_node(initial.clone(), Vec::new(), 0);

    let mut iterations_run = 0;
    let mut proven_optimal = false;
    while iterations_run < opts.mcts.iterations.max(1) {
        if search.nodes[0].exhausted {
            break;
        }
        if let Some(best) = &search.best {
            if best.has_verdict && best.effective <= 0.0 {
                proven_optimal = true;
                break;
            }
        }
        search.simulate(0)?;
        iterations_run += 1;
    }

    let tree_exhausted = search.nodes[0].exhausted;
    let best = match search.best {
        Some(b) => b,
        None => {
            // No simulation ran (iterations == 0 is clamped away, so this
            // means the root itself is terminal).
            let bb = search.nodes[0].bb.clone();
            let j = trace_objective(&bb, &opts.pis);
            BestTrace {
                has_verdict: bb.trace.final_verdict.is_some(),
                effective: j,
                keys: Vec::new(),
                j,
                bb,
            }
        }
    };

    let mut bb = best.bb;
    if bb.trace.final_verdict.is_none() {
        bb.trace.final_verdict = Some(Answer {
            verdict: Verdict::Unknown,
            supporting_credal: CredalInterval::vacuous(),
            trace_ref: None,
        });
    }
    Ok(SearchOutcome {
        bb,
        j_pis: best.j,
        iterations_run,
        budget_exhausted: !tree_exhausted
            && !proven_optimal
            && iterations_run >= opts.mcts.iterations.max(1),
    })
}

/// The real (undiscounted-by-options) trace objective; zero for empty traces.
pub(super) fn trace_objective(bb: &Blackboard, cfg: &PISConfig) -> f64 {
    if bb.trace.steps.is_empty() {
        return 0.0;
    }
    let views: Vec<TraceStep> = bb
        .trace
        .steps
        .iter()
        .map(|s| TraceStep {
            signal: s.signal.clone(),
            vertices: s.vertices(),
        })
        .collect();
    trace_inconsistency(&views, cfg)
        .map(|t| t.j_pis)
        .unwrap_or(0.0)
}

impl Search<'_> {
    fn push_node(&mut self, bb: Blackboard, keys: Vec<u64>, depth: usize) -> usize {
        let actions = self.candidates(&bb, depth);
        let terminal = actions.is_empty();
        let id = self.nodes.len();
        self.nodes.push(Node {
            bb,
            keys,
            depth,
            actions,
            children: Vec::new(),
            visits: 0,
            best: f64::NEG_INFINITY,
            terminal,
            exhausted: terminal,
        });
        id
    }

    /// Ordered candidate actions at a state: answer/compositions first,
    /// then at most one repair keyed to the current cause.
    fn candidates(&self, bb: &Blackboard, depth: usize) -> Vec<SearchAction> {
        if bb.trace.final_verdict.is_some() || depth >= self.opts.mcts.max_depth {
            return Vec::new();
        }
        let mut out: Vec<SearchAction> = applicable_steps(bb)
            .into_iter()
            .map(SearchAction::Step)
            .collect();
        if let Some(cause) = self.pending_cause(bb) {
            let offer = match cause {
                Cause::CredalDominant => bb.mutations_used < self.opts.mcts.max_mutations,
                Cause::EpistemicDominant => {
                    let targeting = self.targeting();
                    !replan_candidates(bb, &replan_labels(bb, targeting)).is_empty()
                }
                Cause::None => false,
            };
            if offer {
                out.push(SearchAction::Repair(cause));
            }
        }
        out
    }

    fn targeting(&self) -> RepairTargeting {
        if self.opts.trace_level_tau {
            RepairTargeting::TraceGlobal
        } else {
            RepairTargeting::StepLocal
        }
    }

    /// The cause that would trigger a repair in this state, if any.
    fn pending_cause(&self, bb: &Blackboard) -> Option<Cause> {
        if !self.opts.repairs_enabled || bb.repair_blocked {
            return None;
        }
        if bb.trace.steps.is_empty() {
            // A collapse present straight out of compilation is a hard
            // credal contradiction of the lift itself. The trace-level
            // ablation stays blind here: its aggregate over zero steps is 0.
            return (!self.opts.trace_level_tau && bb.graph.has_empty_edge())
                .then_some(Cause::CredalDominant);
        }
        if self.opts.trace_level_tau {
            // Trace-level ablation: τ against the running aggregate; the
            // dominant component is judged on summed weighted masses.
            let j = trace_objective(bb, &self.opts.pis);
            if j <= self.opts.pis.tau {
                return None;
            }
            let beta = self.opts.pis.beta;
            let (mut e_mass, mut c_mass) = (0.0, 0.0);
            for s in &bb.trace.steps {
                e_mass += beta * s.signal.epistemic_term;
                c_mass += (1.0 - beta) * s.signal.credal_term;
            }
            Some(if e_mass >= c_mass {
                Cause::EpistemicDominant
            } else {
                Cause::CredalDominant
            })
        } else {
            let cause = bb.trace.steps.last().map(|s| s.cause)?;
            (cause != Cause::None).then_some(cause)
        }
    }

    fn plan(
        &mut self,
        bb: &Blackboard,
        tmpl: &StepTemplate,
    ) -> Result<StepPlan, OrchestratorError> {
        let key = (bb.cache_key(), tmpl.order_key());
        if let Some(hit) = self.plan_cache.get(&key) {
            return Ok(hit.clone());
        }
        let plan = plan_step(bb, tmpl, &self.opts.pis, self.opts.scenario_bound)?;
        self.plan_cache.insert(key, plan.clone());
        Ok(plan)
    }

    fn apply(
        &mut self,
        bb: &Blackboard,
        action: &SearchAction,
    ) -> Result<Blackboard, OrchestratorError> {
        match action {
            SearchAction::Step(tmpl) => {
                let plan = self.plan(bb, tmpl)?;
                Ok(apply_with_plan(bb, tmpl, plan, &self.opts.pis))
            }
            SearchAction::Repair(cause) => {
                let (next, _action) = super::trigger_repair(
                    bb,
                    *cause,
                    self.targeting(),
                    &self.opts.pis,
                    self.provider,
                    self.opts.mcts.max_mutations,
                )?;
                Ok(next)
            }
        }
    }

    /// One selection → expansion → rollout → backpropagation pass.
    fn simulate(&mut self, root: usize) -> Result<(), OrchestratorError> {
        let mut path = vec![root];
        let mut node = root;
        loop {
            if self.nodes[node].terminal {
                break;
            }
            let expanded = self.nodes[node].children.len();
            if expanded < self.nodes[node].actions.len() {
                // Expand the next untried action (deterministic order).
                let action = self.nodes[node].actions[expanded].clone();
                let bb = self.apply(&self.nodes[node].bb.clone(), &action)?;
                let mut keys = self.nodes[node].keys.clone();
                keys.push(action.key());
                let depth = self.nodes[node].depth + 1;
                let child = self.push_node(bb, keys, depth);
                self.nodes[node].children.push(child);
                path.push(child);
                node = child;
                break;
            }
            // Fully expanded: descend by UCT among non-exhausted children.
            let parent_visits = self.nodes[node].visits.max(1) as f64;
            let mut chosen = None;
            let mut best_score = f64::NEG_INFINITY;
            for &child in &self.nodes[node].children {
                if self.nodes[child].exhausted {
                    continue;
                }
                let visits = self.nodes[child].visits.max(1) as f64;
                let score = self.nodes[child].best
                    + self.opts.mcts.c_uct * (parent_visits.ln() / visits).sqrt();
                if score > best_score {
                    best_score = score;
                    chosen = Some(child);
                }
            }
            match chosen {
                Some(child) => {
                    path.push(child);
                    node = child;
                }
                None => break, // all children exhausted; marking handles it
            }
        }

        let value = self.rollout(node)?;
        for &n in &path {
            self.nodes[n].visits += 1;
            if value > self.nodes[n].best {
                self.nodes[n].best = value;
            }
        }
        // Exhaustion propagates bottom-up along the visited path.
        for &n in path.iter().rev() {
            let fully_expanded = self.nodes[n].children.len() == self.nodes[n].actions.len();
            let all_done = fully_expanded
                && self.nodes[n]
                    .children
                    .iter()
                    .all(|&c| self.nodes[c].exhausted);
            if self.nodes[n].terminal || all_done {
                self.nodes[n].exhausted = true;
            }
        }
        Ok(())
    }

    /// Greedy completion from a node: prefer a pending repair, otherwise the
    /// lowest-signal step (an answer step scoring zero short-circuits).
    fn rollout(&mut self, node: usize) -> Result<f64, OrchestratorError> {
        let mut bb = self.nodes[node].bb.clone();
        let mut keys = self.nodes[node].keys.clone();
        let mut depth = self.nodes[node].depth;
        loop {
            let actions = self.candidates(&bb, depth);
            if actions.is_empty() {
                break;
            }
            let chosen = self.greedy_choice(&bb, &actions)?;
            keys.push(chosen.key());
            bb = self.apply(&bb, &chosen)?;
            depth += 1;
        }
        Ok(self.record_terminal(bb, keys))
    }

    fn greedy_choice(
        &mut self,
        bb: &Blackboard,
        actions: &[SearchAction],
    ) -> Result<SearchAction, OrchestratorError> {
        // A flagged state repairs first.
        if let Some(repair) = actions
            .iter()
            .find(|a| matches!(a, SearchAction::Repair(_)))
        {
            return Ok(repair.clone());
        }
        let mut best: Option<(f64, &SearchAction)> = None;
        for action in actions {
            let SearchAction::Step(tmpl) = action else {
                continue;
            };
            let plan = self.plan(bb, tmpl)?;
            let signal = &plan.signal;
            if signal.l_inc == 0.0 {
                return Ok(action.clone()); // zero cannot be beaten; order breaks ties
            }
            if best.is_none() || signal.l_inc < best.as_ref().unwrap().0 {
                best = Some((signal.l_inc, action));
            }
        }
        Ok(best.expect("nonempty actions").1.clone())
    }

    /// Score a finished simulation and fold it into the incumbent best.
    fn record_terminal(&mut self, bb: Blackboard, keys: Vec<u64>) -> f64 {
        let j = trace_objective(&bb, &self.opts.pis);
        let effective = if self.opts.ignore_signals { 0.0 } else { j };
        let has_verdict = bb.trace.final_verdict.is_some();
        let value = if has_verdict {
            -effective
        } else {
            -effective - 1000.0
        };

        // Preference: verdict over none, then lower objective, then shorter
        // trace, then lexicographically smaller action sequence.
        let better = match &self.best {
            None => true,
            Some(cur) => match (has_verdict, cur.has_verdict) {
                (true, false) => true,
                (false, true) => false,
                _ => (effective, keys.len(), &keys) < (cur.effective, cur.keys.len(), &cur.keys),
            },
        };
        if better {
            self.best = Some(BestTrace {
                has_verdict,
                effective,
                keys,
                j,
                bb,
            });
        }
        value
    }
}

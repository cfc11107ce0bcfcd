//! Atomic scenario enumeration and the entailment/possibility queries
//! built on it.
//!
//! A scenario assigns one basic relation to every unordered pair and must be
//! realizable by concrete integer intervals. Enumeration backtracks over
//! pairs in lexicographic order, pruning with path consistency after every
//! pin, and double-checks each leaf by actually constructing intervals via a
//! topological ordering of the endpoint constraints.
//!
//! The search runs on [`LabelGrid`], a flat copy-cheap label matrix, so
//! backtracking never clones event or constraint data.

use super::graph::EventGraph;
use super::interval::{basic_relation_of, Interval};
use super::relation::{AllenRelation, RelationSet};
use super::TemporalError;

/// Hard cap protecting full enumeration from combinatorial blowup.
const MAX_SCENARIOS: usize = 2_000_000;

/// Default vertex bound for scenario-backed oracles.
pub const DEFAULT_SCENARIO_BOUND: usize = 7;

/// One globally consistent atomic labeling, indexed by the canonical pair
/// list (i < j, lexicographic).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub labels: Vec<AllenRelation>,
}

pub(crate) fn pair_list(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Flat n×n label matrix used by the backtracking core. Row i, column j
/// holds the label of (i, j); both orientations are kept in sync.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LabelGrid {
    n: usize,
    cells: Vec<RelationSet>,
}

impl LabelGrid {
    pub(crate) fn from_graph(g: &EventGraph) -> LabelGrid {
        let n = g.len();
        let mut cells = vec![RelationSet::UNIVERSAL; n * n];
        for i in 0..n {
            for j in 0..n {
                cells[i * n + j] = g.edge(i, j);
            }
        }
        LabelGrid { n, cells }
    }

    pub(crate) fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub(crate) fn edge(&self, i: usize, j: usize) -> RelationSet {
        self.cells[i * self.n + j]
    }

    #[inline]
    pub(crate) fn set_edge(&mut self, i: usize, j: usize, r: RelationSet) {
        self.cells[i * self.n + j] = r;
        self.cells[j * self.n + i] = r.converse();
    }

    /// Path consistency in place; `false` means some label emptied.
    pub(crate) fn propagate(&mut self) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                if self.edge(i, j).is_empty() {
                    return false;
                }
            }
        }
        loop {
            let mut changed = false;
            for i in 0..n {
                for j in (i + 1)..n {
                    let mut label = self.edge(i, j);
                    for k in 0..n {
                        if k == i || k == j {
                            continue;
                        }
                        let through = self.edge(i, k).compose(self.edge(k, j));
                        let refined = label.intersect(through);
                        if refined != label {
                            label = refined;
                            changed = true;
                            if label.is_empty() {
                                return false;
                            }
                        }
                    }
                    if label != self.edge(i, j) {
                        self.set_edge(i, j, label);
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }
}

/// Every consistent atomic labeling of `g`, failing with `SizeExceeded` when
/// the graph is larger than `max_vertices`.
pub fn enumerate_scenarios(
    g: &EventGraph,
    max_vertices: usize,
) -> Result<Vec<Scenario>, TemporalError> {
    if g.len() > max_vertices {
        return Err(TemporalError::SizeExceeded {
            n: g.len(),
            max: max_vertices,
        });
    }
    let mut out = Vec::new();
    search_graph(g, usize::MAX, &mut out)?;
    Ok(out)
}

/// First consistent scenario if one exists; a complete decision procedure
/// for graph satisfiability.
pub fn find_scenario(g: &EventGraph) -> Option<Scenario> {
    let mut out = Vec::new();
    // Limit 1 cannot overflow the scenario cap.
    search_graph(g, 1, &mut out).expect("limited search cannot overflow");
    out.into_iter().next()
}

fn search_graph(
    g: &EventGraph,
    limit: usize,
    out: &mut Vec<Scenario>,
) -> Result<(), TemporalError> {
    if g.len() == 0 {
        return Ok(());
    }
    let grid = LabelGrid::from_graph(g);
    search_grid(&grid, limit, out)
}

pub(crate) fn search_grid(
    grid: &LabelGrid,
    limit: usize,
    out: &mut Vec<Scenario>,
) -> Result<(), TemporalError> {
    let pairs = pair_list(grid.len());
    let mut work = grid.clone();
    if !work.propagate() {
        return Ok(());
    }
    recurse(&mut work, &pairs, 0, limit, out)
}

/// Satisfiability of a grid (first-scenario search).
pub(crate) fn grid_satisfiable(grid: &LabelGrid) -> bool {
    let mut out = Vec::new();
    search_grid(grid, 1, &mut out).expect("limited search cannot overflow");
    !out.is_empty()
}

fn recurse(
    w: &mut LabelGrid,
    pairs: &[(usize, usize)],
    k: usize,
    limit: usize,
    out: &mut Vec<Scenario>,
) -> Result<(), TemporalError> {
    if out.len() >= limit {
        return Ok(());
    }
    if k == pairs.len() {
        let labels: Vec<AllenRelation> = pairs
            .iter()
            .map(|&(i, j)| w.edge(i, j).iter().next().expect("atomic label"))
            .collect();
        let scenario = Scenario { labels };
        // Leaf check: concrete small-integer realization.
        if realize_scenario(w.len(), &scenario).is_some() {
            if out.len() >= MAX_SCENARIOS {
                return Err(TemporalError::ScenarioOverflow(MAX_SCENARIOS));
            }
            out.push(scenario);
        }
        return Ok(());
    }
    let (i, j) = pairs[k];
    let candidates = w.edge(i, j);
    if candidates.len() == 1 {
        // Already atomic (propagation pinned it); no branch needed.
        return recurse(w, pairs, k + 1, limit, out);
    }
    for b in candidates.iter() {
        let snapshot = w.clone();
        w.set_edge(i, j, RelationSet::singleton(b));
        if w.propagate() {
            recurse(w, pairs, k + 1, limit, out)?;
        }
        *w = snapshot;
        if out.len() >= limit {
            return Ok(());
        }
    }
    Ok(())
}

/// Construct concrete strict intervals realizing an atomic labeling, or
/// `None` if the endpoint constraints are cyclic. Endpoints are ordered by
/// union-find over equalities plus a longest-path topological ranking, then
/// every pairwise relation is verified against the constructed intervals.
pub fn realize_scenario(n: usize, scenario: &Scenario) -> Option<Vec<Interval>> {
    let pairs = pair_list(n);
    assert_eq!(pairs.len(), scenario.labels.len());

    // Point ids: 2v = start of interval v, 2v+1 = end.
    let points = 2 * n;
    let mut uf: Vec<usize> = (0..points).collect();
    fn find(uf: &mut Vec<usize>, x: usize) -> usize {
        if uf[x] != x {
            let r = find(uf, uf[x]);
            uf[x] = r;
        }
        uf[x]
    }
    let mut strict: Vec<(usize, usize)> = Vec::new();
    for v in 0..n {
        strict.push((2 * v, 2 * v + 1)); // start < end
    }
    for (&(i, j), &rel) in pairs.iter().zip(&scenario.labels) {
        let (is_, ie, js, je) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
        for (p, q, eq) in endpoint_atoms(rel, is_, ie, js, je) {
            if eq {
                let (rp, rq) = (find(&mut uf, p), find(&mut uf, q));
                if rp != rq {
                    uf[rp] = rq;
                }
            } else {
                strict.push((p, q));
            }
        }
    }

    // Longest-path ranking on the strict-order DAG of equivalence classes.
    let mut edges: Vec<(usize, usize)> = strict
        .iter()
        .map(|&(p, q)| (find(&mut uf, p), find(&mut uf, q)))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    if edges.iter().any(|&(p, q)| p == q) {
        return None; // p < p: contradictory
    }
    let mut indegree = vec![0usize; points];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); points];
    for &(p, q) in &edges {
        adj[p].push(q);
        indegree[q] += 1;
    }
    let classes: Vec<usize> = (0..points).filter(|&p| find(&mut uf, p) == p).collect();
    let mut rank = vec![0i64; points];
    let mut queue: Vec<usize> = classes.iter().copied().filter(|&p| indegree[p] == 0).collect();
    queue.sort_unstable();
    let mut seen = 0;
    let mut qi = 0;
    while qi < queue.len() {
        let p = queue[qi];
        qi += 1;
        seen += 1;
        for &q in &adj[p] {
            if rank[q] < rank[p] + 1 {
                rank[q] = rank[p] + 1;
            }
            indegree[q] -= 1;
            if indegree[q] == 0 {
                queue.push(q);
            }
        }
    }
    if seen != classes.len() {
        return None; // cycle among strict orderings
    }

    let mut intervals = Vec::with_capacity(n);
    for v in 0..n {
        let s = rank[find(&mut uf, 2 * v)];
        let e = rank[find(&mut uf, 2 * v + 1)];
        intervals.push(Interval::new(s, e).ok()?);
    }
    // Verify the construction reproduces every label exactly.
    for (&(i, j), &rel) in pairs.iter().zip(&scenario.labels) {
        if basic_relation_of(&intervals[i], &intervals[j]) != rel {
            return None;
        }
    }
    Some(intervals)
}

/// Endpoint-order atoms defining each basic relation; (p, q, eq) means
/// `p == q` when eq, else `p < q`.
fn endpoint_atoms(
    rel: AllenRelation,
    is_: usize,
    ie: usize,
    js: usize,
    je: usize,
) -> Vec<(usize, usize, bool)> {
    use AllenRelation::*;
    match rel {
        Before => vec![(ie, js, false)],
        After => vec![(je, is_, false)],
        Meets => vec![(ie, js, true)],
        MetBy => vec![(je, is_, true)],
        Overlaps => vec![(is_, js, false), (js, ie, false), (ie, je, false)],
        OverlappedBy => vec![(js, is_, false), (is_, je, false), (je, ie, false)],
        Starts => vec![(is_, js, true), (ie, je, false)],
        StartedBy => vec![(is_, js, true), (je, ie, false)],
        During => vec![(js, is_, false), (ie, je, false)],
        Contains => vec![(is_, js, false), (je, ie, false)],
        Finishes => vec![(js, is_, false), (ie, je, true)],
        FinishedBy => vec![(is_, js, false), (ie, je, true)],
        Equals => vec![(is_, js, true), (ie, je, true)],
    }
}

/// Some consistent scenario labels the edge inside `r`.
pub fn possible(g: &EventGraph, i: usize, j: usize, r: RelationSet) -> bool {
    let mut grid = LabelGrid::from_graph(g);
    grid_possible(&mut grid, i, j, r)
}

pub(crate) fn grid_possible(grid: &mut LabelGrid, i: usize, j: usize, r: RelationSet) -> bool {
    let original = grid.edge(i, j);
    let pinned = original.intersect(r);
    if pinned.is_empty() {
        return false;
    }
    grid.set_edge(i, j, pinned);
    let sat = grid_satisfiable(grid);
    grid.set_edge(i, j, original);
    sat
}

/// Every consistent scenario labels the edge inside `r`; false on
/// inconsistent graphs (no scenarios at all).
pub fn entails(g: &EventGraph, i: usize, j: usize, r: RelationSet) -> bool {
    let mut grid = LabelGrid::from_graph(g);
    if !grid_satisfiable(&grid) {
        return false;
    }
    !grid_possible(&mut grid, i, j, r.complement())
}

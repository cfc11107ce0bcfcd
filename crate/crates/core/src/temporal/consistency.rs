//! Path consistency over triangles with conflict witnesses.

use serde::{Deserialize, Serialize};

use super::graph::EventGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConsistencyStatus {
    Consistent,
    Inconsistent,
}

/// Result of path consistency: the refined graph (a minimal-labels
/// approximation) plus, on failure, a triangle (i, k, j) whose labels
/// compose and intersect to the empty set.
#[derive(Debug, Clone)]
pub struct ConsistencyOutcome {
    pub status: ConsistencyStatus,
    pub refined: EventGraph,
    pub conflict: Option<(usize, usize, usize)>,
}

impl ConsistencyOutcome {
    pub fn is_consistent(&self) -> bool {
        self.status == ConsistencyStatus::Consistent
    }
}

/// Iterates `edge(i,j) ← edge(i,j) ∩ compose(edge(i,k), edge(k,j))` to a
/// fixpoint, processing triangles in lexicographic order for reproducibility.
/// Inconsistency (some edge becomes empty) is a status, not an error; the
/// converse orientation stays coherent because labels are stored canonically.
///
/// A directly empty input edge (i, j) is witnessed as the degenerate triangle
/// (i, j, j): composing with the fixed self edge `{equals}` reproduces the
/// empty label.
pub fn path_consistency(g: &EventGraph) -> ConsistencyOutcome {
    let n = g.len();
    let mut w = g.clone();

    // Surface pre-existing local contradictions first.
    if let Some((i, j)) = w.first_empty_edge() {
        return ConsistencyOutcome {
            status: ConsistencyStatus::Inconsistent,
            refined: w,
            conflict: Some((i, j, j)),
        };
    }

    loop {
        let mut changed = false;
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    let through = w.edge(i, k).compose(w.edge(k, j));
                    if w.refine_edge(i, j, through) {
                        changed = true;
                        if w.edge(i, j).is_empty() {
                            return ConsistencyOutcome {
                                status: ConsistencyStatus::Inconsistent,
                                refined: w,
                                conflict: Some((i, k, j)),
                            };
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    ConsistencyOutcome {
        status: ConsistencyStatus::Consistent,
        refined: w,
        conflict: None,
    }
}

/// Count of locally broken triangles: canonical pairs whose label is empty
/// or has an empty intersection with some composition path. Structural
/// mutation must strictly decrease this to be accepted.
pub(crate) fn inconsistency_score(g: &EventGraph) -> usize {
    let n = g.len();
    let mut score = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let direct = g.edge(i, j);
            if direct.is_empty() {
                score += n; // weigh hard local contradictions above triangles
                continue;
            }
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                if direct
                    .intersect(g.edge(i, k).compose(g.edge(k, j)))
                    .is_empty()
                {
                    score += 1;
                }
            }
        }
    }
    score
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::{AllenRelation::*, RelationSet};

    #[test]
    fn chain_refines_transitive_edge() {
        let mut g = EventGraph::new();
        for id in ["a", "b", "c"] {
            g.ensure_event(id);
        }
        g.push_constraint(0, 1, RelationSet::singleton(Before), "s");
        g.push_constraint(1, 2, RelationSet::singleton(Before), "s");
        let out = path_consistency(&g);
        assert!(out.is_consistent());
        assert_eq!(out.refined.edge(0, 2), RelationSet::singleton(Before));
    }

    #[test]
    fn antisymmetric_pair_is_inconsistent() {
        let mut g = EventGraph::new();
        g.ensure_event("a");
        g.ensure_event("b");
        g.push_constraint(0, 1, RelationSet::singleton(Before), "s1");
        g.push_constraint(0, 1, RelationSet::singleton(After), "s2");
        let out = path_consistency(&g);
        assert_eq!(out.status, ConsistencyStatus::Inconsistent);
        let (i, k, j) = out.conflict.expect("conflict witnessed");
        // Composing the witness labels yields an empty intersection.
        let w = &out.refined;
        assert!(w.edge(i, j).intersect(w.edge(i, k).compose(w.edge(k, j))).is_empty());
    }

    #[test]
    fn cyclic_before_triangle_is_inconsistent() {
        let mut g = EventGraph::new();
        for id in ["a", "b", "c"] {
            g.ensure_event(id);
        }
        g.push_constraint(0, 1, RelationSet::singleton(Before), "s");
        g.push_constraint(1, 2, RelationSet::singleton(Before), "s");
        g.push_constraint(2, 0, RelationSet::singleton(Before), "s");
        let out = path_consistency(&g);
        assert_eq!(out.status, ConsistencyStatus::Inconsistent);
        assert!(out.conflict.is_some());
        assert!(inconsistency_score(&g) > 0);
    }

    #[test]
    fn empty_graph_is_consistent_and_unchanged() {
        let g = EventGraph::new();
        let out = path_consistency(&g);
        assert!(out.is_consistent());
        assert_eq!(out.refined.len(), 0);
    }
}

//! Symbolic credal support bounds for proof-step assertions.
//!
//! The interval `[L, U]` is instantiated as Dempster-Shafer belief and
//! plausibility: the focal elements are the globally consistent joint
//! labelings of the *extracted* edges with uniform mass, vacuously extended
//! over unconstrained edges. `L` counts the focal elements whose every
//! completion satisfies the assertion, `U` those with at least one
//! satisfying completion. A graph with no consistent focal element — a
//! definitive logical contradiction — yields `[0, 0]`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::temporal::{
    grid_possible, grid_satisfiable, EventGraph, LabelGrid, RelationSet, TemporalError,
    DEFAULT_SCENARIO_BOUND,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CredalError {
    #[error(transparent)]
    Temporal(#[from] TemporalError),
    #[error("epsilon must be in (0, 1], got {0}")]
    InvalidEpsilon(f64),
    #[error("credal bounds out of order: [{0}, {1}]")]
    InvalidBounds(f64, f64),
    #[error("assertion relation set is empty")]
    EmptyAssertion,
}

/// Lower/upper probabilistic support for an assertion, `0 ≤ L ≤ U ≤ 1`.
/// Serializes as the JSON pair `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64)", into = "(f64, f64)")]
pub struct CredalInterval {
    lower: f64,
    upper: f64,
}

impl CredalInterval {
    pub fn new(lower: f64, upper: f64) -> Result<CredalInterval, CredalError> {
        let ok = (0.0..=1.0).contains(&lower) && (0.0..=1.0).contains(&upper) && lower <= upper;
        if !ok {
            return Err(CredalError::InvalidBounds(lower, upper));
        }
        Ok(CredalInterval { lower, upper })
    }

    /// `[0, 0]`: impossible under the graph, or the graph is inconsistent.
    pub fn contradiction() -> CredalInterval {
        CredalInterval {
            lower: 0.0,
            upper: 0.0,
        }
    }

    /// `[1, 1]`: entailed in every scenario.
    pub fn certain() -> CredalInterval {
        CredalInterval {
            lower: 1.0,
            upper: 1.0,
        }
    }

    /// `[0, 1]`: completely unresolved.
    pub fn vacuous() -> CredalInterval {
        CredalInterval {
            lower: 0.0,
            upper: 1.0,
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

impl TryFrom<(f64, f64)> for CredalInterval {
    type Error = CredalError;
    fn try_from(v: (f64, f64)) -> Result<Self, Self::Error> {
        CredalInterval::new(v.0, v.1)
    }
}

impl From<CredalInterval> for (f64, f64) {
    fn from(ci: CredalInterval) -> (f64, f64) {
        (ci.lower, ci.upper)
    }
}

impl fmt::Display for CredalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.3},{:.3}]", self.lower, self.upper)
    }
}

/// The relation a proof step claims for a vertex pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assertion {
    pub src: usize,
    pub dst: usize,
    pub relations: RelationSet,
}

impl Assertion {
    pub fn new(src: usize, dst: usize, relations: RelationSet) -> Result<Assertion, CredalError> {
        if relations.is_empty() {
            return Err(CredalError::EmptyAssertion);
        }
        Ok(Assertion {
            src,
            dst,
            relations,
        })
    }
}

/// Belief/plausibility bounds for `a` under `g`.
///
/// Focal elements are enumerated by backtracking over the extracted edges'
/// current label sets with path-consistency pruning; per focal element the
/// all-completions and some-completion checks reduce to entailment and
/// possibility queries on the pinned graph.
pub fn credal_support(g: &EventGraph, a: &Assertion) -> Result<CredalInterval, CredalError> {
    credal_support_bounded(g, a, DEFAULT_SCENARIO_BOUND)
}

pub fn credal_support_bounded(
    g: &EventGraph,
    a: &Assertion,
    max_vertices: usize,
) -> Result<CredalInterval, CredalError> {
    if a.relations.is_empty() {
        return Err(CredalError::EmptyAssertion);
    }
    if a.src >= g.len() || a.dst >= g.len() {
        let missing = a.src.max(a.dst);
        return Err(TemporalError::UnknownVertex(format!("#{missing}")).into());
    }
    if g.len() > max_vertices {
        return Err(TemporalError::SizeExceeded {
            n: g.len(),
            max: max_vertices,
        }
        .into());
    }

    let grid = LabelGrid::from_graph(g);
    Ok(credal_support_grid(grid, &g.extracted_edges(), a))
}

/// Grid-level support computation; callers may pre-apply a derived edge
/// refinement before scoring (the post-application graph of a proof step).
pub(crate) fn credal_support_grid(
    mut grid: LabelGrid,
    extracted: &[(usize, usize)],
    a: &Assertion,
) -> CredalInterval {
    let domains: Vec<RelationSet> = extracted.iter().map(|&(i, j)| grid.edge(i, j)).collect();
    let mut counts = FocalCounts::default();
    enumerate_focals(&mut grid, extracted, &domains, 0, a, &mut counts);
    if counts.total == 0 {
        return CredalInterval::contradiction();
    }
    let total = counts.total as f64;
    CredalInterval::new(counts.all_sat as f64 / total, counts.some_sat as f64 / total)
        .expect("counts are ordered")
}

#[derive(Default)]
struct FocalCounts {
    total: usize,
    all_sat: usize,
    some_sat: usize,
}

fn enumerate_focals(
    grid: &mut LabelGrid,
    extracted: &[(usize, usize)],
    domains: &[RelationSet],
    k: usize,
    a: &Assertion,
    counts: &mut FocalCounts,
) {
    if k == extracted.len() {
        // A focal element is consistent iff some completion exists.
        if !grid_satisfiable(grid) {
            return;
        }
        counts.total += 1;
        if grid_possible(grid, a.src, a.dst, a.relations) {
            counts.some_sat += 1;
            // Consistent and some completion satisfies; "all satisfy" iff no
            // completion escapes into the complement.
            if !grid_possible(grid, a.src, a.dst, a.relations.complement()) {
                counts.all_sat += 1;
            }
        }
        return;
    }
    let (i, j) = extracted[k];
    let snapshot = grid.edge(i, j);
    for b in domains[k].iter() {
        let pinned = snapshot.intersect(RelationSet::singleton(b));
        if pinned.is_empty() {
            continue;
        }
        grid.set_edge(i, j, pinned);
        // Cheap prune: skip branches propagation already refutes.
        let mut probe = grid.clone();
        if probe.propagate() {
            enumerate_focals(grid, extracted, domains, k + 1, a, counts);
        }
    }
    grid.set_edge(i, j, snapshot);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PhiMode {
    /// `max(0, ε − (U − L))` exactly as written; penalizes every narrow
    /// interval including full certainty `[1, 1]`.
    Literal,
    /// Same quantity, but only when `U < 0.5`: penalize collapses toward
    /// zero support, not confident entailments.
    #[default]
    Gated,
}

/// Credal contradiction penalty Φ; always in `[0, ε]`.
pub fn phi_penalty(ci: &CredalInterval, epsilon: f64, mode: PhiMode) -> Result<f64, CredalError> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(CredalError::InvalidEpsilon(epsilon));
    }
    let base = (epsilon - ci.width()).max(0.0);
    Ok(match mode {
        PhiMode::Literal => base,
        PhiMode::Gated => {
            if ci.upper() < 0.5 {
                base
            } else {
                0.0
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::AllenRelation::*;

    fn chain() -> EventGraph {
        let mut g = EventGraph::new();
        for id in ["a", "b", "c"] {
            g.ensure_event(id);
        }
        g.push_constraint(0, 1, RelationSet::singleton(Before), "s");
        g.push_constraint(1, 2, RelationSet::singleton(Before), "s");
        g
    }

    #[test]
    fn entailed_assertion_is_certain() {
        let a = Assertion::new(0, 2, RelationSet::singleton(Before)).unwrap();
        let ci = credal_support(&chain(), &a).unwrap();
        assert_eq!(ci, CredalInterval::certain());
    }

    #[test]
    fn contradicted_assertion_collapses_to_zero() {
        let a = Assertion::new(0, 2, RelationSet::singleton(After)).unwrap();
        let ci = credal_support(&chain(), &a).unwrap();
        assert_eq!(ci, CredalInterval::contradiction());
    }

    #[test]
    fn unconstrained_completion_is_vacuous() {
        let mut g = EventGraph::new();
        for id in ["a", "b", "c"] {
            g.ensure_event(id);
        }
        g.push_constraint(0, 1, RelationSet::singleton(Before), "s");
        let a = Assertion::new(0, 2, RelationSet::singleton(Before)).unwrap();
        let ci = credal_support(&g, &a).unwrap();
        assert_eq!(ci, CredalInterval::vacuous());
    }

    #[test]
    fn inconsistent_graph_collapses_to_zero() {
        let mut g = EventGraph::new();
        g.ensure_event("a");
        g.ensure_event("b");
        g.push_constraint(0, 1, RelationSet::singleton(Before), "s1");
        g.push_constraint(0, 1, RelationSet::singleton(After), "s2");
        let a = Assertion::new(0, 1, RelationSet::singleton(Before)).unwrap();
        assert_eq!(
            credal_support(&g, &a).unwrap(),
            CredalInterval::contradiction()
        );
    }

    #[test]
    fn unknown_vertex_is_an_error() {
        let g = chain();
        let a = Assertion::new(0, 9, RelationSet::singleton(Before)).unwrap();
        assert!(matches!(
            credal_support(&g, &a),
            Err(CredalError::Temporal(TemporalError::UnknownVertex(_)))
        ));
    }

    #[test]
    fn phi_examples() {
        let eps = 0.1;
        let zero = CredalInterval::contradiction();
        assert_eq!(phi_penalty(&zero, eps, PhiMode::Literal).unwrap(), 0.1);
        assert_eq!(phi_penalty(&zero, eps, PhiMode::Gated).unwrap(), 0.1);
        let vac = CredalInterval::vacuous();
        assert_eq!(phi_penalty(&vac, eps, PhiMode::Literal).unwrap(), 0.0);
        assert_eq!(phi_penalty(&vac, eps, PhiMode::Gated).unwrap(), 0.0);
        let one = CredalInterval::certain();
        assert_eq!(phi_penalty(&one, eps, PhiMode::Literal).unwrap(), 0.1);
        assert_eq!(phi_penalty(&one, eps, PhiMode::Gated).unwrap(), 0.0);
        assert!(phi_penalty(&one, 0.0, PhiMode::Literal).is_err());
        assert!(phi_penalty(&one, 1.5, PhiMode::Literal).is_err());
    }

    #[test]
    fn credal_serializes_as_pair() {
        let ci = CredalInterval::new(0.25, 0.75).unwrap();
        assert_eq!(serde_json::to_string(&ci).unwrap(), "[0.25,0.75]");
        assert!(serde_json::from_str::<CredalInterval>("[0.9,0.1]").is_err());
    }
}

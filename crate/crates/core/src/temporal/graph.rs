//! Event graphs: vertices with optional concrete intervals, set-labeled
//! edges, and the extracted constraints that produced them.
//!
//! Edge labels are stored once per unordered pair in canonical orientation
//! (lower vertex index first); the reverse direction is always served as the
//! converse, so converse coherence holds by construction. An absent edge is
//! the universal set, and self edges are pinned to `{equals}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::interval::Interval;
use super::relation::{AllenRelation, RelationSet};
use super::TemporalError;
use crate::util::fnv1a64;

/// Stable identifier of an extracted constraint within one graph lineage.
pub type ConstraintId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub id: String,
    pub label: String,
    pub interval: Option<Interval>,
}

/// One evidence-asserted constraint. Removing a constraint (structural
/// mutation) re-derives the affected edge from whatever remains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub id: ConstraintId,
    pub src: usize,
    pub dst: usize,
    pub relations: RelationSet,
    pub provenance: String,
}

#[derive(Debug, Clone, Default)]
pub struct EventGraph {
    events: Vec<Event>,
    index: BTreeMap<String, usize>,
    /// Canonical (i < j) pair -> label; absent means universal.
    labels: BTreeMap<(usize, usize), RelationSet>,
    constraints: Vec<Constraint>,
    next_constraint: ConstraintId,
}

impl EventGraph {
    pub fn new() -> EventGraph {
        EventGraph::default()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn event(&self, v: usize) -> &Event {
        &self.events[v]
    }

    pub fn vertex(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require_vertex(&self, id: &str) -> Result<usize, TemporalError> {
        self.vertex(id)
            .ok_or_else(|| TemporalError::UnknownVertex(id.to_string()))
    }

    pub fn add_event(&mut self, ev: Event) -> Result<usize, TemporalError> {
        if self.index.contains_key(&ev.id) {
            return Err(TemporalError::DuplicateEvent(ev.id));
        }
        let v = self.events.len();
        self.index.insert(ev.id.clone(), v);
        self.events.push(ev);
        Ok(v)
    }

    /// Look up an event by id, inserting a fresh unanchored one if missing.
    pub fn ensure_event(&mut self, id: &str) -> usize {
        match self.vertex(id) {
            Some(v) => v,
            None => self
                .add_event(Event {
                    id: id.to_string(),
                    label: id.to_string(),
                    interval: None,
                })
                .expect("id checked absent"),
        }
    }

    pub fn set_interval(&mut self, v: usize, interval: Interval) {
        self.events[v].interval = Some(interval);
    }

    /// Edge label in the requested direction.
    pub fn edge(&self, i: usize, j: usize) -> RelationSet {
        if i == j {
            return RelationSet::singleton(AllenRelation::Equals);
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let stored = self
            .labels
            .get(&(a, b))
            .copied()
            .unwrap_or(RelationSet::UNIVERSAL);
        if i < j {
            stored
        } else {
            stored.converse()
        }
    }

    /// Overwrite an edge label (both directions kept coherent).
    pub fn set_edge(&mut self, i: usize, j: usize, r: RelationSet) {
        assert_ne!(i, j, "self edges are fixed at equals");
        let (a, b, stored) = if i < j { (i, j, r) } else { (j, i, r.converse()) };
        if stored.is_universal() {
            self.labels.remove(&(a, b));
        } else {
            self.labels.insert((a, b), stored);
        }
    }

    /// Intersect an edge with `r` and return whether the label changed.
    pub fn refine_edge(&mut self, i: usize, j: usize, r: RelationSet) -> bool {
        let old = self.edge(i, j);
        let new = old.intersect(r);
        if new == old {
            return false;
        }
        self.set_edge(i, j, new);
        true
    }

    /// Value-semantic constraint addition: returns a new graph with
    /// `edge(i,j) ∩= r`, the constraint recorded as extracted, and the
    /// original untouched. The input set must be non-empty; the *resulting*
    /// edge may legitimately become empty (a local contradiction surfaced
    /// later by path consistency).
    pub fn add_constraint(
        &self,
        i: usize,
        j: usize,
        r: RelationSet,
        provenance: &str,
    ) -> Result<(EventGraph, ConstraintId), TemporalError> {
        if r.is_empty() {
            return Err(TemporalError::EmptyRelation);
        }
        let mut g = self.clone();
        let cid = g.push_constraint(i, j, r, provenance);
        Ok((g, cid))
    }

    /// In-place variant used by builders that own the graph.
    pub fn push_constraint(
        &mut self,
        i: usize,
        j: usize,
        r: RelationSet,
        provenance: &str,
    ) -> ConstraintId {
        assert!(!r.is_empty(), "constraint relation set must be non-empty");
        assert!(i != j && i < self.len() && j < self.len());
        let id = self.next_constraint;
        self.next_constraint += 1;
        self.constraints.push(Constraint {
            id,
            src: i,
            dst: j,
            relations: r,
            provenance: provenance.to_string(),
        });
        self.refine_edge(i, j, r);
        id
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint(&self, id: ConstraintId) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.id == id)
    }

    /// Remove one extracted constraint and re-derive all edge labels from the
    /// remaining constraints (derived refinements are dropped; callers rerun
    /// path consistency afterwards).
    pub fn remove_constraint(&self, id: ConstraintId) -> EventGraph {
        let mut g = self.clone();
        g.constraints.retain(|c| c.id != id);
        g.rebuild_labels();
        g
    }

    /// Recompute every edge as the intersection of its surviving constraints.
    pub fn rebuild_labels(&mut self) {
        self.labels.clear();
        let cs = std::mem::take(&mut self.constraints);
        for c in &cs {
            self.refine_edge(c.src, c.dst, c.relations);
        }
        self.constraints = cs;
    }

    /// Canonical (i < j) pairs carrying at least one extracted constraint.
    pub fn extracted_edges(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = self
            .constraints
            .iter()
            .map(|c| if c.src < c.dst { (c.src, c.dst) } else { (c.dst, c.src) })
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    pub fn is_extracted(&self, i: usize, j: usize) -> bool {
        let key = if i < j { (i, j) } else { (j, i) };
        self.constraints
            .iter()
            .any(|c| (c.src.min(c.dst), c.src.max(c.dst)) == key)
    }

    pub fn constraints_on(&self, i: usize, j: usize) -> Vec<&Constraint> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.constraints
            .iter()
            .filter(|c| (c.src.min(c.dst), c.src.max(c.dst)) == key)
            .collect()
    }

    pub fn has_empty_edge(&self) -> bool {
        self.labels.values().any(|r| r.is_empty())
    }

    /// First empty canonical pair in lexicographic order, if any.
    pub fn first_empty_edge(&self) -> Option<(usize, usize)> {
        self.labels
            .iter()
            .find(|(_, r)| r.is_empty())
            .map(|(&p, _)| p)
    }

    /// Content hash over events, labels and constraint identities; stable
    /// across runs, used as a memoization key during search.
    pub fn content_key(&self) -> u64 {
        let mut bytes = Vec::with_capacity(64);
        for ev in &self.events {
            bytes.extend_from_slice(ev.id.as_bytes());
            bytes.push(0);
            if let Some(iv) = &ev.interval {
                bytes.extend_from_slice(&iv.start().0.to_le_bytes());
                bytes.extend_from_slice(&iv.end().0.to_le_bytes());
            } else {
                bytes.push(0xFF);
            }
        }
        for (&(i, j), r) in &self.labels {
            bytes.extend_from_slice(&(i as u32).to_le_bytes());
            bytes.extend_from_slice(&(j as u32).to_le_bytes());
            bytes.extend_from_slice(&r.bits().to_le_bytes());
        }
        for c in &self.constraints {
            bytes.extend_from_slice(&c.id.to_le_bytes());
        }
        fnv1a64(&bytes)
    }

    /// Structural equality independent of vertex insertion order and
    /// constraint ids: same events (by id), same edge labels, same set of
    /// (pair, relations, provenance) constraints.
    pub fn same_structure(&self, other: &EventGraph) -> bool {
        let canon = |g: &EventGraph| {
            let mut evs: Vec<&Event> = g.events.iter().collect();
            evs.sort_by(|a, b| a.id.cmp(&b.id));
            let ev_key: Vec<(String, String, Option<Interval>)> = evs
                .iter()
                .map(|e| (e.id.clone(), e.label.clone(), e.interval))
                .collect();
            let mut edges: Vec<(String, String, RelationSet)> = g
                .labels
                .iter()
                .map(|(&(i, j), &r)| (g.events[i].id.clone(), g.events[j].id.clone(), r))
                .collect();
            edges.sort();
            let mut cons: Vec<(String, String, RelationSet, String)> = g
                .constraints
                .iter()
                .map(|c| {
                    let (a, b) = if g.events[c.src].id <= g.events[c.dst].id {
                        (c.src, c.dst)
                    } else {
                        (c.dst, c.src)
                    };
                    let rels = if a == c.src {
                        c.relations
                    } else {
                        c.relations.converse()
                    };
                    (
                        g.events[a].id.clone(),
                        g.events[b].id.clone(),
                        rels,
                        c.provenance.clone(),
                    )
                })
                .collect();
            cons.sort();
            (ev_key, edges, cons)
        };
        canon(self) == canon(other)
    }
}

// ---------------------------------------------------------------------------
// JSON wire format:
// {"events":[{"id","label","interval":[s,e]|null}],
//  "edges":[{"src","dst","relations":[names],"extracted":bool}]}
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    src: String,
    dst: String,
    relations: RelationSet,
    extracted: bool,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    events: Vec<Event>,
    edges: Vec<EdgeJson>,
}

impl Serialize for EventGraph {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let edges = self
            .labels
            .iter()
            .map(|(&(i, j), &r)| EdgeJson {
                src: self.events[i].id.clone(),
                dst: self.events[j].id.clone(),
                relations: r,
                extracted: self.is_extracted(i, j),
            })
            .collect();
        GraphJson {
            events: self.events.clone(),
            edges,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for EventGraph {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = GraphJson::deserialize(deserializer)?;
        let mut g = EventGraph::new();
        for ev in raw.events {
            g.add_event(ev).map_err(D::Error::custom)?;
        }
        for e in raw.edges {
            let i = g.require_vertex(&e.src).map_err(D::Error::custom)?;
            let j = g.require_vertex(&e.dst).map_err(D::Error::custom)?;
            if e.extracted && !e.relations.is_empty() {
                g.push_constraint(i, j, e.relations, "loaded");
            } else {
                g.set_edge(i, j, e.relations);
            }
        }
        Ok(g)
    }
}

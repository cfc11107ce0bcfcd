//! Ground-truth timelines: concrete integer intervals per event, sampled so
//! that every basic relation actually occurs in the population.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::temporal::{basic_relation_of, AllenRelation, Interval};

use super::BenchError;

/// Event labels in generation order; instances never exceed 12 events.
pub const EVENT_LABELS: [&str; 12] = [
    "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel", "india", "juliett",
    "kilo", "lima",
];

/// Labels reserved for distractor documents.
pub const DISTRACTOR_LABELS: [&str; 4] = ["mike", "november", "oscar", "papa"];

/// A concrete ground truth: every pairwise relation is determined by the
/// stored intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub events: Vec<(String, Interval)>,
}

impl Timeline {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn label(&self, k: usize) -> &str {
        &self.events[k].0
    }

    pub fn interval(&self, k: usize) -> Interval {
        self.events[k].1
    }

    /// Ground-truth basic relation for a pair.
    pub fn truth(&self, i: usize, j: usize) -> AllenRelation {
        basic_relation_of(&self.events[i].1, &self.events[j].1)
    }
}

/// Deterministic per seed. Endpoints are sampled in `[0, 400]` with
/// rejection of zero-length draws; roughly a third of events snap an
/// endpoint onto an earlier event so meets/starts/finishes/equals occur.
pub fn generate_timeline(seed: u64, n_events: usize) -> Result<Timeline, BenchError> {
    if !(2..=12).contains(&n_events) {
        return Err(BenchError::InvalidSize(n_events));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events: Vec<(String, Interval)> = Vec::with_capacity(n_events);
    for k in 0..n_events {
        let interval = loop {
            let candidate = if k > 0 && rng.gen::<f64>() < 0.35 {
                snapped_interval(&mut rng, &events)
            } else {
                plain_interval(&mut rng)
            };
            if let Some(iv) = candidate {
                break iv;
            }
        };
        events.push((EVENT_LABELS[k].to_string(), interval));
    }
    Ok(Timeline { events })
}

fn plain_interval(rng: &mut ChaCha8Rng) -> Option<Interval> {
    let start = rng.gen_range(0..=400);
    let end = rng.gen_range(0..=400);
    Interval::new(start.min(end), start.max(end)).ok()
}

fn snapped_interval(rng: &mut ChaCha8Rng, events: &[(String, Interval)]) -> Option<Interval> {
    let anchor = events[rng.gen_range(0..events.len())].1;
    let len = rng.gen_range(1..=40i64);
    match rng.gen_range(0..4u8) {
        // meets: start where the anchor ends
        0 => Interval::new(anchor.end().0, (anchor.end().0 + len).min(400)).ok(),
        // shared start
        1 => Interval::new(anchor.start().0, (anchor.start().0 + len).min(400)).ok(),
        // shared end
        2 => Interval::new((anchor.end().0 - len).max(0), anchor.end().0).ok(),
        // equals
        _ => Some(anchor),
    }
}

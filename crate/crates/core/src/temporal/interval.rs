//! Concrete intervals over integer ticks.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::relation::AllenRelation;
use super::TemporalError;

/// An abstract integer time tick (e.g. a day count).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct TimePoint(pub i64);

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A strict interval: `start < end`, so zero-length intervals are rejected
/// and all 13 basic relations stay distinguishable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(i64, i64)", into = "(i64, i64)")]
pub struct Interval {
    start: TimePoint,
    end: TimePoint,
}

impl Interval {
    pub fn new(start: i64, end: i64) -> Result<Interval, TemporalError> {
        if start >= end {
            return Err(TemporalError::InvalidInterval { start, end });
        }
        Ok(Interval {
            start: TimePoint(start),
            end: TimePoint(end),
        })
    }

    pub fn start(&self) -> TimePoint {
        self.start
    }

    pub fn end(&self) -> TimePoint {
        self.end
    }

    pub fn duration(&self) -> i64 {
        self.end.0 - self.start.0
    }
}

impl TryFrom<(i64, i64)> for Interval {
    type Error = TemporalError;
    fn try_from(v: (i64, i64)) -> Result<Self, Self::Error> {
        Interval::new(v.0, v.1)
    }
}

impl From<Interval> for (i64, i64) {
    fn from(iv: Interval) -> (i64, i64) {
        (iv.start.0, iv.end.0)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.start, self.end)
    }
}

/// The unique basic relation determined by endpoint order. Total on valid
/// (strict) intervals.
pub fn basic_relation_of(a: &Interval, b: &Interval) -> AllenRelation {
    use std::cmp::Ordering::*;
    use AllenRelation::*;
    if a.end() < b.start() {
        return Before;
    }
    if a.end() == b.start() {
        return Meets;
    }
    if b.end() < a.start() {
        return After;
    }
    if b.end() == a.start() {
        return MetBy;
    }
    match (a.start().cmp(&b.start()), a.end().cmp(&b.end())) {
        (Less, Less) => Overlaps,
        (Less, Equal) => FinishedBy,
        (Less, Greater) => Contains,
        (Equal, Less) => Starts,
        (Equal, Equal) => Equals,
        (Equal, Greater) => StartedBy,
        (Greater, Less) => During,
        (Greater, Equal) => Finishes,
        (Greater, Greater) => OverlappedBy,
    }
}

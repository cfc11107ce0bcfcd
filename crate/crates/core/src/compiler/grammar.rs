//! Controlled grammar for temporal statements.
//!
//! Accepted sentence forms (case-insensitive, optional trailing period):
//!   `<E1> (before|after|meets|during|contains|overlaps|starts with|finishes with|equals) <E2>`
//!   `<E> starts on day <n>`
//!   `<E> ends on day <n>`
//!   `<E> lasts <n> days`
//!
//! Anything else is unparseable — never a guess. Event labels are
//! normalized to lowercase with leading articles stripped. Only the nine
//! phrases above map to relations; the four remaining Allen relations are
//! expressed by swapping arguments (converse normalization at render time).

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::temporal::AllenRelation;

/// Where a statement came from, for provenance strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRef {
    pub doc: String,
    pub sentence: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StatementKind {
    Relation {
        subject: String,
        relation: AllenRelation,
        object: String,
    },
    Anchor {
        event: String,
        start: Option<i64>,
        end: Option<i64>,
    },
    Duration {
        event: String,
        days: i64,
    },
}

/// A parsed statement with its raw sentence text and source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedStatement {
    pub kind: StatementKind,
    pub text: String,
    pub source: Option<SourceRef>,
}

fn patterns() -> &'static (Regex, Regex, Regex, Regex) {
    static P: OnceLock<(Regex, Regex, Regex, Regex)> = OnceLock::new();
    P.get_or_init(|| {
        let start = Regex::new(r"(?i)^\s*(.+?)\s+starts\s+on\s+day\s+(-?\d+)\s*\.?\s*$").unwrap();
        let end = Regex::new(r"(?i)^\s*(.+?)\s+ends\s+on\s+day\s+(-?\d+)\s*\.?\s*$").unwrap();
        let lasts = Regex::new(r"(?i)^\s*(.+?)\s+lasts\s+(-?\d+)\s+days?\s*\.?\s*$").unwrap();
        let relation = Regex::new(
            r"(?i)^\s*(.+?)\s+(before|after|meets|during|contains|overlaps|starts\s+with|finishes\s+with|equals)\s+(.+?)\s*\.?\s*$",
        )
        .unwrap();
        (start, end, lasts, relation)
    })
}

/// Lowercase, collapse whitespace, strip one leading article.
fn normalize_label(raw: &str) -> String {
    let mut words: Vec<&str> = raw.split_whitespace().collect();
    if words.len() > 1 {
        if let Some(first) = words.first() {
            if matches!(first.to_ascii_lowercase().as_str(), "the" | "a" | "an") {
                words.remove(0);
            }
        }
    }
    words.join(" ").to_ascii_lowercase()
}

fn phrase_to_relation(phrase: &str) -> AllenRelation {
    use AllenRelation::*;
    let canon = phrase.to_ascii_lowercase();
    let canon = canon.split_whitespace().collect::<Vec<_>>().join(" ");
    match canon.as_str() {
        "before" => Before,
        "after" => After,
        "meets" => Meets,
        "during" => During,
        "contains" => Contains,
        "overlaps" => Overlaps,
        "starts with" => Starts,
        "finishes with" => Finishes,
        "equals" => Equals,
        other => unreachable!("phrase `{other}` not in grammar"),
    }
}

/// The rendering phrase for directly expressible relations.
fn relation_to_phrase(rel: AllenRelation) -> Option<&'static str> {
    use AllenRelation::*;
    match rel {
        Before => Some("before"),
        After => Some("after"),
        Meets => Some("meets"),
        During => Some("during"),
        Contains => Some("contains"),
        Overlaps => Some("overlaps"),
        Starts => Some("starts with"),
        Finishes => Some("finishes with"),
        Equals => Some("equals"),
        MetBy | OverlappedBy | StartedBy | FinishedBy => None,
    }
}

/// Match a sentence against the controlled grammar. Total and
/// deterministic; `None` means out of grammar.
pub fn parse_sentence(sentence: &str) -> Option<StatementKind> {
    let (start, end, lasts, relation) = patterns();
    if let Some(c) = start.captures(sentence) {
        return Some(StatementKind::Anchor {
            event: normalize_label(&c[1]),
            start: Some(c[2].parse().ok()?),
            end: None,
        });
    }
    if let Some(c) = end.captures(sentence) {
        return Some(StatementKind::Anchor {
            event: normalize_label(&c[1]),
            start: None,
            end: Some(c[2].parse().ok()?),
        });
    }
    if let Some(c) = lasts.captures(sentence) {
        return Some(StatementKind::Duration {
            event: normalize_label(&c[1]),
            days: c[2].parse().ok()?,
        });
    }
    if let Some(c) = relation.captures(sentence) {
        let subject = normalize_label(&c[1]);
        let object = normalize_label(&c[3]);
        if subject.is_empty() || object.is_empty() {
            return None;
        }
        return Some(StatementKind::Relation {
            subject,
            relation: phrase_to_relation(&c[2]),
            object,
        });
    }
    None
}

/// Render a statement back into its canonical grammar sentence. Relations
/// without a direct phrase render with swapped arguments and the converse.
pub fn render_statement(kind: &StatementKind) -> String {
    match kind {
        StatementKind::Relation {
            subject,
            relation,
            object,
        } => match relation_to_phrase(*relation) {
            Some(phrase) => format!("{subject} {phrase} {object}"),
            None => {
                let phrase = relation_to_phrase(relation.converse())
                    .expect("converse of an inverse relation is direct");
                format!("{object} {phrase} {subject}")
            }
        },
        StatementKind::Anchor { event, start, end } => match (start, end) {
            (Some(n), _) => format!("{event} starts on day {n}"),
            (None, Some(n)) => format!("{event} ends on day {n}"),
            (None, None) => unreachable!("anchor with no endpoint"),
        },
        StatementKind::Duration { event, days } => format!("{event} lasts {days} days"),
    }
}

/// Render a relation for a vertex pair, normalizing inverse relations.
pub fn render_relation_sentence(subject: &str, rel: AllenRelation, object: &str) -> String {
    render_statement(&StatementKind::Relation {
        subject: subject.to_string(),
        relation: rel,
        object: object.to_string(),
    })
}

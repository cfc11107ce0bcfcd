//! Tier rendering: project a timeline into documents with tier-controlled
//! structural fidelity.
//!
//! Structured renders anchors for every event plus one grammar sentence per
//! adjacent-pair relation, noise-free. Semi applies relation flips toward a
//! conceptual neighbor and per-sentence drops on the same sentence set.
//! Unstructured additionally rewrites sentences into out-of-grammar
//! narrative that the parser refuses, which is how implicit structure gets
//! lost. Distractor documents carry narrative about unrelated events.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::compiler::{render_relation_sentence, Document};
use crate::util::derive_seed;

use super::timeline::{Timeline, DISTRACTOR_LABELS};
use super::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Structured,
    Semi,
    Unstructured,
}

impl Tier {
    pub fn name(&self) -> &'static str {
        match self {
            Tier::Structured => "structured",
            Tier::Semi => "semi",
            Tier::Unstructured => "unstructured",
        }
    }

    pub fn from_name(s: &str) -> Option<Tier> {
        match s {
            "structured" => Some(Tier::Structured),
            "semi" => Some(Tier::Semi),
            "unstructured" => Some(Tier::Unstructured),
            _ => None,
        }
    }
}

impl std::fmt::Display for Tier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Noise knobs per tier; the structured tier forces all noise to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierSpec {
    pub tier: Tier,
    pub p_flip: f64,
    pub p_drop: f64,
    pub p_paraphrase: f64,
    pub distractors: usize,
}

impl TierSpec {
    /// Default noise regime for a tier.
    pub fn defaults(tier: Tier) -> TierSpec {
        match tier {
            Tier::Structured => TierSpec {
                tier,
                p_flip: 0.0,
                p_drop: 0.0,
                p_paraphrase: 0.0,
                distractors: 0,
            },
            Tier::Semi => TierSpec {
                tier,
                p_flip: 0.15,
                p_drop: 0.15,
                p_paraphrase: 0.0,
                distractors: 2,
            },
            Tier::Unstructured => TierSpec {
                tier,
                p_flip: 0.0,
                p_drop: 0.15,
                p_paraphrase: 0.6,
                distractors: 2,
            },
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        for (name, p) in [
            ("p_flip", self.p_flip),
            ("p_drop", self.p_drop),
            ("p_paraphrase", self.p_paraphrase),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(BenchError::InvalidSpec(format!("{name}={p} out of [0,1]")));
            }
        }
        if self.tier == Tier::Structured
            && (self.p_flip != 0.0
                || self.p_drop != 0.0
                || self.p_paraphrase != 0.0
                || self.distractors != 0)
        {
            return Err(BenchError::InvalidSpec(
                "structured tier forces all noise to zero".to_string(),
            ));
        }
        Ok(())
    }
}

enum BaseSentence {
    Anchor { text: String, label: String },
    Relation { i: usize, j: usize },
}

/// Render a timeline into one-sentence documents under the given spec.
/// Deterministic per seed; each sentence draws from its own derived stream
/// so edits to one branch never shift another sentence's noise.
pub fn render_tier(tl: &Timeline, spec: &TierSpec, seed: u64) -> Vec<Document> {
    spec.validate().expect("validated spec");
    let mut base = Vec::new();
    for (label, iv) in &tl.events {
        base.push(BaseSentence::Anchor {
            text: format!("{label} starts on day {}", iv.start()),
            label: label.clone(),
        });
        base.push(BaseSentence::Anchor {
            text: format!("{label} ends on day {}", iv.end()),
            label: label.clone(),
        });
    }
    for i in 0..tl.len().saturating_sub(1) {
        base.push(BaseSentence::Relation { i, j: i + 1 });
    }

    let mut docs = Vec::new();
    for (idx, sentence) in base.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, idx as u64));
        if spec.p_drop > 0.0 && rng.gen::<f64>() < spec.p_drop {
            continue;
        }
        let text = match sentence {
            BaseSentence::Anchor { text, label } => {
                if spec.p_paraphrase > 0.0 && rng.gen::<f64>() < spec.p_paraphrase {
                    anchor_paraphrase(&mut rng, label)
                } else {
                    text.clone()
                }
            }
            BaseSentence::Relation { i, j } => {
                let mut rel = tl.truth(*i, *j);
                if spec.p_flip > 0.0 && rng.gen::<f64>() < spec.p_flip {
                    let neighbors = rel.neighbors();
                    rel = neighbors[rng.gen_range(0..neighbors.len())];
                }
                if spec.p_paraphrase > 0.0 && rng.gen::<f64>() < spec.p_paraphrase {
                    relation_paraphrase(&mut rng, tl.label(*i), tl.label(*j))
                } else {
                    render_relation_sentence(tl.label(*i), rel, tl.label(*j))
                }
            }
        };
        docs.push(Document {
            id: format!("d{:03}", docs.len()),
            tier: spec.tier.name().to_string(),
            sentences: vec![text],
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xD15C));
    for k in 0..spec.distractors {
        let a = DISTRACTOR_LABELS[k % DISTRACTOR_LABELS.len()];
        let b = DISTRACTOR_LABELS[(k + 1) % DISTRACTOR_LABELS.len()];
        let text = relation_paraphrase(&mut rng, a, b);
        docs.push(Document {
            id: format!("d{:03}", docs.len()),
            tier: spec.tier.name().to_string(),
            sentences: vec![text],
        });
    }
    docs
}

/// Out-of-grammar narrative mentioning both labels; always unparseable.
pub(crate) fn relation_paraphrase(rng: &mut ChaCha8Rng, a: &str, b: &str) -> String {
    const TEMPLATES: [&str; 4] = [
        "in the aftermath of {a}, {b} lingered on",
        "later that week, {a} and {b} felt entangled",
        "somewhere amid {a} and {b}, the season turned",
        "{a} gave way, and eventually {b} followed in memory",
    ];
    let t = TEMPLATES[rng.gen_range(0..TEMPLATES.len())];
    t.replace("{a}", a).replace("{b}", b)
}

/// Out-of-grammar narrative mentioning one label; always unparseable.
pub(crate) fn anchor_paraphrase(rng: &mut ChaCha8Rng, e: &str) -> String {
    const TEMPLATES: [&str; 3] = [
        "around that spring, {e} came and went",
        "no one recalls exactly when {e} happened",
        "{e} unfolded in its own quiet time",
    ];
    let t = TEMPLATES[rng.gen_range(0..TEMPLATES.len())];
    t.replace("{e}", e)
}

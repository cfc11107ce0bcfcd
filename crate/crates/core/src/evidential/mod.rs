//! Dirichlet evidence over the 13 relation classes and the epistemic
//! uncertainty measures derived from it.
//!
//! The evidence-provider contract lives in [`provider`]; it stands in for a
//! neural extractor head, mapping parsed relation statements to a relation
//! proposal plus concentration parameters.

mod provider;

pub use provider::{
    EvidenceProvider, NoisyProvider, ProviderConfig, RemoteProvider, RuleBasedProvider,
    StatementContext,
};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};
use thiserror::Error;

use crate::temporal::AllenRelation;

pub const NUM_RELATIONS: usize = 13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvidenceError {
    #[error("invalid Dirichlet concentration: {0}")]
    InvalidAlpha(String),
    #[error("s_max must be a finite value > {k}, got {got}", k = NUM_RELATIONS)]
    InvalidSMax { got: f64 },
}

/// Concentration vector over the 13 Allen basic relations, aligned with the
/// `AllenRelation` index order. Every component must be finite and positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DirichletEvidence {
    alpha: [f64; NUM_RELATIONS],
}

impl DirichletEvidence {
    pub fn new(alpha: [f64; NUM_RELATIONS]) -> Result<DirichletEvidence, EvidenceError> {
        for (k, &a) in alpha.iter().enumerate() {
            if !(a.is_finite() && a > 0.0) {
                return Err(EvidenceError::InvalidAlpha(format!(
                    "alpha[{k}] = {a} (must be finite and > 0)"
                )));
            }
        }
        Ok(DirichletEvidence { alpha })
    }

    /// All-ones vector: vacuous evidence, maximal uncertainty.
    pub fn uniform() -> DirichletEvidence {
        DirichletEvidence {
            alpha: [1.0; NUM_RELATIONS],
        }
    }

    /// `evidence` concentration on one relation, 1 elsewhere.
    pub fn concentrated(rel: AllenRelation, evidence: f64) -> DirichletEvidence {
        let mut alpha = [1.0; NUM_RELATIONS];
        alpha[rel.index()] = evidence.max(1.0);
        DirichletEvidence { alpha }
    }

    /// Symmetric vector with the given total mass.
    pub fn symmetric(total: f64) -> DirichletEvidence {
        DirichletEvidence {
            alpha: [total.max(f64::MIN_POSITIVE) / NUM_RELATIONS as f64; NUM_RELATIONS],
        }
    }

    pub fn alpha(&self) -> &[f64; NUM_RELATIONS] {
        &self.alpha
    }

    pub fn total(&self) -> f64 {
        self.alpha.iter().sum()
    }

    /// The relation with the largest concentration (first index on ties).
    pub fn mode(&self) -> AllenRelation {
        let mut best = 0;
        for k in 1..NUM_RELATIONS {
            if self.alpha[k] > self.alpha[best] {
                best = k;
            }
        }
        AllenRelation::from_index(best).expect("index in range")
    }

    /// Cumulative fusion: evidence masses (α − 1) add up over sources.
    pub fn fuse<'a>(sources: impl IntoIterator<Item = &'a DirichletEvidence>) -> DirichletEvidence {
        let mut alpha = [1.0; NUM_RELATIONS];
        for d in sources {
            for k in 0..NUM_RELATIONS {
                alpha[k] += d.alpha[k] - 1.0;
            }
        }
        // Guard against degenerate negative mass from sub-one inputs.
        for a in &mut alpha {
            *a = a.max(f64::MIN_POSITIVE);
        }
        DirichletEvidence { alpha }
    }
}

impl TryFrom<Vec<f64>> for DirichletEvidence {
    type Error = EvidenceError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        let alpha: [f64; NUM_RELATIONS] = v.try_into().map_err(|v: Vec<f64>| {
            EvidenceError::InvalidAlpha(format!("expected 13 components, got {}", v.len()))
        })?;
        DirichletEvidence::new(alpha)
    }
}

impl From<DirichletEvidence> for Vec<f64> {
    fn from(d: DirichletEvidence) -> Vec<f64> {
        d.alpha.to_vec()
    }
}

/// Closed-form differential entropy of a Dirichlet with arbitrary dimension:
/// `ln B(α) + (α₀ − K)·ψ(α₀) − Σ (α_j − 1)·ψ(α_j)`. May be negative.
pub fn dirichlet_entropy_general(alpha: &[f64]) -> Result<f64, EvidenceError> {
    if alpha.len() < 2 {
        return Err(EvidenceError::InvalidAlpha(
            "need at least 2 components".to_string(),
        ));
    }
    for (k, &a) in alpha.iter().enumerate() {
        if !(a.is_finite() && a > 0.0) {
            return Err(EvidenceError::InvalidAlpha(format!(
                "alpha[{k}] = {a} (must be finite and > 0)"
            )));
        }
    }
    let a0: f64 = alpha.iter().sum();
    let k = alpha.len() as f64;
    let ln_b: f64 = alpha.iter().map(|&a| ln_gamma(a)).sum::<f64>() - ln_gamma(a0);
    let cross: f64 = alpha.iter().map(|&a| (a - 1.0) * digamma(a)).sum();
    Ok(ln_b + (a0 - k) * digamma(a0) - cross)
}

pub fn dirichlet_entropy(d: &DirichletEvidence) -> f64 {
    dirichlet_entropy_general(&d.alpha[..]).expect("validated on construction")
}

/// Subjective-logic uncertainty mass `K / Σα`, clamped into `(0, 1]`.
pub fn vacuity(d: &DirichletEvidence) -> f64 {
    (NUM_RELATIONS as f64 / d.total()).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EpistemicMeasure {
    /// `K / Σα`: bounded, anchor-free.
    #[default]
    Vacuity,
    /// Differential entropy min-max normalized between the uniform Dirichlet
    /// (above) and the symmetric vector at the `s_max` evidence cap (below).
    NormalizedEntropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpistemicConfig {
    pub measure: EpistemicMeasure,
    pub s_max: f64,
}

impl Default for EpistemicConfig {
    fn default() -> Self {
        EpistemicConfig {
            measure: EpistemicMeasure::Vacuity,
            s_max: 100.0,
        }
    }
}

impl EpistemicConfig {
    pub fn validate(&self) -> Result<(), EvidenceError> {
        if !(self.s_max.is_finite() && self.s_max > NUM_RELATIONS as f64) {
            return Err(EvidenceError::InvalidSMax { got: self.s_max });
        }
        Ok(())
    }
}

/// Epistemic uncertainty in `[0, 1]`: 1 at the uniform Dirichlet by
/// construction, shrinking as total evidence accumulates.
pub fn normalized_epistemic(d: &DirichletEvidence, cfg: &EpistemicConfig) -> f64 {
    match cfg.measure {
        EpistemicMeasure::Vacuity => vacuity(d),
        EpistemicMeasure::NormalizedEntropy => {
            let h = dirichlet_entropy(d);
            let h_hi = dirichlet_entropy(&DirichletEvidence::uniform());
            let h_lo = dirichlet_entropy(&DirichletEvidence::symmetric(cfg.s_max));
            ((h - h_lo) / (h_hi - h_lo)).clamp(0.0, 1.0)
        }
    }
}

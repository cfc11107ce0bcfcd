//! The probabilistic inconsistency signal.
//!
//! Per step, `l_inc = β·e + (1−β)·Φ(L,U)` fuses the normalized epistemic
//! term `e` with the credal contradiction penalty Φ. Per trace,
//! `J = Σ_k γ^{k−1}·l_inc(s_k) + Σ_{k≥2} Ψ(s_{k−1}, s_k)` adds a
//! depth-discounted aggregate and a structural-continuity penalty for
//! consecutive steps that touch disjoint vertex sets. The threshold τ and
//! the component comparison drive repair selection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::credal::{phi_penalty, CredalError, CredalInterval, PhiMode};
use crate::evidential::{
    normalized_epistemic, DirichletEvidence, EpistemicConfig, EpistemicMeasure, EvidenceError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PisError {
    #[error(transparent)]
    Credal(#[from] CredalError),
    #[error(transparent)]
    Evidence(#[from] EvidenceError),
    #[error("trace is empty")]
    EmptyTrace,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Fusion, discount, penalty and threshold parameters.
///
/// The default threshold/measure pair is the working operating point:
/// concentrated evidence normalizes to zero under the entropy measure, so a
/// healthy step scores exactly 0 and any credal collapse scores at least
/// `(1−β)·ε`, which τ sits safely below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PISConfig {
    pub beta: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub lambda_psi: f64,
    pub phi_mode: PhiMode,
    pub epistemic: EpistemicConfig,
}

impl Default for PISConfig {
    fn default() -> Self {
        PISConfig {
            beta: 0.5,
            gamma: 0.9,
            epsilon: 0.1,
            tau: 0.03,
            lambda_psi: 0.05,
            phi_mode: PhiMode::Gated,
            epistemic: EpistemicConfig {
                measure: EpistemicMeasure::NormalizedEntropy,
                s_max: 100.0,
            },
        }
    }
}

impl PISConfig {
    pub fn validate(&self) -> Result<(), PisError> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(PisError::InvalidConfig(msg.to_string()))
            }
        };
        check((0.0..=1.0).contains(&self.beta), "beta must be in [0,1]")?;
        check(
            self.gamma > 0.0 && self.gamma <= 1.0,
            "gamma must be in (0,1]",
        )?;
        check(
            self.epsilon > 0.0 && self.epsilon <= 1.0,
            "epsilon must be in (0,1]",
        )?;
        check(self.tau > 0.0 && self.tau <= 1.0, "tau must be in (0,1]")?;
        check(
            self.lambda_psi >= 0.0 && self.lambda_psi.is_finite(),
            "lambda_psi must be >= 0",
        )?;
        self.epistemic.validate()?;
        Ok(())
    }
}

/// Step-level signal with its components kept separate for cause attribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSignal {
    pub l_inc: f64,
    pub epistemic_term: f64,
    pub credal_term: f64,
    pub credal: CredalInterval,
}

impl StepSignal {
    /// Rebuild a signal from raw components, keeping the fusion invariant
    /// `l_inc = β·e + (1−β)·c` by construction. Used by fixtures and replay.
    pub fn from_components(
        epistemic_term: f64,
        credal_term: f64,
        credal: CredalInterval,
        cfg: &PISConfig,
    ) -> StepSignal {
        StepSignal {
            l_inc: cfg.beta * epistemic_term + (1.0 - cfg.beta) * credal_term,
            epistemic_term,
            credal_term,
            credal,
        }
    }
}

/// Fuse one step's credal interval and Dirichlet evidence into its signal.
pub fn step_inconsistency(
    ci: &CredalInterval,
    d: &DirichletEvidence,
    cfg: &PISConfig,
) -> Result<StepSignal, PisError> {
    cfg.validate()?;
    let e = normalized_epistemic(d, &cfg.epistemic);
    let c = phi_penalty(ci, cfg.epsilon, cfg.phi_mode)?;
    Ok(StepSignal::from_components(e, c, *ci, cfg))
}

/// Ψ: `lambda_psi` when two consecutive steps touch disjoint vertex sets,
/// else 0.
pub fn continuity_penalty(
    prev_vertices: &[usize],
    cur_vertices: &[usize],
    cfg: &PISConfig,
) -> f64 {
    let overlap = prev_vertices.iter().any(|v| cur_vertices.contains(v));
    if overlap {
        0.0
    } else {
        cfg.lambda_psi
    }
}

/// One scored step as seen by the trace aggregator.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub signal: StepSignal,
    pub vertices: Vec<usize>,
}

/// Trace-level aggregate with the per-step decomposition retained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSignal {
    pub j_pis: f64,
    pub per_step: Vec<StepSignal>,
    pub psi_terms: Vec<f64>,
}

/// Exact discounted aggregation over a non-empty trace.
pub fn trace_inconsistency(steps: &[TraceStep], cfg: &PISConfig) -> Result<TraceSignal, PisError> {
    if steps.is_empty() {
        return Err(PisError::EmptyTrace);
    }
    let mut j = 0.0;
    let mut psi_terms = Vec::with_capacity(steps.len());
    let mut discount = 1.0;
    for (k, step) in steps.iter().enumerate() {
        j += discount * step.signal.l_inc;
        discount *= cfg.gamma;
        let psi = if k == 0 {
            0.0
        } else {
            continuity_penalty(&steps[k - 1].vertices, &step.vertices, cfg)
        };
        j += psi;
        psi_terms.push(psi);
    }
    Ok(TraceSignal {
        j_pis: j,
        per_step: steps.iter().map(|s| s.signal.clone()).collect(),
        psi_terms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Cause {
    #[default]
    None,
    EpistemicDominant,
    CredalDominant,
}

impl Cause {
    pub fn as_str(&self) -> &'static str {
        match self {
            Cause::None => "none",
            Cause::EpistemicDominant => "epistemic_dominant",
            Cause::CredalDominant => "credal_dominant",
        }
    }
}

/// Threshold logic driving repair selection: below τ nothing fires; above
/// it, whichever weighted component carries more mass names the cause.
pub fn classify_cause(sig: &StepSignal, cfg: &PISConfig) -> Cause {
    if sig.l_inc <= cfg.tau {
        return Cause::None;
    }
    if cfg.beta * sig.epistemic_term >= (1.0 - cfg.beta) * sig.credal_term {
        Cause::EpistemicDominant
    } else {
        Cause::CredalDominant
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evidential::EpistemicMeasure;

    fn cfg() -> PISConfig {
        PISConfig::default()
    }

    fn vac_cfg(beta: f64) -> PISConfig {
        PISConfig {
            beta,
            epistemic: EpistemicConfig {
                measure: EpistemicMeasure::Vacuity,
                s_max: 100.0,
            },
            ..PISConfig::default()
        }
    }

    #[test]
    fn beta_one_is_pure_epistemic() {
        let cfg = vac_cfg(1.0);
        let d = DirichletEvidence::new([2.0; 13]).unwrap(); // vacuity 0.5
        let sig = step_inconsistency(&CredalInterval::contradiction(), &d, &cfg).unwrap();
        assert_eq!(sig.l_inc, 0.5);
        assert_eq!(sig.l_inc, sig.epistemic_term);
    }

    #[test]
    fn beta_zero_full_width_is_zero() {
        let cfg = vac_cfg(0.0);
        let d = DirichletEvidence::uniform();
        let sig = step_inconsistency(&CredalInterval::vacuous(), &d, &cfg).unwrap();
        assert_eq!(sig.l_inc, 0.0);
    }

    #[test]
    fn half_half_arithmetic() {
        // β=0.5, e=1.0, ci=[0,0], ε=0.1 → 0.5·1.0 + 0.5·0.1 = 0.55
        let cfg = vac_cfg(0.5);
        let d = DirichletEvidence::uniform(); // vacuity exactly 1
        let sig = step_inconsistency(&CredalInterval::contradiction(), &d, &cfg).unwrap();
        assert!((sig.l_inc - 0.55).abs() < 1e-15);
        assert_eq!(sig.epistemic_term, 1.0);
        assert!((sig.credal_term - 0.1).abs() < 1e-15);
    }

    #[test]
    fn l_inc_stays_in_unit_interval() {
        for beta in [0.0, 0.3, 0.5, 1.0] {
            let cfg = vac_cfg(beta);
            for total in [13.0, 26.0, 62.0, 200.0] {
                let d = DirichletEvidence::symmetric(total);
                for ci in [
                    CredalInterval::contradiction(),
                    CredalInterval::vacuous(),
                    CredalInterval::certain(),
                    CredalInterval::new(0.1, 0.15).unwrap(),
                ] {
                    let sig = step_inconsistency(&ci, &d, &cfg).unwrap();
                    assert!((0.0..=1.0).contains(&sig.l_inc), "l_inc {}", sig.l_inc);
                }
            }
        }
    }

    #[test]
    fn continuity_penalty_cases() {
        let c = cfg();
        assert_eq!(continuity_penalty(&[0, 1], &[1, 2], &c), 0.0);
        assert_eq!(continuity_penalty(&[0, 1], &[2, 3], &c), c.lambda_psi);
        let zeroed = PISConfig {
            lambda_psi: 0.0,
            ..c
        };
        assert_eq!(continuity_penalty(&[0, 1], &[2, 3], &zeroed), 0.0);
    }

    fn raw_step(l: f64, vertices: Vec<usize>, cfg: &PISConfig) -> TraceStep {
        // β=1 route lets tests pin l_inc directly through the epistemic term.
        let mut c = *cfg;
        c.beta = 1.0;
        TraceStep {
            signal: StepSignal::from_components(l, 0.0, CredalInterval::vacuous(), &c),
            vertices,
        }
    }

    #[test]
    fn single_step_trace_is_its_own_signal() {
        let c = cfg();
        let t = [raw_step(0.7, vec![0, 1], &c)];
        let sig = trace_inconsistency(&t, &c).unwrap();
        assert_eq!(sig.j_pis, 0.7);
        assert_eq!(sig.psi_terms, vec![0.0]);
    }

    #[test]
    fn undiscounted_connected_pair_sums() {
        let c = PISConfig {
            gamma: 1.0,
            ..cfg()
        };
        let t = [
            raw_step(0.2, vec![0, 1], &c),
            raw_step(0.3, vec![1, 2], &c),
        ];
        let sig = trace_inconsistency(&t, &c).unwrap();
        assert!((sig.j_pis - 0.5).abs() < 1e-15);
    }

    #[test]
    fn discounted_disjoint_pair() {
        let c = PISConfig {
            gamma: 0.5,
            lambda_psi: 0.05,
            ..cfg()
        };
        let t = [
            raw_step(0.2, vec![0, 1], &c),
            raw_step(0.4, vec![2, 3], &c),
        ];
        let sig = trace_inconsistency(&t, &c).unwrap();
        // 0.2 + 0.5·0.4 + 0.05
        assert!((sig.j_pis - 0.45).abs() < 1e-15);
        assert_eq!(sig.psi_terms[1], 0.05);
    }

    #[test]
    fn hand_computed_fixtures_match_to_1e12() {
        // Fixture A: γ=0.9, connected: 0.2 + 0.9·0.4 + 0.81·0.1 = 0.641
        let a_cfg = PISConfig {
            gamma: 0.9,
            ..cfg()
        };
        let a = [
            raw_step(0.2, vec![0, 1], &a_cfg),
            raw_step(0.4, vec![1, 2], &a_cfg),
            raw_step(0.1, vec![2, 3], &a_cfg),
        ];
        assert!((trace_inconsistency(&a, &a_cfg).unwrap().j_pis - 0.641).abs() < 1e-12);

        // Fixture B: γ=0.5, disjoint: 0.3 + 0.5·0.5 + 0.05 = 0.6
        let b_cfg = PISConfig {
            gamma: 0.5,
            lambda_psi: 0.05,
            ..cfg()
        };
        let b = [
            raw_step(0.3, vec![0, 1], &b_cfg),
            raw_step(0.5, vec![2, 3], &b_cfg),
        ];
        assert!((trace_inconsistency(&b, &b_cfg).unwrap().j_pis - 0.6).abs() < 1e-12);

        // Fixture C: γ=0.3 single step: 0.7
        let c_cfg = PISConfig {
            gamma: 0.3,
            ..cfg()
        };
        let c = [raw_step(0.7, vec![0], &c_cfg)];
        assert!((trace_inconsistency(&c, &c_cfg).unwrap().j_pis - 0.7).abs() < 1e-12);
    }

    #[test]
    fn empty_trace_is_an_error() {
        assert_eq!(
            trace_inconsistency(&[], &cfg()).unwrap_err(),
            PisError::EmptyTrace
        );
    }

    #[test]
    fn moving_a_hot_step_earlier_never_decreases_j() {
        let c = PISConfig {
            gamma: 0.9,
            lambda_psi: 0.0,
            ..cfg()
        };
        let cool: Vec<f64> = vec![0.1, 0.05, 0.2, 0.0];
        let hot = 0.9;
        let mut prev = -1.0;
        // Insert the hot step at each position from last to first; the
        // shared vertex keeps Ψ at zero.
        for pos in (0..=cool.len()).rev() {
            let mut ls = cool.clone();
            ls.insert(pos, hot);
            let steps: Vec<TraceStep> =
                ls.iter().map(|&l| raw_step(l, vec![0, 1], &c)).collect();
            let j = trace_inconsistency(&steps, &c).unwrap().j_pis;
            assert!(j >= prev - 1e-12, "J decreased moving hot step earlier");
            prev = j;
        }
    }

    #[test]
    fn classify_cause_cases() {
        let below = PISConfig {
            tau: 0.4,
            ..vac_cfg(0.5)
        };
        let low = StepSignal::from_components(0.2, 0.0, CredalInterval::vacuous(), &below);
        assert_eq!(classify_cause(&low, &below), Cause::None);

        // β=0.5, e=0.9, c=0.02: l=0.46 > 0.4 and 0.45 ≥ 0.01.
        let sig = StepSignal::from_components(
            0.9,
            0.02,
            CredalInterval::new(0.0, 0.08).unwrap(),
            &below,
        );
        assert!((sig.l_inc - 0.46).abs() < 1e-15);
        assert_eq!(classify_cause(&sig, &below), Cause::EpistemicDominant);

        // β=0 with a collapsed interval: pure credal mass.
        let credal_cfg = PISConfig {
            beta: 0.0,
            tau: 0.05,
            ..vac_cfg(0.0)
        };
        let sig = StepSignal::from_components(
            1.0,
            0.1,
            CredalInterval::contradiction(),
            &credal_cfg,
        );
        assert!(sig.l_inc > credal_cfg.tau);
        assert_eq!(classify_cause(&sig, &credal_cfg), Cause::CredalDominant);
    }

    #[test]
    fn determinism_bit_identical() {
        let c = cfg();
        let steps = [
            raw_step(0.123456789, vec![0, 1], &c),
            raw_step(0.987654321, vec![3, 4], &c),
        ];
        let a = trace_inconsistency(&steps, &c).unwrap();
        let b = trace_inconsistency(&steps, &c).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_eq!(a.j_pis.to_bits(), b.j_pis.to_bits());
    }

    #[test]
    fn config_validation() {
        assert!(PISConfig::default().validate().is_ok());
        assert!(PISConfig {
            beta: 1.2,
            ..cfg()
        }
        .validate()
        .is_err());
        assert!(PISConfig {
            gamma: 0.0,
            ..cfg()
        }
        .validate()
        .is_err());
        assert!(PISConfig {
            epsilon: 0.0,
            ..cfg()
        }
        .validate()
        .is_err());
    }
}

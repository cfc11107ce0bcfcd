//! Evaluation harness: run the full pipeline per instance under a system
//! variant, aggregate accuracy with FP/FN diagnostics and step-level
//! failure localization, and drive the ablation matrix.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compiler::{parse_documents, retrieve, Document, Question, StatementKind};
use crate::config::RunConfig;
use crate::evidential::{EvidenceProvider, RuleBasedProvider};
use crate::orchestrator::{
    answer_question, mcts_search, Answer, Blackboard, SearchOptions, SearchOutcome, Verdict,
};
use crate::pis::Cause;
use crate::util::{derive_seed, fnv1a64};

use super::questions::{GoldAnswer, QAInstance};
use super::render::Tier;
use super::BenchError;

/// System variants: the full pipeline plus the ablations and baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum SystemVariant {
    FullPis,
    NoPis,
    NoCredal,
    NoNeural,
    NoStep,
    NeuralOnly,
    SymbolicOnly,
}

impl SystemVariant {
    pub const ALL: [SystemVariant; 7] = [
        SystemVariant::FullPis,
        SystemVariant::NoPis,
        SystemVariant::NoCredal,
        SystemVariant::NoNeural,
        SystemVariant::NoStep,
        SystemVariant::NeuralOnly,
        SystemVariant::SymbolicOnly,
    ];

    /// The ablation-table rows (full + four component removals).
    pub const ABLATIONS: [SystemVariant; 5] = [
        SystemVariant::FullPis,
        SystemVariant::NoPis,
        SystemVariant::NoCredal,
        SystemVariant::NoNeural,
        SystemVariant::NoStep,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SystemVariant::FullPis => "full_pis",
            SystemVariant::NoPis => "no_pis",
            SystemVariant::NoCredal => "no_credal",
            SystemVariant::NoNeural => "no_neural",
            SystemVariant::NoStep => "no_step",
            SystemVariant::NeuralOnly => "neural_only",
            SystemVariant::SymbolicOnly => "symbolic_only",
        }
    }

    pub fn from_name(s: &str) -> Result<SystemVariant, BenchError> {
        Self::ALL
            .iter()
            .copied()
            .find(|v| v.name() == s)
            .ok_or_else(|| BenchError::UnknownVariant(s.to_string()))
    }
}

/// Search options and provider implied by a variant over a base config.
pub fn variant_options(variant: SystemVariant, cfg: &RunConfig) -> SearchOptions {
    let mut opts = SearchOptions::new(cfg.pis, cfg.mcts);
    match variant {
        SystemVariant::FullPis | SystemVariant::NeuralOnly => {}
        SystemVariant::NoPis => {
            opts.ignore_signals = true;
            opts.repairs_enabled = false;
        }
        SystemVariant::NoCredal => opts.pis.beta = 1.0,
        SystemVariant::NoNeural => opts.pis.beta = 0.0,
        SystemVariant::NoStep => opts.trace_level_tau = true,
        SystemVariant::SymbolicOnly => opts.repairs_enabled = false,
    }
    opts
}

fn variant_provider(
    variant: SystemVariant,
    cfg: &RunConfig,
    seed: u64,
) -> Box<dyn EvidenceProvider> {
    match variant {
        SystemVariant::SymbolicOnly => Box::new(RuleBasedProvider),
        _ => cfg.provider.build(seed),
    }
}

/// Outcome of one instance run.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub answer: Answer,
    pub search: Option<SearchOutcome>,
    /// (step index, cause) for steps whose signal crossed τ.
    pub flagged: Vec<(usize, Cause)>,
}

/// Full pipeline for one instance: retrieve → compile → search → answer.
pub fn solve_instance(
    instance: &QAInstance,
    cfg: &RunConfig,
    variant: SystemVariant,
) -> SolveResult {
    let provider_seed = derive_seed(cfg.seed, fnv1a64(instance.id.as_bytes()));
    let provider = variant_provider(variant, cfg, provider_seed);

    if variant == SystemVariant::NeuralOnly {
        return neural_only(instance, provider.as_ref());
    }

    let k = cfg.retrieval_k.unwrap_or(instance.context.len()).max(1);
    let retrieved = match retrieve(&instance.context, &instance.question, k) {
        Ok(docs) => docs,
        Err(_) => Vec::new(),
    };
    let (statements, _) = parse_documents(&retrieved);
    let compiled = match crate::compiler::compile(&statements, provider.as_ref()) {
        Ok(c) => c,
        Err(err) => {
            log::warn!("instance {}: compile failed: {err}", instance.id);
            return SolveResult {
                answer: Answer {
                    verdict: Verdict::Unknown,
                    supporting_credal: crate::credal::CredalInterval::vacuous(),
                    trace_ref: None,
                },
                search: None,
                flagged: Vec::new(),
            };
        }
    };
    let bb = Blackboard::new(
        instance.question.clone(),
        instance.context.clone(),
        &retrieved,
        compiled,
    );
    let opts = variant_options(variant, cfg);
    let outcome = mcts_search(&bb, &opts, provider.as_ref()).expect("validated configuration");
    let flagged = outcome
        .bb
        .trace
        .steps
        .iter()
        .enumerate()
        .filter(|(_, s)| s.cause != Cause::None)
        .map(|(k, s)| (k + 1, s.cause))
        .collect();
    let mut answer = answer_question(&outcome.bb, opts.scenario_bound);
    answer.trace_ref = Some(instance.id.clone());
    SolveResult {
        answer,
        search: Some(outcome),
        flagged,
    }
}

/// Baseline without a solver: take the provider's proposal on a statement
/// matching the question pair directly as the answer.
fn neural_only(instance: &QAInstance, provider: &dyn EvidenceProvider) -> SolveResult {
    let Question::Entailment {
        subject,
        object,
        relations,
    } = &instance.question
    else {
        return SolveResult {
            answer: Answer {
                verdict: Verdict::Unknown,
                supporting_credal: crate::credal::CredalInterval::vacuous(),
                trace_ref: Some(instance.id.clone()),
            },
            search: None,
            flagged: Vec::new(),
        };
    };
    let refs: Vec<&Document> = instance.context.iter().collect();
    let (statements, _) = parse_documents(&refs);
    let mut verdict = Verdict::Unknown;
    for st in &statements {
        if let StatementKind::Relation {
            subject: s,
            relation,
            object: o,
        } = &st.kind
        {
            let (oriented, rel) = if s == subject && o == object {
                (true, *relation)
            } else if s == object && o == subject {
                (true, relation.converse())
            } else {
                (false, *relation)
            };
            if oriented {
                let (proposal, _) = provider.propose(&crate::evidential::StatementContext {
                    sentence: &st.text,
                    subject: s,
                    object: o,
                    relation: rel,
                });
                // Converse-normalize the proposal back onto the question
                // orientation when the statement was reversed.
                let proposal = if s == subject { proposal } else { proposal.converse() };
                verdict = if proposal.is_subset(*relations) {
                    Verdict::Yes
                } else {
                    Verdict::No
                };
                break;
            }
        }
    }
    SolveResult {
        answer: Answer {
            verdict,
            supporting_credal: crate::credal::CredalInterval::vacuous(),
            trace_ref: Some(instance.id.clone()),
        },
        search: None,
        flagged: Vec::new(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TierStats {
    pub total: usize,
    pub correct: usize,
    pub binary_total: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationRecord {
    pub instance: String,
    pub step: usize,
    pub cause: String,
}

/// Aggregate diagnostics. FP/FN are defined on the binary-question subset
/// (positive class = "yes"; unknown scores as the negative class);
/// arithmetic questions contribute to accuracy only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub variant: String,
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub binary_total: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub per_tier: BTreeMap<String, TierStats>,
    pub localization: Vec<LocalizationRecord>,
    pub repairs_applied: usize,
}

impl Diagnostics {
    /// Plain-text table for terminal output.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "variant: {}\n{:<14} {:>7} {:>9} {:>6} {:>6} {:>9}\n",
            self.variant, "tier", "total", "accuracy", "fp", "fn", "flagged"
        ));
        for (tier, stats) in &self.per_tier {
            out.push_str(&format!(
                "{:<14} {:>7} {:>9.4} {:>6} {:>6} {:>9}\n",
                tier,
                stats.total,
                stats.accuracy,
                stats.fp,
                stats.fn_,
                self.localization
                    .iter()
                    .filter(|l| l.instance.starts_with(tier))
                    .count(),
            ));
        }
        out.push_str(&format!(
            "{:<14} {:>7} {:>9.4} {:>6} {:>6} {:>9}\n",
            "overall", self.total, self.accuracy, self.fp, self.fn_,
            self.localization.len()
        ));
        out
    }
}

fn score(answer: &Answer, gold: &GoldAnswer) -> (bool, Option<(bool, bool)>) {
    match gold {
        GoldAnswer::Binary(truth) => {
            let predicted_yes = answer.verdict == Verdict::Yes;
            let correct = predicted_yes == *truth;
            (correct, Some((predicted_yes, *truth)))
        }
        GoldAnswer::Value(v) => (answer.verdict == Verdict::Value(*v), None),
    }
}

/// Run a variant over instances with a fixed global seed. Instances are
/// independent; evaluation parallelizes across them and aggregates in
/// instance order, so results do not depend on thread count.
pub fn evaluate(
    variant: SystemVariant,
    instances: &[QAInstance],
    cfg: &RunConfig,
    parallelism: usize,
) -> Diagnostics {
    let run = |inst: &QAInstance| -> (bool, Option<(bool, bool)>, Vec<(usize, Cause)>, usize) {
        let result = solve_instance(inst, cfg, variant);
        let (correct, binary) = score(&result.answer, &inst.gold);
        let repairs = result
            .search
            .as_ref()
            .map(|s| {
                s.bb.repair_log
                    .iter()
                    .filter(|r| r.outcome == crate::orchestrator::RepairOutcome::Applied)
                    .count()
            })
            .unwrap_or(0);
        (correct, binary, result.flagged, repairs)
    };

    let results: Vec<_> = if parallelism <= 1 {
        instances.iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .expect("thread pool");
        pool.install(|| instances.par_iter().map(run).collect())
    };

    let mut diag = Diagnostics {
        variant: variant.name().to_string(),
        total: instances.len(),
        correct: 0,
        accuracy: 0.0,
        binary_total: 0,
        fp: 0,
        fn_: 0,
        per_tier: BTreeMap::new(),
        localization: Vec::new(),
        repairs_applied: 0,
    };
    for (inst, (correct, binary, flagged, repairs)) in instances.iter().zip(results) {
        let tier = diag.per_tier.entry(inst.tier.name().to_string()).or_default();
        tier.total += 1;
        diag.repairs_applied += repairs;
        if correct {
            diag.correct += 1;
            tier.correct += 1;
        }
        if let Some((predicted_yes, truth)) = binary {
            diag.binary_total += 1;
            tier.binary_total += 1;
            if predicted_yes && !truth {
                diag.fp += 1;
                tier.fp += 1;
            }
            if !predicted_yes && truth {
                diag.fn_ += 1;
                tier.fn_ += 1;
            }
        }
        for (step, cause) in flagged {
            diag.localization.push(LocalizationRecord {
                instance: inst.id.clone(),
                step,
                cause: cause.as_str().to_string(),
            });
        }
    }
    diag.accuracy = if diag.total == 0 {
        0.0
    } else {
        diag.correct as f64 / diag.total as f64
    };
    for stats in diag.per_tier.values_mut() {
        stats.accuracy = if stats.total == 0 {
            0.0
        } else {
            stats.correct as f64 / stats.total as f64
        };
    }
    diag
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: String,
    pub tier: String,
    pub per_seed_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
    /// Mean accuracy minus the full pipeline's on the same tier and seeds.
    pub delta_vs_full: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct AblationTable {
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variant,tier,seeds,mean_accuracy,delta_vs_full\n");
        for row in &self.rows {
            let seeds = row
                .per_seed_accuracy
                .iter()
                .map(|a| format!("{a:.4}"))
                .collect::<Vec<_>>()
                .join(";");
            out.push_str(&format!(
                "{},{},{},{:.4},{:+.4}\n",
                row.variant, row.tier, seeds, row.mean_accuracy, row.delta_vs_full
            ));
        }
        out
    }
}

/// The variant × tier accuracy matrix over a seed list, deterministic given
/// the seeds. Instances are regenerated per seed so every variant sees
/// identical inputs.
pub fn run_ablation(
    tiers: &[Tier],
    variants: &[SystemVariant],
    seeds: &[u64],
    cfg: &RunConfig,
    n_per_seed: usize,
    parallelism: usize,
) -> Result<AblationTable, BenchError> {
    let mut table = AblationTable::default();
    for &tier in tiers {
        let spec = super::render::TierSpec::defaults(tier);
        let mut instance_sets = Vec::new();
        for &seed in seeds {
            instance_sets.push(super::questions::make_questions(&spec, seed, n_per_seed)?);
        }
        let mut full_mean = None;
        for &variant in variants {
            let per_seed: Vec<f64> = instance_sets
                .iter()
                .map(|instances| evaluate(variant, instances, cfg, parallelism).accuracy)
                .collect();
            let mean = per_seed.iter().sum::<f64>() / per_seed.len().max(1) as f64;
            if variant == SystemVariant::FullPis {
                full_mean = Some(mean);
            }
            let delta = mean - full_mean.unwrap_or(mean);
            table.rows.push(AblationRow {
                variant: variant.name().to_string(),
                tier: tier.name().to_string(),
                per_seed_accuracy: per_seed,
                mean_accuracy: mean,
                delta_vs_full: delta,
            });
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{make_questions, TierSpec};

    #[test]
    fn variant_names_round_trip() {
        for v in SystemVariant::ALL {
            assert_eq!(SystemVariant::from_name(v.name()).unwrap(), v);
        }
        assert!(SystemVariant::from_name("bogus").is_err());
    }

    #[test]
    fn variant_overrides_wire_through() {
        let cfg = RunConfig::default();
        assert_eq!(variant_options(SystemVariant::NoCredal, &cfg).pis.beta, 1.0);
        assert_eq!(variant_options(SystemVariant::NoNeural, &cfg).pis.beta, 0.0);
        assert!(variant_options(SystemVariant::NoStep, &cfg).trace_level_tau);
        let no_pis = variant_options(SystemVariant::NoPis, &cfg);
        assert!(no_pis.ignore_signals && !no_pis.repairs_enabled);
    }

    #[test]
    fn structured_smoke_is_perfect() {
        let spec = TierSpec::defaults(crate::bench::Tier::Structured);
        let instances = make_questions(&spec, 41, 12).unwrap();
        let cfg = RunConfig::default();
        let diag = evaluate(SystemVariant::FullPis, &instances, &cfg, 1);
        assert_eq!(diag.correct, diag.total, "{diag:?}");
        assert_eq!(diag.fp, 0);
        assert_eq!(diag.fn_, 0);
    }

    #[test]
    fn evaluation_is_parallelism_invariant() {
        let spec = TierSpec::defaults(crate::bench::Tier::Semi);
        let instances = make_questions(&spec, 17, 10).unwrap();
        let cfg = RunConfig::default();
        let serial = evaluate(SystemVariant::FullPis, &instances, &cfg, 1);
        let parallel = evaluate(SystemVariant::FullPis, &instances, &cfg, 4);
        assert_eq!(
            serde_json::to_string(&serial).unwrap(),
            serde_json::to_string(&parallel).unwrap()
        );
    }

    #[test]
    fn ablation_table_shape() {
        let cfg = RunConfig::default();
        let table = run_ablation(
            &[crate::bench::Tier::Semi],
            &SystemVariant::ABLATIONS,
            &[5],
            &cfg,
            6,
            2,
        )
        .unwrap();
        assert_eq!(table.rows.len(), 5);
        assert_eq!(table.rows[0].variant, "full_pis");
        assert_eq!(table.rows[0].delta_vs_full, 0.0);
        let csv = table.to_csv();
        assert_eq!(csv.lines().count(), 6);
    }
}

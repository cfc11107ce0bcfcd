//! Trace serialization: JSON Lines, one step per line, then a summary
//! record. Consumed by `inspect-trace`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::credal::CredalInterval;

use super::{Blackboard, RepairAction, StepKind, Verdict};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: usize,
    pub kind: StepKind,
    pub premises: Vec<(String, String)>,
    pub conclusion: ConclusionRecord,
    pub l_inc: f64,
    pub epistemic: f64,
    pub credal: CredalInterval,
    pub psi: f64,
    pub cause: String,
    pub repair: Option<RepairAction>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConclusionRecord {
    pub src: String,
    pub dst: String,
    pub relations: crate::temporal::RelationSet,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceSummary {
    pub j_pis: f64,
    pub verdict: Verdict,
    pub seed: u64,
}

/// Write one step per line plus the trailing summary record.
pub fn write_trace_jsonl(
    bb: &Blackboard,
    j_pis: f64,
    seed: u64,
    mut out: impl Write,
) -> std::io::Result<()> {
    let id_of = |v: usize| bb.graph.event(v).id.clone();
    for (k, step) in bb.trace.steps.iter().enumerate() {
        let record = StepRecord {
            k: k + 1,
            kind: step.kind,
            premises: step
                .premises
                .iter()
                .map(|&(a, b)| (id_of(a), id_of(b)))
                .collect(),
            conclusion: ConclusionRecord {
                src: id_of(step.conclusion.src),
                dst: id_of(step.conclusion.dst),
                relations: step.conclusion.relations,
            },
            l_inc: step.signal.l_inc,
            epistemic: step.signal.epistemic_term,
            credal: step.signal.credal,
            psi: step.psi,
            cause: step.cause.as_str().to_string(),
            repair: step.repair.clone(),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    let verdict = bb
        .trace
        .final_verdict
        .as_ref()
        .map(|a| a.verdict)
        .unwrap_or(Verdict::Unknown);
    serde_json::to_writer(
        &mut out,
        &TraceSummary {
            j_pis,
            verdict,
            seed,
        },
    )?;
    out.write_all(b"\n")
}

/// Parse a trace file back into step records and its summary.
pub fn read_trace_records(
    input: impl BufRead,
) -> Result<(Vec<StepRecord>, Option<TraceSummary>), serde_json::Error> {
    let mut steps = Vec::new();
    let mut summary = None;
    for line in input.lines() {
        let line = line.map_err(serde_json::Error::io)?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<StepRecord>(&line) {
            Ok(rec) => steps.push(rec),
            Err(_) => summary = Some(serde_json::from_str::<TraceSummary>(&line)?),
        }
    }
    Ok((steps, summary))
}

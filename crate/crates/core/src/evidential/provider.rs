//! Evidence providers: the pluggable contract mapping parsed relation
//! statements to (relation proposal, Dirichlet evidence).
//!
//! Three implementations:
//! - [`RuleBasedProvider`]: deterministic, concentrated evidence.
//! - [`NoisyProvider`]: seeded corruption toward a conceptual neighbor with
//!   evidence scaled down by the corruption rate.
//! - [`RemoteProvider`]: optional network extractor speaking a small JSON
//!   wire format; any failure degrades to the rule-based provider with a
//!   logged warning so runs never depend on network availability.

use std::io::{Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DirichletEvidence, NUM_RELATIONS};
use crate::temporal::{AllenRelation, RelationSet};
use crate::util::{derive_seed, fnv1a64};

/// Evidence concentration emitted by the rule-based provider.
pub const RULE_BASED_EVIDENCE: f64 = 50.0;

/// The slice of a parsed statement a provider sees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatementContext<'a> {
    pub sentence: &'a str,
    pub subject: &'a str,
    pub object: &'a str,
    pub relation: AllenRelation,
}

impl StatementContext<'_> {
    fn stable_hash(&self) -> u64 {
        let mut bytes = Vec::with_capacity(self.sentence.len() + 8);
        bytes.extend_from_slice(self.sentence.as_bytes());
        bytes.push(0);
        bytes.extend_from_slice(self.subject.as_bytes());
        bytes.push(0);
        bytes.extend_from_slice(self.object.as_bytes());
        bytes.push(self.relation.index() as u8);
        fnv1a64(&bytes)
    }
}

/// Maps a parsed statement to a non-empty relation proposal with evidence.
/// Implementations must be deterministic given their seed and safe to call
/// from multiple threads.
pub trait EvidenceProvider: Send + Sync {
    fn propose(&self, stmt: &StatementContext<'_>) -> (RelationSet, DirichletEvidence);
    fn name(&self) -> &'static str;
}

/// Deterministic provider: trusts the parse, concentrated α.
#[derive(Debug, Clone, Default)]
pub struct RuleBasedProvider;

impl EvidenceProvider for RuleBasedProvider {
    fn propose(&self, stmt: &StatementContext<'_>) -> (RelationSet, DirichletEvidence) {
        (
            RelationSet::singleton(stmt.relation),
            DirichletEvidence::concentrated(stmt.relation, RULE_BASED_EVIDENCE),
        )
    }

    fn name(&self) -> &'static str {
        "rule_based"
    }
}

/// Seeded corrupting provider: flips the proposal to a conceptual neighbor
/// with probability `flip_prob` and scales the evidence mass down by the
/// corruption rate, so injected error correlates with epistemic uncertainty.
///
/// Randomness is derived per statement from (seed, statement hash), so the
/// same input always yields the same output regardless of call order.
#[derive(Debug, Clone)]
pub struct NoisyProvider {
    pub flip_prob: f64,
    pub seed: u64,
}

impl NoisyProvider {
    pub fn new(flip_prob: f64, seed: u64) -> NoisyProvider {
        NoisyProvider {
            flip_prob: flip_prob.clamp(0.0, 1.0),
            seed,
        }
    }
}

impl EvidenceProvider for NoisyProvider {
    fn propose(&self, stmt: &StatementContext<'_>) -> (RelationSet, DirichletEvidence) {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, stmt.stable_hash()));
        let mut rel = stmt.relation;
        if rng.gen::<f64>() < self.flip_prob {
            let neighbors = rel.neighbors();
            rel = neighbors[rng.gen_range(0..neighbors.len())];
        }
        let evidence = (RULE_BASED_EVIDENCE * (1.0 - self.flip_prob)).max(1.0);
        (
            RelationSet::singleton(rel),
            DirichletEvidence::concentrated(rel, evidence),
        )
    }

    fn name(&self) -> &'static str {
        "noisy"
    }
}

#[derive(Serialize)]
struct RemoteRequest<'a> {
    sentence: &'a str,
    events: [&'a str; 2],
}

#[derive(Deserialize)]
struct RemoteResponse {
    relations: Vec<String>,
    alpha: Vec<f64>,
}

/// Network extractor: HTTP POST `{"sentence", "events"}` expecting
/// `{"relations": [names], "alpha": [13 floats]}`. Non-200 responses,
/// timeouts and malformed payloads all degrade to the rule-based provider.
pub struct RemoteProvider {
    pub endpoint: String,
    pub timeout: Duration,
    fallback: RuleBasedProvider,
}

impl RemoteProvider {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> RemoteProvider {
        RemoteProvider {
            endpoint: endpoint.into(),
            timeout,
            fallback: RuleBasedProvider,
        }
    }

    fn query(&self, stmt: &StatementContext<'_>) -> Result<(RelationSet, DirichletEvidence), String> {
        let body = serde_json::to_string(&RemoteRequest {
            sentence: stmt.sentence,
            events: [stmt.subject, stmt.object],
        })
        .map_err(|e| e.to_string())?;
        let raw = http_post_json(&self.endpoint, &body, self.timeout)?;
        let resp: RemoteResponse = serde_json::from_str(&raw).map_err(|e| e.to_string())?;
        let mut rels = RelationSet::EMPTY;
        for name in &resp.relations {
            let r = AllenRelation::from_name(name).ok_or_else(|| format!("unknown relation `{name}`"))?;
            rels.insert(r);
        }
        if rels.is_empty() {
            return Err("empty relation proposal".to_string());
        }
        if resp.alpha.len() != NUM_RELATIONS {
            return Err(format!("alpha has {} components", resp.alpha.len()));
        }
        let alpha: [f64; NUM_RELATIONS] = resp.alpha.try_into().expect("length checked");
        let d = DirichletEvidence::new(alpha).map_err(|e| e.to_string())?;
        Ok((rels, d))
    }
}

impl EvidenceProvider for RemoteProvider {
    fn propose(&self, stmt: &StatementContext<'_>) -> (RelationSet, DirichletEvidence) {
        match self.query(stmt) {
            Ok(out) => out,
            Err(err) => {
                log::warn!(
                    "remote extractor at {} failed ({err}); degrading to rule-based",
                    self.endpoint
                );
                self.fallback.propose(stmt)
            }
        }
    }

    fn name(&self) -> &'static str {
        "remote"
    }
}

/// Minimal HTTP/1.1 POST for the extractor wire format. Plain `http://`
/// only; everything unexpected is an Err that the caller degrades on.
fn http_post_json(endpoint: &str, body: &str, timeout: Duration) -> Result<String, String> {
    let rest = endpoint
        .strip_prefix("http://")
        .ok_or_else(|| format!("unsupported endpoint `{endpoint}` (http:// only)"))?;
    let (host_port, path) = match rest.find('/') {
        Some(k) => (&rest[..k], &rest[k..]),
        None => (rest, "/"),
    };
    let host_port_owned = if host_port.contains(':') {
        host_port.to_string()
    } else {
        format!("{host_port}:80")
    };
    let addr = host_port_owned
        .to_socket_addrs()
        .map_err(|e| e.to_string())?
        .next()
        .ok_or_else(|| format!("no address for {host_port_owned}"))?;
    let mut stream = TcpStream::connect_timeout(&addr, timeout).map_err(|e| e.to_string())?;
    stream.set_read_timeout(Some(timeout)).map_err(|e| e.to_string())?;
    stream.set_write_timeout(Some(timeout)).map_err(|e| e.to_string())?;

    let request = format!(
        "POST {path} HTTP/1.1\r\nHost: {host_port}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
    stream.write_all(request.as_bytes()).map_err(|e| e.to_string())?;

    let mut raw = Vec::new();
    stream.read_to_end(&mut raw).map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&raw);
    let mut parts = text.splitn(2, "\r\n\r\n");
    let head = parts.next().unwrap_or("");
    let body = parts.next().unwrap_or("");
    let status = head
        .lines()
        .next()
        .and_then(|line| line.split_whitespace().nth(1))
        .and_then(|code| code.parse::<u16>().ok())
        .ok_or_else(|| "malformed HTTP response".to_string())?;
    if status != 200 {
        return Err(format!("HTTP status {status}"));
    }
    Ok(body.to_string())
}

/// Provider selection as it appears in the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProviderConfig {
    RuleBased,
    Noisy {
        flip_prob: f64,
    },
    Remote {
        endpoint: String,
        timeout_ms: u64,
    },
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig::RuleBased
    }
}

impl ProviderConfig {
    pub fn build(&self, seed: u64) -> Box<dyn EvidenceProvider> {
        match self {
            ProviderConfig::RuleBased => Box::new(RuleBasedProvider),
            ProviderConfig::Noisy { flip_prob } => Box::new(NoisyProvider::new(*flip_prob, seed)),
            ProviderConfig::Remote {
                endpoint,
                timeout_ms,
            } => Box::new(RemoteProvider::new(
                endpoint.clone(),
                Duration::from_millis(*timeout_ms),
            )),
        }
    }
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{bad, EventRecord, Performative, SimError, Trace};

/// Sufficient statistics of one partition: a partial model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PartialStats {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl PartialStats {
    pub fn of(values: &[f64]) -> PartialStats {
        PartialStats {
            count: values.len() as u64,
            sum: values.iter().sum(),
            sum_sq: values.iter().map(|x| x * x).sum(),
        }
    }

    fn key(&self) -> (u64, u64, u64) {
        (self.count, self.sum.to_bits(), self.sum_sq.to_bits())
    }
}

/// Component-wise sum. The parts are added in a canonical order, so any
/// permutation of the input gives bit-identical output.
pub fn integrate_partials(parts: &[PartialStats]) -> PartialStats {
    let mut sorted = parts.to_vec();
    sorted.sort_by_key(PartialStats::key);
    sorted.iter().fold(PartialStats::default(), |acc, p| PartialStats {
        count: acc.count + p.count,
        sum: acc.sum + p.sum,
        sum_sq: acc.sum_sq + p.sum_sq,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalStats {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
}

impl GlobalStats {
    pub fn from_partial(p: PartialStats) -> Result<GlobalStats, SimError> {
        if p.count == 0 {
            return Err(SimError::AllPartitionsEmpty);
        }
        let n = p.count as f64;
        let mean = p.sum / n;
        Ok(GlobalStats {
            count: p.count,
            sum: p.sum,
            sum_sq: p.sum_sq,
            mean,
            variance: p.sum_sq / n - mean * mean,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FederatedConfig {
    /// One dataset per team member.
    pub partitions: Vec<Vec<f64>>,
    /// Ship the learner as a migrating agent instead of a code model inside
    /// the request; only the payload tag differs.
    #[serde(default)]
    pub migrate: bool,
    #[serde(default = "default_requester")]
    pub requester: String,
    #[serde(default)]
    pub seed: u64,
}

fn default_requester() -> String {
    "requester".to_string()
}

pub const ALGORITHM: &str = "sufficient-stats";

pub fn member_id(index: usize) -> String {
    format!("member{}", index + 1)
}

/// The requester sends the algorithm to every member at tick 0; each member
/// replies with the statistics of its own partition at tick 1; the
/// requester integrates the replies.
pub fn run_federated_learning(cfg: &FederatedConfig) -> Result<(GlobalStats, Trace), SimError> {
    if cfg.partitions.is_empty() {
        return Err(SimError::EmptyTeam);
    }
    if cfg.partitions.iter().flatten().any(|x| !x.is_finite()) {
        return Err(bad("partition values must be finite"));
    }
    if cfg.requester.is_empty() || cfg.requester.starts_with("member") {
        return Err(bad("requester id must be non-empty and not of the form member<N>"));
    }
    let req = cfg.requester.as_str();
    let mut request = json!({"algorithm": ALGORITHM});
    if cfg.migrate {
        request["mode"] = json!("migrate");
    }

    let mut events = Vec::new();
    let mut partials = Vec::new();
    for i in 0..cfg.partitions.len() {
        let m = member_id(i);
        events.push(EventRecord::new(0, format!("fed:{m}"), Performative::Request, req, &m, request.clone()));
    }
    for (i, part) in cfg.partitions.iter().enumerate() {
        let m = member_id(i);
        let stats = PartialStats::of(part);
        partials.push(stats);
        events.push(EventRecord::new(
            1,
            format!("fed:{m}"),
            Performative::Reply,
            &m,
            req,
            serde_json::to_value(stats).expect("stats serialize"),
        ));
    }
    let global = GlobalStats::from_partial(integrate_partials(&partials))?;

    let mut roles = BTreeMap::new();
    roles.insert(req.to_string(), "requester".to_string());
    for i in 0..cfg.partitions.len() {
        roles.insert(member_id(i), "learners".to_string());
    }
    let trace = Trace {
        seed: cfg.seed,
        config: serde_json::to_value(cfg).expect("config serializes"),
        roles,
        events,
    };
    Ok((global, trace))
}

//! Seeded, logically timed execution of the interaction patterns the
//! notation describes: ContractNet negotiation, auction-based distributed
//! planning, federated learning with sufficient statistics, and a BDI loop.
//!
//! Every run is a pure function of its config (including the seed) and
//! yields a [`Trace`] of speech acts and environment interactions. Traces can
//! be replayed through a [`ProtocolSpec`] state machine with [`check_trace`]
//! and linked to the nodes of a diagram with [`bind_trace`].

mod bdi;
mod contract_net;
mod federated;
mod planning;
mod protocol;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::document::Document;

pub use bdi::{run_bdi, ActorConfig, BdiConfig, BeliefRule, Comparator, DesireRule, SensorConfig};
pub use contract_net::{run_contract_net, ContractNetConfig, ParticipantConfig};
pub use federated::{
    integrate_partials, run_federated_learning, FederatedConfig, GlobalStats, PartialStats,
};
pub use planning::{
    run_distributed_planning, Interval, JobConfig, MachineConfig, PlanningConfig, Schedule,
    ScheduleEntry,
};
pub use protocol::{
    bdi_protocol, check_trace, contract_net_protocol, federated_protocol, planning_protocol,
    ConformanceReport, ConversationReport, ProtocolError, ProtocolSpec, RoleTag, Transition,
    Violation,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Performative {
    Cfp,
    Propose,
    Refuse,
    Accept,
    Reject,
    InformResult,
    Failure,
    Request,
    Reply,
    Sense,
    Classify,
    Predict,
    Plan,
    Act,
    Speak,
}

impl Performative {
    pub const ALL: [Performative; 15] = [
        Performative::Cfp,
        Performative::Propose,
        Performative::Refuse,
        Performative::Accept,
        Performative::Reject,
        Performative::InformResult,
        Performative::Failure,
        Performative::Request,
        Performative::Reply,
        Performative::Sense,
        Performative::Classify,
        Performative::Predict,
        Performative::Plan,
        Performative::Act,
        Performative::Speak,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Performative::Cfp => "cfp",
            Performative::Propose => "propose",
            Performative::Refuse => "refuse",
            Performative::Accept => "accept",
            Performative::Reject => "reject",
            Performative::InformResult => "inform_result",
            Performative::Failure => "failure",
            Performative::Request => "request",
            Performative::Reply => "reply",
            Performative::Sense => "sense",
            Performative::Classify => "classify",
            Performative::Predict => "predict",
            Performative::Plan => "plan",
            Performative::Act => "act",
            Performative::Speak => "speak",
        }
    }
}

impl fmt::Display for Performative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Receiver used for sensing and acting.
pub const ENV: &str = "env";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub tick: u64,
    pub conversation: String,
    pub performative: Performative,
    pub sender: String,
    pub receiver: String,
    pub payload: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagram_ref: Option<String>,
}

impl EventRecord {
    pub fn new(
        tick: u64,
        conversation: impl Into<String>,
        performative: Performative,
        sender: impl Into<String>,
        receiver: impl Into<String>,
        payload: serde_json::Value,
    ) -> EventRecord {
        EventRecord {
            tick,
            conversation: conversation.into(),
            performative,
            sender: sender.into(),
            receiver: receiver.into(),
            payload,
            diagram_ref: None,
        }
    }

    /// Whether the payload marks the event as recorded but not acted upon,
    /// e.g. a proposal that arrived after the deadline.
    pub fn is_ignored(&self) -> bool {
        self.payload.get("ignored") == Some(&serde_json::Value::Bool(true))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub seed: u64,
    /// The config the trace was produced from.
    pub config: serde_json::Value,
    /// Role name of every actor that appears in the trace.
    pub roles: BTreeMap<String, String>,
    pub events: Vec<EventRecord>,
}

impl Trace {
    /// One JSON object per event, each on its own line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("event serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Vec<EventRecord>, serde_json::Error> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect()
    }

    pub fn count(&self, performative: Performative) -> usize {
        self.events
            .iter()
            .filter(|e| e.performative == performative)
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error("the team has no members")]
    EmptyTeam,
    #[error("every partition is empty, so the mean is undefined")]
    AllPartitionsEmpty,
}

pub(crate) fn bad(msg: impl Into<String>) -> SimError {
    SimError::BadConfig(msg.into())
}

pub(crate) fn check_unique<'a>(
    what: &str,
    ids: impl IntoIterator<Item = &'a str>,
) -> Result<(), SimError> {
    let mut seen = std::collections::BTreeSet::new();
    for id in ids {
        if id.is_empty() {
            return Err(bad(format!("empty {what} id")));
        }
        if id == ENV {
            return Err(bad(format!("`{ENV}` is reserved and cannot be a {what} id")));
        }
        if !seen.insert(id) {
            return Err(bad(format!("duplicate {what} id `{id}`")));
        }
    }
    Ok(())
}

/// Attach `diagram_ref` to every event that can be linked to a node of
/// `doc`. The candidates, in order, are the sender id, the performative
/// name and the sender's role name; the first that names a node wins.
pub fn bind_trace(trace: &Trace, doc: &Document) -> Trace {
    let mut bound = trace.clone();
    for e in &mut bound.events {
        let role = trace.roles.get(&e.sender).map(String::as_str);
        e.diagram_ref = [Some(e.sender.as_str()), Some(e.performative.as_str()), role]
            .into_iter()
            .flatten()
            .find(|id| doc.node(id).is_some())
            .map(str::to_string);
    }
    bound
}

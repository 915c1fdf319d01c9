//! Protocol state machines and trace conformance.
//!
//! Roles are assigned per conversation: the sender of its first event is the
//! initiator, the pseudo-actor `env` is the environment, everyone else is a
//! participant. A conversation that runs out of events takes its quiescence
//! transition, if its state has one, before the terminal check.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{EventRecord, Performative, Trace, ENV};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoleTag {
    Initiator,
    Participant,
    Env,
    Any,
}

impl RoleTag {
    fn accepts(self, actual: RoleTag) -> bool {
        self == RoleTag::Any || self == actual
    }

    fn overlaps(self, other: RoleTag) -> bool {
        self == RoleTag::Any || other == RoleTag::Any || self == other
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub from: String,
    pub performative: Performative,
    pub sender: RoleTag,
    pub receiver: RoleTag,
    /// Applies to events marked ignored instead of regular ones.
    #[serde(default)]
    pub ignored: bool,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub name: String,
    pub states: Vec<String>,
    pub initial: String,
    pub terminals: Vec<String>,
    pub transitions: Vec<Transition>,
    /// `(state, next)` pairs taken when a conversation has no more events.
    #[serde(default)]
    pub on_quiescence: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("transitions from `{state}` on `{performative}` are ambiguous")]
    Nondeterministic {
        state: String,
        performative: Performative,
    },
    #[error("terminal state `{0}` has a transition to another state")]
    TerminalNotAbsorbing(String),
}

impl ProtocolSpec {
    /// Check that every state reference resolves, transitions are
    /// deterministic and terminal states are absorbing.
    pub fn validate(&self) -> Result<(), ProtocolError> {
        let mut states = BTreeSet::new();
        for s in &self.states {
            if !states.insert(s.as_str()) {
                return Err(ProtocolError::DuplicateState(s.clone()));
            }
        }
        let known = |s: &String| {
            if states.contains(s.as_str()) {
                Ok(())
            } else {
                Err(ProtocolError::UnknownState(s.clone()))
            }
        };
        known(&self.initial)?;
        self.terminals.iter().try_for_each(known)?;
        for t in &self.transitions {
            known(&t.from)?;
            known(&t.to)?;
        }
        for (a, b) in &self.on_quiescence {
            known(a)?;
            known(b)?;
        }
        for (i, a) in self.transitions.iter().enumerate() {
            for b in &self.transitions[i + 1..] {
                if a.from == b.from
                    && a.performative == b.performative
                    && a.ignored == b.ignored
                    && a.sender.overlaps(b.sender)
                    && a.receiver.overlaps(b.receiver)
                {
                    return Err(ProtocolError::Nondeterministic {
                        state: a.from.clone(),
                        performative: a.performative,
                    });
                }
            }
        }
        let mut seen_quiescent = BTreeSet::new();
        for (a, _) in &self.on_quiescence {
            if !seen_quiescent.insert(a) {
                return Err(ProtocolError::Nondeterministic {
                    state: a.clone(),
                    performative: Performative::Failure,
                });
            }
        }
        for t in &self.transitions {
            if self.is_terminal(&t.from) && t.to != t.from {
                return Err(ProtocolError::TerminalNotAbsorbing(t.from.clone()));
            }
        }
        for (a, b) in &self.on_quiescence {
            if self.is_terminal(a) && a != b {
                return Err(ProtocolError::TerminalNotAbsorbing(a.clone()));
            }
        }
        Ok(())
    }

    pub fn is_terminal(&self, state: &str) -> bool {
        self.terminals.iter().any(|t| t == state)
    }

    fn step(&self, state: &str, perf: Performative, sender: RoleTag, receiver: RoleTag, ignored: bool) -> Option<&str> {
        self.transitions
            .iter()
            .find(|t| {
                t.from == state
                    && t.performative == perf
                    && t.ignored == ignored
                    && t.sender.accepts(sender)
                    && t.receiver.accepts(receiver)
            })
            .map(|t| t.to.as_str())
    }

    fn quiesce<'a>(&'a self, state: &'a str) -> &'a str {
        self.on_quiescence
            .iter()
            .find(|(a, _)| a == state)
            .map_or(state, |(_, b)| b.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Index into the trace's event list.
    pub event: usize,
    pub conversation: String,
    pub state: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversationReport {
    pub conversation: String,
    pub final_state: String,
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConformanceReport {
    pub protocol: String,
    pub conversations: Vec<ConversationReport>,
    pub violations: Vec<Violation>,
}

impl ConformanceReport {
    pub fn conformant(&self) -> bool {
        self.violations.is_empty() && self.conversations.iter().all(|c| c.terminal)
    }
}

struct Run<'a> {
    initiator: &'a str,
    state: String,
    broken: bool,
}

fn role(run: &Run<'_>, actor: &str) -> RoleTag {
    if actor == ENV {
        RoleTag::Env
    } else if actor == run.initiator {
        RoleTag::Initiator
    } else {
        RoleTag::Participant
    }
}

/// Replay each conversation of `events` through `spec`. After the first
/// violation in a conversation its remaining events are skipped.
pub fn check_events(events: &[EventRecord], spec: &ProtocolSpec) -> ConformanceReport {
    let mut runs: BTreeMap<&str, Run<'_>> = BTreeMap::new();
    let mut violations = Vec::new();
    let mut last_tick = 0;
    for (i, e) in events.iter().enumerate() {
        let run = runs.entry(&e.conversation).or_insert_with(|| Run {
            initiator: &e.sender,
            state: spec.initial.clone(),
            broken: false,
        });
        if e.tick < last_tick {
            violations.push(Violation {
                event: i,
                conversation: e.conversation.clone(),
                state: run.state.clone(),
                reason: format!("tick {} is earlier than the preceding tick {last_tick}", e.tick),
            });
        }
        last_tick = last_tick.max(e.tick);
        if run.broken {
            continue;
        }
        let (sender, receiver) = (role(run, &e.sender), role(run, &e.receiver));
        match spec.step(&run.state, e.performative, sender, receiver, e.is_ignored()) {
            Some(next) => run.state = next.to_string(),
            None => {
                violations.push(Violation {
                    event: i,
                    conversation: e.conversation.clone(),
                    state: run.state.clone(),
                    reason: format!(
                        "no transition for {}{} from {:?} `{}` to {:?} `{}`",
                        e.performative,
                        if e.is_ignored() { " (ignored)" } else { "" },
                        sender,
                        e.sender,
                        receiver,
                        e.receiver
                    ),
                });
                run.broken = true;
            }
        }
    }
    let conversations = runs
        .into_iter()
        .map(|(id, run)| {
            let final_state = spec.quiesce(&run.state).to_string();
            ConversationReport {
                conversation: id.to_string(),
                terminal: !run.broken && spec.is_terminal(&final_state),
                final_state,
            }
        })
        .collect();
    ConformanceReport {
        protocol: spec.name.clone(),
        conversations,
        violations,
    }
}

pub fn check_trace(trace: &Trace, spec: &ProtocolSpec) -> ConformanceReport {
    check_events(&trace.events, spec)
}

struct Builder {
    spec: ProtocolSpec,
}

impl Builder {
    fn new(name: &str, states: &[&str], initial: &str, terminals: &[&str]) -> Builder {
        Builder {
            spec: ProtocolSpec {
                name: name.to_string(),
                states: states.iter().map(|s| s.to_string()).collect(),
                initial: initial.to_string(),
                terminals: terminals.iter().map(|s| s.to_string()).collect(),
                transitions: Vec::new(),
                on_quiescence: Vec::new(),
            },
        }
    }

    fn on(mut self, from: &str, p: Performative, sender: RoleTag, receiver: RoleTag, to: &str) -> Builder {
        self.spec.transitions.push(Transition {
            from: from.to_string(),
            performative: p,
            sender,
            receiver,
            ignored: false,
            to: to.to_string(),
        });
        self
    }

    fn late(mut self, states: &[&str], p: Performative, sender: RoleTag, receiver: RoleTag) -> Builder {
        for s in states {
            self.spec.transitions.push(Transition {
                from: s.to_string(),
                performative: p,
                sender,
                receiver,
                ignored: true,
                to: s.to_string(),
            });
        }
        self
    }

    fn quiet(mut self, from: &str, to: &str) -> Builder {
        self.spec.on_quiescence.push((from.to_string(), to.to_string()));
        self
    }

    fn done(self) -> ProtocolSpec {
        self.spec.validate().expect("builtin protocol");
        self.spec
    }
}

use Performative as P;
use RoleTag::{Env, Initiator as I, Participant as Pt};

/// One conversation per call for proposals. Late answers are tolerated in
/// every state after the call; a call that draws no valid proposal ends in
/// `no-award` once the conversation goes quiet.
pub fn contract_net_protocol() -> ProtocolSpec {
    let after_cfp = ["open", "proposed", "awarded", "done"];
    Builder::new(
        "contract-net",
        &["start", "open", "proposed", "awarded", "done", "no-award"],
        "start",
        &["done", "no-award"],
    )
    .on("start", P::Cfp, I, Pt, "open")
    .on("open", P::Cfp, I, Pt, "open")
    .on("open", P::Refuse, Pt, I, "open")
    .on("open", P::Propose, Pt, I, "proposed")
    .on("proposed", P::Refuse, Pt, I, "proposed")
    .on("proposed", P::Propose, Pt, I, "proposed")
    .on("proposed", P::Reject, I, Pt, "proposed")
    .on("proposed", P::Accept, I, Pt, "awarded")
    .on("awarded", P::Reject, I, Pt, "awarded")
    .on("awarded", P::InformResult, Pt, I, "done")
    .late(&after_cfp, P::Propose, Pt, I)
    .late(&after_cfp, P::Refuse, Pt, I)
    .quiet("open", "no-award")
    .done()
}

/// One conversation per job: work order, announcement to the machines,
/// bids, award, result (or failure when nobody can take the job).
pub fn planning_protocol() -> ProtocolSpec {
    Builder::new(
        "distributed-planning",
        &["start", "requested", "announced", "bidding", "awarded", "done", "failed"],
        "start",
        &["done", "failed"],
    )
    .on("start", P::Request, I, Pt, "requested")
    .on("requested", P::Cfp, Pt, Pt, "announced")
    .on("announced", P::Cfp, Pt, Pt, "announced")
    .on("announced", P::Refuse, Pt, Pt, "announced")
    .on("announced", P::Propose, Pt, Pt, "bidding")
    .on("announced", P::Failure, Pt, I, "failed")
    .on("bidding", P::Refuse, Pt, Pt, "bidding")
    .on("bidding", P::Propose, Pt, Pt, "bidding")
    .on("bidding", P::Reject, Pt, Pt, "bidding")
    .on("bidding", P::Accept, Pt, Pt, "awarded")
    .on("awarded", P::Reject, Pt, Pt, "awarded")
    .on("awarded", P::InformResult, Pt, I, "done")
    .done()
}

/// One conversation per team member: the request carrying the algorithm,
/// then the member's partial model.
pub fn federated_protocol() -> ProtocolSpec {
    Builder::new("federated-learning", &["start", "requested", "done"], "start", &["done"])
        .on("start", P::Request, I, Pt, "requested")
        .on("requested", P::Reply, Pt, I, "done")
        .done()
}

/// One conversation per actor; within a tick the loop must run
/// sense, classify, predict, plan, act, and then any speech acts.
pub fn bdi_protocol() -> ProtocolSpec {
    let stages = ["sensed", "classified", "predicted", "planned", "acted", "spoke"];
    let mut b = Builder::new(
        "bdi",
        &["idle", "sensed", "classified", "predicted", "planned", "acted", "spoke", "rest"],
        "idle",
        &["rest"],
    )
    .on("idle", P::Sense, I, Env, "sensed");
    for s in stages {
        b = b.on(s, P::Sense, I, Env, "sensed").quiet(s, "rest");
    }
    b.quiet("idle", "rest")
        .on("sensed", P::Classify, I, I, "classified")
        .on("classified", P::Classify, I, I, "classified")
        .on("sensed", P::Predict, I, I, "predicted")
        .on("classified", P::Predict, I, I, "predicted")
        .on("predicted", P::Predict, I, I, "predicted")
        .on("predicted", P::Plan, I, I, "planned")
        .on("planned", P::Plan, I, I, "planned")
        .on("planned", P::Act, I, Env, "acted")
        .on("acted", P::Act, I, Env, "acted")
        .on("sensed", P::Speak, I, Pt, "spoke")
        .on("classified", P::Speak, I, Pt, "spoke")
        .on("predicted", P::Speak, I, Pt, "spoke")
        .on("planned", P::Speak, I, Pt, "spoke")
        .on("acted", P::Speak, I, Pt, "spoke")
        .on("spoke", P::Speak, I, Pt, "spoke")
        .done()
}

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{bad, check_unique, EventRecord, Performative, SimError, Trace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantConfig {
    pub id: String,
    pub propose_probability: f64,
    pub bid_min: i64,
    pub bid_max: i64,
    /// Fixed answer tick; sampled from `1..=deadline + 2` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_tick: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractNetConfig {
    #[serde(default = "default_initiator")]
    pub initiator: String,
    pub participants: Vec<ParticipantConfig>,
    pub deadline_ticks: u64,
    #[serde(default)]
    pub seed: u64,
}

fn default_initiator() -> String {
    "initiator".to_string()
}

pub const CONVERSATION: &str = "contract-net";

impl ContractNetConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.participants.is_empty() {
            return Err(bad("at least one participant is required"));
        }
        if self.deadline_ticks == 0 {
            return Err(bad("deadline_ticks must be at least 1"));
        }
        check_unique(
            "actor",
            std::iter::once(self.initiator.as_str()).chain(self.participants.iter().map(|p| p.id.as_str())),
        )?;
        for p in &self.participants {
            if !(0.0..=1.0).contains(&p.propose_probability) {
                return Err(bad(format!("{}: propose_probability must lie in [0, 1]", p.id)));
            }
            if p.bid_min > p.bid_max {
                return Err(bad(format!("{}: bid_min exceeds bid_max", p.id)));
            }
            if p.response_tick == Some(0) {
                return Err(bad(format!("{}: response_tick must be at least 1", p.id)));
            }
        }
        Ok(())
    }
}

struct Answer<'a> {
    id: &'a str,
    tick: u64,
    bid: Option<i64>,
}

/// Call for proposals at tick 0, answers at each participant's response
/// tick, award decision at the deadline tick (after that tick's answers),
/// result from the awardee one tick later. Answers after the deadline are
/// recorded with `"ignored": true`.
pub fn run_contract_net(cfg: &ContractNetConfig) -> Result<Trace, SimError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let deadline = cfg.deadline_ticks;

    let mut answers: Vec<Answer<'_>> = cfg
        .participants
        .iter()
        .map(|p| {
            let proposes = rng.random_bool(p.propose_probability);
            let sampled_tick = rng.random_range(1..=deadline + 2);
            let bid = rng.random_range(p.bid_min..=p.bid_max);
            Answer {
                id: &p.id,
                tick: p.response_tick.unwrap_or(sampled_tick),
                bid: proposes.then_some(bid),
            }
        })
        .collect();
    answers.sort_by(|a, b| (a.tick, a.id).cmp(&(b.tick, b.id)));

    let init = cfg.initiator.as_str();
    let mut events = Vec::new();
    let mut ids: Vec<&str> = cfg.participants.iter().map(|p| p.id.as_str()).collect();
    ids.sort();
    for id in &ids {
        events.push(EventRecord::new(0, CONVERSATION, Performative::Cfp, init, *id, json!({"task": "contract"})));
    }

    let valid: Vec<&Answer<'_>> = answers
        .iter()
        .filter(|a| a.tick <= deadline && a.bid.is_some())
        .collect();
    // Highest bid wins; among equal bids the smallest id.
    let winner = valid
        .iter()
        .max_by(|a, b| a.bid.cmp(&b.bid).then_with(|| b.id.cmp(a.id)))
        .map(|a| (a.id, a.bid.expect("valid answers carry bids")));

    let answer_event = |a: &Answer<'_>| {
        let mut payload = match a.bid {
            Some(bid) => json!({"bid": bid}),
            None => json!({}),
        };
        if a.tick > deadline {
            payload["ignored"] = json!(true);
        }
        let p = if a.bid.is_some() {
            Performative::Propose
        } else {
            Performative::Refuse
        };
        EventRecord::new(a.tick, CONVERSATION, p, a.id, init, payload)
    };

    let mut pending = answers.iter().peekable();
    for tick in 1..=deadline + 2 {
        while let Some(a) = pending.next_if(|a| a.tick <= tick) {
            events.push(answer_event(a));
        }
        if tick == deadline {
            if let Some((won, bid)) = winner {
                events.push(EventRecord::new(tick, CONVERSATION, Performative::Accept, init, won, json!({"bid": bid})));
                let mut losers: Vec<&&Answer<'_>> = valid.iter().filter(|a| a.id != won).collect();
                losers.sort_by_key(|a| a.id);
                for a in losers {
                    events.push(EventRecord::new(
                        tick,
                        CONVERSATION,
                        Performative::Reject,
                        init,
                        a.id,
                        json!({"bid": a.bid}),
                    ));
                }
            }
        }
        if tick == deadline + 1 {
            if let Some((won, _)) = winner {
                events.push(EventRecord::new(
                    tick,
                    CONVERSATION,
                    Performative::InformResult,
                    won,
                    init,
                    json!({"result": "done"}),
                ));
            }
        }
    }
    events.extend(pending.map(answer_event));

    let mut roles = BTreeMap::new();
    roles.insert(init.to_string(), "initiator".to_string());
    for p in &cfg.participants {
        roles.insert(p.id.clone(), "contractors".to_string());
    }
    Ok(Trace {
        seed: cfg.seed,
        config: serde_json::to_value(cfg).expect("config serializes"),
        roles,
        events,
    })
}

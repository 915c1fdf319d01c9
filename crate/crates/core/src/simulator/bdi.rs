use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{bad, check_unique, EventRecord, Performative, SimError, Trace, ENV};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    pub initial: f64,
    /// Added every tick.
    #[serde(default)]
    pub drift: f64,
    /// Half-width of the uniform disturbance added every tick.
    #[serde(default)]
    pub noise: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
}

impl Comparator {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparator::Lt => value < threshold,
            Comparator::Le => value <= threshold,
            Comparator::Gt => value > threshold,
            Comparator::Ge => value >= threshold,
            Comparator::Eq => value == threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefRule {
    pub sensor: String,
    pub comparator: Comparator,
    pub threshold: f64,
    pub belief: String,
}

/// The goal is desired whenever all listed beliefs are held.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesireRule {
    pub beliefs: Vec<String>,
    pub goal: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorConfig {
    pub id: String,
    #[serde(default)]
    pub team: Option<String>,
    /// Sensors this actor reads; all of them when absent.
    #[serde(default)]
    pub sensors: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdiConfig {
    pub environment: BTreeMap<String, SensorConfig>,
    /// Per action, the change it causes to each sensor on the next tick.
    #[serde(default)]
    pub effects: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default)]
    pub belief_rules: Vec<BeliefRule>,
    #[serde(default)]
    pub desire_rules: Vec<DesireRule>,
    /// Plan library: goal to action sequence.
    #[serde(default)]
    pub plans: BTreeMap<String, Vec<String>>,
    pub actors: Vec<ActorConfig>,
    #[serde(default)]
    pub share_beliefs: bool,
    pub ticks: u64,
    #[serde(default)]
    pub seed: u64,
}

impl BdiConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.ticks == 0 {
            return Err(bad("ticks must be at least 1"));
        }
        if self.actors.is_empty() {
            return Err(bad("at least one actor is required"));
        }
        check_unique("actor", self.actors.iter().map(|a| a.id.as_str()))?;
        let sensor = |s: &str| {
            if self.environment.contains_key(s) {
                Ok(())
            } else {
                Err(bad(format!("unknown sensor `{s}`")))
            }
        };
        for (name, s) in &self.environment {
            if ![s.initial, s.drift, s.noise].iter().all(|x| x.is_finite()) || s.noise < 0.0 {
                return Err(bad(format!("sensor `{name}` needs finite values and noise >= 0")));
            }
        }
        for a in &self.actors {
            a.sensors.iter().flatten().try_for_each(|s| sensor(s))?;
        }
        for r in &self.belief_rules {
            sensor(&r.sensor)?;
            if !r.threshold.is_finite() {
                return Err(bad(format!("belief `{}` has a non-finite threshold", r.belief)));
            }
        }
        let beliefs: BTreeSet<&str> = self.belief_rules.iter().map(|r| r.belief.as_str()).collect();
        for d in &self.desire_rules {
            if let Some(b) = d.beliefs.iter().find(|b| !beliefs.contains(b.as_str())) {
                return Err(bad(format!("goal `{}` depends on unknown belief `{b}`", d.goal)));
            }
        }
        let goals: BTreeSet<&str> = self.desire_rules.iter().map(|d| d.goal.as_str()).collect();
        if let Some(g) = self.plans.keys().find(|g| !goals.contains(g.as_str())) {
            return Err(bad(format!("plan for unknown goal `{g}`")));
        }
        for (action, deltas) in &self.effects {
            deltas.keys().try_for_each(|s| sensor(s))?;
            if deltas.values().any(|d| !d.is_finite()) {
                return Err(bad(format!("action `{action}` has a non-finite effect")));
            }
        }
        Ok(())
    }
}

enum Source<'a> {
    Sensor { sensor: &'a str, value: f64 },
    Shared { from: &'a str },
}

/// Each tick every actor, in id order, senses, classifies readings into
/// beliefs, predicts desires, plans intentions and acts. With
/// `share_beliefs`, a belief an actor derives from its own sensors is spoken
/// once to each teammate, who holds it from the next tick on. Actions change
/// the environment seen on the next tick.
pub fn run_bdi(cfg: &BdiConfig) -> Result<Trace, SimError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut env: BTreeMap<&str, f64> = cfg.environment.iter().map(|(k, s)| (k.as_str(), s.initial)).collect();
    let mut actors: Vec<&ActorConfig> = cfg.actors.iter().collect();
    actors.sort_by_key(|a| &a.id);

    let mut shared: BTreeMap<&str, BTreeMap<&str, &str>> = BTreeMap::new();
    let mut spoken: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut events = Vec::new();

    for tick in 0..cfg.ticks {
        let mut inbox: Vec<(&str, &str, &str)> = Vec::new();
        let mut changes: BTreeMap<&str, f64> = BTreeMap::new();
        for actor in &actors {
            let id = actor.id.as_str();
            let conv = format!("bdi:{id}");
            let ev = |p, to: &str, payload| EventRecord::new(tick, conv.as_str(), p, id, to, payload);

            let readings: BTreeMap<&str, f64> = match &actor.sensors {
                Some(list) => list.iter().map(|s| (s.as_str(), env[s.as_str()])).collect(),
                None => env.clone(),
            };
            events.push(ev(Performative::Sense, ENV, json!({ "readings": readings })));

            let mut beliefs: BTreeMap<&str, Source<'_>> = BTreeMap::new();
            for r in &cfg.belief_rules {
                if let Some(&value) = readings.get(r.sensor.as_str()) {
                    if r.comparator.holds(value, r.threshold) {
                        beliefs.entry(&r.belief).or_insert(Source::Sensor {
                            sensor: &r.sensor,
                            value,
                        });
                    }
                }
            }
            for (&b, &from) in shared.get(id).into_iter().flatten() {
                beliefs.entry(b).or_insert(Source::Shared { from });
            }
            for (b, source) in &beliefs {
                let payload = match source {
                    Source::Sensor { sensor, value } => {
                        json!({"belief": b, "source": "sensor", "sensor": sensor, "value": value})
                    }
                    Source::Shared { from } => json!({"belief": b, "source": "shared", "from": from}),
                };
                events.push(ev(Performative::Classify, id, payload));
            }

            let desires: BTreeSet<&str> = cfg
                .desire_rules
                .iter()
                .filter(|d| d.beliefs.iter().all(|b| beliefs.contains_key(b.as_str())))
                .map(|d| d.goal.as_str())
                .collect();
            for g in &desires {
                events.push(ev(Performative::Predict, id, json!({"goal": g})));
            }
            let intentions: Vec<(&str, &Vec<String>)> = desires
                .iter()
                .filter_map(|g| cfg.plans.get(*g).map(|p| (*g, p)))
                .collect();
            for (g, actions) in &intentions {
                events.push(ev(Performative::Plan, id, json!({"goal": g, "actions": actions})));
            }
            for (g, actions) in &intentions {
                for a in actions.iter() {
                    events.push(ev(Performative::Act, ENV, json!({"action": a, "goal": g})));
                    for (s, d) in cfg.effects.get(a).into_iter().flatten() {
                        *changes.entry(s.as_str()).or_default() += d;
                    }
                }
            }

            if cfg.share_beliefs {
                if let Some(team) = &actor.team {
                    let mates: Vec<&str> = actors
                        .iter()
                        .filter(|m| m.id != actor.id && m.team.as_ref() == Some(team))
                        .map(|m| m.id.as_str())
                        .collect();
                    let said = spoken.entry(id).or_default();
                    for (b, source) in &beliefs {
                        if matches!(source, Source::Sensor { .. }) && !mates.is_empty() && said.insert(b) {
                            for m in &mates {
                                events.push(ev(Performative::Speak, m, json!({"belief": b})));
                                inbox.push((m, b, id));
                            }
                        }
                    }
                }
            }
        }
        for (to, b, from) in inbox {
            shared.entry(to).or_default().entry(b).or_insert(from);
        }
        for (name, s) in &cfg.environment {
            let noise = if s.noise > 0.0 {
                rng.random_range(-s.noise..=s.noise)
            } else {
                0.0
            };
            let v = env.get_mut(name.as_str()).expect("sensor exists");
            *v += s.drift + noise + changes.get(name.as_str()).copied().unwrap_or(0.0);
        }
    }

    let roles = cfg.actors.iter().map(|a| (a.id.clone(), "agent".to_string())).collect();
    Ok(Trace {
        seed: cfg.seed,
        config: serde_json::to_value(cfg).expect("config serializes"),
        roles,
        events,
    })
}

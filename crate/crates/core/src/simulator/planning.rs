use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{bad, check_unique, EventRecord, Performative, SimError, Trace};

/// Half-open tick range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval {
    pub start: u64,
    pub end: u64,
}

impl Interval {
    pub fn new(start: u64, end: u64) -> Interval {
        Interval { start, end }
    }

    pub fn len(&self) -> u64 {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineConfig {
    pub id: String,
    /// The machine's capacity model.
    pub free: Vec<Interval>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobConfig {
    pub id: String,
    pub duration: u64,
    pub deadline: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanningConfig {
    pub machines: Vec<MachineConfig>,
    pub jobs: Vec<JobConfig>,
    #[serde(default = "default_job_agent")]
    pub job_agent: String,
    #[serde(default = "default_pool_agent")]
    pub pool_agent: String,
    /// Echoed into the trace; the auction itself draws no random numbers.
    #[serde(default)]
    pub seed: u64,
}

fn default_job_agent() -> String {
    "job_agent".to_string()
}

fn default_pool_agent() -> String {
    "pool_agent".to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub job: String,
    /// `None` when no machine could take the job.
    pub machine: Option<String>,
    pub start: Option<u64>,
    pub end: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Schedule {
    pub entries: Vec<ScheduleEntry>,
}

impl Schedule {
    pub fn assigned(&self) -> impl Iterator<Item = (&str, &str, Interval)> {
        self.entries.iter().filter_map(|e| {
            Some((
                e.job.as_str(),
                e.machine.as_deref()?,
                Interval::new(e.start?, e.end?),
            ))
        })
    }
}

impl PlanningConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.machines.is_empty() {
            return Err(bad("at least one machine is required"));
        }
        check_unique(
            "actor",
            [self.job_agent.as_str(), self.pool_agent.as_str()]
                .into_iter()
                .chain(self.machines.iter().map(|m| m.id.as_str())),
        )?;
        check_unique("job", self.jobs.iter().map(|j| j.id.as_str()))?;
        for m in &self.machines {
            let mut free = m.free.clone();
            free.sort();
            for w in free.windows(2) {
                if w[0].end > w[1].start {
                    return Err(bad(format!("{}: free intervals overlap", m.id)));
                }
            }
            if free.iter().any(Interval::is_empty) {
                return Err(bad(format!("{}: empty free interval", m.id)));
            }
        }
        for j in &self.jobs {
            if j.duration == 0 {
                return Err(bad(format!("{}: duration must be at least 1", j.id)));
            }
        }
        Ok(())
    }
}

/// Sorted, with touching intervals merged so a job may span them.
fn normalize(free: &[Interval]) -> Vec<Interval> {
    let mut v = free.to_vec();
    v.sort();
    let mut out: Vec<Interval> = Vec::with_capacity(v.len());
    for i in v {
        match out.last_mut() {
            Some(last) if last.end == i.start => last.end = i.end,
            _ => out.push(i),
        }
    }
    out
}

/// Earliest slot of `duration` ticks that completes by `deadline`.
fn earliest_slot(free: &[Interval], duration: u64, deadline: u64) -> Option<(usize, u64)> {
    free.iter().enumerate().find_map(|(i, iv)| {
        let end = iv.start + duration;
        (end <= iv.end && end <= deadline).then_some((i, iv.start))
    })
}

const TICKS_PER_JOB: u64 = 5;

/// Jobs are auctioned one at a time, in list order. Every machine with a
/// feasible slot bids its slack (deadline minus completion); the largest
/// slack wins, ties going to the smallest machine id. The winner removes the
/// slot from its capacity model before the next auction.
pub fn run_distributed_planning(cfg: &PlanningConfig) -> Result<(Schedule, Trace), SimError> {
    cfg.validate()?;
    let mut machines: Vec<(&str, Vec<Interval>)> = cfg
        .machines
        .iter()
        .map(|m| (m.id.as_str(), normalize(&m.free)))
        .collect();
    machines.sort_by_key(|(id, _)| *id);
    let (ja, pa) = (cfg.job_agent.as_str(), cfg.pool_agent.as_str());

    let mut events = Vec::new();
    let mut schedule = Schedule::default();
    for (k, job) in cfg.jobs.iter().enumerate() {
        let t0 = k as u64 * TICKS_PER_JOB;
        let conv = format!("job:{}", job.id);
        let ev = |tick, p, from: &str, to: &str, payload| EventRecord::new(tick, conv.as_str(), p, from, to, payload);

        events.push(ev(
            t0,
            Performative::Request,
            ja,
            pa,
            json!({"job": job.id, "duration": job.duration, "deadline": job.deadline}),
        ));
        for (m, _) in &machines {
            events.push(ev(t0 + 1, Performative::Cfp, pa, m, json!({"job": job.id})));
        }
        let bids: Vec<(usize, usize, u64)> = machines
            .iter()
            .enumerate()
            .filter_map(|(mi, (_, free))| {
                earliest_slot(free, job.duration, job.deadline).map(|(slot, start)| (mi, slot, start))
            })
            .collect();
        for (mi, (m, _)) in machines.iter().enumerate() {
            match bids.iter().find(|b| b.0 == mi) {
                Some(&(_, _, start)) => {
                    let slack = job.deadline - (start + job.duration);
                    events.push(ev(
                        t0 + 2,
                        Performative::Propose,
                        m,
                        pa,
                        json!({"job": job.id, "slack": slack, "start": start}),
                    ));
                }
                None => {
                    events.push(ev(t0 + 2, Performative::Refuse, m, pa, json!({"job": job.id})));
                }
            }
        }
        // Machines are sorted by id, so the first maximum is the tie winner.
        let slack = |b: &(usize, usize, u64)| job.deadline - (b.2 + job.duration);
        let winner = bids.iter().fold(None::<&(usize, usize, u64)>, |best, b| match best {
            Some(w) if slack(w) >= slack(b) => Some(w),
            _ => Some(b),
        });
        match winner {
            Some(&(mi, slot, start)) => {
                let end = start + job.duration;
                let slack = job.deadline - end;
                let m = machines[mi].0;
                events.push(ev(
                    t0 + 3,
                    Performative::Accept,
                    pa,
                    m,
                    json!({"job": job.id, "start": start, "end": end, "slack": slack}),
                ));
                for &(other, _, _) in bids.iter().filter(|b| b.0 != mi) {
                    events.push(ev(t0 + 3, Performative::Reject, pa, machines[other].0, json!({"job": job.id})));
                }
                let free = &mut machines[mi].1;
                if end == free[slot].end {
                    free.remove(slot);
                } else {
                    free[slot].start = end;
                }
                events.push(ev(
                    t0 + 4,
                    Performative::InformResult,
                    m,
                    ja,
                    json!({"job": job.id, "machine": m, "start": start, "end": end}),
                ));
                schedule.entries.push(ScheduleEntry {
                    job: job.id.clone(),
                    machine: Some(m.to_string()),
                    start: Some(start),
                    end: Some(end),
                });
            }
            None => {
                events.push(ev(
                    t0 + 4,
                    Performative::Failure,
                    pa,
                    ja,
                    json!({"job": job.id, "reason": "no feasible slot"}),
                ));
                schedule.entries.push(ScheduleEntry {
                    job: job.id.clone(),
                    machine: None,
                    start: None,
                    end: None,
                });
            }
        }
    }

    let mut roles = BTreeMap::new();
    roles.insert(ja.to_string(), "job_agent".to_string());
    roles.insert(pa.to_string(), "pool_agent".to_string());
    for m in &cfg.machines {
        roles.insert(m.id.clone(), "machines".to_string());
    }
    let trace = Trace {
        seed: cfg.seed,
        config: serde_json::to_value(cfg).expect("config serializes"),
        roles,
        events,
    };
    Ok((schedule, trace))
}

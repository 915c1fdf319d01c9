//! Random inputs and brute-force reference implementations for the
//! boxology test suites. Nothing here is tuned for speed; every oracle takes
//! the most literal route to its answer.

use std::collections::{BTreeMap, BTreeSet};

use boxology::patterns::PatternTemplate;
use boxology::simulator::{
    ActorConfig, BdiConfig, BeliefRule, Comparator, ContractNetConfig, DesireRule, Interval,
    EventRecord, JobConfig, MachineConfig, ParticipantConfig, Performative, PlanningConfig, Schedule,
    ScheduleEntry, SensorConfig, Trace,
};
use boxology::validator::LegalityTable;
use boxology::{ConceptRef, Document, Edge, EdgeKind, Frame, Node, NodeKind, Role, Taxonomy};
use rand::seq::IndexedRandom;
use rand::Rng;

pub use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const NAME_CHARS: &[char] = &['a', 'b', 'Z', ' ', '"', '\\', '\n', '\t', 'é', '-', ':'];

fn random_text(rng: &mut impl Rng, max_len: usize) -> String {
    let len = rng.random_range(0..=max_len);
    (0..len).map(|_| *NAME_CHARS.choose(rng).unwrap()).collect()
}

/// A label naming `c`: its bare name, its display label or its full path.
fn random_label(rng: &mut impl Rng, tax: &Taxonomy, c: ConceptRef) -> String {
    match rng.random_range(0..3) {
        0 => c.name().to_string(),
        1 => tax.display_label(c).unwrap(),
        _ => tax.full_path(c).unwrap(),
    }
}

fn concepts_of(tax: &Taxonomy, kind: NodeKind) -> Vec<ConceptRef> {
    tax.concepts().filter(|c| c.kind() == kind).collect()
}

/// Any structurally valid document with up to `max_nodes` nodes. Concept
/// labels, edge kinds and frames are arbitrary, so the document may carry
/// validator findings; it always builds. About one node in ten has a label
/// that does not resolve.
pub fn random_document(rng: &mut impl Rng, tax: &Taxonomy, max_nodes: usize) -> Document {
    document_with(rng, tax, max_nodes, 0.1)
}

/// Like [`random_document`], but every concept label resolves.
pub fn random_resolvable_document(rng: &mut impl Rng, tax: &Taxonomy, max_nodes: usize) -> Document {
    document_with(rng, tax, max_nodes, 0.0)
}

fn document_with(rng: &mut impl Rng, tax: &Taxonomy, max_nodes: usize, unresolved: f64) -> Document {
    let n = rng.random_range(0..=max_nodes);
    let mut nodes = Vec::new();
    for i in 0..n {
        let kind = *NodeKind::ALL.choose(rng).unwrap();
        let concept = if rng.random_bool(unresolved) {
            // Occasionally a label that does not resolve.
            "no_such:concept".to_string()
        } else {
            let pool = concepts_of(tax, kind);
            let c = *pool.choose(rng).unwrap();
            random_label(rng, tax, c)
        };
        let mut node = Node::new(format!("n{i}"), kind, concept);
        if rng.random_bool(0.3) {
            node = node.named(random_text(rng, 6));
        }
        nodes.push(node);
    }
    let mut edges = Vec::new();
    if n > 0 {
        for _ in 0..rng.random_range(0..=2 * n) {
            let from = rng.random_range(0..n);
            let to = rng.random_range(0..n);
            let kind = *[
                EdgeKind::Flow,
                EdgeKind::Role(Role::Initiates),
                EdgeKind::Role(Role::Supports),
                EdgeKind::Influence,
                EdgeKind::Message,
            ]
            .choose(rng)
            .unwrap();
            let mut edge = Edge::new(format!("n{from}"), kind, format!("n{to}"));
            if kind == EdgeKind::Message || rng.random_bool(0.2) {
                let pool = concepts_of(tax, NodeKind::Instance);
                let c = *pool.choose(rng).unwrap();
                edge = edge.labeled(random_label(rng, tax, c));
            }
            edges.push(edge);
        }
    }
    let mut frames = Vec::new();
    if n >= 2 {
        // Up to two zoom frames over disjoint members that contain no badge,
        // so they never overlap or nest.
        let mut ids: Vec<usize> = (0..n).collect();
        for i in (1..ids.len()).rev() {
            ids.swap(i, rng.random_range(0..=i));
        }
        let zooms = rng.random_range(0..=2usize).min(n / 2);
        let badges: Vec<usize> = ids.drain(..zooms).collect();
        let share = ids.len() / zooms.max(1);
        for (z, badge) in badges.iter().enumerate() {
            let take = rng.random_range(0..=share);
            let members: Vec<String> = ids[z * share..z * share + take].iter().map(|i| format!("n{i}")).collect();
            frames.push(Frame::zoom(format!("n{badge}"), members));
        }
        for p in 0..rng.random_range(0..=2) {
            let members: BTreeSet<String> = (0..rng.random_range(0..=n))
                .map(|_| format!("n{}", rng.random_range(0..n)))
                .collect();
            let name = if rng.random_bool(0.5) {
                format!("pattern {p}")
            } else {
                random_text(rng, 5)
            };
            frames.push(Frame::pattern(name, members));
        }
    }
    let name = random_text(rng, 10);
    // Duplicate pattern frames would collide on their derived ids.
    let mut seen = BTreeSet::new();
    frames.retain(|f| seen.insert(f.id.clone()));
    let mut edge_keys = BTreeSet::new();
    edges.retain(|e| edge_keys.insert((e.from.clone(), e.to.clone(), e.kind, e.label.clone())));
    Document::build(name, nodes, edges, frames).expect("generator keeps documents structurally valid")
}

/// Concepts that occur in the built-in pattern templates, plus a few of
/// their relatives, so random graphs actually contain pattern occurrences.
const MATCHER_CONCEPTS: &[&str] = &[
    "data", "tensor", "symbol", "label", "cfp", "proposal", "job", "statistical", "neuralnet", "code",
    "partial", "capacity", "semantic", "induce", "train", "deduce", "classify", "transform", "infer",
    "actor", "agent", "team", "human",
];

/// Small, pattern-dense documents for matcher comparisons. Most of them
/// contain a planted occurrence of a built-in template that fits, with
/// concepts drawn from below each slot's constraint; some of those lose one
/// template edge. Random extra nodes and legal edges surround it.
pub fn random_pattern_document(rng: &mut impl Rng, tax: &Taxonomy, max_nodes: usize) -> Document {
    let n = rng.random_range(1..=max_nodes);
    let mut concepts: Vec<ConceptRef> = Vec::new();
    let mut planted: Vec<(usize, usize, EdgeKind, Option<ConceptRef>)> = Vec::new();
    let fitting: Vec<&PatternTemplate> = boxology::patterns::builtin_patterns()
        .iter()
        .filter(|p| p.slots.len() <= n)
        .collect();
    if !fitting.is_empty() && rng.random_bool(0.7) {
        let p = *fitting.choose(rng).unwrap();
        for slot in &p.slots {
            let below: Vec<ConceptRef> = tax.concepts().filter(|&c| subsumed(tax, c, slot.concept)).collect();
            concepts.push(*below.choose(rng).unwrap());
        }
        for e in &p.edges {
            let label = e.label.map(|want| {
                let below: Vec<ConceptRef> = tax.concepts().filter(|&c| subsumed(tax, c, want)).collect();
                *below.choose(rng).unwrap()
            });
            planted.push((e.from, e.to, e.kind, label));
        }
        if rng.random_bool(0.3) {
            planted.remove(rng.random_range(0..planted.len()));
        }
    }
    while concepts.len() < n {
        concepts.push(tax.lookup(MATCHER_CONCEPTS.choose(rng).unwrap()).unwrap());
    }
    // Node `i` gets id `v{perm[i]}` so planted slots are not always v0, v1, ...
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let nodes: Vec<Node> = concepts
        .iter()
        .enumerate()
        .map(|(i, &c)| Node::new(format!("v{}", perm[i]), c.kind(), random_label(rng, tax, c)))
        .collect();

    let table = LegalityTable::standard();
    let message_labels = ["cfp", "proposal", "assignment", "result", "request", "reply", "workorder", "job", "symbol"];
    let mut edges = Vec::new();
    let mut keys = BTreeSet::new();
    let mut push = |e: Edge| {
        if keys.insert((e.from.clone(), e.to.clone(), e.kind, e.label.clone())) {
            edges.push(e);
        }
    };
    for (f, t, kind, label) in planted {
        let mut e = Edge::new(nodes[f].id.clone(), kind, nodes[t].id.clone());
        if let Some(c) = label {
            e = e.labeled(random_label(rng, tax, c));
        } else if kind == EdgeKind::Message {
            e = e.labeled("symbol");
        }
        push(e);
    }
    for _ in 0..rng.random_range(0..=2 * n) {
        let (f, t) = (rng.random_range(0..n), rng.random_range(0..n));
        let legal: Vec<EdgeKind> = table
            .triples()
            .filter(|(a, _, b)| *a == nodes[f].kind && *b == nodes[t].kind)
            .map(|(_, k, _)| *k)
            .collect();
        let Some(&kind) = legal.choose(rng) else { continue };
        let mut e = Edge::new(nodes[f].id.clone(), kind, nodes[t].id.clone());
        if kind == EdgeKind::Message {
            e = e.labeled(*message_labels.choose(rng).unwrap());
        }
        push(e);
    }
    Document::build("random", nodes, edges, Vec::new()).unwrap()
}

fn subsumed(tax: &Taxonomy, mut c: ConceptRef, ancestor: ConceptRef) -> bool {
    loop {
        if c == ancestor {
            return true;
        }
        match tax.parent(c).unwrap() {
            Some(p) => c = p,
            None => return false,
        }
    }
}

fn permutations_within_groups(template: &PatternTemplate) -> Vec<Vec<usize>> {
    let k = template.slots.len();
    let mut all = vec![(0..k).collect::<Vec<_>>()];
    let mut groups: BTreeMap<ConceptRef, Vec<usize>> = BTreeMap::new();
    for (i, s) in template.slots.iter().enumerate() {
        groups.entry(s.concept).or_default().push(i);
    }
    for members in groups.values().filter(|g| g.len() > 1) {
        let mut next = Vec::new();
        for perm in &all {
            for order in permutations(members.len()) {
                let mut p = perm.clone();
                for (j, &o) in order.iter().enumerate() {
                    p[members[j]] = perm[members[o]];
                }
                next.push(p);
            }
        }
        all = next;
    }
    all
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn edge_multiset(template: &PatternTemplate, sigma: &[usize]) -> BTreeSet<(usize, usize, EdgeKind, Option<ConceptRef>)> {
    template
        .edges
        .iter()
        .map(|e| (sigma[e.from], sigma[e.to], e.kind, e.label))
        .collect()
}

/// Every occurrence of `template` in `doc`, found by trying all injective
/// slot assignments, reduced to the lexicographically smallest id vector of
/// each symmetry class. Vectors list node ids in slot order.
pub fn brute_force_matches(doc: &Document, template: &PatternTemplate, tax: &Taxonomy) -> BTreeSet<Vec<String>> {
    let nodes = doc.nodes();
    let k = template.slots.len();
    let identity: Vec<usize> = (0..k).collect();
    let base = edge_multiset(template, &identity);
    let symmetries: Vec<Vec<usize>> = permutations_within_groups(template)
        .into_iter()
        .filter(|s| edge_multiset(template, s) == base)
        .collect();

    // Node-level facts are computed once; the search itself stays a plain
    // enumeration of injective maps.
    let compatible: Vec<Vec<usize>> = template
        .slots
        .iter()
        .map(|s| {
            (0..nodes.len())
                .filter(|&v| {
                    nodes[v].kind == s.concept.kind()
                        && tax
                            .resolve_path(&nodes[v].concept)
                            .is_ok_and(|c| subsumed(tax, c, s.concept))
                })
                .collect()
        })
        .collect();
    let doc_edges: Vec<(usize, usize, EdgeKind, Option<ConceptRef>)> = doc
        .edges()
        .iter()
        .map(|e| {
            (
                doc.node_position(&e.from).unwrap(),
                doc.node_position(&e.to).unwrap(),
                e.kind,
                e.label.as_deref().and_then(|l| tax.resolve_path(l).ok()),
            )
        })
        .collect();
    let edge_ok = |assign: &[usize]| {
        template.edges.iter().all(|te| {
            doc_edges.iter().any(|&(f, t, kind, label)| {
                f == assign[te.from]
                    && t == assign[te.to]
                    && kind == te.kind
                    && match te.label {
                        None => true,
                        Some(want) => label.is_some_and(|l| subsumed(tax, l, want)),
                    }
            })
        })
    };

    let mut out = BTreeSet::new();
    let mut assign = Vec::with_capacity(k);
    let mut used = vec![false; nodes.len()];
    fn walk(
        compatible: &[Vec<usize>],
        assign: &mut Vec<usize>,
        used: &mut [bool],
        visit: &mut dyn FnMut(&[usize]),
    ) {
        let Some(candidates) = compatible.get(assign.len()) else {
            visit(assign);
            return;
        };
        for &v in candidates {
            if !used[v] {
                used[v] = true;
                assign.push(v);
                walk(compatible, assign, used, visit);
                assign.pop();
                used[v] = false;
            }
        }
    }
    walk(&compatible, &mut assign, &mut used, &mut |a| {
        if edge_ok(a) {
            let canonical = symmetries
                .iter()
                .map(|s| s.iter().map(|&j| nodes[a[j]].id.clone()).collect::<Vec<_>>())
                .min()
                .unwrap();
            out.insert(canonical);
        }
    });
    out
}

pub fn random_contract_net(rng: &mut impl Rng, max_participants: usize) -> ContractNetConfig {
    let n = rng.random_range(1..=max_participants);
    let participants = (0..n)
        .map(|i| {
            let lo = rng.random_range(0..20);
            ParticipantConfig {
                id: format!("p{i:02}"),
                propose_probability: *[0.0, 0.3, 0.7, 1.0].choose(rng).unwrap(),
                bid_min: lo,
                bid_max: lo + rng.random_range(0..5),
                response_tick: None,
            }
        })
        .collect();
    ContractNetConfig {
        initiator: "initiator".into(),
        participants,
        deadline_ticks: rng.random_range(1..=6),
        seed: rng.random(),
    }
}

pub fn random_planning(rng: &mut impl Rng, max_machines: usize, max_jobs: usize) -> PlanningConfig {
    let horizon = 24;
    let machines = (0..rng.random_range(1..=max_machines))
        .map(|i| {
            let mut free = Vec::new();
            let mut t = rng.random_range(0..4);
            while t < horizon {
                let len = rng.random_range(1..=8);
                free.push(Interval::new(t, (t + len).min(horizon)));
                t += len + rng.random_range(0..4);
            }
            MachineConfig {
                id: format!("m{i}"),
                free,
            }
        })
        .collect();
    let jobs = (0..rng.random_range(0..=max_jobs))
        .map(|j| JobConfig {
            id: format!("j{j}"),
            duration: rng.random_range(1..=7),
            deadline: rng.random_range(1..=horizon + 2),
        })
        .collect();
    PlanningConfig {
        machines,
        jobs,
        job_agent: "job_agent".into(),
        pool_agent: "pool_agent".into(),
        seed: 0,
    }
}

fn free_ticks(cfg: &PlanningConfig) -> BTreeMap<&str, BTreeSet<u64>> {
    cfg.machines
        .iter()
        .map(|m| (m.id.as_str(), m.free.iter().flat_map(|iv| iv.start..iv.end).collect()))
        .collect()
}

/// Smallest start whose whole run of `duration` ticks is free and ends by
/// `deadline`.
fn earliest_start(ticks: &BTreeSet<u64>, duration: u64, deadline: u64) -> Option<u64> {
    (0..=deadline.saturating_sub(duration))
        .find(|&s| s + duration <= deadline && (s..s + duration).all(|t| ticks.contains(&t)))
}

/// Replays a schedule tick by tick against the machines' free time and
/// checks it: no double booking, deadlines met, and a job is left
/// unassigned only if no machine had a long enough free run before its
/// deadline at that point of the replay.
pub fn check_schedule(cfg: &PlanningConfig, schedule: &Schedule) -> Result<(), String> {
    let mut free = free_ticks(cfg);
    if schedule.entries.len() != cfg.jobs.len() {
        return Err("schedule does not list every job".into());
    }
    for (job, entry) in cfg.jobs.iter().zip(&schedule.entries) {
        if entry.job != job.id {
            return Err(format!("schedule order differs at {}", job.id));
        }
        let feasible = free
            .values()
            .any(|ticks| earliest_start(ticks, job.duration, job.deadline).is_some());
        match (&entry.machine, entry.start, entry.end) {
            (Some(m), Some(start), Some(end)) => {
                if end < start || end - start != job.duration {
                    return Err(format!("{}: wrong length", job.id));
                }
                if end > job.deadline {
                    return Err(format!("{}: misses its deadline", job.id));
                }
                let ticks = free.get_mut(m.as_str()).ok_or(format!("{}: unknown machine {m}", job.id))?;
                for t in start..end {
                    if !ticks.remove(&t) {
                        return Err(format!("{}: tick {t} on {m} is not free", job.id));
                    }
                }
            }
            (None, None, None) => {
                if feasible {
                    return Err(format!("{}: left unassigned although a slot existed", job.id));
                }
            }
            _ => return Err(format!("{}: partial schedule entry", job.id)),
        }
    }
    Ok(())
}

/// The schedule the auction rule prescribes, computed on explicit tick sets:
/// every machine offers its earliest fitting start, the largest slack wins,
/// equal slack goes to the smallest machine id.
pub fn reference_schedule(cfg: &PlanningConfig) -> Schedule {
    let mut free = free_ticks(cfg);
    let mut entries = Vec::new();
    for job in &cfg.jobs {
        let mut best: Option<(u64, &str, u64)> = None;
        for (m, ticks) in &free {
            if let Some(s) = earliest_start(ticks, job.duration, job.deadline) {
                let slack = job.deadline - (s + job.duration);
                if best.is_none_or(|(b, _, _)| slack > b) {
                    best = Some((slack, m, s));
                }
            }
        }
        match best {
            Some((_, m, s)) => {
                let m = m.to_string();
                let ticks = free.get_mut(m.as_str()).unwrap();
                for t in s..s + job.duration {
                    ticks.remove(&t);
                }
                entries.push(ScheduleEntry {
                    job: job.id.clone(),
                    machine: Some(m),
                    start: Some(s),
                    end: Some(s + job.duration),
                });
            }
            None => entries.push(ScheduleEntry {
                job: job.id.clone(),
                machine: None,
                start: None,
                end: None,
            }),
        }
    }
    Schedule { entries }
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Mean and population variance of the concatenation: two passes over the
/// pooled data with compensated sums.
pub fn centralized_stats(partitions: &[Vec<f64>]) -> Option<(f64, f64)> {
    let all: Vec<f64> = partitions.iter().flatten().copied().collect();
    if all.is_empty() {
        return None;
    }
    let n = all.len() as f64;
    let mean = compensated_sum(all.iter().copied()) / n;
    let var = compensated_sum(all.iter().map(|x| (x - mean) * (x - mean))) / n;
    Some((mean, var))
}

/// For integer-valued data: exact pooled sums in `i128`, then mean and
/// `sum_sq / n - mean^2` as one site holding all the data would compute them.
pub fn centralized_integer_stats(partitions: &[Vec<f64>]) -> Option<(u64, f64, f64)> {
    let all: Vec<i128> = partitions
        .iter()
        .flatten()
        .map(|&x| {
            assert!(x.fract() == 0.0, "integer data expected");
            x as i128
        })
        .collect();
    if all.is_empty() {
        return None;
    }
    let n = all.len() as f64;
    let sum: i128 = all.iter().sum();
    let sum_sq: i128 = all.iter().map(|x| x * x).sum();
    let mean = sum as f64 / n;
    Some((all.len() as u64, mean, sum_sq as f64 / n - mean * mean))
}

pub fn random_partitions(rng: &mut impl Rng, integer: bool) -> Vec<Vec<f64>> {
    (0..rng.random_range(1..=8))
        .map(|_| {
            (0..rng.random_range(0..=12))
                .map(|_| {
                    if integer {
                        rng.random_range(-1000i64..=1000) as f64
                    } else {
                        rng.random_range(-100.0..100.0)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn random_bdi(rng: &mut impl Rng, max_actors: usize, max_ticks: u64) -> BdiConfig {
    let sensors = ["temp", "light", "noise"];
    let environment = sensors
        .iter()
        .map(|s| {
            (
                s.to_string(),
                SensorConfig {
                    initial: rng.random_range(-10.0..10.0),
                    drift: rng.random_range(-1.0..1.0),
                    noise: *[0.0, 0.5, 2.0].choose(rng).unwrap(),
                },
            )
        })
        .collect();
    let comparators = [Comparator::Lt, Comparator::Le, Comparator::Gt, Comparator::Ge];
    let belief_rules: Vec<BeliefRule> = (0..rng.random_range(0..=4))
        .map(|i| BeliefRule {
            sensor: sensors.choose(rng).unwrap().to_string(),
            comparator: *comparators.choose(rng).unwrap(),
            threshold: rng.random_range(-5.0..5.0),
            belief: format!("b{i}"),
        })
        .collect();
    let beliefs: Vec<String> = belief_rules.iter().map(|r| r.belief.clone()).collect();
    let desire_rules: Vec<DesireRule> = if beliefs.is_empty() {
        Vec::new()
    } else {
        (0..rng.random_range(0..=3))
            .map(|i| DesireRule {
                beliefs: (0..rng.random_range(1..=2)).map(|_| beliefs.choose(rng).unwrap().clone()).collect(),
                goal: format!("g{i}"),
            })
            .collect()
    };
    let actions = ["heat", "cool", "dim"];
    let mut plans = BTreeMap::new();
    for d in &desire_rules {
        if rng.random_bool(0.8) {
            let steps = (0..rng.random_range(1..=2)).map(|_| actions.choose(rng).unwrap().to_string()).collect();
            plans.insert(d.goal.clone(), steps);
        }
    }
    let effects = actions
        .iter()
        .map(|a| {
            let deltas = [(sensors.choose(rng).unwrap().to_string(), rng.random_range(-3.0..3.0))]
                .into_iter()
                .collect();
            (a.to_string(), deltas)
        })
        .collect();
    let actors = (0..rng.random_range(1..=max_actors))
        .map(|i| ActorConfig {
            id: format!("a{i}"),
            team: rng.random_bool(0.8).then(|| "crew".to_string()),
            sensors: rng.random_bool(0.5).then(|| {
                sensors
                    .iter()
                    .filter(|_| rng.random_bool(0.5))
                    .map(|s| s.to_string())
                    .collect()
            }),
        })
        .collect();
    BdiConfig {
        environment,
        effects,
        belief_rules,
        desire_rules,
        plans,
        actors,
        share_beliefs: rng.random_bool(0.5),
        ticks: rng.random_range(1..=max_ticks),
        seed: rng.random(),
    }
}

/// ContractNet safety on one trace: at most one accept; an accept exactly
/// when some proposal arrived by the deadline; every such proposal answered
/// by exactly one accept or reject; the award at the highest bid with ties
/// to the smallest id; `ignored` set exactly on answers after the deadline.
pub fn check_contract_net(cfg: &ContractNetConfig, trace: &Trace) -> Result<(), String> {
    let late = |e: &EventRecord| e.payload.get("ignored") == Some(&serde_json::Value::Bool(true));
    let valid: Vec<&EventRecord> = trace
        .events
        .iter()
        .filter(|e| e.performative == Performative::Propose && !late(e))
        .collect();
    let accepts: Vec<&EventRecord> = trace.events.iter().filter(|e| e.performative == Performative::Accept).collect();
    if accepts.len() > 1 {
        return Err(format!("{} accepts", accepts.len()));
    }
    if accepts.len() == 1 && valid.is_empty() {
        return Err("accept without a valid proposal".into());
    }
    if accepts.is_empty() && !valid.is_empty() {
        return Err("valid proposals but no accept".into());
    }
    for v in &valid {
        let answers = trace
            .events
            .iter()
            .filter(|e| matches!(e.performative, Performative::Accept | Performative::Reject) && e.receiver == v.sender)
            .count();
        if answers != 1 {
            return Err(format!("{} answered {answers} times", v.sender));
        }
    }
    if let Some(a) = accepts.first() {
        let best = valid
            .iter()
            .map(|e| (e.payload["bid"].as_i64().unwrap_or(i64::MIN), std::cmp::Reverse(e.sender.as_str())))
            .max()
            .unwrap();
        if a.receiver != best.1 .0 {
            return Err(format!("award to {} but best is {}", a.receiver, best.1 .0));
        }
    }
    for e in &trace.events {
        if matches!(e.performative, Performative::Propose | Performative::Refuse) && late(e) != (e.tick > cfg.deadline_ticks) {
            return Err(format!("ignored flag wrong on {e:?}"));
        }
    }
    Ok(())
}

fn rank(p: Performative) -> Option<u8> {
    match p {
        Performative::Sense => Some(0),
        Performative::Classify => Some(1),
        Performative::Predict => Some(2),
        Performative::Plan => Some(3),
        Performative::Act => Some(4),
        Performative::Speak => Some(5),
        _ => None,
    }
}

fn rule_holds(cmp: Comparator, value: f64, threshold: f64) -> bool {
    match serde_json::to_value(cmp).unwrap().as_str().unwrap() {
        "<" => value < threshold,
        "<=" => value <= threshold,
        ">" => value > threshold,
        ">=" => value >= threshold,
        "==" => value == threshold,
        other => panic!("unknown comparator {other}"),
    }
}

/// Checks one BDI trace against its config: performative order per
/// (actor, tick), a satisfied rule (or an earlier teammate speak) behind
/// every belief, and, with sharing on, every sensed belief held by each
/// teammate on the next tick.
pub fn check_bdi_trace(cfg: &BdiConfig, trace: &Trace) -> Result<(), String> {
    let mut by_actor_tick: BTreeMap<(&str, u64), Vec<&EventRecord>> = BTreeMap::new();
    for e in &trace.events {
        if rank(e.performative).is_none() {
            return Err(format!("unexpected performative in {e:?}"));
        }
        by_actor_tick.entry((e.sender.as_str(), e.tick)).or_default().push(e);
    }
    for a in &cfg.actors {
        for t in 0..cfg.ticks {
            let Some(events) = by_actor_tick.get(&(a.id.as_str(), t)) else {
                return Err(format!("{} has no events at tick {t}", a.id));
            };
            let ranks: Vec<u8> = events.iter().filter_map(|e| rank(e.performative)).collect();
            if ranks[0] != 0 || ranks.iter().filter(|&&r| r == 0).count() != 1 || !ranks.windows(2).all(|w| w[0] <= w[1]) {
                return Err(format!("{} at tick {t}: order {ranks:?}", a.id));
            }
            let readings = &events[0].payload["readings"];
            for e in events.iter().filter(|e| e.performative == Performative::Classify) {
                let belief = e.payload["belief"].as_str().unwrap_or_default();
                match e.payload["source"].as_str() {
                    Some("sensor") => {
                        let sensor = e.payload["sensor"].as_str().unwrap_or_default();
                        let value = readings[sensor].as_f64().ok_or(format!("{} did not sense {sensor}", a.id))?;
                        if e.payload["value"].as_f64() != Some(value) {
                            return Err(format!("{}: belief {belief} cites a value it did not sense", a.id));
                        }
                        let justified = cfg.belief_rules.iter().any(|r| {
                            r.belief == belief && r.sensor == sensor && rule_holds(r.comparator, value, r.threshold)
                        });
                        if !justified {
                            return Err(format!("{} at tick {t}: unjustified belief {belief}", a.id));
                        }
                    }
                    Some("shared") => {
                        let from = e.payload["from"].as_str().unwrap_or_default();
                        let spoken = cfg.share_beliefs
                            && trace.events.iter().any(|s| {
                                s.performative == Performative::Speak
                                    && s.sender == from
                                    && s.receiver == a.id
                                    && s.payload["belief"] == belief
                                    && s.tick < t
                            });
                        if !spoken {
                            return Err(format!("{} at tick {t}: shared belief {belief} never spoken", a.id));
                        }
                    }
                    other => return Err(format!("unknown belief source {other:?}")),
                }
            }
        }
    }
    if cfg.share_beliefs {
        let held = |actor: &str, tick: u64, belief: &str| {
            by_actor_tick.get(&(actor, tick)).is_some_and(|events| {
                events
                    .iter()
                    .any(|e| e.performative == Performative::Classify && e.payload["belief"] == belief)
            })
        };
        for a in &cfg.actors {
            let Some(team) = &a.team else { continue };
            for e in trace.events.iter().filter(|e| {
                e.performative == Performative::Classify && e.sender == a.id && e.payload["source"] == "sensor"
            }) {
                if e.tick + 1 >= cfg.ticks {
                    continue;
                }
                let belief = e.payload["belief"].as_str().unwrap_or_default();
                for mate in cfg.actors.iter().filter(|m| m.id != a.id && m.team.as_ref() == Some(team)) {
                    if !held(&mate.id, e.tick + 1, belief) {
                        return Err(format!("{} lacks {belief} from {} at tick {}", mate.id, a.id, e.tick + 1));
                    }
                }
            }
        }
    }
    Ok(())
}

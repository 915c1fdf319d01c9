use std::collections::BTreeMap;

use boxology::simulator::*;
use boxology_testkit::{
    centralized_integer_stats, centralized_stats, check_bdi_trace, check_contract_net,
    check_schedule, random_bdi, random_contract_net, random_partitions, random_planning,
    reference_schedule, rng,
};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::json;

#[test]
fn contract_net_safety_over_random_configs() {
    let spec = contract_net_protocol();
    let mut r = rng(11);
    for run in 0..1000 {
        let cfg = random_contract_net(&mut r, 10);
        let trace = run_contract_net(&cfg).unwrap();
        let report = check_trace(&trace, &spec);
        assert!(report.conformant(), "run {run}: {report:?}");

        check_contract_net(&cfg, &trace).unwrap_or_else(|e| panic!("run {run}: {e}"));
    }
}

#[test]
fn contract_net_single_participant_always_awarded() {
    for seed in 0..50 {
        let cfg = ContractNetConfig {
            initiator: "initiator".into(),
            participants: vec![ParticipantConfig {
                id: "solo".into(),
                propose_probability: 1.0,
                bid_min: 1,
                bid_max: 9,
                response_tick: Some(1),
            }],
            deadline_ticks: 2,
            seed,
        };
        let t = run_contract_net(&cfg).unwrap();
        let accepts: Vec<_> = t.events.iter().filter(|e| e.performative == Performative::Accept).collect();
        assert_eq!(accepts.len(), 1);
        assert_eq!(accepts[0].receiver, "solo");
    }
}

#[test]
fn contract_net_is_deterministic() {
    let mut r = rng(5);
    for _ in 0..50 {
        let cfg = random_contract_net(&mut r, 10);
        assert_eq!(run_contract_net(&cfg).unwrap().to_jsonl(), run_contract_net(&cfg).unwrap().to_jsonl());
    }
}

#[test]
fn accept_before_cfp_is_a_violation_at_event_zero() {
    let events = vec![
        EventRecord::new(0, "c", Performative::Accept, "i", "p", json!({})),
        EventRecord::new(0, "c", Performative::Cfp, "i", "p", json!({})),
    ];
    let trace = Trace {
        seed: 0,
        config: json!(null),
        roles: BTreeMap::new(),
        events,
    };
    let report = check_trace(&trace, &contract_net_protocol());
    assert_eq!(report.violations[0].event, 0);
    assert!(!report.conformant());
}

#[test]
fn truncating_before_inform_result_leaves_conversation_open() {
    let fixed = |id: &str, bid| ParticipantConfig {
        id: id.into(),
        propose_probability: 1.0,
        bid_min: bid,
        bid_max: bid,
        response_tick: Some(1),
    };
    let cfg = ContractNetConfig {
        initiator: "initiator".into(),
        participants: vec![fixed("a", 3), fixed("b", 4)],
        deadline_ticks: 2,
        seed: 0,
    };
    let mut trace = run_contract_net(&cfg).unwrap();
    assert!(check_trace(&trace, &contract_net_protocol()).conformant());
    let last = trace.events.pop().unwrap();
    assert_eq!(last.performative, Performative::InformResult);
    let report = check_trace(&trace, &contract_net_protocol());
    assert!(report.violations.is_empty());
    assert!(!report.conversations[0].terminal);
    assert!(!report.conformant());
}

#[test]
fn planning_matches_oracles() {
    let spec = planning_protocol();
    let mut r = rng(12);
    let mut assigned = 0;
    let mut unassigned = 0;
    for run in 0..200 {
        let cfg = random_planning(&mut r, 5, 8);
        let (schedule, trace) = run_distributed_planning(&cfg).unwrap();
        check_schedule(&cfg, &schedule).unwrap_or_else(|e| panic!("run {run}: {e}"));
        assert_eq!(schedule, reference_schedule(&cfg), "run {run}");
        assert!(check_trace(&trace, &spec).conformant(), "run {run}");
        for e in &schedule.entries {
            if e.machine.is_some() {
                assigned += 1;
            } else {
                unassigned += 1;
            }
        }
    }
    assert!(assigned > 0 && unassigned > 0, "{assigned} / {unassigned}");
}

fn machine(id: &str, free: &[(u64, u64)]) -> MachineConfig {
    MachineConfig {
        id: id.into(),
        free: free.iter().map(|&(s, e)| Interval::new(s, e)).collect(),
    }
}

fn job(id: &str, duration: u64, deadline: u64) -> JobConfig {
    JobConfig {
        id: id.into(),
        duration,
        deadline,
    }
}

fn planning(machines: Vec<MachineConfig>, jobs: Vec<JobConfig>) -> PlanningConfig {
    PlanningConfig {
        machines,
        jobs,
        job_agent: "job_agent".into(),
        pool_agent: "pool_agent".into(),
        seed: 0,
    }
}

#[test]
fn planning_examples_agree_with_reference() {
    let cases = [
        planning(vec![machine("m2", &[(0, 10)]), machine("m1", &[(0, 10)])], vec![job("j", 3, 5)]),
        planning(vec![machine("m1", &[(0, 2)]), machine("m2", &[(3, 5)])], vec![job("j", 3, 10)]),
        planning(vec![machine("m1", &[(0, 10)])], vec![job("a", 4, 10), job("b", 4, 10)]),
    ];
    for cfg in &cases {
        let (schedule, trace) = run_distributed_planning(cfg).unwrap();
        assert_eq!(schedule, reference_schedule(cfg));
        assert!(check_trace(&trace, &planning_protocol()).conformant());
    }
    let (s, _) = run_distributed_planning(&cases[0]).unwrap();
    assert_eq!(s.entries[0].machine.as_deref(), Some("m1"));
    assert_eq!((s.entries[0].start, s.entries[0].end), (Some(0), Some(3)));
    let (s, t) = run_distributed_planning(&cases[1]).unwrap();
    assert_eq!(s.entries[0].machine, None);
    assert_eq!(t.count(Performative::Accept), 0);
    let (s, _) = run_distributed_planning(&cases[2]).unwrap();
    assert_eq!(s.entries[1].start, Some(4));
}

#[test]
fn touching_free_intervals_form_one_slot() {
    let cfg = planning(vec![machine("m", &[(0, 3), (3, 6)])], vec![job("j", 5, 6)]);
    let (s, _) = run_distributed_planning(&cfg).unwrap();
    assert_eq!(s, reference_schedule(&cfg));
    assert_eq!(s.entries[0].start, Some(0));
}

fn relative_error(got: f64, want: f64) -> f64 {
    if got == want {
        0.0
    } else {
        (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
    }
}

#[test]
fn federated_integer_data_is_exact() {
    let mut r = rng(13);
    let mut runs = 0;
    while runs < 200 {
        let partitions = random_partitions(&mut r, true);
        let Some((count, mean, variance)) = centralized_integer_stats(&partitions) else { continue };
        runs += 1;
        let cfg = FederatedConfig {
            partitions: partitions.clone(),
            migrate: false,
            requester: "requester".into(),
            seed: 0,
        };
        let (g, trace) = run_federated_learning(&cfg).unwrap();
        assert_eq!((g.count, g.mean, g.variance), (count, mean, variance));
        assert!(check_trace(&trace, &federated_protocol()).conformant());
        // Integer data also agrees closely with the two-pass computation.
        let (m2, v2) = centralized_stats(&partitions).unwrap();
        assert!(relative_error(g.mean, m2) <= 1e-12);
        assert!((g.variance - v2).abs() <= 1e-9 * v2.max(1.0));
    }
}

#[test]
fn federated_float_data_within_tolerance() {
    let mut r = rng(14);
    let mut runs = 0;
    while runs < 200 {
        let partitions = random_partitions(&mut r, false);
        let Some((mean, variance)) = centralized_stats(&partitions) else { continue };
        runs += 1;
        let cfg = FederatedConfig {
            partitions: partitions.clone(),
            migrate: false,
            requester: "requester".into(),
            seed: 0,
        };
        let (g, _) = run_federated_learning(&cfg).unwrap();
        assert!(relative_error(g.mean, mean) <= 1e-12, "mean {} vs {mean}", g.mean);
        assert!(relative_error(g.variance, variance) <= 1e-12, "variance {} vs {variance}", g.variance);

        let mut shuffled = partitions.clone();
        shuffled.shuffle(&mut r);
        let (h, _) = run_federated_learning(&FederatedConfig { partitions: shuffled, ..cfg.clone() }).unwrap();
        assert_eq!(h, g);

        // Re-partitioning: pool the data and split it again elsewhere.
        let pooled: Vec<f64> = partitions.concat();
        let cut = r.random_range(0..=pooled.len());
        let resplit = vec![pooled[..cut].to_vec(), pooled[cut..].to_vec()];
        let (k, _) = run_federated_learning(&FederatedConfig { partitions: resplit, ..cfg }).unwrap();
        assert_eq!(k.count, g.count);
        assert!(relative_error(k.mean, mean) <= 1e-12);
        assert!(relative_error(k.variance, variance) <= 1e-12);
    }
}

#[test]
fn integrate_partials_is_commutative_and_associative() {
    let mut r = rng(15);
    for _ in 0..200 {
        let parts: Vec<PartialStats> = random_partitions(&mut r, false).iter().map(|p| PartialStats::of(p)).collect();
        let whole = integrate_partials(&parts);
        let mut shuffled = parts.clone();
        shuffled.shuffle(&mut r);
        assert_eq!(integrate_partials(&shuffled), whole);
        let cut = r.random_range(0..=parts.len());
        let nested = integrate_partials(&[integrate_partials(&parts[..cut]), integrate_partials(&parts[cut..])]);
        assert_eq!(nested.count, whole.count);
        assert!((nested.sum - whole.sum).abs() <= 1e-12 * whole.sum.abs().max(1.0));
        assert!((nested.sum_sq - whole.sum_sq).abs() <= 1e-12 * whole.sum_sq.max(1.0));
    }
}

#[test]
fn bdi_ordering_and_justification() {
    let spec = bdi_protocol();
    let mut r = rng(16);
    let mut shared_runs = 0;
    let mut beliefs = 0;
    for run in 0..100 {
        let cfg = random_bdi(&mut r, 3, 20);
        let trace = run_bdi(&cfg).unwrap();
        check_bdi_trace(&cfg, &trace).unwrap_or_else(|e| panic!("run {run}: {e}"));
        assert!(check_trace(&trace, &spec).conformant(), "run {run}");
        assert_eq!(trace.to_jsonl(), run_bdi(&cfg).unwrap().to_jsonl());
        shared_runs += usize::from(trace.count(Performative::Speak) > 0);
        beliefs += trace.count(Performative::Classify);
    }
    assert!(shared_runs > 0 && beliefs > 0);
}

#[test]
fn bdi_teammate_holds_shared_belief_from_next_tick() {
    let cfg: BdiConfig = serde_json::from_value(json!({
        "environment": {"temp": {"initial": 5.0, "drift": 0.0, "noise": 0.0}},
        "belief_rules": [{"sensor": "temp", "comparator": "<", "threshold": 10.0, "belief": "cold"}],
        "actors": [
            {"id": "a", "team": "crew", "sensors": ["temp"]},
            {"id": "b", "team": "crew", "sensors": []}
        ],
        "share_beliefs": true,
        "ticks": 3
    }))
    .unwrap();
    let trace = run_bdi(&cfg).unwrap();
    check_bdi_trace(&cfg, &trace).unwrap();
    let b_holds: Vec<u64> = trace
        .events
        .iter()
        .filter(|e| e.sender == "b" && e.performative == Performative::Classify && e.payload["belief"] == "cold")
        .map(|e| e.tick)
        .collect();
    assert_eq!(b_holds, [1, 2]);
}

#[test]
fn bdi_empty_rules_only_sense() {
    let cfg: BdiConfig = serde_json::from_value(json!({
        "environment": {"temp": {"initial": 5.0, "drift": 1.0, "noise": 0.5}},
        "actors": [{"id": "a"}],
        "ticks": 4,
        "seed": 9
    }))
    .unwrap();
    let trace = run_bdi(&cfg).unwrap();
    assert_eq!(trace.count(Performative::Sense), 4);
    assert_eq!(trace.events.len(), 4);
}

#[test]
fn simulations_are_deterministic_but_seed_sensitive() {
    let mut r = rng(17);
    let mut differs = false;
    for _ in 0..20 {
        let mut cfg = random_bdi(&mut r, 3, 10);
        let a = run_bdi(&cfg).unwrap().to_jsonl();
        assert_eq!(a, run_bdi(&cfg).unwrap().to_jsonl());
        cfg.seed ^= 1;
        differs |= a != run_bdi(&cfg).unwrap().to_jsonl();
    }
    assert!(differs);
}

#[test]
fn protocols_are_well_formed() {
    for spec in [contract_net_protocol(), planning_protocol(), federated_protocol(), bdi_protocol()] {
        spec.validate().unwrap_or_else(|e| panic!("{}: {e}", spec.name));
    }
}

#[test]
fn jsonl_round_trip_of_generated_traces() {
    let mut r = rng(18);
    for _ in 0..50 {
        let cfg = random_contract_net(&mut r, 10);
        let trace = run_contract_net(&cfg).unwrap();
        assert_eq!(Trace::from_jsonl(&trace.to_jsonl()).unwrap(), trace.events);
    }
}

use everwill::harness::log::Snapshot;
use everwill::harness::{check_invariants, load_config_str, replay, run_history, HistoryLog, RunConfig};
use everwill::Error;

fn config(model: &str, strategy: &str, steps: i64, seed: u64) -> RunConfig {
    let initial = if model == "golden" {
        r#""initial": {"carriers": {"generate": {"count": 12, "theta": [1, 2, 3]}}},"#
    } else {
        ""
    };
    let text = format!(
        r#"{{
            "model": "{model}",
            "society": {{"generate": {{"persons": 3, "estate": 2}}}},
            {initial}
            "strategy": {{"name": "{strategy}"}},
            "steps": {steps},
            "seed": {seed}
        }}"#
    );
    load_config_str(&text, None).unwrap()
}

const RUNS: &[(&str, &str)] = &[
    ("primitive", "uniform-selfish"),
    ("primitive", "proportional-greedy"),
    ("primitive", "zero-force"),
    ("good", "selfish"),
    ("good", "altruist"),
    ("good", "mirror"),
    ("golden", "minimal-compliance"),
    ("golden", "greedy"),
    ("golden", "bernoulli"),
];

#[test]
fn every_model_and_strategy_runs_clean() {
    for &(model, strategy) in RUNS {
        let (log, metrics) = run_history(&config(model, strategy, 60, 3)).unwrap();
        assert_eq!(log.steps.len(), 60);
        assert_eq!(metrics.rows.len(), 61);
        let report = check_invariants(&log).unwrap();
        assert!(report.is_clean(), "{model}/{strategy}: {:?}", report.violations);
        assert!(report.tallies["replay"].checked > 0);
        if model == "golden" {
            assert!(report.reciprocity.as_ref().unwrap().is_clean());
        }
    }
}

#[test]
fn logs_round_trip_through_jsonl() {
    for &(model, strategy) in RUNS {
        let (log, _) = run_history(&config(model, strategy, 20, 9)).unwrap();
        let text = log.to_jsonl().unwrap();
        assert!(text.lines().all(|l| l.contains("\"kind\":")));
        let parsed = HistoryLog::from_jsonl(&text).unwrap();
        assert_eq!(parsed, log);
        assert_eq!(parsed.to_jsonl().unwrap(), text);
        assert!(replay(&parsed).unwrap().is_empty());
    }
}

#[test]
fn identical_configs_give_identical_bytes() {
    let c = config("golden", "bernoulli", 50, 11);
    let a = run_history(&c).unwrap().0.to_jsonl().unwrap();
    let b = run_history(&c).unwrap().0.to_jsonl().unwrap();
    assert_eq!(a, b);
    let other = run_history(&config("golden", "bernoulli", 50, 12)).unwrap().0.to_jsonl().unwrap();
    assert_ne!(a, other);
}

#[test]
fn zero_steps_gives_a_header_only_history() {
    let mut c = config("primitive", "zero-force", 1, 0);
    c.steps = 0;
    let (log, metrics) = run_history(&c).unwrap();
    assert!(log.steps.is_empty());
    assert_eq!(metrics.rows.len(), 1);
    assert!(check_invariants(&log).unwrap().is_clean());
}

#[test]
fn sparse_snapshots_are_refused_by_the_checker() {
    let mut c = config("primitive", "uniform-selfish", 10, 0);
    c.log.snapshot_interval = 4;
    let (log, _) = run_history(&c).unwrap();
    let present: Vec<bool> = log.snapshots().iter().map(Option::is_some).collect();
    assert_eq!(
        present,
        [true, false, false, false, true, false, false, false, true, false, true]
    );
    assert!(matches!(check_invariants(&log), Err(Error::AuditInput(_))));

    c.audit = true;
    let (log, _) = run_history(&c).unwrap();
    assert!(check_invariants(&log).unwrap().is_clean());
}

#[test]
fn tampered_winner_is_caught_at_its_state() {
    let (mut log, _) = run_history(&config("good", "selfish", 30, 5)).unwrap();
    let record = &mut log.steps[12];
    let w = record.battles.winners[0].0;
    record.battles.winners[0] = everwill::PersonId((w + 1) % 3);
    let report = check_invariants(&log).unwrap();
    assert_eq!(report.first_violation().unwrap().state, 13);
}

#[test]
fn golden_latency_metrics_match_strategy() {
    let (_, metrics) = run_history(&config("golden", "greedy", 40, 1)).unwrap();
    let latency = metrics.latency.unwrap();
    assert_eq!(latency.min, Some(1));
    assert_eq!(latency.max, Some(1));

    let (log, metrics) = run_history(&config("golden", "minimal-compliance", 40, 1)).unwrap();
    let latency = metrics.latency.unwrap();
    assert_eq!(latency.min, Some(2));
    assert_eq!(latency.max, Some(4));
    let Some(Snapshot::Golden(_)) = log.steps.last().unwrap().snapshot else {
        panic!("final snapshot missing");
    };
}

#[test]
fn metrics_csv_has_one_line_per_state() {
    let (_, metrics) = run_history(&config("primitive", "uniform-selfish", 5, 0)).unwrap();
    let csv = metrics.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,total_power,gini,owned_0,owned_1,owned_2"));
    assert_eq!(lines.count(), 6);
}

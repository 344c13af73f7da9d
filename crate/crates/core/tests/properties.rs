use everwill::harness::{check_invariants, load_config_str, run_history};
use everwill::lottery::pick;
use everwill::will::{build_golden, build_good, build_primitive};
use everwill::{
    generate_relationships, golden_step, golden_win_distribution, good_exchange, good_step, good_win_distribution,
    primitive_step, primitive_win_distribution, validate_relationships, CarrierId, CarrierRoster, ForceCarrier,
    GeneratorParams, GoldenPowerPartition, GoldenState, GoodPowerTable, GoodState, IdleTable, PrimitivePowerTable,
    PrimitiveState, SocialAssignment, Society, StrategySpec, Streams,
};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = GeneratorParams> {
    (0.001f64..0.45, 1usize..5).prop_map(|(epsilon, dim)| GeneratorParams { epsilon, dim })
}

fn sums_to_one(dist: &[f64]) -> bool {
    (dist.iter().sum::<f64>() - 1.0).abs() <= 1e-12 && dist.iter().all(|&p| p >= 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_relationships_satisfy_axioms(n in 1usize..50, seed: u64, params in params()) {
        let table = generate_relationships(n, seed, &params).unwrap();
        let report = validate_relationships(&table).unwrap();
        prop_assert!(report.is_ok(), "{}", report);
    }

    #[test]
    fn primitive_runs_conserve_power(
        n in 1usize..6,
        m in 1usize..4,
        seed: u64,
        beta in 0.0f64..0.99,
        strategy in prop::sample::select(vec!["uniform-selfish", "proportional-greedy", "zero-force"]),
    ) {
        let society = Society::generate(n, m, seed, &Default::default()).unwrap();
        let spec = if strategy == "zero-force" {
            StrategySpec::named(strategy)
        } else {
            StrategySpec::with_params(strategy, serde_json::json!({"beta": beta}))
        };
        let mut will = build_primitive(&spec).unwrap();
        let mut streams = Streams::from_seed(seed);
        let power = PrimitivePowerTable::uniform(&society, 1.0).unwrap();
        let mut state = PrimitiveState::bootstrap(
            &society, SocialAssignment::round_robin(&society), power, will.as_mut(), &mut streams,
        ).unwrap();
        let total = state.power.total();
        for _ in 0..40 {
            for a in society.goods() {
                prop_assert!(sums_to_one(&primitive_win_distribution(&society, &state, a).unwrap()));
            }
            let (next, battles) = primitive_step(&society, &state, will.as_mut(), &mut streams).unwrap();
            for (a, dist) in battles.distributions.iter().enumerate() {
                prop_assert_eq!(pick(dist, battles.variates[a]), battles.winners[a]);
            }
            prop_assert!(next.validate(&society).is_ok());
            prop_assert!((next.power.total() - total).abs() <= 1e-9);
            state = next;
        }
    }

    #[test]
    fn good_exchange_is_antisymmetric_and_fixes_the_diagonal(
        n in 1usize..5,
        m in 1usize..4,
        seed: u64,
        strategy in prop::sample::select(vec!["selfish", "altruist", "mirror"]),
    ) {
        let society = Society::generate(n, m, seed, &Default::default()).unwrap();
        let mut will = build_good(&StrategySpec::named(strategy)).unwrap();
        let mut streams = Streams::from_seed(seed);
        let power = GoodPowerTable::uniform(&society, 1.0).unwrap();
        let mut state = GoodState::bootstrap(
            &society, SocialAssignment::round_robin(&society), power, will.as_mut(), &mut streams,
        ).unwrap();
        let total = state.power.total();
        for _ in 0..20 {
            for a in society.goods() {
                prop_assert!(sums_to_one(&good_win_distribution(&society, &state, a).unwrap()));
                for x in society.persons() {
                    for y in society.persons() {
                        let e = good_exchange(&state.force, x, a, y);
                        prop_assert_eq!(e, -good_exchange(&state.force, y, a, x));
                    }
                }
            }
            let (next, _) = good_step(&society, &state, will.as_mut(), &mut streams).unwrap();
            for a in society.goods() {
                for x in society.persons() {
                    prop_assert_eq!(next.power.get(x, a, x), state.power.get(x, a, x));
                }
            }
            prop_assert!((next.power.total() - total).abs() <= 1e-9);
            state = next;
        }
    }

    #[test]
    fn golden_partition_and_idle_bounds_hold(
        n in 1usize..4,
        m in 1usize..3,
        carriers in 1usize..16,
        seed: u64,
        strategy in prop::sample::select(vec!["minimal-compliance", "greedy", "bernoulli"]),
    ) {
        let society = Society::generate(n, m, seed, &Default::default()).unwrap();
        let roster = CarrierRoster::new(
            (0..carriers)
                .map(|i| ForceCarrier { id: CarrierId(i), intensity: 1.0 + i as f64, max_idle: 1 + (i as u32 % 3) })
                .collect(),
        ).unwrap();
        let mut will = build_golden(&StrategySpec::named(strategy)).unwrap();
        let mut streams = Streams::from_seed(seed);
        let mut state = GoldenState::bootstrap(
            &society,
            &roster,
            SocialAssignment::round_robin(&society),
            GoldenPowerPartition::round_robin(&society, &roster),
            IdleTable::zeros(&roster),
            will.as_mut(),
            &mut streams,
        ).unwrap();
        for _ in 0..30 {
            for a in society.goods() {
                prop_assert!(sums_to_one(&golden_win_distribution(&society, &roster, &state, a).unwrap()));
            }
            let (next, _) = golden_step(&society, &roster, &state, will.as_mut(), &mut streams).unwrap();
            prop_assert!(next.validate(&society, &roster).is_ok());
            let cells = next.partition.cells();
            let held: usize = cells.iter().map(|(_, cs)| cs.len()).sum();
            prop_assert_eq!(held, carriers);
            for c in roster.iter() {
                prop_assert!(next.idle.get(c.id) <= c.max_idle);
            }
            state = next;
        }
    }

    #[test]
    fn runs_are_deterministic_and_check_clean(
        seed: u64,
        model in prop::sample::select(vec![("primitive", "proportional-greedy"), ("good", "mirror"), ("golden", "bernoulli")]),
    ) {
        let (model, strategy) = model;
        let text = format!(
            r#"{{"model":"{model}","society":{{"generate":{{"persons":3,"estate":2}}}},
                "strategy":{{"name":"{strategy}"}},"steps":25,"seed":{seed}}}"#
        );
        let config = load_config_str(&text, None).unwrap();
        let (a, metrics) = run_history(&config).unwrap();
        let (b, _) = run_history(&config).unwrap();
        prop_assert_eq!(a.to_jsonl().unwrap(), b.to_jsonl().unwrap());
        prop_assert!(check_invariants(&a).unwrap().is_clean());
        for row in &metrics.rows {
            prop_assert!((0.0..=1.0).contains(&row.gini));
            prop_assert_eq!(row.owned.iter().sum::<usize>(), 2);
        }
    }
}

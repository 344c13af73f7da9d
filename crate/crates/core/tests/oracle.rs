mod common;

use common::{outcomes, GoldenRef, GoodRef, PrimitiveRef};
use everwill::golden::audit::successor_problems;
use everwill::rng::stream;
use everwill::will::build_golden;
use everwill::{
    golden_advance, golden_step, golden_win_distribution, good_exchange_power, good_win_distribution,
    primitive_transfer, primitive_transfer_single, primitive_win_distribution, CarrierId, CarrierRoster,
    ForceCarrier, GoldenPowerPartition, GoldenState, GoodForceTable, GoodPowerTable, GoodState, IdleTable,
    PersonId, PrimitiveForceTable, PrimitivePowerTable, PrimitiveState, SocialAssignment, Society, StrategySpec,
    Streams, TripleTable,
};
use rand::Rng;

fn random_owners(society: &Society, rng: &mut impl Rng) -> SocialAssignment {
    let n = society.person_count();
    SocialAssignment::new(society, society.goods().map(|_| PersonId(rng.random_range(0..n))).collect()).unwrap()
}

/// Random primitive state; roughly one force entry in four is zero.
fn primitive_state(n: usize, m: usize, seed: u64) -> (Society, PrimitiveState) {
    let society = Society::generate(n, m, seed, &Default::default()).unwrap();
    let mut rng = stream(seed, "oracle");
    let power: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..3.0)).collect();
    let force = (0..n)
        .map(|x| {
            let w: Vec<f64> = (0..m)
                .map(|_| if rng.random_bool(0.25) { 0.0 } else { rng.random() })
                .collect();
            let total: f64 = w.iter().sum::<f64>().max(1e-12);
            let budget = rng.random_range(0.1..0.95) * power[x];
            w.iter().map(|v| v / total * budget).collect()
        })
        .collect();
    let assignment = random_owners(&society, &mut rng);
    let state = PrimitiveState::new(
        &society,
        assignment,
        PrimitivePowerTable::new(&society, power).unwrap(),
        PrimitiveForceTable::new(&society, force).unwrap(),
    )
    .unwrap();
    (society, state)
}

fn good_state(n: usize, m: usize, seed: u64) -> (Society, GoodState) {
    let society = Society::generate(n, m, seed, &Default::default()).unwrap();
    let mut rng = stream(seed, "oracle");
    let power = TripleTable::from_fn(&society, |_, _, _| rng.random_range(0.2..2.0));
    let force = TripleTable::from_fn(&society, |x, a, y| {
        let cap = power.get(x, a, y).min(1.0);
        cap * rng.random_range(0.01..0.99)
    });
    let assignment = random_owners(&society, &mut rng);
    let state = GoodState::new(
        &society,
        assignment,
        GoodPowerTable::new(&society, power).unwrap(),
        GoodForceTable(force),
    )
    .unwrap();
    (society, state)
}

#[test]
fn primitive_distributions_match_reference() {
    for seed in 0..40 {
        let (society, state) = primitive_state(1 + seed as usize % 6, 1 + seed as usize % 4, seed);
        let oracle = PrimitiveRef::new(&society, &state);
        for a in society.goods() {
            let engine = primitive_win_distribution(&society, &state, a).unwrap();
            let reference = oracle.dist(a.0);
            for (e, r) in engine.iter().zip(&reference) {
                assert!((e - r).abs() <= 1e-12, "seed {seed}: {engine:?} vs {reference:?}");
            }
            assert!((engine.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn primitive_transfer_matches_reference_on_every_outcome() {
    for seed in 0..30 {
        let (society, state) = primitive_state(1 + seed as usize % 4, 1 + seed as usize % 3, seed);
        let oracle = PrimitiveRef::new(&society, &state);
        // every winner tuple, including zero-probability ones
        let uniform: Vec<Vec<f64>> = society
            .goods()
            .map(|_| vec![1.0; society.person_count()])
            .collect();
        for (_, winners) in outcomes(&uniform) {
            let ids: Vec<PersonId> = winners.iter().map(|&w| PersonId(w)).collect();
            let (alpha, power) = primitive_transfer(&society, &state, &ids).unwrap();
            assert_eq!(alpha.owners(), &ids[..]);
            let reference = oracle.next_power(&winners);
            for (e, r) in power.values().iter().zip(&reference) {
                assert!((e - r).abs() <= 1e-12, "seed {seed} winners {winners:?}");
            }
        }
    }
}

#[test]
fn single_good_law_agrees_with_general_law() {
    for seed in 0..20 {
        let (society, state) = primitive_state(1 + seed as usize % 5, 1, seed);
        for w in society.persons() {
            let general = primitive_transfer(&society, &state, &[w]).unwrap();
            let single = primitive_transfer_single(&society, &state, w).unwrap();
            assert_eq!(general.0, single.0);
            for (g, s) in general.1.values().iter().zip(single.1.values()) {
                assert!((g - s).abs() <= 1e-12);
            }
        }
    }
    let (society, state) = primitive_state(3, 2, 0);
    assert!(primitive_transfer_single(&society, &state, PersonId(0)).is_err());
}

#[test]
fn two_by_two_expectation_matches_enumeration() {
    for seed in 0..10 {
        let (society, state) = primitive_state(2, 2, seed);
        let (mean, _) = PrimitiveRef::new(&society, &state).moments();
        let dists: Vec<Vec<f64>> = society
            .goods()
            .map(|a| primitive_win_distribution(&society, &state, a).unwrap())
            .collect();
        let mut engine = [0.0; 2];
        for (p, winners) in outcomes(&dists) {
            let ids: Vec<PersonId> = winners.into_iter().map(PersonId).collect();
            let (_, power) = primitive_transfer(&society, &state, &ids).unwrap();
            engine[0] += p * power.values()[0];
            engine[1] += p * power.values()[1];
        }
        assert!((engine[0] - mean[0]).abs() <= 1e-9 && (engine[1] - mean[1]).abs() <= 1e-9);
    }
}

#[test]
fn good_engine_matches_reference() {
    for seed in 0..30 {
        let (society, state) = good_state(1 + seed as usize % 4, 1 + seed as usize % 3, seed);
        let oracle = GoodRef::new(&society, &state);
        for a in society.goods() {
            let engine = good_win_distribution(&society, &state, a).unwrap();
            for (e, r) in engine.iter().zip(oracle.dist(a.0)) {
                assert!((e - r).abs() <= 1e-12);
            }
        }
        let next = good_exchange_power(&society, &state);
        for (e, r) in next.0.values().iter().zip(oracle.next_power()) {
            assert!((e - r).abs() <= 1e-12);
        }
    }
}

fn golden_fixture(seed: u64) -> (Society, CarrierRoster, GoldenState) {
    let society = Society::generate(3, 2, seed, &Default::default()).unwrap();
    let mut rng = stream(seed, "oracle");
    let roster = CarrierRoster::new(
        (0..12)
            .map(|i| ForceCarrier {
                id: CarrierId(i),
                intensity: rng.random_range(0.1..2.0),
                max_idle: 1 + (i as u32 % 3),
            })
            .collect(),
    )
    .unwrap();
    let location = roster
        .ids()
        .map(|_| everwill::Cell::new(rng.random_range(0..3), rng.random_range(0..2), rng.random_range(0..3)))
        .collect();
    let partition = GoldenPowerPartition::new(&society, &roster, location).unwrap();
    let idle = IdleTable::new(&roster, roster.iter().map(|c| rng.random_range(0..=c.max_idle)).collect()).unwrap();
    let mut will = build_golden(&StrategySpec::named("bernoulli")).unwrap();
    let mut streams = Streams::from_seed(seed);
    let assignment = random_owners(&society, &mut rng);
    let state = GoldenState::bootstrap(&society, &roster, assignment, partition, idle, will.as_mut(), &mut streams)
        .unwrap();
    (society, roster, state)
}

#[test]
fn golden_engine_matches_reference() {
    for seed in 0..30 {
        let (society, roster, mut state) = golden_fixture(seed);
        let mut will = build_golden(&StrategySpec::named("bernoulli")).unwrap();
        let mut streams = Streams::from_seed(seed + 100);
        for _ in 0..20 {
            let oracle = GoldenRef::new(&society, &roster, &state);
            for a in society.goods() {
                let engine = golden_win_distribution(&society, &roster, &state, a).unwrap();
                for (e, r) in engine.iter().zip(oracle.dist(a.0)) {
                    assert!((e - r).abs() <= 1e-12);
                }
            }
            let (next, battles) = golden_step(&society, &roster, &state, will.as_mut(), &mut streams).unwrap();
            let (loc, idle) = oracle.advance();
            let engine_loc: Vec<_> = next
                .partition
                .locations()
                .iter()
                .map(|c| (c.source.0, c.good.0, c.target.0))
                .collect();
            assert_eq!(engine_loc, loc);
            assert_eq!(next.idle.values(), &idle[..]);
            assert_eq!(next.assignment.owners(), &battles.winners[..]);
            assert!(successor_problems(&society, &roster, &state, &next).is_empty());
            let (_, p, i) = golden_advance(&society, &state, &battles.winners).unwrap();
            assert_eq!((p, i), (next.partition.clone(), next.idle.clone()));
            state = next;
        }
    }
}

#[test]
fn degenerate_primitive_battle_keeps_incumbent() {
    let (society, mut state) = primitive_state(3, 2, 1);
    state.force = PrimitiveForceTable::zeros(&society);
    for a in society.goods() {
        let dist = primitive_win_distribution(&society, &state, a).unwrap();
        let mut expected = vec![0.0; 3];
        expected[state.assignment.owner(a).0] = 1.0;
        assert_eq!(dist, expected);
    }
    // zero force everywhere: nobody pays, nobody receives
    let winners: Vec<PersonId> = society.goods().map(|a| state.assignment.owner(a)).collect();
    let (_, power) = primitive_transfer(&society, &state, &winners).unwrap();
    assert_eq!(power, state.power);
}

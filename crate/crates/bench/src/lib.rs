//! Fixtures for the benchmarks under `benches/`.

use everwill::will::{build_golden, build_good, build_primitive};
use everwill::{
    golden_step, CarrierId, CarrierRoster, ForceCarrier, GoldenPowerPartition, GoldenState, GoldenWill,
    GoodPowerTable, GoodState, GoodWill, IdleTable, PrimitivePowerTable, PrimitiveState, PrimitiveWill,
    SocialAssignment, Society, StrategySpec, Streams,
};

pub struct Primitive {
    pub society: Society,
    pub state: PrimitiveState,
    pub will: Box<dyn PrimitiveWill>,
    pub streams: Streams,
}

pub struct Good {
    pub society: Society,
    pub state: GoodState,
    pub will: Box<dyn GoodWill>,
    pub streams: Streams,
}

pub struct Golden {
    pub society: Society,
    pub roster: CarrierRoster,
    pub state: GoldenState,
    pub will: Box<dyn GoldenWill>,
    pub streams: Streams,
}

pub fn primitive(persons: usize, goods: usize) -> Primitive {
    let society = Society::generate(persons, goods, 1, &Default::default()).unwrap();
    let mut will = build_primitive(&StrategySpec::named("proportional-greedy")).unwrap();
    let mut streams = Streams::from_seed(1);
    let state = PrimitiveState::bootstrap(
        &society,
        SocialAssignment::round_robin(&society),
        PrimitivePowerTable::uniform(&society, 1.0).unwrap(),
        will.as_mut(),
        &mut streams,
    )
    .unwrap();
    Primitive {
        society,
        state,
        will,
        streams,
    }
}

pub fn good(persons: usize, goods: usize) -> Good {
    let society = Society::generate(persons, goods, 1, &Default::default()).unwrap();
    let mut will = build_good(&StrategySpec::named("mirror")).unwrap();
    let mut streams = Streams::from_seed(1);
    let state = GoodState::bootstrap(
        &society,
        SocialAssignment::round_robin(&society),
        GoodPowerTable::uniform(&society, 1.0).unwrap(),
        will.as_mut(),
        &mut streams,
    )
    .unwrap();
    Good {
        society,
        state,
        will,
        streams,
    }
}

pub fn golden(persons: usize, goods: usize, carriers: usize) -> Golden {
    let society = Society::generate(persons, goods, 1, &Default::default()).unwrap();
    let roster = CarrierRoster::new(
        (0..carriers)
            .map(|i| ForceCarrier {
                id: CarrierId(i),
                intensity: 1.0,
                max_idle: 1 + (i as u32 % 3),
            })
            .collect(),
    )
    .unwrap();
    let mut will = build_golden(&StrategySpec::named("bernoulli")).unwrap();
    let mut streams = Streams::from_seed(1);
    let state = GoldenState::bootstrap(
        &society,
        &roster,
        SocialAssignment::round_robin(&society),
        GoldenPowerPartition::round_robin(&society, &roster),
        IdleTable::zeros(&roster),
        will.as_mut(),
        &mut streams,
    )
    .unwrap();
    Golden {
        society,
        roster,
        state,
        will,
        streams,
    }
}

/// `steps + 1` consecutive golden states.
pub fn golden_history(mut g: Golden, steps: usize) -> (Society, CarrierRoster, Vec<GoldenState>) {
    let mut history = vec![g.state.clone()];
    for _ in 0..steps {
        let (next, _) = golden_step(&g.society, &g.roster, &g.state, g.will.as_mut(), &mut g.streams).unwrap();
        history.push(next.clone());
        g.state = next;
    }
    (g.society, g.roster, history)
}

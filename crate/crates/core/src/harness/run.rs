//! Builds the initial state from a config and drives the engine.

use rand::seq::IndexedRandom;
use rand::Rng;

use super::config::{CarrierSpec, ModelKind, Placement, RunConfig, SocietySource};
use super::log::{CarrierMove, Footer, Header, HistoryLog, Snapshot, StepRecord};
use super::metrics::MetricsReport;
use crate::error::{Error, Result};
use crate::golden::{
    golden_step, CarrierId, CarrierRoster, Cell, ForceCarrier, GoldenForceSelection, GoldenPowerPartition,
    GoldenState, IdleTable,
};
use crate::good::{good_step, GoodForceTable, GoodPowerTable, GoodState, TripleTable};
use crate::lottery::BattleRecord;
use crate::primitive::{primitive_step, PrimitiveForceTable, PrimitivePowerTable, PrimitiveState};
use crate::rng::{stream, StreamRng, Streams, SETUP_STREAM};
use crate::society::{generate_relationships, PersonId, SocialAssignment, Society};
use crate::will::{build_golden, build_good, build_primitive, GoldenWill, GoodWill, PrimitiveWill};

/// A society plus a running model, ready to step.
pub enum Simulation {
    Primitive {
        state: PrimitiveState,
        will: Box<dyn PrimitiveWill>,
    },
    Good {
        state: GoodState,
        will: Box<dyn GoodWill>,
    },
    Golden {
        roster: CarrierRoster,
        state: GoldenState,
        will: Box<dyn GoldenWill>,
    },
}

pub struct Setup {
    pub society: Society,
    pub simulation: Simulation,
    pub streams: Streams,
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(vec![msg.into()])
}

fn resolve_society(config: &RunConfig, setup: &mut StreamRng) -> Result<Society> {
    match &config.society {
        SocietySource::Inline(doc) => Society::from_doc(doc),
        SocietySource::File(path) => Society::from_json(&std::fs::read_to_string(config.resolve(path))?),
        SocietySource::Generate(g) => {
            let seed = g.seed.unwrap_or_else(|| setup.random());
            let table = generate_relationships(g.persons, seed, &g.params())?;
            Society::new(table, g.estate)
        }
    }
}

fn build_roster(spec: &CarrierSpec) -> Result<CarrierRoster> {
    match spec {
        CarrierSpec::Roster(carriers) => CarrierRoster::new(carriers.clone()),
        CarrierSpec::Generate { count, theta, mu } => {
            if theta.is_empty() || mu.is_empty() {
                return Err(config_error("initial.carriers.generate: theta and mu must be nonempty"));
            }
            CarrierRoster::new(
                (0..*count)
                    .map(|i| ForceCarrier {
                        id: CarrierId(i),
                        intensity: mu[i % mu.len()],
                        max_idle: theta[i % theta.len()],
                    })
                    .collect(),
            )
        }
    }
}

fn place(
    society: &Society,
    roster: &CarrierRoster,
    placement: &Placement,
    rng: &mut StreamRng,
) -> Result<GoldenPowerPartition> {
    match placement {
        Placement::RoundRobin => Ok(GoldenPowerPartition::round_robin(society, roster)),
        Placement::Random => {
            let cells: Vec<Cell> = society
                .persons()
                .flat_map(|x| society.goods().flat_map(move |a| society.persons().map(move |y| Cell::new(x.0, a.0, y.0))))
                .collect();
            let location = roster
                .ids()
                .map(|_| *cells.choose(rng).expect("society has at least one cell"))
                .collect();
            GoldenPowerPartition::new(society, roster, location)
        }
        Placement::Explicit(location) => GoldenPowerPartition::new(society, roster, location.clone()),
    }
}

/// Resolves the society and initial state a config describes.
pub fn prepare(config: &RunConfig) -> Result<Setup> {
    let model = config.model_kind()?;
    if config.steps < 0 {
        return Err(config_error(format!("steps: must not be negative, got {}", config.steps)));
    }
    let problems: Vec<String> = config
        .problems()
        .into_iter()
        .filter(|p| !(config.steps == 0 && p.starts_with("steps:")))
        .collect();
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }

    let mut setup = stream(config.seed, SETUP_STREAM);
    let society = resolve_society(config, &mut setup)?;
    let mut streams = Streams::from_seed(config.seed);
    let init = &config.initial;
    let assignment = match &init.assignment {
        Some(owners) => SocialAssignment::new(&society, owners.iter().map(|&x| PersonId(x)).collect())?,
        None => SocialAssignment::round_robin(&society),
    };
    let uniform = init.power.unwrap_or(1.0);

    let simulation = match model {
        ModelKind::Primitive => {
            let mut will = build_primitive(&config.strategy).map_err(config_error)?;
            let power = match &init.primitive_power {
                Some(p) => PrimitivePowerTable::new(&society, p.clone())?,
                None => PrimitivePowerTable::uniform(&society, uniform)?,
            };
            let state = match &init.primitive_force {
                Some(f) => {
                    let force = PrimitiveForceTable::new(&society, f.clone())?;
                    PrimitiveState::new(&society, assignment, power, force)?
                }
                None => PrimitiveState::bootstrap(&society, assignment, power, will.as_mut(), &mut streams)?,
            };
            Simulation::Primitive { state, will }
        }
        ModelKind::Good => {
            let mut will = build_good(&config.strategy).map_err(config_error)?;
            let power = match &init.good_power {
                Some(entries) => GoodPowerTable::new(&society, TripleTable::from_entries(&society, entries)?)?,
                None => GoodPowerTable::uniform(&society, uniform)?,
            };
            let state = match &init.good_force {
                Some(entries) => {
                    let force = GoodForceTable(TripleTable::from_entries(&society, entries)?);
                    GoodState::new(&society, assignment, power, force)?
                }
                None => GoodState::bootstrap(&society, assignment, power, will.as_mut(), &mut streams)?,
            };
            Simulation::Good { state, will }
        }
        ModelKind::Golden => {
            let mut will = build_golden(&config.strategy).map_err(config_error)?;
            let roster = build_roster(&init.carriers.clone().unwrap_or_default())?;
            let placement = init.placement.clone().unwrap_or(Placement::RoundRobin);
            let partition = place(&society, &roster, &placement, &mut setup)?;
            let idle = match &init.idle {
                Some(idle) => IdleTable::new(&roster, idle.clone())?,
                None => IdleTable::zeros(&roster),
            };
            let state = match &init.exercised {
                Some(ids) => {
                    let selection = GoldenForceSelection::from_carriers(&roster, ids.iter().map(|&c| CarrierId(c)))?;
                    GoldenState::new(&society, &roster, assignment, partition, idle, selection)?
                }
                None => GoldenState::bootstrap(
                    &society,
                    &roster,
                    assignment,
                    partition,
                    idle,
                    will.as_mut(),
                    &mut streams,
                )?,
            };
            Simulation::Golden { roster, state, will }
        }
    };
    Ok(Setup {
        society,
        simulation,
        streams,
    })
}

impl Simulation {
    pub fn snapshot(&self) -> Snapshot {
        match self {
            Simulation::Primitive { state, .. } => Snapshot::primitive(state),
            Simulation::Good { state, .. } => Snapshot::good(state),
            Simulation::Golden { state, .. } => Snapshot::golden(state),
        }
    }

    pub fn total_power(&self) -> f64 {
        match self {
            Simulation::Primitive { state, .. } => state.power.total(),
            Simulation::Good { state, .. } => state.power.total(),
            Simulation::Golden { roster, .. } => roster.iter().map(|c| c.intensity).sum(),
        }
    }

    pub fn roster(&self) -> Option<&CarrierRoster> {
        match self {
            Simulation::Golden { roster, .. } => Some(roster),
            _ => None,
        }
    }

    /// Advances one step and returns its record, without a snapshot.
    pub fn step(&mut self, society: &Society, streams: &mut Streams) -> Result<StepRecord> {
        let t = streams.steps_taken;
        let fail = |e: Error| e.at_step(t + 1);
        let mut golden = None;
        let battles: BattleRecord = match self {
            Simulation::Primitive { state, will } => {
                let (next, battles) = primitive_step(society, state, will.as_mut(), streams).map_err(fail)?;
                *state = next;
                battles
            }
            Simulation::Good { state, will } => {
                let (next, battles) = good_step(society, state, will.as_mut(), streams).map_err(fail)?;
                *state = next;
                battles
            }
            Simulation::Golden { roster, state, will } => {
                let exercised: Vec<CarrierId> = state.selection.exercised().collect();
                let moved = exercised
                    .iter()
                    .map(|&c| {
                        let from = state.partition.location(c);
                        CarrierMove {
                            carrier: c,
                            from,
                            to: from.transpose(),
                        }
                    })
                    .collect::<Vec<_>>();
                let (next, battles) = golden_step(society, roster, state, will.as_mut(), streams).map_err(fail)?;
                *state = next;
                golden = Some((exercised, moved));
                battles
            }
        };
        let (exercised, moved, idle_reset) = match golden {
            Some((exercised, moved)) => (Some(exercised.clone()), Some(moved), Some(exercised)),
            None => (None, None, None),
        };
        Ok(StepRecord {
            t,
            battles,
            total_power: self.total_power(),
            exercised,
            moved,
            idle_reset,
            snapshot: None,
        })
    }
}

/// Runs a config to completion. Identical configs give identical logs.
/// `steps = 0` is accepted here and yields a header-only history.
pub fn run_history(config: &RunConfig) -> Result<(HistoryLog, MetricsReport)> {
    let Setup {
        society,
        mut simulation,
        mut streams,
    } = prepare(config)?;
    let interval = if config.audit { 1 } else { config.log.snapshot_interval.max(1) };
    let steps = config.steps as u64;
    log::info!(
        "running {} model for {steps} steps, seed {}, strategy {}",
        config.model,
        config.seed,
        config.strategy.name
    );

    let header = Header {
        format_version: super::config::FORMAT_VERSION,
        engine_version: super::log::ENGINE_VERSION.to_string(),
        model: config.model_kind()?,
        seed: config.seed,
        config: config.clone(),
        society: society.to_doc(),
        carriers: simulation.roster().cloned(),
        snapshot_interval: interval,
        initial: simulation.snapshot(),
    };
    let mut records = Vec::with_capacity(steps as usize);
    for t in 0..steps {
        let mut record = simulation.step(&society, &mut streams)?;
        if (t + 1) % interval == 0 || t + 1 == steps {
            record.snapshot = Some(simulation.snapshot());
        }
        log::debug!("step {t}: winners {:?}", record.battles.winners);
        records.push(record);
    }

    let mut history = HistoryLog {
        header,
        steps: records,
        footer: None,
    };
    let metrics = MetricsReport::from_log(&history);
    history.footer = Some(Footer {
        steps,
        metrics: metrics.summary(),
    });
    Ok((history, metrics))
}

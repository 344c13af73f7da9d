//! Simulation engines for everlasting societies.
//!
//! A society is a fixed set of persons tied by a relationship function and
//! a fixed estate of goods. Each step, persons express force over goods,
//! one proportional lottery per good decides the new owner, and
//! deterministic laws move power around. Three models are provided:
//!
//! - [`primitive`]: scalar power and force per person; winners pay, losers
//!   are compensated.
//! - [`good`]: power and force indexed by `(x, a, y)`, exchanged pairwise.
//! - [`golden`]: power made of indivisible force carriers that travel to
//!   the mirrored cell when exercised and must be exercised after a
//!   bounded idle period, which makes every desire reciprocated.
//!
//! [`will`] supplies the strategies that choose each next force function,
//! and [`harness`] runs configured histories, writes JSONL logs and checks
//! them.

pub mod error;
pub mod golden;
pub mod good;
pub mod harness;
pub mod lottery;
pub mod primitive;
pub mod rng;
pub mod society;
pub mod will;

pub use error::{Error, Result};
pub use golden::{
    audit::{reciprocity_audit, AuditOptions, ReciprocityReport},
    extended_tables, golden_advance, golden_effectiveness, golden_step, golden_win_distribution, CarrierId,
    CarrierRoster, Cell, ExtendedTables, ForceCarrier, GoldenForceSelection, GoldenPowerPartition, GoldenState,
    IdleTable,
};
pub use good::{
    good_effectiveness, good_exchange, good_exchange_power, good_step, good_win_distribution, GoodForceTable,
    GoodPowerTable, GoodState, TripleTable,
};
pub use harness::{
    check_invariants, load_config, load_config_str, run_history, HistoryLog, InvariantReport, MetricsReport, ModelKind,
    RunConfig,
};
pub use lottery::BattleRecord;
pub use primitive::{
    primitive_effectiveness, primitive_step, primitive_step_single, primitive_transfer, primitive_transfer_single,
    primitive_win_distribution, PrimitiveForceTable, PrimitivePowerTable, PrimitiveState,
};
pub use rng::Streams;
pub use society::{
    generate_relationships, relationship, validate_relationships, GeneratorParams, GoodId, PersonId,
    RelationshipReport, RelationshipTable, SocialAssignment, Society,
};
pub use will::{GoldenWill, GoodWill, PrimitiveWill, StrategySpec};

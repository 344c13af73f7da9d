//! Will strategies choose the next force function.
//!
//! The successor laws fix the new owners and powers but leave the next
//! force open. A strategy fills that gap for the whole society at once: it
//! sees the post-update state and returns a force function, which the
//! engine then checks against the model's feasibility rules. Strategies
//! draw randomness only from the dedicated will stream.

pub mod good;
pub mod golden;
pub mod primitive;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::golden::{CarrierRoster, GoldenForceSelection, GoldenPowerPartition, IdleTable};
use crate::good::{GoodForceTable, GoodPowerTable};
use crate::primitive::{PrimitiveForceTable, PrimitivePowerTable};
use crate::rng::StreamRng;
use crate::society::{SocialAssignment, Society};

/// What a primitive strategy may observe.
pub struct PrimitiveContext<'a> {
    pub society: &'a Society,
    pub assignment: &'a SocialAssignment,
    pub power: &'a PrimitivePowerTable,
    /// Index of the state whose force is being chosen.
    pub step: u64,
}

pub struct GoodContext<'a> {
    pub society: &'a Society,
    pub assignment: &'a SocialAssignment,
    pub power: &'a GoodPowerTable,
    /// Force of the previous state; `None` when choosing the opening force.
    pub previous_force: Option<&'a GoodForceTable>,
    pub step: u64,
}

pub struct GoldenContext<'a> {
    pub society: &'a Society,
    pub roster: &'a CarrierRoster,
    pub assignment: &'a SocialAssignment,
    pub partition: &'a GoldenPowerPartition,
    pub idle: &'a IdleTable,
    pub step: u64,
}

pub trait PrimitiveWill {
    fn name(&self) -> &str;
    fn propose(&mut self, ctx: &PrimitiveContext<'_>, rng: &mut StreamRng) -> PrimitiveForceTable;
}

pub trait GoodWill {
    fn name(&self) -> &str;
    fn propose(&mut self, ctx: &GoodContext<'_>, rng: &mut StreamRng) -> GoodForceTable;
}

pub trait GoldenWill {
    fn name(&self) -> &str;
    fn propose(&mut self, ctx: &GoldenContext<'_>, rng: &mut StreamRng) -> GoldenForceSelection;
}

/// A strategy as named in a run config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub params: serde_json::Value,
}

impl StrategySpec {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            params: serde_json::Value::Null,
        }
    }

    pub fn with_params(name: &str, params: serde_json::Value) -> Self {
        Self {
            name: name.to_string(),
            params,
        }
    }

    fn params<T: DeserializeOwned + Default>(&self) -> Result<T, String> {
        if self.params.is_null() {
            return Ok(T::default());
        }
        serde_json::from_value(self.params.clone())
            .map_err(|e| format!("strategy {:?}: bad params: {e}", self.name))
    }
}

pub const PRIMITIVE_STRATEGIES: &[&str] = &[
    primitive::UNIFORM_SELFISH,
    primitive::PROPORTIONAL_GREEDY,
    primitive::ZERO_FORCE,
];
pub const GOOD_STRATEGIES: &[&str] = &[good::SELFISH, good::ALTRUIST, good::MIRROR];
pub const GOLDEN_STRATEGIES: &[&str] = &[
    golden::MINIMAL_COMPLIANCE,
    golden::GREEDY,
    golden::BERNOULLI,
];

fn unknown(spec: &StrategySpec, known: &[&str]) -> String {
    format!(
        "unknown strategy {:?}; expected one of {}",
        spec.name,
        known.join(", ")
    )
}

pub fn build_primitive(spec: &StrategySpec) -> Result<Box<dyn PrimitiveWill>, String> {
    match spec.name.as_str() {
        primitive::UNIFORM_SELFISH => {
            let p: primitive::BudgetParams = spec.params()?;
            Ok(Box::new(primitive::UniformSelfish::new(p)?))
        }
        primitive::PROPORTIONAL_GREEDY => {
            let p: primitive::BudgetParams = spec.params()?;
            Ok(Box::new(primitive::ProportionalGreedy::new(p)?))
        }
        primitive::ZERO_FORCE => {
            let _: NoParams = spec.params()?;
            Ok(Box::new(primitive::ZeroForce))
        }
        _ => Err(unknown(spec, PRIMITIVE_STRATEGIES)),
    }
}

pub fn build_good(spec: &StrategySpec) -> Result<Box<dyn GoodWill>, String> {
    let params = || -> Result<good::SelfishParams, String> {
        let p: good::SelfishParams = spec.params()?;
        p.check()?;
        Ok(p)
    };
    match spec.name.as_str() {
        good::SELFISH => Ok(Box::new(good::Selfish::new(params()?))),
        good::ALTRUIST => Ok(Box::new(good::Altruist::new(params()?))),
        good::MIRROR => Ok(Box::new(good::Mirror::new(params()?))),
        _ => Err(unknown(spec, GOOD_STRATEGIES)),
    }
}

pub fn build_golden(spec: &StrategySpec) -> Result<Box<dyn GoldenWill>, String> {
    match spec.name.as_str() {
        golden::MINIMAL_COMPLIANCE => {
            let _: NoParams = spec.params()?;
            Ok(Box::new(golden::MinimalCompliance))
        }
        golden::GREEDY => {
            let _: NoParams = spec.params()?;
            Ok(Box::new(golden::Greedy))
        }
        golden::BERNOULLI => {
            let p: golden::BernoulliParams = spec.params()?;
            Ok(Box::new(golden::Bernoulli::new(p)?))
        }
        _ => Err(unknown(spec, GOLDEN_STRATEGIES)),
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

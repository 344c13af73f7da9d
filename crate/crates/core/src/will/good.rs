use serde::{Deserialize, Serialize};

use super::{GoodContext, GoodWill};
use crate::good::{GoodForceTable, TripleTable};
use crate::rng::StreamRng;

pub const SELFISH: &str = "selfish";
pub const ALTRUIST: &str = "altruist";
pub const MIRROR: &str = "mirror";

/// Shared parameters of the built-in good strategies.
///
/// Every entry is `epsilon + (gamma * min(pi, 1) - epsilon) * share` with a
/// strategy-specific `share` in `[0, 1]`, which always lies strictly inside
/// `(0, min(pi, 1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfishParams {
    #[serde(default = "SelfishParams::default_gamma")]
    pub gamma: f64,
    /// Smallest force a strategy expresses.
    #[serde(default = "SelfishParams::default_epsilon")]
    pub epsilon: f64,
}

impl SelfishParams {
    fn default_gamma() -> f64 {
        0.9
    }

    fn default_epsilon() -> f64 {
        1e-9
    }

    pub(crate) fn check(&self) -> Result<(), String> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        Ok(())
    }

    fn force(&self, power: f64, share: f64) -> f64 {
        let cap = self.gamma * power.min(1.0);
        if cap > self.epsilon {
            self.epsilon + (cap - self.epsilon) * share
        } else {
            cap
        }
    }
}

impl Default for SelfishParams {
    fn default() -> Self {
        Self {
            gamma: Self::default_gamma(),
            epsilon: Self::default_epsilon(),
        }
    }
}

/// Everything on keeping goods for oneself: full share on `y = x`.
#[derive(Debug, Clone)]
pub struct Selfish {
    params: SelfishParams,
}

impl Selfish {
    pub fn new(params: SelfishParams) -> Self {
        Self { params }
    }
}

impl GoodWill for Selfish {
    fn name(&self) -> &str {
        SELFISH
    }

    fn propose(&mut self, ctx: &GoodContext<'_>, _: &mut StreamRng) -> GoodForceTable {
        GoodForceTable(TripleTable::from_fn(ctx.society, |x, a, y| {
            let share = if x == y { 1.0 } else { 0.0 };
            self.params.force(ctx.power.get(x, a, y), share)
        }))
    }
}

/// Full share on every `y != x`, minimum on oneself.
#[derive(Debug, Clone)]
pub struct Altruist {
    params: SelfishParams,
}

impl Altruist {
    pub fn new(params: SelfishParams) -> Self {
        Self { params }
    }
}

impl GoodWill for Altruist {
    fn name(&self) -> &str {
        ALTRUIST
    }

    fn propose(&mut self, ctx: &GoodContext<'_>, _: &mut StreamRng) -> GoodForceTable {
        GoodForceTable(TripleTable::from_fn(ctx.society, |x, a, y| {
            let share = if x == y { 0.0 } else { 1.0 };
            self.params.force(ctx.power.get(x, a, y), share)
        }))
    }
}

/// Returns the favour: `x`'s share toward `y` on good `a` is `y`'s share
/// of all force aimed at `x` on `a` in the previous state. The opening
/// force gives every target the uniform share `1 / |P|`.
#[derive(Debug, Clone)]
pub struct Mirror {
    params: SelfishParams,
}

impl Mirror {
    pub fn new(params: SelfishParams) -> Self {
        Self { params }
    }
}

impl GoodWill for Mirror {
    fn name(&self) -> &str {
        MIRROR
    }

    fn propose(&mut self, ctx: &GoodContext<'_>, _: &mut StreamRng) -> GoodForceTable {
        let society = ctx.society;
        let uniform = 1.0 / society.person_count() as f64;
        GoodForceTable(TripleTable::from_fn(society, |x, a, y| {
            let share = match ctx.previous_force {
                None => uniform,
                Some(prev) => {
                    let incoming: f64 = society.persons().map(|z| prev.get(z, a, x)).sum();
                    prev.get(y, a, x) / incoming
                }
            };
            self.params.force(ctx.power.get(x, a, y), share)
        }))
    }
}

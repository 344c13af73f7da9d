use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{GoldenContext, GoldenWill};
use crate::golden::GoldenForceSelection;
use crate::rng::StreamRng;

pub const MINIMAL_COMPLIANCE: &str = "minimal-compliance";
pub const GREEDY: &str = "greedy";
pub const BERNOULLI: &str = "bernoulli";

/// Exercises only carriers that have reached their maximum idle period.
#[derive(Debug, Clone, Copy, Default)]
pub struct MinimalCompliance;

impl GoldenWill for MinimalCompliance {
    fn name(&self) -> &str {
        MINIMAL_COMPLIANCE
    }

    fn propose(&mut self, ctx: &GoldenContext<'_>, _: &mut StreamRng) -> GoldenForceSelection {
        let mut sel = GoldenForceSelection::none(ctx.roster);
        for c in ctx.idle.mandatory(ctx.roster) {
            sel.set(c, true);
        }
        sel
    }
}

/// Exercises every carrier every step.
#[derive(Debug, Clone, Copy, Default)]
pub struct Greedy;

impl GoldenWill for Greedy {
    fn name(&self) -> &str {
        GREEDY
    }

    fn propose(&mut self, ctx: &GoldenContext<'_>, _: &mut StreamRng) -> GoldenForceSelection {
        GoldenForceSelection::all(ctx.roster)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BernoulliParams {
    #[serde(default = "BernoulliParams::default_p")]
    pub p: f64,
}

impl BernoulliParams {
    fn default_p() -> f64 {
        0.5
    }
}

impl Default for BernoulliParams {
    fn default() -> Self {
        Self { p: Self::default_p() }
    }
}

/// Exercises each carrier that is not yet due with probability `p`.
/// One variate is drawn per carrier, due or not, so the stream advances by
/// `|C|` draws per step.
#[derive(Debug, Clone)]
pub struct Bernoulli {
    p: f64,
}

impl Bernoulli {
    pub fn new(params: BernoulliParams) -> Result<Self, String> {
        if (0.0..=1.0).contains(&params.p) {
            Ok(Self { p: params.p })
        } else {
            Err(format!("strategy \"bernoulli\": p must lie in [0, 1], got {}", params.p))
        }
    }
}

impl GoldenWill for Bernoulli {
    fn name(&self) -> &str {
        BERNOULLI
    }

    fn propose(&mut self, ctx: &GoldenContext<'_>, rng: &mut StreamRng) -> GoldenForceSelection {
        let mut sel = GoldenForceSelection::none(ctx.roster);
        for carrier in ctx.roster.iter() {
            let u: f64 = rng.random();
            let due = ctx.idle.get(carrier.id) == carrier.max_idle;
            sel.set(carrier.id, due || u < self.p);
        }
        sel
    }
}

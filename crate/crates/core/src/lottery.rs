//! Proportional lotteries that settle the per-good battles of a step.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::society::PersonId;

/// Outcome of all battles of one step, in ascending good order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BattleRecord {
    pub winners: Vec<PersonId>,
    /// The uniform variate drawn for each battle.
    #[serde(rename = "u")]
    pub variates: Vec<f64>,
    /// The win distribution each battle was drawn from.
    #[serde(rename = "dist")]
    pub distributions: Vec<Vec<f64>>,
}

/// Normalizes non-negative weights into a win distribution. When every
/// weight is zero the incumbent keeps the good with certainty.
pub fn proportional(weights: &[f64], incumbent: PersonId) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        weights.iter().map(|w| w / total).collect()
    } else {
        let mut dist = vec![0.0; weights.len()];
        dist[incumbent.0] = 1.0;
        dist
    }
}

/// Maps a uniform variate in `[0, 1)` to a person by inverting the
/// cumulative distribution. Persons with zero mass are never returned.
pub fn pick(dist: &[f64], u: f64) -> PersonId {
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (x, &p) in dist.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cumulative += p;
        last_positive = x;
        if u < cumulative {
            return PersonId(x);
        }
    }
    // rounding left the cumulative sum just below u
    PersonId(last_positive)
}

/// Draws one independent battle per distribution, in order, from `rng`.
pub fn settle<R: Rng + ?Sized>(distributions: Vec<Vec<f64>>, rng: &mut R) -> BattleRecord {
    let mut winners = Vec::with_capacity(distributions.len());
    let mut variates = Vec::with_capacity(distributions.len());
    for dist in &distributions {
        let u: f64 = rng.random();
        winners.push(pick(dist, u));
        variates.push(u);
    }
    BattleRecord {
        winners,
        variates,
        distributions,
    }
}

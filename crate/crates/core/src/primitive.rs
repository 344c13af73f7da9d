//! Primitive histories: scalar power per person, scalar force per
//! (person, good), one proportional lottery per good. The winner of a good
//! pays the force it committed and the losers split that payment in
//! proportion to their own effectiveness on the good.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lottery::{self, BattleRecord};
use crate::rng::Streams;
use crate::society::{GoodId, PersonId, SocialAssignment, Society};
use crate::will::{PrimitiveContext, PrimitiveWill};

/// `pi: P -> R+`, strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PrimitivePowerTable {
    power: Vec<f64>,
}

impl PrimitivePowerTable {
    pub(crate) fn from_raw(power: Vec<f64>) -> Self {
        Self { power }
    }

    pub fn new(society: &Society, power: Vec<f64>) -> Result<Self> {
        let table = Self { power };
        table.validate(society)?;
        Ok(table)
    }

    pub fn uniform(society: &Society, value: f64) -> Result<Self> {
        Self::new(society, vec![value; society.person_count()])
    }

    pub fn validate(&self, society: &Society) -> Result<()> {
        if self.power.len() != society.person_count() {
            return Err(Error::InvalidState(format!(
                "power table has {} entries for {} persons",
                self.power.len(),
                society.person_count()
            )));
        }
        for (x, &p) in self.power.iter().enumerate() {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidState(format!("power of p{x} is {p}, must be positive")));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn get(&self, x: PersonId) -> f64 {
        self.power[x.0]
    }

    pub fn values(&self) -> &[f64] {
        &self.power
    }

    pub fn total(&self) -> f64 {
        self.power.iter().sum()
    }
}

/// `phi: P x E -> R+`, non-negative, indexed `[person][good]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PrimitiveForceTable {
    force: Vec<Vec<f64>>,
}

impl PrimitiveForceTable {
    pub(crate) fn from_raw(force: Vec<Vec<f64>>) -> Self {
        Self { force }
    }

    pub fn new(society: &Society, force: Vec<Vec<f64>>) -> Result<Self> {
        let table = Self { force };
        table.validate_shape(society)?;
        Ok(table)
    }

    pub fn zeros(society: &Society) -> Self {
        Self {
            force: vec![vec![0.0; society.good_count()]; society.person_count()],
        }
    }

    /// Builds a table from a per-entry rule.
    pub fn from_fn(society: &Society, mut f: impl FnMut(PersonId, GoodId) -> f64) -> Self {
        Self {
            force: society
                .persons()
                .map(|x| society.goods().map(|a| f(x, a)).collect())
                .collect(),
        }
    }

    fn validate_shape(&self, society: &Society) -> Result<()> {
        if self.force.len() != society.person_count()
            || self.force.iter().any(|row| row.len() != society.good_count())
        {
            return Err(Error::InvalidState(format!(
                "force table must be {} x {}",
                society.person_count(),
                society.good_count()
            )));
        }
        for (x, row) in self.force.iter().enumerate() {
            for (a, &f) in row.iter().enumerate() {
                if !(f.is_finite() && f >= 0.0) {
                    return Err(Error::InvalidState(format!(
                        "force of p{x} on g{a} is {f}, must be non-negative"
                    )));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn get(&self, x: PersonId, a: GoodId) -> f64 {
        self.force[x.0][a.0]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.force
    }

    /// Total force person `x` commits across the estate.
    pub fn committed(&self, x: PersonId) -> f64 {
        self.force[x.0].iter().sum()
    }

    /// First person whose committed force is not strictly below their power.
    pub fn over_budget(&self, power: &PrimitivePowerTable) -> Option<PersonId> {
        (0..self.force.len())
            .map(PersonId)
            .find(|&x| !(self.committed(x) < power.get(x)))
    }
}

/// `sigma = (alpha, pi, phi)` with `sum_a phi(x, a) < pi(x)` for every person.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveState {
    pub assignment: SocialAssignment,
    pub power: PrimitivePowerTable,
    pub force: PrimitiveForceTable,
}

impl PrimitiveState {
    pub fn new(
        society: &Society,
        assignment: SocialAssignment,
        power: PrimitivePowerTable,
        force: PrimitiveForceTable,
    ) -> Result<Self> {
        let state = Self {
            assignment,
            power,
            force,
        };
        state.validate(society)?;
        Ok(state)
    }

    /// Asks `will` for the opening force function.
    pub fn bootstrap(
        society: &Society,
        assignment: SocialAssignment,
        power: PrimitivePowerTable,
        will: &mut dyn PrimitiveWill,
        streams: &mut Streams,
    ) -> Result<Self> {
        assignment.validate(society)?;
        power.validate(society)?;
        let force = propose_checked(society, &assignment, &power, will, streams)?;
        Ok(Self {
            assignment,
            power,
            force,
        })
    }

    pub fn validate(&self, society: &Society) -> Result<()> {
        self.assignment.validate(society)?;
        self.power.validate(society)?;
        self.force.validate_shape(society)?;
        if let Some(x) = self.force.over_budget(&self.power) {
            return Err(Error::InvalidState(format!(
                "{x} commits {} force with only {} power",
                self.force.committed(x),
                self.power.get(x)
            )));
        }
        Ok(())
    }
}

#[inline]
fn effectiveness(society: &Society, state: &PrimitiveState, x: PersonId, a: GoodId) -> f64 {
    state.force.get(x, a) * society.rho(x, state.assignment.owner(a))
}

/// `psi(x, a) = phi(x, a) * rho(x, alpha(a))`.
pub fn primitive_effectiveness(
    society: &Society,
    state: &PrimitiveState,
    x: PersonId,
    a: GoodId,
) -> Result<f64> {
    society.check_person(x)?;
    society.check_good(a)?;
    Ok(effectiveness(society, state, x, a))
}

/// Probability of each person winning good `a`. If nobody is effective on
/// `a`, the incumbent keeps it.
pub fn primitive_win_distribution(society: &Society, state: &PrimitiveState, a: GoodId) -> Result<Vec<f64>> {
    society.check_good(a)?;
    Ok(win_distribution(society, state, a))
}

fn win_distribution(society: &Society, state: &PrimitiveState, a: GoodId) -> Vec<f64> {
    let weights: Vec<f64> = society
        .persons()
        .map(|x| effectiveness(society, state, x, a))
        .collect();
    lottery::proportional(&weights, state.assignment.owner(a))
}

/// Applies the deterministic laws for a given set of battle winners,
/// returning `(alpha', pi')`.
///
/// A loser `x` of good `a` receives `phi(w, a) * psi(x, a) / sum_{y != w} psi(y, a)`.
/// When that denominator vanishes the payment is split evenly among the
/// other persons, and a lone person pays nothing.
pub fn primitive_transfer(
    society: &Society,
    state: &PrimitiveState,
    winners: &[PersonId],
) -> Result<(SocialAssignment, PrimitivePowerTable)> {
    check_winners(society, winners)?;
    let n = society.person_count();

    // Effectiveness of everyone but the winner, per good.
    let loser_mass: Vec<f64> = society
        .goods()
        .map(|a| {
            society
                .persons()
                .filter(|&y| y != winners[a.0])
                .map(|y| effectiveness(society, state, y, a))
                .sum()
        })
        .collect();

    let power = society
        .persons()
        .map(|x| {
            let mut gained = 0.0;
            let mut received = 0.0;
            for a in society.goods() {
                let w = winners[a.0];
                if w == x {
                    if n > 1 {
                        gained += state.force.get(x, a);
                    }
                } else {
                    let payment = state.force.get(w, a);
                    let mass = loser_mass[a.0];
                    received += if mass > 0.0 {
                        payment * effectiveness(society, state, x, a) / mass
                    } else {
                        payment / (n - 1) as f64
                    };
                }
            }
            state.power.get(x) - gained + received
        })
        .collect();

    Ok((
        SocialAssignment::from_owners_unchecked(winners.to_vec()),
        PrimitivePowerTable { power },
    ))
}

/// The single-good law, written out on its own: the winner pays its force
/// and every other person receives a share proportional to effectiveness.
pub fn primitive_transfer_single(
    society: &Society,
    state: &PrimitiveState,
    winner: PersonId,
) -> Result<(SocialAssignment, PrimitivePowerTable)> {
    if society.good_count() != 1 {
        return Err(Error::InvalidArgument(format!(
            "single-good law needs |E| = 1, estate has {} goods",
            society.good_count()
        )));
    }
    society.check_person(winner)?;
    let a = GoodId(0);
    let n = society.person_count();
    let payment = state.force.get(winner, a);
    let others: f64 = society
        .persons()
        .filter(|&y| y != winner)
        .map(|y| effectiveness(society, state, y, a))
        .sum();

    let power = society
        .persons()
        .map(|x| {
            if x == winner {
                if n > 1 {
                    state.power.get(x) - payment
                } else {
                    state.power.get(x)
                }
            } else if others > 0.0 {
                state.power.get(x) + payment * effectiveness(society, state, x, a) / others
            } else {
                state.power.get(x) + payment / (n - 1) as f64
            }
        })
        .collect();
    Ok((
        SocialAssignment::from_owners_unchecked(vec![winner]),
        PrimitivePowerTable { power },
    ))
}

/// One successor transition: settle every battle, apply the laws, then ask
/// `will` for the next force function and check it against the new powers.
pub fn primitive_step(
    society: &Society,
    state: &PrimitiveState,
    will: &mut dyn PrimitiveWill,
    streams: &mut Streams,
) -> Result<(PrimitiveState, BattleRecord)> {
    let distributions = society
        .goods()
        .map(|a| win_distribution(society, state, a))
        .collect();
    let battles = lottery::settle(distributions, &mut streams.lottery);
    let (assignment, power) = primitive_transfer(society, state, &battles.winners)?;
    streams.steps_taken += 1;
    let force = propose_checked(society, &assignment, &power, will, streams)?;
    Ok((
        PrimitiveState {
            assignment,
            power,
            force,
        },
        battles,
    ))
}

/// [`primitive_step`] restricted to a one-good estate, driven by the
/// single-good law.
pub fn primitive_step_single(
    society: &Society,
    state: &PrimitiveState,
    will: &mut dyn PrimitiveWill,
    streams: &mut Streams,
) -> Result<(PrimitiveState, BattleRecord)> {
    if society.good_count() != 1 {
        return Err(Error::InvalidArgument(format!(
            "single-good step needs |E| = 1, estate has {} goods",
            society.good_count()
        )));
    }
    let dist = win_distribution(society, state, GoodId(0));
    let battles = lottery::settle(vec![dist], &mut streams.lottery);
    let (assignment, power) = primitive_transfer_single(society, state, battles.winners[0])?;
    streams.steps_taken += 1;
    let force = propose_checked(society, &assignment, &power, will, streams)?;
    Ok((
        PrimitiveState {
            assignment,
            power,
            force,
        },
        battles,
    ))
}

fn propose_checked(
    society: &Society,
    assignment: &SocialAssignment,
    power: &PrimitivePowerTable,
    will: &mut dyn PrimitiveWill,
    streams: &mut Streams,
) -> Result<PrimitiveForceTable> {
    let ctx = PrimitiveContext {
        society,
        assignment,
        power,
        step: streams.steps_taken,
    };
    let force = will.propose(&ctx, &mut streams.will);
    force
        .validate_shape(society)
        .map_err(|e| Error::StrategyViolation(format!("{}: {e}", will.name())))?;
    if let Some(x) = force.over_budget(power) {
        return Err(Error::StrategyViolation(format!(
            "{}: {x} commits {} force with only {} power",
            will.name(),
            force.committed(x),
            power.get(x)
        )));
    }
    Ok(force)
}

fn check_winners(society: &Society, winners: &[PersonId]) -> Result<()> {
    if winners.len() != society.good_count() {
        return Err(Error::InvalidArgument(format!(
            "{} winners for {} goods",
            winners.len(),
            society.good_count()
        )));
    }
    winners.iter().try_for_each(|&w| society.check_person(w))
}

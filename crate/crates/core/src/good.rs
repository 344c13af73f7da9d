//! Good histories: power and force are indexed by `(x, a, y)`, read as
//! "x desires that good a be owned by y". Effectiveness is discounted twice
//! through the current owner, the lottery weights each person by the total
//! effectiveness aimed at them, and every pair of persons exchanges force
//! symmetrically: `pi'(x, a, y) = pi(x, a, y) + phi(y, a, x) - phi(x, a, y)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lottery::{self, BattleRecord};
use crate::rng::Streams;
use crate::society::{GoodId, PersonId, SocialAssignment, Society};
use crate::will::{GoodContext, GoodWill};

/// Dense `P x E x P` table of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleTable {
    persons: usize,
    goods: usize,
    values: Vec<f64>,
}

impl TripleTable {
    pub fn filled(persons: usize, goods: usize, value: f64) -> Self {
        Self {
            persons,
            goods,
            values: vec![value; persons * goods * persons],
        }
    }

    pub fn from_fn(
        society: &Society,
        mut f: impl FnMut(PersonId, GoodId, PersonId) -> f64,
    ) -> Self {
        let mut values = Vec::with_capacity(society.person_count().pow(2) * society.good_count());
        for x in society.persons() {
            for a in society.goods() {
                for y in society.persons() {
                    values.push(f(x, a, y));
                }
            }
        }
        Self {
            persons: society.person_count(),
            goods: society.good_count(),
            values,
        }
    }

    /// Builds a table from `[x, a, y, value]` entries; every cell must be
    /// given exactly once.
    pub fn from_entries(society: &Society, entries: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let (n, m) = (society.person_count(), society.good_count());
        let mut values = vec![f64::NAN; n * m * n];
        let mut seen = vec![false; n * m * n];
        for &(x, a, y, v) in entries {
            if x >= n || a >= m || y >= n {
                return Err(Error::InvalidState(format!("entry ({x},{a},{y}) out of range")));
            }
            let i = (x * m + a) * n + y;
            if seen[i] {
                return Err(Error::InvalidState(format!("entry ({x},{a},{y}) given twice")));
            }
            seen[i] = true;
            values[i] = v;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            let (x, a, y) = (i / (m * n), (i / n) % m, i % n);
            return Err(Error::InvalidState(format!("entry ({x},{a},{y}) missing")));
        }
        Ok(Self {
            persons: n,
            goods: m,
            values,
        })
    }

    /// Entries as `(x, a, y, value)` in lexicographic order.
    pub fn entries(&self) -> Vec<(usize, usize, usize, f64)> {
        let (n, m) = (self.persons, self.goods);
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i / (m * n), (i / n) % m, i % n, v))
            .collect()
    }

    #[inline]
    fn index(&self, x: PersonId, a: GoodId, y: PersonId) -> usize {
        (x.0 * self.goods + a.0) * self.persons + y.0
    }

    #[inline]
    pub fn get(&self, x: PersonId, a: GoodId, y: PersonId) -> f64 {
        self.values[self.index(x, a, y)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    fn check_dims(&self, society: &Society, what: &str) -> Result<()> {
        if self.persons != society.person_count() || self.goods != society.good_count() {
            return Err(Error::InvalidState(format!(
                "{what} table is {}x{}x{}, society needs {}x{}x{}",
                self.persons,
                self.goods,
                self.persons,
                society.person_count(),
                society.good_count(),
                society.person_count()
            )));
        }
        Ok(())
    }
}

impl Serialize for TripleTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.entries().serialize(serializer)
    }
}

/// Positive power per `(x, a, y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct GoodPowerTable(pub TripleTable);

/// Force per `(x, a, y)`, inside `(0, min(power, 1))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct GoodForceTable(pub TripleTable);

impl GoodPowerTable {
    pub fn new(society: &Society, table: TripleTable) -> Result<Self> {
        let power = Self(table);
        power.validate(society)?;
        Ok(power)
    }

    pub fn uniform(society: &Society, value: f64) -> Result<Self> {
        Self::new(
            society,
            TripleTable::filled(society.person_count(), society.good_count(), value),
        )
    }

    pub fn validate(&self, society: &Society) -> Result<()> {
        self.0.check_dims(society, "power")?;
        if let Some((x, a, y, v)) = self
            .0
            .entries()
            .into_iter()
            .find(|&(_, _, _, v)| !(v.is_finite() && v > 0.0))
        {
            return Err(Error::InvalidState(format!(
                "power({x},{a},{y}) = {v}, must be positive"
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn get(&self, x: PersonId, a: GoodId, y: PersonId) -> f64 {
        self.0.get(x, a, y)
    }

    pub fn total(&self) -> f64 {
        self.0.total()
    }
}

impl GoodForceTable {
    #[inline]
    pub fn get(&self, x: PersonId, a: GoodId, y: PersonId) -> f64 {
        self.0.get(x, a, y)
    }

    /// First entry outside `(0, min(power, 1))`.
    pub fn infeasible_entry(&self, power: &GoodPowerTable) -> Option<(usize, usize, usize, f64)> {
        self.0
            .entries()
            .into_iter()
            .zip(power.0.values())
            .find(|&((_, _, _, f), &p)| !(f.is_finite() && f > 0.0 && f < p.min(1.0)))
            .map(|(e, _)| e)
    }

    pub fn validate(&self, society: &Society, power: &GoodPowerTable) -> Result<()> {
        self.0.check_dims(society, "force")?;
        if let Some((x, a, y, f)) = self.infeasible_entry(power) {
            return Err(Error::InvalidState(format!(
                "force({x},{a},{y}) = {f} outside (0, min(power, 1))"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodState {
    pub assignment: SocialAssignment,
    pub power: GoodPowerTable,
    pub force: GoodForceTable,
}

impl GoodState {
    pub fn new(
        society: &Society,
        assignment: SocialAssignment,
        power: GoodPowerTable,
        force: GoodForceTable,
    ) -> Result<Self> {
        let state = Self {
            assignment,
            power,
            force,
        };
        state.validate(society)?;
        Ok(state)
    }

    pub fn bootstrap(
        society: &Society,
        assignment: SocialAssignment,
        power: GoodPowerTable,
        will: &mut dyn GoodWill,
        streams: &mut Streams,
    ) -> Result<Self> {
        assignment.validate(society)?;
        power.validate(society)?;
        let force = propose_checked(society, &assignment, &power, None, will, streams)?;
        Ok(Self {
            assignment,
            power,
            force,
        })
    }

    pub fn validate(&self, society: &Society) -> Result<()> {
        self.assignment.validate(society)?;
        self.power.validate(society)?;
        self.force.validate(society, &self.power)
    }
}

#[inline]
fn effectiveness(society: &Society, state: &GoodState, x: PersonId, a: GoodId, y: PersonId) -> f64 {
    let owner = state.assignment.owner(a);
    state.force.get(x, a, y) * society.rho(x, owner) * society.rho(owner, y)
}

/// `psi(x, a, y) = phi(x, a, y) * rho(x, alpha(a)) * rho(alpha(a), y)`.
pub fn good_effectiveness(
    society: &Society,
    state: &GoodState,
    x: PersonId,
    a: GoodId,
    y: PersonId,
) -> Result<f64> {
    society.check_person(x)?;
    society.check_good(a)?;
    society.check_person(y)?;
    Ok(effectiveness(society, state, x, a, y))
}

/// Person `w` wins good `a` with probability proportional to
/// `sum_y psi(y, a, w)`.
pub fn good_win_distribution(society: &Society, state: &GoodState, a: GoodId) -> Result<Vec<f64>> {
    society.check_good(a)?;
    Ok(win_distribution(society, state, a))
}

fn win_distribution(society: &Society, state: &GoodState, a: GoodId) -> Vec<f64> {
    let columns: Vec<f64> = society
        .persons()
        .map(|w| {
            society
                .persons()
                .map(|y| effectiveness(society, state, y, a, w))
                .sum()
        })
        .collect();
    lottery::proportional(&columns, state.assignment.owner(a))
}

/// Net amount `(x, a, y)` receives from the pairwise exchange,
/// `phi(y, a, x) - phi(x, a, y)`. Exactly antisymmetric in `x` and `y`.
#[inline]
pub fn good_exchange(force: &GoodForceTable, x: PersonId, a: GoodId, y: PersonId) -> f64 {
    force.get(y, a, x) - force.get(x, a, y)
}

/// The deterministic power law. It does not depend on who won.
pub fn good_exchange_power(society: &Society, state: &GoodState) -> GoodPowerTable {
    GoodPowerTable(TripleTable::from_fn(society, |x, a, y| {
        state.power.get(x, a, y) + good_exchange(&state.force, x, a, y)
    }))
}

pub fn good_step(
    society: &Society,
    state: &GoodState,
    will: &mut dyn GoodWill,
    streams: &mut Streams,
) -> Result<(GoodState, BattleRecord)> {
    let distributions = society
        .goods()
        .map(|a| win_distribution(society, state, a))
        .collect();
    let battles = lottery::settle(distributions, &mut streams.lottery);
    let assignment = SocialAssignment::from_owners_unchecked(battles.winners.clone());
    let power = good_exchange_power(society, state);
    streams.steps_taken += 1;
    let force = propose_checked(society, &assignment, &power, Some(&state.force), will, streams)?;
    Ok((
        GoodState {
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
    power: &GoodPowerTable,
    previous_force: Option<&GoodForceTable>,
    will: &mut dyn GoodWill,
    streams: &mut Streams,
) -> Result<GoodForceTable> {
    let ctx = GoodContext {
        society,
        assignment,
        power,
        previous_force,
        step: streams.steps_taken,
    };
    let force = will.propose(&ctx, &mut streams.will);
    force
        .0
        .check_dims(society, "force")
        .map_err(|e| Error::StrategyViolation(format!("{}: {e}", will.name())))?;
    if let Some((x, a, y, f)) = force.infeasible_entry(power) {
        return Err(Error::StrategyViolation(format!(
            "{}: p{x} force {f} on (g{a}, p{y}) outside (0, min({}, 1))",
            will.name(),
            power.get(PersonId(x), GoodId(a), PersonId(y))
        )));
    }
    Ok(force)
}

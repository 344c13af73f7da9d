//! Golden histories.
//!
//! Power is a partition of a fixed set of force carriers over the cells
//! `(x, a, y)`: every carrier sits in exactly one cell. Force is the subset
//! of carriers a person chooses to exercise this step. Exercising carrier
//! `c` at `(x, a, y)` moves it to `(y, a, x)` and resets its idle counter;
//! a carrier left idle for `theta(c)` consecutive steps must be exercised.
//! Together these laws force every desire to be mirrored back within
//! `theta(c) + 1` steps, which [`audit::reciprocity_audit`] checks.

pub mod audit;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lottery::{self, BattleRecord};
use crate::rng::Streams;
use crate::society::{GoodId, PersonId, SocialAssignment, Society};
use crate::will::{GoldenContext, GoldenWill};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CarrierId(pub usize);

impl fmt::Display for CarrierId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceCarrier {
    pub id: CarrierId,
    /// Weight of the carrier in the lottery (mu).
    #[serde(rename = "mu")]
    pub intensity: f64,
    /// Maximum number of consecutive idle steps (theta).
    #[serde(rename = "theta")]
    pub max_idle: u32,
}

/// The carrier set `C`, with ids `0..|C|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CarrierRoster {
    carriers: Vec<ForceCarrier>,
}

impl CarrierRoster {
    pub fn new(carriers: Vec<ForceCarrier>) -> Result<Self> {
        if carriers.is_empty() {
            return Err(Error::InvalidArgument("the carrier set must be nonempty".into()));
        }
        for (i, c) in carriers.iter().enumerate() {
            if c.id.0 != i {
                return Err(Error::InvalidArgument(format!(
                    "carrier ids must be dense and ordered: position {i} holds {}",
                    c.id
                )));
            }
            if !(c.intensity.is_finite() && c.intensity > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{} has intensity {}, must be positive",
                    c.id, c.intensity
                )));
            }
            if c.max_idle == 0 {
                return Err(Error::InvalidArgument(format!(
                    "{} has maximum idle period 0, must be at least 1",
                    c.id
                )));
            }
        }
        Ok(Self { carriers })
    }

    pub fn len(&self) -> usize {
        self.carriers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carriers.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ForceCarrier> {
        self.carriers.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = CarrierId> + '_ {
        self.carriers.iter().map(|c| c.id)
    }

    #[inline]
    pub fn get(&self, c: CarrierId) -> &ForceCarrier {
        &self.carriers[c.0]
    }
}

/// A cell `(x, a, y)` of the power partition: `x` desires that `a` be owned by `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub source: PersonId,
    pub good: GoodId,
    pub target: PersonId,
}

impl Cell {
    pub fn new(source: usize, good: usize, target: usize) -> Self {
        Self {
            source: PersonId(source),
            good: GoodId(good),
            target: PersonId(target),
        }
    }

    /// `(y, a, x)` for `(x, a, y)`.
    pub fn transpose(self) -> Self {
        Self {
            source: self.target,
            good: self.good,
            target: self.source,
        }
    }

    fn check(self, society: &Society) -> Result<()> {
        society.check_person(self.source)?;
        society.check_good(self.good)?;
        society.check_person(self.target)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.source.0, self.good.0, self.target.0)
    }
}

impl Serialize for Cell {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.source.0, self.good.0, self.target.0].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, a, y] = <[usize; 3]>::deserialize(d)?;
        Ok(Cell::new(x, a, y))
    }
}

/// Golden power: the cell each carrier currently sits in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldenPowerPartition {
    location: Vec<Cell>,
}

impl GoldenPowerPartition {
    pub fn new(society: &Society, roster: &CarrierRoster, location: Vec<Cell>) -> Result<Self> {
        if location.len() != roster.len() {
            return Err(Error::InvalidState(format!(
                "{} locations for {} carriers",
                location.len(),
                roster.len()
            )));
        }
        for cell in &location {
            cell.check(society)?;
        }
        Ok(Self { location })
    }

    /// Rebuilds the partition from its set-valued view, enforcing the cover
    /// and disjointness conditions.
    pub fn from_cells(society: &Society, roster: &CarrierRoster, cells: &[(Cell, Vec<CarrierId>)]) -> Result<Self> {
        let problems = partition_problems(roster.len(), cells);
        if let Some(first) = problems.first() {
            return Err(Error::InvalidState(first.clone()));
        }
        let mut location = vec![Cell::new(0, 0, 0); roster.len()];
        for (cell, carriers) in cells {
            cell.check(society)?;
            for c in carriers {
                location[c.0] = *cell;
            }
        }
        Ok(Self { location })
    }

    /// Places carrier `i` in cell `i mod (|P| |E| |P|)`, cells in
    /// lexicographic order.
    pub fn round_robin(society: &Society, roster: &CarrierRoster) -> Self {
        let (n, m) = (society.person_count(), society.good_count());
        let cells = n * m * n;
        let location = (0..roster.len())
            .map(|i| {
                let k = i % cells;
                Cell::new(k / (m * n), (k / n) % m, k % n)
            })
            .collect();
        Self { location }
    }

    #[inline]
    pub fn location(&self, c: CarrierId) -> Cell {
        self.location[c.0]
    }

    pub fn locations(&self) -> &[Cell] {
        &self.location
    }

    /// `pi(x, a, y)`.
    pub fn carriers_at(&self, cell: Cell) -> impl Iterator<Item = CarrierId> + '_ {
        self.location
            .iter()
            .enumerate()
            .filter(move |(_, l)| **l == cell)
            .map(|(i, _)| CarrierId(i))
    }

    /// Nonempty cells with their carriers, in cell order.
    pub fn cells(&self) -> Vec<(Cell, Vec<CarrierId>)> {
        let mut by_cell = std::collections::BTreeMap::<Cell, Vec<CarrierId>>::new();
        for (i, cell) in self.location.iter().enumerate() {
            by_cell.entry(*cell).or_default().push(CarrierId(i));
        }
        by_cell.into_iter().collect()
    }
}

/// Cover and disjointness problems of a set-valued partition over carriers
/// `0..carriers`. Empty when every carrier sits in exactly one cell.
pub fn partition_problems(carriers: usize, cells: &[(Cell, Vec<CarrierId>)]) -> Vec<String> {
    let mut seen: Vec<Option<Cell>> = vec![None; carriers];
    let mut problems = Vec::new();
    let mut cell_set = BTreeSet::new();
    for (cell, members) in cells {
        if !cell_set.insert(*cell) {
            problems.push(format!("cell {cell} listed twice"));
        }
        for c in members {
            match seen.get(c.0) {
                None => problems.push(format!("unknown carrier {c} in cell {cell}")),
                Some(Some(other)) => problems.push(format!("{c} in both {other} and {cell} (disjointness)")),
                Some(None) => seen[c.0] = Some(*cell),
            }
        }
    }
    for (i, s) in seen.iter().enumerate() {
        if s.is_none() {
            problems.push(format!("c{i} has no location (cover)"));
        }
    }
    problems
}

/// `tau: C -> N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IdleTable {
    idle: Vec<u32>,
}

impl IdleTable {
    pub(crate) fn from_raw(idle: Vec<u32>) -> Self {
        Self { idle }
    }

    pub fn zeros(roster: &CarrierRoster) -> Self {
        Self {
            idle: vec![0; roster.len()],
        }
    }

    pub fn new(roster: &CarrierRoster, idle: Vec<u32>) -> Result<Self> {
        let table = Self { idle };
        table.validate(roster)?;
        Ok(table)
    }

    pub fn validate(&self, roster: &CarrierRoster) -> Result<()> {
        if self.idle.len() != roster.len() {
            return Err(Error::InvalidState(format!(
                "idle table has {} entries for {} carriers",
                self.idle.len(),
                roster.len()
            )));
        }
        if let Some(c) = roster.iter().find(|c| self.idle[c.id.0] > c.max_idle) {
            return Err(Error::InvalidState(format!(
                "{} idle for {} steps, maximum is {}",
                c.id, self.idle[c.id.0], c.max_idle
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn get(&self, c: CarrierId) -> u32 {
        self.idle[c.0]
    }

    pub fn values(&self) -> &[u32] {
        &self.idle
    }

    /// Carriers whose idle count has reached their maximum.
    pub fn mandatory<'a>(&'a self, roster: &'a CarrierRoster) -> impl Iterator<Item = CarrierId> + 'a {
        roster
            .iter()
            .filter(|c| self.idle[c.id.0] == c.max_idle)
            .map(|c| c.id)
    }
}

/// Golden force: which carriers are exercised, each at its own location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldenForceSelection {
    exercised: Vec<bool>,
}

impl GoldenForceSelection {
    pub fn none(roster: &CarrierRoster) -> Self {
        Self {
            exercised: vec![false; roster.len()],
        }
    }

    pub fn all(roster: &CarrierRoster) -> Self {
        Self {
            exercised: vec![true; roster.len()],
        }
    }

    pub fn from_carriers(roster: &CarrierRoster, carriers: impl IntoIterator<Item = CarrierId>) -> Result<Self> {
        let mut sel = Self::none(roster);
        for c in carriers {
            if c.0 >= roster.len() {
                return Err(Error::InvalidState(format!("unknown carrier {c}")));
            }
            sel.exercised[c.0] = true;
        }
        Ok(sel)
    }

    /// Builds the selection from `(cell, carrier)` pairs, rejecting any
    /// carrier exercised away from its current cell.
    pub fn from_cells(
        roster: &CarrierRoster,
        partition: &GoldenPowerPartition,
        pairs: &[(Cell, CarrierId)],
    ) -> Result<Self> {
        let mut sel = Self::none(roster);
        for &(cell, c) in pairs {
            if c.0 >= roster.len() {
                return Err(Error::InvalidState(format!("unknown carrier {c}")));
            }
            if partition.location(c) != cell {
                return Err(Error::InvalidState(format!(
                    "{c} exercised at {cell} but located at {}",
                    partition.location(c)
                )));
            }
            sel.exercised[c.0] = true;
        }
        Ok(sel)
    }

    #[inline]
    pub fn is_exercised(&self, c: CarrierId) -> bool {
        self.exercised[c.0]
    }

    pub fn set(&mut self, c: CarrierId, exercised: bool) {
        self.exercised[c.0] = exercised;
    }

    pub fn len(&self) -> usize {
        self.exercised.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exercised.is_empty()
    }

    pub fn exercised(&self) -> impl Iterator<Item = CarrierId> + '_ {
        self.exercised
            .iter()
            .enumerate()
            .filter(|(_, e)| **e)
            .map(|(i, _)| CarrierId(i))
    }

    /// `phi(x, a, y)`.
    pub fn at<'a>(&'a self, partition: &'a GoldenPowerPartition, cell: Cell) -> impl Iterator<Item = CarrierId> + 'a {
        partition.carriers_at(cell).filter(|c| self.exercised[c.0])
    }

    /// First carrier that is due (`tau = theta`) but not exercised.
    pub fn missing_mandatory(&self, roster: &CarrierRoster, idle: &IdleTable) -> Option<CarrierId> {
        idle.mandatory(roster).find(|c| !self.exercised[c.0])
    }
}

/// `sigma = (alpha, pi, tau, phi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenState {
    pub assignment: SocialAssignment,
    pub partition: GoldenPowerPartition,
    pub idle: IdleTable,
    pub selection: GoldenForceSelection,
}

impl GoldenState {
    pub fn new(
        society: &Society,
        roster: &CarrierRoster,
        assignment: SocialAssignment,
        partition: GoldenPowerPartition,
        idle: IdleTable,
        selection: GoldenForceSelection,
    ) -> Result<Self> {
        let state = Self {
            assignment,
            partition,
            idle,
            selection,
        };
        state.validate(society, roster)?;
        Ok(state)
    }

    pub fn bootstrap(
        society: &Society,
        roster: &CarrierRoster,
        assignment: SocialAssignment,
        partition: GoldenPowerPartition,
        idle: IdleTable,
        will: &mut dyn GoldenWill,
        streams: &mut Streams,
    ) -> Result<Self> {
        assignment.validate(society)?;
        GoldenPowerPartition::new(society, roster, partition.location.clone())?;
        idle.validate(roster)?;
        let selection = propose_checked(society, roster, &assignment, &partition, &idle, will, streams)?;
        Ok(Self {
            assignment,
            partition,
            idle,
            selection,
        })
    }

    pub fn validate(&self, society: &Society, roster: &CarrierRoster) -> Result<()> {
        self.assignment.validate(society)?;
        GoldenPowerPartition::new(society, roster, self.partition.location.clone())?;
        self.idle.validate(roster)?;
        if self.selection.len() != roster.len() {
            return Err(Error::InvalidState(format!(
                "selection covers {} carriers, roster has {}",
                self.selection.len(),
                roster.len()
            )));
        }
        if let Some(c) = self.selection.missing_mandatory(roster, &self.idle) {
            return Err(Error::InvalidState(format!(
                "{c} reached its maximum idle period but is not exercised"
            )));
        }
        Ok(())
    }
}

#[inline]
fn carrier_effectiveness(society: &Society, owner: PersonId, mu: f64, cell: Cell) -> f64 {
    mu * society.rho(cell.source, owner) * society.rho(owner, cell.target)
}

/// `psi(x, a, y)`: total intensity exercised at `(x, a, y)`, discounted
/// through the owner of `a`.
pub fn golden_effectiveness(
    society: &Society,
    roster: &CarrierRoster,
    state: &GoldenState,
    x: PersonId,
    a: GoodId,
    y: PersonId,
) -> Result<f64> {
    let cell = Cell { source: x, good: a, target: y };
    cell.check(society)?;
    let mu: f64 = state
        .selection
        .at(&state.partition, cell)
        .map(|c| roster.get(c).intensity)
        .sum();
    Ok(mu * society.rho(x, state.assignment.owner(a)) * society.rho(state.assignment.owner(a), y))
}

/// `pi*`, `phi*` and `psi*` over the rectangle `X x {a} x Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedTables {
    pub power: BTreeSet<CarrierId>,
    pub force: BTreeSet<CarrierId>,
    pub effectiveness: f64,
}

pub fn extended_tables(
    society: &Society,
    roster: &CarrierRoster,
    state: &GoldenState,
    xs: &[PersonId],
    a: GoodId,
    ys: &[PersonId],
) -> Result<ExtendedTables> {
    society.check_good(a)?;
    let mut in_x = vec![false; society.person_count()];
    let mut in_y = vec![false; society.person_count()];
    for &x in xs {
        society.check_person(x)?;
        in_x[x.0] = true;
    }
    for &y in ys {
        society.check_person(y)?;
        in_y[y.0] = true;
    }
    let owner = state.assignment.owner(a);
    let mut out = ExtendedTables {
        power: BTreeSet::new(),
        force: BTreeSet::new(),
        effectiveness: 0.0,
    };
    for c in roster.ids() {
        let cell = state.partition.location(c);
        if cell.good != a || !in_x[cell.source.0] || !in_y[cell.target.0] {
            continue;
        }
        out.power.insert(c);
        if state.selection.is_exercised(c) {
            out.force.insert(c);
            out.effectiveness += carrier_effectiveness(society, owner, roster.get(c).intensity, cell);
        }
    }
    Ok(out)
}

/// Effectiveness aimed at each person on good `a`, `psi*(P, a, {w})`.
fn column_masses(society: &Society, roster: &CarrierRoster, state: &GoldenState, a: GoodId) -> Vec<f64> {
    let owner = state.assignment.owner(a);
    let mut columns = vec![0.0; society.person_count()];
    for c in state.selection.exercised() {
        let cell = state.partition.location(c);
        if cell.good == a {
            columns[cell.target.0] += carrier_effectiveness(society, owner, roster.get(c).intensity, cell);
        }
    }
    columns
}

/// `P(w wins a) = psi*(P, a, {w}) / psi*(P, a, P)`, or certainty for the
/// incumbent when nothing on `a` is exercised.
pub fn golden_win_distribution(
    society: &Society,
    roster: &CarrierRoster,
    state: &GoldenState,
    a: GoodId,
) -> Result<Vec<f64>> {
    society.check_good(a)?;
    Ok(lottery::proportional(
        &column_masses(society, roster, state, a),
        state.assignment.owner(a),
    ))
}

/// True when no exercised carrier on `a` carries any effectiveness, so the
/// battle over `a` is decided for the incumbent without sampling.
pub fn is_degenerate(society: &Society, roster: &CarrierRoster, state: &GoldenState, a: GoodId) -> bool {
    column_masses(society, roster, state, a).iter().sum::<f64>() == 0.0
}

/// The deterministic laws: new owners, exercised carriers moved to the
/// transposed cell, idle counters reset or incremented. Intensity plays no
/// part here.
pub fn golden_advance(
    society: &Society,
    state: &GoldenState,
    winners: &[PersonId],
) -> Result<(SocialAssignment, GoldenPowerPartition, IdleTable)> {
    if winners.len() != society.good_count() {
        return Err(Error::InvalidArgument(format!(
            "{} winners for {} goods",
            winners.len(),
            society.good_count()
        )));
    }
    winners.iter().try_for_each(|&w| society.check_person(w))?;
    let mut location = state.partition.location.clone();
    let mut idle = state.idle.idle.clone();
    for (i, cell) in location.iter_mut().enumerate() {
        if state.selection.exercised[i] {
            *cell = cell.transpose();
            idle[i] = 0;
        } else {
            idle[i] += 1;
        }
    }
    Ok((
        SocialAssignment::from_owners_unchecked(winners.to_vec()),
        GoldenPowerPartition { location },
        IdleTable { idle },
    ))
}

pub fn golden_step(
    society: &Society,
    roster: &CarrierRoster,
    state: &GoldenState,
    will: &mut dyn GoldenWill,
    streams: &mut Streams,
) -> Result<(GoldenState, BattleRecord)> {
    let distributions = society
        .goods()
        .map(|a| lottery::proportional(&column_masses(society, roster, state, a), state.assignment.owner(a)))
        .collect();
    let battles = lottery::settle(distributions, &mut streams.lottery);
    let (assignment, partition, idle) = golden_advance(society, state, &battles.winners)?;
    idle.validate(roster)?;
    streams.steps_taken += 1;
    let selection = propose_checked(society, roster, &assignment, &partition, &idle, will, streams)?;
    Ok((
        GoldenState {
            assignment,
            partition,
            idle,
            selection,
        },
        battles,
    ))
}

fn propose_checked(
    society: &Society,
    roster: &CarrierRoster,
    assignment: &SocialAssignment,
    partition: &GoldenPowerPartition,
    idle: &IdleTable,
    will: &mut dyn GoldenWill,
    streams: &mut Streams,
) -> Result<GoldenForceSelection> {
    let ctx = GoldenContext {
        society,
        roster,
        assignment,
        partition,
        idle,
        step: streams.steps_taken,
    };
    let selection = will.propose(&ctx, &mut streams.will);
    if selection.len() != roster.len() {
        return Err(Error::StrategyViolation(format!(
            "{}: selection covers {} carriers, roster has {}",
            will.name(),
            selection.len(),
            roster.len()
        )));
    }
    if let Some(c) = selection.missing_mandatory(roster, idle) {
        return Err(Error::StrategyViolation(format!(
            "{}: {c} at {} is idle for {} steps and must be exercised",
            will.name(),
            partition.location(c),
            idle.get(c)
        )));
    }
    Ok(selection)
}

//! The static world shared by every engine: persons, goods, the
//! relationship function and social assignments.
//!
//! A relationship table `rho` over `n` persons must satisfy
//!
//! - `rho(x, x) = 1`,
//! - `0 < rho(x, y) < 1` whenever `x != y`,
//! - `rho(x, y) = rho(y, x)`,
//! - `rho(x, z) + rho(z, y) <= 1 + rho(x, y)` for every triple.
//!
//! The last condition says exactly that `1 - rho` is a metric, which is how
//! [`generate_relationships`] builds valid tables.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axiom checks ignore discrepancies at or below this magnitude.
pub const AXIOM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PersonId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GoodId(pub usize);

impl PersonId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl GoodId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for PersonId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

impl fmt::Display for GoodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

/// Square, row-major table of relationship strengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelationshipTable {
    rows: Vec<Vec<f64>>,
}

impl RelationshipTable {
    /// Wraps raw rows without checking the axioms; see [`validate_relationships`].
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        Self { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    #[inline]
    pub fn get(&self, x: PersonId, y: PersonId) -> f64 {
        self.rows[x.0][y.0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AxiomViolation {
    Diagonal { x: usize, value: f64 },
    OffDiagonalRange { x: usize, y: usize, value: f64 },
    Asymmetric { x: usize, y: usize, forward: f64, backward: f64 },
    /// `rho(x, z) + rho(z, y) > 1 + rho(x, y)`.
    Triangle { x: usize, y: usize, z: usize, excess: f64 },
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxiomViolation::Diagonal { x, value } => write!(f, "rho({x},{x}) = {value}, expected 1"),
            AxiomViolation::OffDiagonalRange { x, y, value } => {
                write!(f, "rho({x},{y}) = {value} outside (0,1)")
            }
            AxiomViolation::Asymmetric { x, y, forward, backward } => {
                write!(f, "rho({x},{y}) = {forward} but rho({y},{x}) = {backward}")
            }
            AxiomViolation::Triangle { x, y, z, excess } => write!(
                f,
                "rho({x},{z}) + rho({z},{y}) exceeds 1 + rho({x},{y}) by {excess}"
            ),
        }
    }
}

/// Every axiom violation found in a relationship table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RelationshipReport {
    pub violations: Vec<AxiomViolation>,
}

impl RelationshipReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for RelationshipReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        write!(f, "{} violation(s)", self.violations.len())?;
        for v in self.violations.iter().take(8) {
            write!(f, "; {v}")?;
        }
        if self.violations.len() > 8 {
            write!(f, "; ...")?;
        }
        Ok(())
    }
}

/// Checks all four relationship axioms, reporting every violation with its
/// witnessing indices. Structural problems are returned as errors instead.
pub fn validate_relationships(table: &RelationshipTable) -> Result<RelationshipReport> {
    let n = table.len();
    for (i, row) in table.rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::MalformedTable(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::MalformedTable(format!("entry ({i},{j}) is not finite")));
        }
    }

    let rho = &table.rows;
    let mut report = RelationshipReport::default();
    for x in 0..n {
        if (rho[x][x] - 1.0).abs() > AXIOM_TOLERANCE {
            report.violations.push(AxiomViolation::Diagonal { x, value: rho[x][x] });
        }
        for y in 0..n {
            if x == y {
                continue;
            }
            let v = rho[x][y];
            if !(v > 0.0 && v < 1.0) {
                report.violations.push(AxiomViolation::OffDiagonalRange { x, y, value: v });
            }
            if x < y && (v - rho[y][x]).abs() > AXIOM_TOLERANCE {
                report.violations.push(AxiomViolation::Asymmetric {
                    x,
                    y,
                    forward: v,
                    backward: rho[y][x],
                });
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let excess = rho[x][z] + rho[z][y] - 1.0 - rho[x][y];
                if excess > AXIOM_TOLERANCE {
                    report.violations.push(AxiomViolation::Triangle { x, y, z, excess });
                }
            }
        }
    }
    Ok(report)
}

/// Spread control for [`generate_relationships`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorParams {
    /// Off-diagonal relationships are kept inside `[epsilon, 1 - epsilon]`.
    #[serde(default = "GeneratorParams::default_epsilon")]
    pub epsilon: f64,
    /// Dimension of the box persons are embedded in.
    #[serde(default = "GeneratorParams::default_dim")]
    pub dim: usize,
}

impl GeneratorParams {
    fn default_epsilon() -> f64 {
        0.05
    }

    fn default_dim() -> usize {
        2
    }
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            epsilon: Self::default_epsilon(),
            dim: Self::default_dim(),
        }
    }
}

/// Builds a valid relationship table by embedding persons as random points
/// in a unit box and setting `rho = 1 - d` where `d` is the Euclidean
/// distance rescaled into `[epsilon, 1 - epsilon]`.
///
/// Rescaling is `d' = epsilon + (1 - 2 epsilon) d / d_max`, an affine map with
/// positive offset and slope, so `d'` is still a metric on distinct points.
pub fn generate_relationships(n: usize, seed: u64, params: &GeneratorParams) -> Result<RelationshipTable> {
    if n == 0 {
        return Err(Error::InvalidArgument("person count must be at least 1".into()));
    }
    if !(params.epsilon > 0.0 && params.epsilon < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 0.5), got {}",
            params.epsilon
        )));
    }
    if params.dim == 0 {
        return Err(Error::InvalidArgument("embedding dimension must be at least 1".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..params.dim).map(|_| rng.random::<f64>()).collect())
        .collect();

    let mut dist = vec![vec![0.0; n]; n];
    let mut d_max: f64 = 0.0;
    for x in 0..n {
        for y in (x + 1)..n {
            let d = points[x]
                .iter()
                .zip(&points[y])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            dist[x][y] = d;
            dist[y][x] = d;
            d_max = d_max.max(d);
        }
    }

    let eps = params.epsilon;
    let slope = 1.0 - 2.0 * eps;
    let mut rows = vec![vec![1.0; n]; n];
    for x in 0..n {
        for y in (x + 1)..n {
            let scaled = if d_max > 0.0 { dist[x][y] / d_max } else { 0.0 };
            let rho = 1.0 - (eps + slope * scaled);
            rows[x][y] = rho;
            rows[y][x] = rho;
        }
    }
    Ok(RelationshipTable { rows })
}

/// `S = (P, rho, E)` with dense person and good indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Society {
    persons: usize,
    estate: usize,
    relationships: RelationshipTable,
}

impl Society {
    /// Validates sizes and the relationship axioms.
    pub fn new(relationships: RelationshipTable, estate: usize) -> Result<Self> {
        let persons = relationships.len();
        if persons == 0 {
            return Err(Error::InvalidArgument("a society needs at least one person".into()));
        }
        if estate == 0 {
            return Err(Error::InvalidArgument("the estate needs at least one good".into()));
        }
        let report = validate_relationships(&relationships)?;
        if !report.is_ok() {
            return Err(Error::Axioms(report));
        }
        Ok(Self {
            persons,
            estate,
            relationships,
        })
    }

    pub fn generate(persons: usize, estate: usize, seed: u64, params: &GeneratorParams) -> Result<Self> {
        Self::new(generate_relationships(persons, seed, params)?, estate)
    }

    pub fn person_count(&self) -> usize {
        self.persons
    }

    pub fn good_count(&self) -> usize {
        self.estate
    }

    pub fn persons(&self) -> impl Iterator<Item = PersonId> + Clone {
        (0..self.persons).map(PersonId)
    }

    pub fn goods(&self) -> impl Iterator<Item = GoodId> + Clone {
        (0..self.estate).map(GoodId)
    }

    pub fn relationships(&self) -> &RelationshipTable {
        &self.relationships
    }

    /// Unchecked lookup for engine hot paths; ids must be in range.
    #[inline]
    pub(crate) fn rho(&self, x: PersonId, y: PersonId) -> f64 {
        self.relationships.get(x, y)
    }

    pub fn check_person(&self, x: PersonId) -> Result<()> {
        if x.0 < self.persons {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "person {x} out of range (|P| = {})",
                self.persons
            )))
        }
    }

    pub fn check_good(&self, a: GoodId) -> Result<()> {
        if a.0 < self.estate {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "good {a} out of range (|E| = {})",
                self.estate
            )))
        }
    }

    pub fn to_doc(&self) -> SocietyDoc {
        SocietyDoc {
            persons: self.persons,
            estate: self.estate,
            relationships: self.relationships.rows.clone(),
        }
    }

    pub fn from_doc(doc: &SocietyDoc) -> Result<Self> {
        if doc.relationships.len() != doc.persons {
            return Err(Error::MalformedTable(format!(
                "document declares {} persons but has {} relationship rows",
                doc.persons,
                doc.relationships.len()
            )));
        }
        Self::new(RelationshipTable::from_rows(doc.relationships.clone()), doc.estate)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SocietyDoc = serde_json::from_str(text)?;
        Self::from_doc(&doc)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_doc())?)
    }
}

/// Relationship strength between two persons, with range checks.
pub fn relationship(society: &Society, x: PersonId, y: PersonId) -> Result<f64> {
    society.check_person(x)?;
    society.check_person(y)?;
    Ok(society.rho(x, y))
}

/// JSON form of a [`Society`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SocietyDoc {
    pub persons: usize,
    pub estate: usize,
    pub relationships: Vec<Vec<f64>>,
}

/// `alpha: E -> P`, the owner of every good.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SocialAssignment {
    owners: Vec<PersonId>,
}

impl SocialAssignment {
    pub fn new(society: &Society, owners: Vec<PersonId>) -> Result<Self> {
        let assignment = Self { owners };
        assignment.validate(society)?;
        Ok(assignment)
    }

    /// Good `a` goes to person `a mod |P|`.
    pub fn round_robin(society: &Society) -> Self {
        Self {
            owners: society
                .goods()
                .map(|a| PersonId(a.0 % society.person_count()))
                .collect(),
        }
    }

    pub(crate) fn from_owners_unchecked(owners: Vec<PersonId>) -> Self {
        Self { owners }
    }

    pub fn validate(&self, society: &Society) -> Result<()> {
        if self.owners.len() != society.good_count() {
            return Err(Error::InvalidState(format!(
                "assignment covers {} goods, estate has {}",
                self.owners.len(),
                society.good_count()
            )));
        }
        if let Some((a, x)) = self
            .owners
            .iter()
            .enumerate()
            .find(|(_, x)| x.0 >= society.person_count())
        {
            return Err(Error::InvalidState(format!("good g{a} owned by unknown person {x}")));
        }
        Ok(())
    }

    #[inline]
    pub fn owner(&self, a: GoodId) -> PersonId {
        self.owners[a.0]
    }

    pub fn owners(&self) -> &[PersonId] {
        &self.owners
    }

    /// Number of goods held by each person.
    pub fn holdings(&self, persons: usize) -> Vec<usize> {
        let mut counts = vec![0; persons];
        for x in &self.owners {
            counts[x.0] += 1;
        }
        counts
    }
}

//! JSON-lines history logs: one header, one record per step, one footer.
//! Every line carries a `kind` field.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ModelKind, RunConfig};
use super::metrics::MetricsSummary;
use crate::error::{Error, Result};
use crate::golden::{CarrierId, CarrierRoster, Cell, GoldenState};
use crate::good::GoodState;
use crate::lottery::BattleRecord;
use crate::primitive::PrimitiveState;
use crate::society::SocietyDoc;

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveSnapshot {
    pub assignment: Vec<usize>,
    pub power: Vec<f64>,
    pub force: Vec<Vec<f64>>,
}

/// Triple tables as `(x, a, y, value)` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodSnapshot {
    pub assignment: Vec<usize>,
    pub power: Vec<(usize, usize, usize, f64)>,
    pub force: Vec<(usize, usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenSnapshot {
    pub assignment: Vec<usize>,
    /// Nonempty cells and the carriers they hold.
    pub partition: Vec<(Cell, Vec<CarrierId>)>,
    pub idle: Vec<u32>,
    pub exercised: Vec<CarrierId>,
}

/// A full state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Snapshot {
    Primitive(PrimitiveSnapshot),
    Good(GoodSnapshot),
    Golden(GoldenSnapshot),
}

fn owners(assignment: &crate::society::SocialAssignment) -> Vec<usize> {
    assignment.owners().iter().map(|p| p.0).collect()
}

impl Snapshot {
    pub fn primitive(state: &PrimitiveState) -> Self {
        Snapshot::Primitive(PrimitiveSnapshot {
            assignment: owners(&state.assignment),
            power: state.power.values().to_vec(),
            force: state.force.rows().to_vec(),
        })
    }

    pub fn good(state: &GoodState) -> Self {
        Snapshot::Good(GoodSnapshot {
            assignment: owners(&state.assignment),
            power: state.power.0.entries(),
            force: state.force.0.entries(),
        })
    }

    pub fn golden(state: &GoldenState) -> Self {
        Snapshot::Golden(GoldenSnapshot {
            assignment: owners(&state.assignment),
            partition: state.partition.cells(),
            idle: state.idle.values().to_vec(),
            exercised: state.selection.exercised().collect(),
        })
    }

    pub fn model(&self) -> ModelKind {
        match self {
            Snapshot::Primitive(_) => ModelKind::Primitive,
            Snapshot::Good(_) => ModelKind::Good,
            Snapshot::Golden(_) => ModelKind::Golden,
        }
    }

    pub fn assignment(&self) -> &[usize] {
        match self {
            Snapshot::Primitive(s) => &s.assignment,
            Snapshot::Good(s) => &s.assignment,
            Snapshot::Golden(s) => &s.assignment,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format_version: u32,
    pub engine_version: String,
    pub model: ModelKind,
    pub seed: u64,
    pub config: RunConfig,
    /// The society actually used, whatever its source in the config.
    pub society: SocietyDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carriers: Option<CarrierRoster>,
    pub snapshot_interval: u64,
    /// State 0.
    pub initial: Snapshot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarrierMove {
    pub carrier: CarrierId,
    pub from: Cell,
    pub to: Cell,
}

/// Transition `t`, from state `t` to state `t + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    #[serde(flatten)]
    pub battles: BattleRecord,
    /// Total power of state `t + 1`.
    pub total_power: f64,
    /// Carriers exercised in state `t`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exercised: Option<Vec<CarrierId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moved: Option<Vec<CarrierMove>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idle_reset: Option<Vec<CarrierId>>,
    /// State `t + 1`, when the snapshot interval calls for it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<Snapshot>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Footer {
    pub steps: u64,
    pub metrics: MetricsSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Record {
    Header(Box<Header>),
    Step(Box<StepRecord>),
    Footer(Box<Footer>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryLog {
    pub header: Header,
    pub steps: Vec<StepRecord>,
    pub footer: Option<Footer>,
}

impl HistoryLog {
    pub fn model(&self) -> ModelKind {
        self.header.model
    }

    /// Snapshot of every state, or `None` where the log skipped one.
    pub fn snapshots(&self) -> Vec<Option<&Snapshot>> {
        std::iter::once(Some(&self.header.initial))
            .chain(self.steps.iter().map(|s| s.snapshot.as_ref()))
            .collect()
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        let mut push = |record: &Record| -> Result<()> {
            out.push_str(&serde_json::to_string(record)?);
            out.push('\n');
            Ok(())
        };
        push(&Record::Header(Box::new(self.header.clone())))?;
        for step in &self.steps {
            push(&Record::Step(Box::new(step.clone())))?;
        }
        if let Some(footer) = &self.footer {
            push(&Record::Footer(Box::new(footer.clone())))?;
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut header = None;
        let mut steps = Vec::new();
        let mut footer = None;
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let lineno = i + 1;
            let record: Record = serde_json::from_str(line)
                .map_err(|e| Error::AuditInput(format!("line {lineno}: {e}")))?;
            match record {
                Record::Header(h) if header.is_none() => header = Some(*h),
                Record::Header(_) => {
                    return Err(Error::AuditInput(format!("line {lineno}: second header")));
                }
                _ if header.is_none() => {
                    return Err(Error::AuditInput(format!("line {lineno}: record before header")));
                }
                _ if footer.is_some() => {
                    return Err(Error::AuditInput(format!("line {lineno}: record after footer")));
                }
                Record::Step(s) => {
                    if s.t != steps.len() as u64 {
                        return Err(Error::AuditInput(format!(
                            "line {lineno}: step t = {}, expected {}",
                            s.t,
                            steps.len()
                        )));
                    }
                    steps.push(*s);
                }
                Record::Footer(f) => footer = Some(*f),
            }
        }
        let header = header.ok_or_else(|| Error::AuditInput("log has no header".into()))?;
        if header.format_version != super::config::FORMAT_VERSION {
            return Err(Error::AuditInput(format!(
                "unsupported log format version {}",
                header.format_version
            )));
        }
        Ok(Self {
            header,
            steps,
            footer,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_jsonl()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_jsonl(&std::fs::read_to_string(path)?)
    }
}

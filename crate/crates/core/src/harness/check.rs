//! Invariant checks and exact replay over a finished history log.
//!
//! State `s` is the initial snapshot for `s = 0` and the snapshot of step
//! record `s - 1` otherwise. A violation is reported at the first state
//! index where the log stops being consistent with the laws.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::ModelKind;
use super::log::{GoldenSnapshot, GoodSnapshot, HistoryLog, PrimitiveSnapshot, Snapshot};
use crate::error::{Error, Result};
use crate::golden::audit::{reciprocity_audit, successor_problems, AuditOptions, ReciprocityReport};
use crate::golden::{
    golden_advance, golden_win_distribution, is_degenerate, partition_problems, CarrierRoster,
    GoldenForceSelection, GoldenPowerPartition, GoldenState, IdleTable,
};
use crate::good::{good_exchange_power, good_win_distribution, GoodForceTable, GoodPowerTable, GoodState, TripleTable};
use crate::lottery::{pick, BattleRecord};
use crate::primitive::{
    primitive_transfer, primitive_win_distribution, PrimitiveForceTable, PrimitivePowerTable, PrimitiveState,
};
use crate::society::{GoodId, PersonId, SocialAssignment, Society};

pub const CONSERVATION_TOLERANCE: f64 = 1e-9;
pub const ANTISYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub state: u64,
    pub check: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub checked: u64,
    pub failed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub format_version: u32,
    pub model: ModelKind,
    pub states: u64,
    pub tallies: BTreeMap<String, Tally>,
    /// Sorted by state index.
    pub violations: Vec<Violation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reciprocity: Option<ReciprocityReport>,
}

impl InvariantReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

#[derive(Default)]
struct Checker {
    tallies: BTreeMap<String, Tally>,
    violations: Vec<Violation>,
}

impl Checker {
    fn check(&mut self, name: &str, state: u64, ok: bool, detail: impl FnOnce() -> String) -> bool {
        let tally = self.tallies.entry(name.to_string()).or_default();
        tally.checked += 1;
        if !ok {
            tally.failed += 1;
            self.violations.push(Violation {
                state,
                check: name.to_string(),
                detail: detail(),
            });
        }
        ok
    }

    fn fail(&mut self, name: &str, state: u64, detail: String) {
        self.check(name, state, false, || detail);
    }

    fn failed(&self, names: &[&str]) -> bool {
        names
            .iter()
            .any(|n| self.tallies.get(*n).is_some_and(|t| t.failed > 0))
    }
}

fn all_snapshots(log: &HistoryLog) -> Result<Vec<&Snapshot>> {
    log.snapshots()
        .into_iter()
        .enumerate()
        .map(|(s, snap)| {
            snap.ok_or_else(|| {
                Error::AuditInput(format!(
                    "state {s} has no snapshot; checking needs snapshot interval 1"
                ))
            })
        })
        .collect()
}

fn assignment_of(society: &Society, owners: &[usize]) -> std::result::Result<SocialAssignment, String> {
    SocialAssignment::new(society, owners.iter().map(|&x| PersonId(x)).collect()).map_err(|e| e.to_string())
}

/// Checks the logged lottery of transition `t` against the distribution
/// recomputed from state `t`.
fn check_lottery(
    ck: &mut Checker,
    s: u64,
    battles: &BattleRecord,
    recompute: impl Fn(GoodId) -> Result<Vec<f64>>,
    goods: usize,
) {
    let shape_ok = battles.winners.len() == goods
        && battles.variates.len() == goods
        && battles.distributions.len() == goods;
    if !ck.check("lottery", s, shape_ok, || format!("battle record does not cover {goods} goods")) {
        return;
    }
    for a in 0..goods {
        let dist = match recompute(GoodId(a)) {
            Ok(d) => d,
            Err(e) => {
                ck.fail("lottery", s, format!("g{a}: {e}"));
                continue;
            }
        };
        ck.check("lottery", s, dist == battles.distributions[a], || {
            format!("g{a}: logged distribution differs from the recomputed one")
        });
        let w = battles.winners[a];
        let drawn = pick(&dist, battles.variates[a]);
        ck.check("lottery", s, drawn == w, || {
            format!("g{a}: variate {} selects {drawn}, log says {w}", battles.variates[a])
        });
    }
}

fn check_assignment(ck: &mut Checker, s: u64, battles: &BattleRecord, next: &[usize]) {
    let winners: Vec<usize> = battles.winners.iter().map(|p| p.0).collect();
    ck.check("replay", s, winners == next, || {
        format!("owners {next:?} differ from battle winners {winners:?}")
    });
}

fn primitive_states(society: &Society, snaps: &[&Snapshot], ck: &mut Checker) -> Vec<Option<PrimitiveState>> {
    snaps
        .iter()
        .enumerate()
        .map(|(s, snap)| {
            let s = s as u64;
            let Snapshot::Primitive(PrimitiveSnapshot {
                assignment,
                power,
                force,
            }) = snap
            else {
                ck.fail("state", s, format!("{} snapshot in a primitive log", snap.model()));
                return None;
            };
            let built = assignment_of(society, assignment).and_then(|assignment| {
                let state = PrimitiveState {
                    assignment,
                    power: PrimitivePowerTable::from_raw(power.clone()),
                    force: PrimitiveForceTable::from_raw(force.clone()),
                };
                state.validate(society).map(|_| state).map_err(|e| e.to_string())
            });
            match built {
                Ok(state) => {
                    ck.check("state", s, true, String::new);
                    Some(state)
                }
                Err(e) => {
                    ck.fail("state", s, e);
                    None
                }
            }
        })
        .collect()
}

fn check_primitive(society: &Society, log: &HistoryLog, snaps: &[&Snapshot], ck: &mut Checker) {
    let states = primitive_states(society, snaps, ck);
    for (t, record) in log.steps.iter().enumerate() {
        let s = t as u64 + 1;
        let (Some(prev), next) = (&states[t], &states[t + 1]) else {
            continue;
        };
        check_lottery(
            ck,
            s,
            &record.battles,
            |a| primitive_win_distribution(society, prev, a),
            society.good_count(),
        );
        let Some(next) = next else { continue };
        let before = prev.power.total();
        let after = next.power.total();
        ck.check("conservation", s, (after - before).abs() <= CONSERVATION_TOLERANCE, || {
            format!("total power moved from {before} to {after}")
        });
        check_assignment(ck, s, &record.battles, snaps[t + 1].assignment());
        match primitive_transfer(society, prev, &record.battles.winners) {
            Ok((_, power)) => {
                ck.check("replay", s, power == next.power, || {
                    format!("logged power {:?}, laws give {:?}", next.power.values(), power.values())
                });
            }
            Err(e) => ck.fail("replay", s, e.to_string()),
        }
    }
}

fn good_states(society: &Society, snaps: &[&Snapshot], ck: &mut Checker) -> Vec<Option<GoodState>> {
    snaps
        .iter()
        .enumerate()
        .map(|(s, snap)| {
            let s = s as u64;
            let Snapshot::Good(GoodSnapshot {
                assignment,
                power,
                force,
            }) = snap
            else {
                ck.fail("state", s, format!("{} snapshot in a good log", snap.model()));
                return None;
            };
            let built = (|| -> Result<GoodState> {
                let assignment = assignment_of(society, assignment).map_err(Error::InvalidState)?;
                let power = GoodPowerTable(TripleTable::from_entries(society, power)?);
                let force = GoodForceTable(TripleTable::from_entries(society, force)?);
                let state = GoodState {
                    assignment,
                    power,
                    force,
                };
                state.validate(society)?;
                Ok(state)
            })();
            match built {
                Ok(state) => {
                    ck.check("state", s, true, String::new);
                    Some(state)
                }
                Err(e) => {
                    ck.fail("state", s, e.to_string());
                    None
                }
            }
        })
        .collect()
}

fn check_good(society: &Society, log: &HistoryLog, snaps: &[&Snapshot], ck: &mut Checker) {
    let states = good_states(society, snaps, ck);
    for (t, record) in log.steps.iter().enumerate() {
        let s = t as u64 + 1;
        let (Some(prev), next) = (&states[t], &states[t + 1]) else {
            continue;
        };
        check_lottery(
            ck,
            s,
            &record.battles,
            |a| good_win_distribution(society, prev, a),
            society.good_count(),
        );
        let Some(next) = next else { continue };
        let before = prev.power.total();
        let after = next.power.total();
        ck.check("conservation", s, (after - before).abs() <= CONSERVATION_TOLERANCE, || {
            format!("total power moved from {before} to {after}")
        });
        check_assignment(ck, s, &record.battles, snaps[t + 1].assignment());
        let delta = |x, a, y| next.power.get(x, a, y) - prev.power.get(x, a, y);
        for a in society.goods() {
            for x in society.persons() {
                ck.check("diagonal", s, delta(x, a, x) == 0.0, || {
                    format!("power at ({x}, {a}, {x}) changed by {}", delta(x, a, x))
                });
                for y in society.persons().filter(|&y| y > x) {
                    let gap = delta(x, a, y) + delta(y, a, x);
                    ck.check("antisymmetry", s, gap.abs() <= ANTISYMMETRY_TOLERANCE, || {
                        format!("changes at ({x}, {a}, {y}) and ({y}, {a}, {x}) do not cancel: {gap}")
                    });
                }
            }
        }
        let power = good_exchange_power(society, prev);
        ck.check("replay", s, power == next.power, || "logged power differs from the exchange law".into());
    }
}

fn golden_states(
    society: &Society,
    roster: &CarrierRoster,
    snaps: &[&Snapshot],
    ck: &mut Checker,
) -> Vec<Option<GoldenState>> {
    snaps
        .iter()
        .enumerate()
        .map(|(s, snap)| {
            let s = s as u64;
            let Snapshot::Golden(GoldenSnapshot {
                assignment,
                partition,
                idle,
                exercised,
            }) = snap
            else {
                ck.fail("state", s, format!("{} snapshot in a golden log", snap.model()));
                return None;
            };
            let assignment = match assignment_of(society, assignment) {
                Ok(a) => {
                    ck.check("state", s, true, String::new);
                    Some(a)
                }
                Err(e) => {
                    ck.fail("state", s, e);
                    None
                }
            };

            let mut problems = partition_problems(roster.len(), partition);
            let cells_ok = partition.iter().all(|(cell, _)| {
                cell.source.0 < society.person_count()
                    && cell.good.0 < society.good_count()
                    && cell.target.0 < society.person_count()
            });
            if !cells_ok {
                problems.push("partition names a cell outside the society".into());
            }
            let partition_ok = ck.check("partition", s, problems.is_empty(), || problems.join("; "));
            let partition = partition_ok
                .then(|| GoldenPowerPartition::from_cells(society, roster, partition).ok())
                .flatten();

            let idle_ok = ck.check("idle-bound", s, idle.len() == roster.len(), || {
                format!("{} idle counters for {} carriers", idle.len(), roster.len())
            });
            if idle_ok {
                for c in roster.iter() {
                    let tau = idle[c.id.0];
                    ck.check("idle-bound", s, tau <= c.max_idle, || {
                        format!("{} idle for {tau} steps, maximum {}", c.id, c.max_idle)
                    });
                }
            }
            let idle = idle_ok.then(|| IdleTable::from_raw(idle.clone()));

            let selection = match GoldenForceSelection::from_carriers(roster, exercised.iter().copied()) {
                Ok(sel) => Some(sel),
                Err(e) => {
                    ck.fail("state", s, e.to_string());
                    None
                }
            };
            if let (Some(idle), Some(sel)) = (&idle, &selection) {
                for c in idle.mandatory(roster) {
                    ck.check("mandatory", s, sel.is_exercised(c), || {
                        format!("{c} reached its maximum idle period but is not exercised")
                    });
                }
            }
            Some(GoldenState {
                assignment: assignment?,
                partition: partition?,
                idle: idle?,
                selection: selection?,
            })
        })
        .collect()
}

fn check_golden(
    society: &Society,
    roster: &CarrierRoster,
    log: &HistoryLog,
    snaps: &[&Snapshot],
    ck: &mut Checker,
) -> Option<ReciprocityReport> {
    let states = golden_states(society, roster, snaps, ck);
    for (t, record) in log.steps.iter().enumerate() {
        let s = t as u64 + 1;
        let (Some(prev), next) = (&states[t], &states[t + 1]) else {
            continue;
        };
        check_lottery(
            ck,
            s,
            &record.battles,
            |a| golden_win_distribution(society, roster, prev, a),
            society.good_count(),
        );
        for a in society.goods() {
            if is_degenerate(society, roster, prev, a) {
                let owner = prev.assignment.owner(a);
                let won = record.battles.winners.get(a.0).copied();
                ck.check("degenerate", s, won == Some(owner), || {
                    format!("nothing exercised on {a}, yet it went from {owner} to {won:?}")
                });
            }
        }
        let exercised: Vec<_> = prev.selection.exercised().collect();
        ck.check("record", s, record.exercised.as_ref() == Some(&exercised), || {
            "logged exercised carriers differ from the state's selection".into()
        });

        let Some(next) = next else { continue };
        let problems = successor_problems(society, roster, prev, next);
        ck.check("successor", s, problems.is_empty(), || problems.join("; "));
        check_assignment(ck, s, &record.battles, snaps[t + 1].assignment());
        match golden_advance(society, prev, &record.battles.winners) {
            Ok((_, partition, idle)) => {
                ck.check("replay", s, partition == next.partition && idle == next.idle, || {
                    "logged partition or idle counters differ from the laws".into()
                });
            }
            Err(e) => ck.fail("replay", s, e.to_string()),
        }
    }

    let structural = ["state", "partition", "idle-bound", "mandatory", "successor", "replay", "lottery"];
    if ck.failed(&structural) {
        log::warn!("reciprocity audit skipped: the history is structurally invalid");
        return None;
    }
    let history: Vec<GoldenState> = states.into_iter().flatten().collect();
    match reciprocity_audit(society, roster, &history, &AuditOptions::default()) {
        Ok(report) => {
            let tally = ck.tallies.entry("reciprocity".into()).or_default();
            tally.checked += report.events;
            for v in &report.violations {
                ck.fail(
                    "reciprocity",
                    v.t1,
                    format!(
                        "{} exercised at {} at t = {} and not reciprocated within {} steps",
                        v.carrier, v.cell, v.t1, v.bound
                    ),
                );
            }
            if report.set_violations > 0 {
                ck.fail(
                    "reciprocity",
                    report.horizon,
                    format!("{} set-level reciprocity failures", report.set_violations),
                );
            }
            Some(report)
        }
        Err(e) => {
            ck.fail("reciprocity", 0, e.to_string());
            None
        }
    }
}

/// Runs every invariant the log's model is subject to. The log must carry
/// a snapshot of every state.
pub fn check_invariants(log: &HistoryLog) -> Result<InvariantReport> {
    let society = Society::from_doc(&log.header.society)
        .map_err(|e| Error::AuditInput(format!("logged society: {e}")))?;
    let snaps = all_snapshots(log)?;
    let mut ck = Checker::default();
    let reciprocity = match log.model() {
        ModelKind::Primitive => {
            check_primitive(&society, log, &snaps, &mut ck);
            None
        }
        ModelKind::Good => {
            check_good(&society, log, &snaps, &mut ck);
            None
        }
        ModelKind::Golden => {
            let roster = log
                .header
                .carriers
                .as_ref()
                .ok_or_else(|| Error::AuditInput("golden log without carriers".into()))?;
            check_golden(&society, roster, log, &snaps, &mut ck)
        }
    };
    let mut violations = ck.violations;
    violations.sort_by_key(|v| v.state);
    Ok(InvariantReport {
        format_version: super::config::FORMAT_VERSION,
        model: log.model(),
        states: snaps.len() as u64,
        tallies: ck.tallies,
        violations,
        reciprocity,
    })
}

/// Re-applies the deterministic laws to each logged state and its logged
/// winners and compares against the next logged state bit for bit.
/// Returns the mismatches; empty means the log replays exactly.
pub fn replay(log: &HistoryLog) -> Result<Vec<Violation>> {
    let report = check_invariants(log)?;
    Ok(report
        .violations
        .into_iter()
        .filter(|v| v.check == "replay")
        .collect())
}

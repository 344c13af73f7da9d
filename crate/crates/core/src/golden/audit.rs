//! Reciprocity audit over a finished golden history.
//!
//! Every exercise of carrier `c` at `(x, a, y)` at time `t1` must be met by
//! an exercise of `c` at `(y, a, x)` at some `t2 > t1`. The laws pin the
//! latency down further: `c` lands in `(y, a, x)` with idle count 0 at
//! `t1 + 1`, its counter rises by one per idle step, and it becomes
//! mandatory at count `theta(c)`, so `t2 - t1 <= theta(c) + 1`. Events
//! whose deadline lies past the horizon are reported as pending.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{extended_tables, golden_win_distribution, CarrierId, CarrierRoster, Cell, GoldenState};
use crate::error::{Error, Result};
use crate::society::{GoodId, PersonId, Society};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditOptions {
    /// Last state index considered; defaults to the end of the history.
    pub horizon: Option<u64>,
    /// Random `(X, Y)` rectangles per step and good for the set-level check.
    pub rectangles_per_step: usize,
    pub seed: u64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            horizon: None,
            rectangles_per_step: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReciprocityViolation {
    pub carrier: CarrierId,
    pub t1: u64,
    pub cell: Cell,
    /// Time of the reciprocating exercise, if one was found at all.
    pub t2: Option<u64>,
    pub bound: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarrierLatency {
    pub carrier: CarrierId,
    pub theta: u32,
    /// Latency `t2 - t1` to count.
    pub histogram: BTreeMap<u64, u64>,
    pub pending: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReciprocityReport {
    pub horizon: u64,
    pub events: u64,
    pub resolved: u64,
    pub pending: u64,
    pub violations: Vec<ReciprocityViolation>,
    pub carriers: Vec<CarrierLatency>,
    /// Carrier memberships checked for the set-extended form.
    pub set_checks: u64,
    pub set_pending: u64,
    pub set_violations: u64,
}

impl ReciprocityReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.set_violations == 0
    }

    /// Every latency observed, across carriers.
    pub fn latencies(&self) -> impl Iterator<Item = (CarrierId, u64)> + '_ {
        self.carriers.iter().flat_map(|c| {
            c.histogram
                .iter()
                .flat_map(move |(&lat, &n)| std::iter::repeat_n((c.carrier, lat), n as usize))
        })
    }
}

/// Ways `next` fails to be a successor of `prev`. Empty for a valid step.
pub fn successor_problems(
    society: &Society,
    roster: &CarrierRoster,
    prev: &GoldenState,
    next: &GoldenState,
) -> Vec<String> {
    let mut problems = Vec::new();
    for c in roster.ids() {
        let here = prev.partition.location(c);
        let exercised = prev.selection.is_exercised(c);
        let expected = if exercised { here.transpose() } else { here };
        let landed = next.partition.location(c);
        if landed != expected {
            problems.push(format!("{c} moved from {here} to {landed}, law requires {expected}"));
        }
        let want_idle = if exercised { 0 } else { prev.idle.get(c) + 1 };
        if next.idle.get(c) != want_idle {
            problems.push(format!(
                "{c} idle count {} after step, law requires {want_idle}",
                next.idle.get(c)
            ));
        }
    }
    for a in society.goods() {
        let Ok(dist) = golden_win_distribution(society, roster, prev, a) else {
            continue;
        };
        let owner = next.assignment.owner(a);
        if dist.get(owner.0).copied().unwrap_or(0.0) <= 0.0 {
            problems.push(format!("{owner} took {a} with zero win probability"));
        }
    }
    problems
}

/// Checks reciprocity on `history`, where state `t` is `history[t]`.
pub fn reciprocity_audit(
    society: &Society,
    roster: &CarrierRoster,
    history: &[GoldenState],
    options: &AuditOptions,
) -> Result<ReciprocityReport> {
    if history.is_empty() {
        return Err(Error::AuditInput("empty history".into()));
    }
    let last = history.len() as u64 - 1;
    let horizon = options.horizon.unwrap_or(last);
    if horizon > last {
        return Err(Error::AuditInput(format!(
            "horizon {horizon} beyond the last state {last}"
        )));
    }
    for (t, state) in history.iter().enumerate() {
        state
            .validate(society, roster)
            .map_err(|e| Error::AuditInput(format!("state {t}: {e}")))?;
    }
    for t in 0..horizon as usize {
        if let Some(p) = successor_problems(society, roster, &history[t], &history[t + 1]).first() {
            return Err(Error::AuditInput(format!(
                "state {} is not a successor of state {t}: {p}",
                t + 1
            )));
        }
    }

    let mut report = ReciprocityReport {
        horizon,
        events: 0,
        resolved: 0,
        pending: 0,
        violations: Vec::new(),
        carriers: roster
            .iter()
            .map(|c| CarrierLatency {
                carrier: c.id,
                theta: c.max_idle,
                histogram: BTreeMap::new(),
                pending: 0,
            })
            .collect(),
        set_checks: 0,
        set_pending: 0,
        set_violations: 0,
    };

    for t1 in 0..=horizon {
        let state = &history[t1 as usize];
        for c in state.selection.exercised() {
            let cell = state.partition.location(c);
            let mirror = cell.transpose();
            let bound = u64::from(roster.get(c).max_idle) + 1;
            report.events += 1;
            let t2 = ((t1 + 1)..=horizon).find(|&t| {
                let s = &history[t as usize];
                s.selection.is_exercised(c) && s.partition.location(c) == mirror
            });
            match t2 {
                Some(t2) if t2 - t1 <= bound => {
                    report.resolved += 1;
                    *report.carriers[c.0].histogram.entry(t2 - t1).or_default() += 1;
                }
                None if t1 + bound > horizon => {
                    report.pending += 1;
                    report.carriers[c.0].pending += 1;
                }
                t2 => report.violations.push(ReciprocityViolation {
                    carrier: c,
                    t1,
                    cell,
                    t2,
                    bound,
                }),
            }
        }
    }

    set_reciprocity(society, roster, history, horizon, options, &mut report)?;
    Ok(report)
}

/// Set-extended check on sampled rectangles: each `c` in `phi*_t1(X, a, Y)`
/// must appear in `phi*_t2(Y, a, X)` for some `t1 < t2 <= t1 + theta(c) + 1`.
fn set_reciprocity(
    society: &Society,
    roster: &CarrierRoster,
    history: &[GoldenState],
    horizon: u64,
    options: &AuditOptions,
    report: &mut ReciprocityReport,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let persons: Vec<PersonId> = society.persons().collect();
    for t1 in 0..=horizon {
        for a in society.goods() {
            for _ in 0..options.rectangles_per_step {
                let xs = random_subset(&persons, &mut rng);
                let ys = random_subset(&persons, &mut rng);
                let there = extended_tables(society, roster, &history[t1 as usize], &xs, a, &ys)?;
                for &c in &there.force {
                    report.set_checks += 1;
                    let bound = u64::from(roster.get(c).max_idle) + 1;
                    let last = (t1 + bound).min(horizon);
                    let found = ((t1 + 1)..=last).any(|t2| {
                        mirrored(society, roster, &history[t2 as usize], &ys, a, &xs, c)
                    });
                    if found {
                        continue;
                    }
                    if t1 + bound > horizon {
                        report.set_pending += 1;
                    } else {
                        report.set_violations += 1;
                    }
                }
            }
        }
    }
    Ok(())
}

fn mirrored(
    society: &Society,
    roster: &CarrierRoster,
    state: &GoldenState,
    ys: &[PersonId],
    a: GoodId,
    xs: &[PersonId],
    c: CarrierId,
) -> bool {
    extended_tables(society, roster, state, ys, a, xs)
        .map(|back| back.force.contains(&c))
        .unwrap_or(false)
}

fn random_subset(persons: &[PersonId], rng: &mut ChaCha8Rng) -> Vec<PersonId> {
    persons.iter().copied().filter(|_| rng.random::<bool>()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden::{golden_step, ForceCarrier, GoldenForceSelection, GoldenPowerPartition, IdleTable};
    use crate::rng::Streams;
    use crate::society::{RelationshipTable, SocialAssignment};
    use crate::will::golden::{Greedy, MinimalCompliance};
    use crate::will::GoldenWill;

    fn run(will: &mut dyn GoldenWill, theta: u32, steps: usize) -> (Society, CarrierRoster, Vec<GoldenState>) {
        let s = Society::new(
            RelationshipTable::from_rows(vec![vec![1.0, 0.5], vec![0.5, 1.0]]),
            1,
        )
        .unwrap();
        let r = CarrierRoster::new(vec![ForceCarrier {
            id: CarrierId(0),
            intensity: 1.0,
            max_idle: theta,
        }])
        .unwrap();
        let mut streams = Streams::from_seed(8);
        let p = GoldenPowerPartition::new(&s, &r, vec![Cell::new(0, 0, 1)]).unwrap();
        let mut st = GoldenState::bootstrap(
            &s,
            &r,
            SocialAssignment::round_robin(&s),
            p,
            IdleTable::zeros(&r),
            will,
            &mut streams,
        )
        .unwrap();
        let mut history = vec![st.clone()];
        for _ in 0..steps {
            st = golden_step(&s, &r, &st, will, &mut streams).unwrap().0;
            history.push(st.clone());
        }
        (s, r, history)
    }

    #[test]
    fn minimal_compliance_latency_is_theta_plus_one() {
        // one carrier, theta = 2: exercised at t = 2, 5, 8, ...
        let (s, r, h) = run(&mut MinimalCompliance, 2, 12);
        let exercised_at: Vec<usize> = h
            .iter()
            .enumerate()
            .filter(|(_, st)| st.selection.is_exercised(CarrierId(0)))
            .map(|(t, _)| t)
            .collect();
        assert_eq!(exercised_at, vec![2, 5, 8, 11]);
        let report = reciprocity_audit(&s, &r, &h, &AuditOptions::default()).unwrap();
        assert!(report.is_clean());
        assert_eq!(report.events, 4);
        assert_eq!(report.resolved, 3);
        assert_eq!(report.pending, 1);
        assert!(report.latencies().all(|(_, l)| l == 3));
    }

    #[test]
    fn greedy_latency_is_one() {
        let (s, r, h) = run(&mut Greedy, 3, 10);
        let report = reciprocity_audit(&s, &r, &h, &AuditOptions::default()).unwrap();
        assert!(report.is_clean());
        assert_eq!(report.resolved, 10);
        assert_eq!(report.pending, 1);
        assert!(report.latencies().all(|(_, l)| l == 1));
        assert!(report.set_checks > 0);
    }

    #[test]
    fn malformed_histories_are_rejected() {
        let (s, r, mut h) = run(&mut Greedy, 1, 4);
        h[2].partition = GoldenPowerPartition::new(&s, &r, vec![Cell::new(1, 0, 1)]).unwrap();
        assert!(matches!(
            reciprocity_audit(&s, &r, &h, &AuditOptions::default()),
            Err(Error::AuditInput(_))
        ));
        assert!(reciprocity_audit(&s, &r, &[], &AuditOptions::default()).is_err());
        let opts = AuditOptions {
            horizon: Some(99),
            ..Default::default()
        };
        assert!(reciprocity_audit(&s, &r, &h[..1], &opts).is_err());
    }

    #[test]
    fn truncated_horizon_turns_late_events_pending() {
        let (s, r, h) = run(&mut MinimalCompliance, 2, 12);
        let opts = AuditOptions {
            horizon: Some(6),
            ..Default::default()
        };
        let report = reciprocity_audit(&s, &r, &h, &opts).unwrap();
        // events at 2 (resolved at 5) and 5 (deadline 8 > 6)
        assert_eq!((report.events, report.resolved, report.pending), (2, 1, 1));
    }

    #[test]
    fn successor_checker_spots_bad_idle() {
        let (s, r, h) = run(&mut MinimalCompliance, 3, 3);
        assert!(successor_problems(&s, &r, &h[0], &h[1]).is_empty());
        let mut bad = h[1].clone();
        bad.idle = IdleTable::new(&r, vec![0]).unwrap();
        bad.selection = GoldenForceSelection::none(&r);
        assert_eq!(successor_problems(&s, &r, &h[0], &bad).len(), 1);
    }
}

//! Summary statistics computed from a history log.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::log::{HistoryLog, Snapshot};

/// Gini coefficient of non-negative values; 0 when they sum to 0.
pub fn gini(values: &[f64]) -> f64 {
    let n = values.len();
    let total: f64 = values.iter().sum();
    if n == 0 || total <= 0.0 {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    // sum_i (2i - n + 1) v_i over ascending values
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, v)| (2.0 * i as f64 - n as f64 + 1.0) * v)
        .sum();
    weighted / (n as f64 * total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    /// State index.
    pub t: u64,
    pub total_power: f64,
    /// Gini over goods owned, accumulated over states `0..=t`.
    pub gini: f64,
    pub owned: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub events: u64,
    pub resolved: u64,
    pub pending: u64,
    pub min: Option<u64>,
    pub max: Option<u64>,
    pub mean: Option<f64>,
    /// `(latency, count)` pairs in ascending latency.
    pub histogram: Vec<(u64, u64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub states: u64,
    pub initial_total_power: f64,
    pub final_total_power: f64,
    pub final_gini: f64,
    pub final_owned: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency: Option<LatencySummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub format_version: u32,
    pub persons: usize,
    pub rows: Vec<MetricsRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency: Option<LatencySummary>,
}

fn snapshot_total(snapshot: &Snapshot, carrier_total: f64) -> f64 {
    match snapshot {
        Snapshot::Primitive(s) => s.power.iter().sum(),
        Snapshot::Good(s) => s.power.iter().map(|e| e.3).sum(),
        Snapshot::Golden(_) => carrier_total,
    }
}

impl MetricsReport {
    pub fn from_log(log: &HistoryLog) -> Self {
        let persons = log.header.society.persons;
        let carrier_total: f64 = log
            .header
            .carriers
            .as_ref()
            .map(|r| r.iter().map(|c| c.intensity).sum())
            .unwrap_or(0.0);

        let mut cumulative = vec![0.0; persons];
        let mut rows = Vec::with_capacity(log.steps.len() + 1);
        let mut push = |t: u64, total_power: f64, assignment: &[usize]| {
            let mut owned = vec![0; persons];
            for &x in assignment {
                if x < persons {
                    owned[x] += 1;
                }
            }
            for (c, &o) in cumulative.iter_mut().zip(&owned) {
                *c += o as f64;
            }
            rows.push(MetricsRow {
                t,
                total_power,
                gini: gini(&cumulative),
                owned,
            });
        };
        let initial = &log.header.initial;
        push(0, snapshot_total(initial, carrier_total), initial.assignment());
        for step in &log.steps {
            let winners: Vec<usize> = step.battles.winners.iter().map(|p| p.0).collect();
            push(step.t + 1, step.total_power, &winners);
        }

        Self {
            format_version: super::config::FORMAT_VERSION,
            persons,
            rows,
            latency: latency_from_log(log),
        }
    }

    pub fn summary(&self) -> MetricsSummary {
        let first = self.rows.first();
        let last = self.rows.last();
        MetricsSummary {
            states: self.rows.len() as u64,
            initial_total_power: first.map_or(0.0, |r| r.total_power),
            final_total_power: last.map_or(0.0, |r| r.total_power),
            final_gini: last.map_or(0.0, |r| r.gini),
            final_owned: last.map(|r| r.owned.clone()).unwrap_or_default(),
            latency: self.latency.clone(),
        }
    }

    /// `t,total_power,gini,owned_0,...`, one line per state.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,total_power,gini");
        for x in 0..self.persons {
            let _ = write!(out, ",owned_{x}");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{},{},{}", row.t, row.total_power, row.gini);
            for o in &row.owned {
                let _ = write!(out, ",{o}");
            }
            out.push('\n');
        }
        out
    }
}

/// Gaps between consecutive exercises of each carrier.
fn latency_from_log(log: &HistoryLog) -> Option<LatencySummary> {
    let roster = log.header.carriers.as_ref()?;
    let mut times: Vec<Vec<u64>> = vec![Vec::new(); roster.len()];
    for step in &log.steps {
        for c in step.exercised.iter().flatten() {
            if let Some(v) = times.get_mut(c.0) {
                v.push(step.t);
            }
        }
    }
    let last = log.steps.len() as u64;
    if let Some(Snapshot::Golden(g)) = log.steps.last().and_then(|s| s.snapshot.as_ref()) {
        for c in &g.exercised {
            if let Some(v) = times.get_mut(c.0) {
                v.push(last);
            }
        }
    }

    let mut histogram = BTreeMap::new();
    let (mut events, mut resolved) = (0u64, 0u64);
    for t in &times {
        events += t.len() as u64;
        for pair in t.windows(2) {
            *histogram.entry(pair[1] - pair[0]).or_insert(0u64) += 1;
            resolved += 1;
        }
    }
    let sum: u64 = histogram.iter().map(|(l, n)| l * n).sum();
    Some(LatencySummary {
        events,
        resolved,
        pending: events - resolved,
        min: histogram.keys().next().copied(),
        max: histogram.keys().next_back().copied(),
        mean: (resolved > 0).then(|| sum as f64 / resolved as f64),
        histogram: histogram.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_extremes() {
        assert_eq!(gini(&[1.0, 1.0, 1.0]), 0.0);
        assert_eq!(gini(&[0.0, 0.0]), 0.0);
        assert!((gini(&[0.0, 0.0, 0.0, 4.0]) - 0.75).abs() < 1e-15);
        assert!((gini(&[1.0, 3.0]) - 0.25).abs() < 1e-15);
    }
}

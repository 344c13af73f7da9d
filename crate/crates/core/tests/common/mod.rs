//! Reference implementations over plain arrays. Nothing here calls into the
//! engines' arithmetic; states are only read through their public accessors.
#![allow(dead_code)]

use everwill::{CarrierRoster, GoldenState, GoodState, PrimitiveState, Society};

fn rho_of(society: &Society) -> Vec<Vec<f64>> {
    society.relationships().rows().to_vec()
}

fn owners_of(owners: &[everwill::PersonId]) -> Vec<usize> {
    owners.iter().map(|p| p.0).collect()
}

/// Weights scaled to sum to one; all mass to `incumbent` when they sum to 0.
pub fn normalize(weights: &[f64], incumbent: usize) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    if total == 0.0 {
        let mut d = vec![0.0; weights.len()];
        d[incumbent] = 1.0;
        return d;
    }
    weights.iter().map(|w| w / total).collect()
}

/// Every winner tuple, one winner per good, with its probability.
pub fn outcomes(dists: &[Vec<f64>]) -> Vec<(f64, Vec<usize>)> {
    let mut out = vec![(1.0, Vec::new())];
    for dist in dists {
        let mut next = Vec::new();
        for (p, winners) in &out {
            for (w, &q) in dist.iter().enumerate() {
                if q > 0.0 {
                    let mut ws = winners.clone();
                    ws.push(w);
                    next.push((p * q, ws));
                }
            }
        }
        out = next;
    }
    out
}

pub struct PrimitiveRef {
    pub rho: Vec<Vec<f64>>,
    pub owner: Vec<usize>,
    pub power: Vec<f64>,
    pub force: Vec<Vec<f64>>,
}

impl PrimitiveRef {
    pub fn new(society: &Society, state: &PrimitiveState) -> Self {
        Self {
            rho: rho_of(society),
            owner: owners_of(state.assignment.owners()),
            power: state.power.values().to_vec(),
            force: state.force.rows().to_vec(),
        }
    }

    fn n(&self) -> usize {
        self.power.len()
    }

    pub fn psi(&self, x: usize, a: usize) -> f64 {
        self.force[x][a] * self.rho[x][self.owner[a]]
    }

    pub fn dist(&self, a: usize) -> Vec<f64> {
        let w: Vec<f64> = (0..self.n()).map(|x| self.psi(x, a)).collect();
        normalize(&w, self.owner[a])
    }

    pub fn dists(&self) -> Vec<Vec<f64>> {
        (0..self.owner.len()).map(|a| self.dist(a)).collect()
    }

    pub fn next_power(&self, winners: &[usize]) -> Vec<f64> {
        let n = self.n();
        let mut p = self.power.clone();
        if n == 1 {
            return p;
        }
        for (a, &w) in winners.iter().enumerate() {
            let pay = self.force[w][a];
            p[w] -= pay;
            let mass: f64 = (0..n).filter(|&y| y != w).map(|y| self.psi(y, a)).sum();
            for x in (0..n).filter(|&x| x != w) {
                p[x] += if mass == 0.0 {
                    pay / (n - 1) as f64
                } else {
                    pay * self.psi(x, a) / mass
                };
            }
        }
        p
    }

    /// Mean and variance of each person's next power over all outcomes.
    pub fn moments(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        let mut mean = vec![0.0; n];
        let mut second = vec![0.0; n];
        for (prob, winners) in outcomes(&self.dists()) {
            for (x, v) in self.next_power(&winners).into_iter().enumerate() {
                mean[x] += prob * v;
                second[x] += prob * v * v;
            }
        }
        let var = mean.iter().zip(&second).map(|(m, s)| (s - m * m).max(0.0)).collect();
        (mean, var)
    }
}

/// Triple-indexed tables flattened as `[x][a][y]`.
pub struct GoodRef {
    pub n: usize,
    pub m: usize,
    pub rho: Vec<Vec<f64>>,
    pub owner: Vec<usize>,
    pub power: Vec<f64>,
    pub force: Vec<f64>,
}

impl GoodRef {
    pub fn new(society: &Society, state: &GoodState) -> Self {
        Self {
            n: society.person_count(),
            m: society.good_count(),
            rho: rho_of(society),
            owner: owners_of(state.assignment.owners()),
            power: state.power.0.values().to_vec(),
            force: state.force.0.values().to_vec(),
        }
    }

    pub fn idx(&self, x: usize, a: usize, y: usize) -> usize {
        (x * self.m + a) * self.n + y
    }

    pub fn dist(&self, a: usize) -> Vec<f64> {
        let o = self.owner[a];
        let w: Vec<f64> = (0..self.n)
            .map(|w| {
                (0..self.n)
                    .map(|y| self.force[self.idx(y, a, w)] * self.rho[y][o] * self.rho[o][w])
                    .sum()
            })
            .collect();
        normalize(&w, o)
    }

    pub fn next_power(&self) -> Vec<f64> {
        let mut p = self.power.clone();
        for x in 0..self.n {
            for a in 0..self.m {
                for y in 0..self.n {
                    let i = self.idx(x, a, y);
                    p[i] += self.force[self.idx(y, a, x)];
                    p[i] -= self.force[i];
                }
            }
        }
        p
    }
}

pub struct GoldenRef {
    pub rho: Vec<Vec<f64>>,
    pub owner: Vec<usize>,
    /// `(x, a, y)` per carrier.
    pub location: Vec<(usize, usize, usize)>,
    pub mu: Vec<f64>,
    pub theta: Vec<u32>,
    pub idle: Vec<u32>,
    pub exercised: Vec<bool>,
}

impl GoldenRef {
    pub fn new(society: &Society, roster: &CarrierRoster, state: &GoldenState) -> Self {
        Self {
            rho: rho_of(society),
            owner: owners_of(state.assignment.owners()),
            location: state
                .partition
                .locations()
                .iter()
                .map(|c| (c.source.0, c.good.0, c.target.0))
                .collect(),
            mu: roster.iter().map(|c| c.intensity).collect(),
            theta: roster.iter().map(|c| c.max_idle).collect(),
            idle: state.idle.values().to_vec(),
            exercised: roster.ids().map(|c| state.selection.is_exercised(c)).collect(),
        }
    }

    pub fn column_mass(&self, a: usize) -> Vec<f64> {
        let o = self.owner[a];
        let mut w = vec![0.0; self.rho.len()];
        for (c, &(x, b, y)) in self.location.iter().enumerate() {
            if b == a && self.exercised[c] {
                w[y] += self.mu[c] * self.rho[x][o] * self.rho[o][y];
            }
        }
        w
    }

    pub fn dist(&self, a: usize) -> Vec<f64> {
        normalize(&self.column_mass(a), self.owner[a])
    }

    /// Locations and idle counters after one step.
    pub fn advance(&self) -> (Vec<(usize, usize, usize)>, Vec<u32>) {
        let mut loc = self.location.clone();
        let mut idle = self.idle.clone();
        for c in 0..loc.len() {
            if self.exercised[c] {
                let (x, a, y) = loc[c];
                loc[c] = (y, a, x);
                idle[c] = 0;
            } else {
                idle[c] += 1;
            }
        }
        (loc, idle)
    }
}

/// `|observed - expected| <= k` binomial standard errors over `trials`.
pub fn within_binomial(count: u64, trials: u64, p: f64, k: f64) -> bool {
    let expected = p * trials as f64;
    let sd = (trials as f64 * p * (1.0 - p)).sqrt();
    (count as f64 - expected).abs() <= k * sd
}

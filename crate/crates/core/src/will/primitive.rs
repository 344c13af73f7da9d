use serde::{Deserialize, Serialize};

use super::{PrimitiveContext, PrimitiveWill};
use crate::primitive::PrimitiveForceTable;
use crate::rng::StreamRng;
use crate::society::PersonId;

pub const UNIFORM_SELFISH: &str = "uniform-selfish";
pub const PROPORTIONAL_GREEDY: &str = "proportional-greedy";
pub const ZERO_FORCE: &str = "zero-force";

/// Fraction of power a person commits each step; must lie in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetParams {
    #[serde(default = "BudgetParams::default_beta")]
    pub beta: f64,
}

impl BudgetParams {
    fn default_beta() -> f64 {
        0.5
    }

    fn check(self, name: &str) -> Result<Self, String> {
        if (0.0..1.0).contains(&self.beta) {
            Ok(self)
        } else {
            Err(format!("strategy {name:?}: beta must lie in [0, 1), got {}", self.beta))
        }
    }
}

impl Default for BudgetParams {
    fn default() -> Self {
        Self {
            beta: Self::default_beta(),
        }
    }
}

/// Spreads `beta * pi(x)` evenly over every good.
#[derive(Debug, Clone)]
pub struct UniformSelfish {
    beta: f64,
}

impl UniformSelfish {
    pub fn new(params: BudgetParams) -> Result<Self, String> {
        Ok(Self {
            beta: params.check(UNIFORM_SELFISH)?.beta,
        })
    }
}

impl Default for UniformSelfish {
    fn default() -> Self {
        Self {
            beta: BudgetParams::default_beta(),
        }
    }
}

impl PrimitiveWill for UniformSelfish {
    fn name(&self) -> &str {
        UNIFORM_SELFISH
    }

    fn propose(&mut self, ctx: &PrimitiveContext<'_>, _: &mut StreamRng) -> PrimitiveForceTable {
        let goods = ctx.society.good_count() as f64;
        PrimitiveForceTable::from_fn(ctx.society, |x, _| self.beta * ctx.power.get(x) / goods)
    }
}

/// Splits `beta * pi(x)` across goods in proportion to `x`'s relationship
/// with each current owner, so goods held by close persons draw more force.
#[derive(Debug, Clone)]
pub struct ProportionalGreedy {
    beta: f64,
}

impl ProportionalGreedy {
    pub fn new(params: BudgetParams) -> Result<Self, String> {
        Ok(Self {
            beta: params.check(PROPORTIONAL_GREEDY)?.beta,
        })
    }
}

impl PrimitiveWill for ProportionalGreedy {
    fn name(&self) -> &str {
        PROPORTIONAL_GREEDY
    }

    fn propose(&mut self, ctx: &PrimitiveContext<'_>, _: &mut StreamRng) -> PrimitiveForceTable {
        let society = ctx.society;
        let weights: Vec<f64> = society
            .persons()
            .map(|x| {
                society
                    .goods()
                    .map(|a| society.rho(x, ctx.assignment.owner(a)))
                    .sum()
            })
            .collect();
        PrimitiveForceTable::from_fn(society, |x, a| {
            self.beta * ctx.power.get(x) * society.rho(x, ctx.assignment.owner(a)) / weights[x.0]
        })
    }
}

/// Nobody desires anything.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroForce;

impl PrimitiveWill for ZeroForce {
    fn name(&self) -> &str {
        ZERO_FORCE
    }

    fn propose(&mut self, ctx: &PrimitiveContext<'_>, _: &mut StreamRng) -> PrimitiveForceTable {
        PrimitiveForceTable::zeros(ctx.society)
    }
}

/// Composes one strategy per person: row `x` of the output comes from
/// strategy `x`.
pub struct PerPerson {
    name: String,
    members: Vec<Box<dyn PrimitiveWill>>,
}

impl PerPerson {
    pub fn new(members: Vec<Box<dyn PrimitiveWill>>) -> Self {
        let name = format!(
            "per-person[{}]",
            members.iter().map(|m| m.name()).collect::<Vec<_>>().join(",")
        );
        Self { name, members }
    }
}

impl PrimitiveWill for PerPerson {
    fn name(&self) -> &str {
        &self.name
    }

    fn propose(&mut self, ctx: &PrimitiveContext<'_>, rng: &mut StreamRng) -> PrimitiveForceTable {
        let rows: Vec<Vec<f64>> = self
            .members
            .iter_mut()
            .enumerate()
            .map(|(x, m)| m.propose(ctx, rng).rows()[x].clone())
            .collect();
        PrimitiveForceTable::from_fn(ctx.society, |x: PersonId, a| {
            rows.get(x.0).and_then(|r| r.get(a.0)).copied().unwrap_or(0.0)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitive::PrimitivePowerTable;
    use crate::rng::stream;
    use crate::society::{GoodId, SocialAssignment, Society};

    fn ctx_parts() -> (Society, SocialAssignment, PrimitivePowerTable) {
        let s = Society::generate(3, 4, 9, &Default::default()).unwrap();
        let a = SocialAssignment::round_robin(&s);
        let p = PrimitivePowerTable::new(&s, vec![2.0, 1.0, 0.5]).unwrap();
        (s, a, p)
    }

    #[test]
    fn uniform_selfish_splits_half_the_budget() {
        let (s, a, p) = ctx_parts();
        let ctx = PrimitiveContext {
            society: &s,
            assignment: &a,
            power: &p,
            step: 0,
        };
        let f = UniformSelfish::default().propose(&ctx, &mut stream(0, "t"));
        for g in s.goods() {
            assert_eq!(f.get(PersonId(0), g), 0.25);
        }
        assert!(f.over_budget(&p).is_none());
    }

    #[test]
    fn zero_force_and_greedy_are_feasible() {
        let (s, a, p) = ctx_parts();
        let ctx = PrimitiveContext {
            society: &s,
            assignment: &a,
            power: &p,
            step: 3,
        };
        let z = ZeroForce.propose(&ctx, &mut stream(0, "t"));
        assert!(z.rows().iter().flatten().all(|&v| v == 0.0));
        assert!(z.over_budget(&p).is_none());

        let mut greedy = ProportionalGreedy::new(BudgetParams { beta: 0.9 }).unwrap();
        let g = greedy.propose(&ctx, &mut stream(0, "t"));
        assert!(g.over_budget(&p).is_none());
        for x in s.persons() {
            assert!((g.committed(x) - 0.9 * p.get(x)).abs() < 1e-12);
            // the good x owns gets the largest share
            let own = GoodId(x.0);
            assert!(s.goods().all(|b| g.get(x, b) <= g.get(x, own) + 1e-15));
        }
    }

    #[test]
    fn per_person_takes_each_row_from_its_member() {
        let (s, a, p) = ctx_parts();
        let ctx = PrimitiveContext {
            society: &s,
            assignment: &a,
            power: &p,
            step: 0,
        };
        let mut combo = PerPerson::new(vec![
            Box::new(UniformSelfish::default()),
            Box::new(ZeroForce),
            Box::new(UniformSelfish::default()),
        ]);
        let f = combo.propose(&ctx, &mut stream(0, "t"));
        assert_eq!(f.committed(PersonId(1)), 0.0);
        assert!((f.committed(PersonId(0)) - 1.0).abs() < 1e-15);
        assert!(combo.name().starts_with("per-person["));
    }
}

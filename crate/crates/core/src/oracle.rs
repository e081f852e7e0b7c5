//! Exhaustive baselines for small instances. Every function refuses to run
//! past its size guard rather than approximate.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::model::{
    exclusivity_groups, Instance, IntegralAssignment, ModelError, MoneyScale, Scenario,
};
use crate::rational::Rational;

pub const OFFLINE_LIMIT: f64 = 1e7;
pub const SCENARIO_LIMIT: f64 = 1e6;
pub const STATE_LIMIT: usize = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("{what}: {count} exceeds the enumeration limit {limit}")]
    SizeGuard {
        what: &'static str,
        count: f64,
        limit: f64,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Best integral allocation of the arrived queries, by exhaustive search
/// over {discard} and every bidding advertiser for each arrived query.
pub fn offline_opt_exact(
    inst: &Instance,
    scenario: &Scenario,
) -> Result<(Rational, IntegralAssignment), OracleError> {
    scenario.check(inst)?;
    let arrived: Vec<usize> = (0..inst.num_queries())
        .filter(|&j| scenario.arrived[j])
        .collect();
    let count = ((inst.num_advertisers() + 1) as f64).powi(arrived.len() as i32);
    if count > OFFLINE_LIMIT {
        return Err(OracleError::SizeGuard {
            what: "offline assignment count",
            count,
            limit: OFFLINE_LIMIT,
        });
    }
    let scale = MoneyScale::new(inst)?;
    let mut search = OfflineSearch {
        inst,
        scale: &scale,
        arrived: &arrived,
        spend: vec![0; inst.num_advertisers()],
        usage: vec![0; inst.num_customers()],
        choice: vec![None; arrived.len()],
        best: -1,
        best_choice: Vec::new(),
    };
    search.descend(0);
    let mut x = IntegralAssignment::new();
    for (&j, c) in arrived.iter().zip(&search.best_choice) {
        if let Some(i) = c {
            x.assign(j, *i);
        }
    }
    Ok((scale.to_rational(search.best), x))
}

struct OfflineSearch<'a> {
    inst: &'a Instance,
    scale: &'a MoneyScale,
    arrived: &'a [usize],
    spend: Vec<i128>,
    usage: Vec<u32>,
    choice: Vec<Option<usize>>,
    best: i128,
    best_choice: Vec<Option<usize>>,
}

impl OfflineSearch<'_> {
    fn descend(&mut self, depth: usize) {
        if depth == self.arrived.len() {
            let value = self.scale.capped(&self.spend);
            if value > self.best {
                self.best = value;
                self.best_choice = self.choice.clone();
            }
            return;
        }
        let j = self.arrived[depth];
        let k = self.inst.queries[j].customer;
        if self.usage[k] < self.inst.customers[k].capacity {
            for &(i, bid) in &self.scale.bids[j] {
                self.usage[k] += 1;
                self.spend[i] += bid;
                self.choice[depth] = Some(i);
                self.descend(depth + 1);
                self.spend[i] -= bid;
                self.usage[k] -= 1;
            }
        }
        self.choice[depth] = None;
        self.descend(depth + 1);
    }
}

/// Every scenario with its probability, grouping by (customer, time).
pub fn enumerate_scenarios(inst: &Instance) -> Result<Vec<(Scenario, Rational)>, OracleError> {
    let groups = exclusivity_groups(inst);
    let count: f64 = groups.iter().map(|g| (g.len() + 1) as f64).product();
    if count > SCENARIO_LIMIT {
        return Err(OracleError::SizeGuard {
            what: "scenario count",
            count,
            limit: SCENARIO_LIMIT,
        });
    }
    // Per group: the residual (no arrival) outcome, then each member.
    let outcomes: Vec<Vec<(Option<usize>, Rational)>> = groups
        .iter()
        .map(|g| {
            let total: Rational = g.iter().map(|&j| &inst.queries[j].prob).sum();
            let mut v = vec![(None, Rational::one() - total)];
            v.extend(g.iter().map(|&j| (Some(j), inst.queries[j].prob.clone())));
            v.retain(|(_, p)| !p.is_zero());
            v
        })
        .collect();
    let mut out = Vec::new();
    let mut arrived = vec![false; inst.num_queries()];
    expand(&outcomes, 0, Rational::one(), &mut arrived, &mut out);
    Ok(out)
}

fn expand(
    outcomes: &[Vec<(Option<usize>, Rational)>],
    g: usize,
    prob: Rational,
    arrived: &mut [bool],
    out: &mut Vec<(Scenario, Rational)>,
) {
    if g == outcomes.len() {
        out.push((
            Scenario {
                arrived: arrived.to_vec(),
            },
            prob,
        ));
        return;
    }
    for (j, p) in &outcomes[g] {
        if let Some(j) = j {
            arrived[*j] = true;
        }
        expand(outcomes, g + 1, &prob * p, arrived, out);
        if let Some(j) = j {
            arrived[*j] = false;
        }
    }
}

/// `E[offline optimum]` over the arrival distribution, exactly.
pub fn expected_offline_opt_exact(inst: &Instance) -> Result<Rational, OracleError> {
    let mut total = Rational::zero();
    for (scenario, prob) in enumerate_scenarios(inst)? {
        let (value, _) = offline_opt_exact(inst, &scenario)?;
        total += prob * value;
    }
    Ok(total)
}

/// Value of the best online policy: groups are revealed one at a time in
/// (time, customer) order and each arrival is irrevocably assigned or
/// discarded before the next group is revealed.
pub fn online_opt_exact(inst: &Instance) -> Result<Rational, OracleError> {
    let report = crate::model::validate_instance(inst);
    if !report.is_empty() {
        return Err(ModelError::Invalid(report).into());
    }
    let scale = MoneyScale::new(inst)?;
    let groups = exclusivity_groups(inst);
    let mut solver = OnlineDp {
        inst,
        scale: &scale,
        groups: &groups,
        memo: HashMap::new(),
    };
    let capacities: Vec<u32> = inst.customers.iter().map(|c| c.capacity).collect();
    let spends = vec![0i128; inst.num_advertisers()];
    let value = solver.value(0, capacities, spends)?;
    Ok(value)
}

type StateKey = (usize, Vec<u32>, Vec<i128>);

struct OnlineDp<'a> {
    inst: &'a Instance,
    scale: &'a MoneyScale,
    groups: &'a [Vec<usize>],
    memo: HashMap<StateKey, Rational>,
}

impl OnlineDp<'_> {
    /// Expected revenue still to come; `spends` are capped at budgets.
    fn value(
        &mut self,
        g: usize,
        capacities: Vec<u32>,
        spends: Vec<i128>,
    ) -> Result<Rational, OracleError> {
        if g == self.groups.len() {
            return Ok(Rational::zero());
        }
        let key = (g, capacities, spends);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        if self.memo.len() >= STATE_LIMIT {
            return Err(OracleError::SizeGuard {
                what: "online state count",
                count: self.memo.len() as f64,
                limit: STATE_LIMIT as f64,
            });
        }
        let (_, capacities, spends) = &key;
        let group = &self.groups[g];
        let stay = self.value(g + 1, capacities.clone(), spends.clone())?;
        let mut residual = Rational::one();
        let mut total = Rational::zero();
        for &j in group {
            let q = &self.inst.queries[j];
            residual -= &q.prob;
            if q.prob.is_zero() {
                continue;
            }
            let mut best = stay.clone();
            if capacities[q.customer] > 0 {
                for &(i, bid) in &self.scale.bids[j] {
                    let capped = (spends[i] + bid).min(self.scale.budgets[i]);
                    let gain = capped - spends[i];
                    let mut caps = capacities.clone();
                    caps[q.customer] -= 1;
                    let mut next = spends.clone();
                    next[i] = capped;
                    let v = self.scale.to_rational(gain) + self.value(g + 1, caps, next)?;
                    if v > best {
                        best = v;
                    }
                }
            }
            total += &q.prob * best;
        }
        total += residual * stay;
        self.memo.insert(key, total.clone());
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Advertiser, Customer, Query};
    use crate::rational::{int, ratio};

    fn half_tight() -> Instance {
        Instance::new(
            vec![Advertiser { budget: int(10) }],
            vec![
                Query::new(0, 1, ratio(9, 10), [(0, int(1))]),
                Query::new(0, 2, ratio(1, 10), [(0, int(9))]),
            ],
            vec![Customer { capacity: 1 }],
        )
    }

    fn gap(n: i64) -> Instance {
        Instance::new(
            vec![Advertiser { budget: int(1) }],
            (0..n)
                .map(|t| Query::new(0, t, ratio(1, n), [(0, int(1))]))
                .collect(),
            vec![Customer { capacity: n as u32 }],
        )
    }

    #[test]
    fn single_query() {
        let inst = Instance::new(
            vec![Advertiser { budget: int(5) }],
            vec![Query::new(0, 0, int(1), [(0, int(3))])],
            vec![Customer { capacity: 1 }],
        );
        let (v, x) = offline_opt_exact(&inst, &Scenario::all_arrived(1)).unwrap();
        assert_eq!(v, int(3));
        assert_eq!(x.advertiser_of(0), Some(0));
    }

    #[test]
    fn half_tight_values() {
        let inst = half_tight();
        let s = Scenario {
            arrived: vec![false, true],
        };
        assert_eq!(offline_opt_exact(&inst, &s).unwrap().0, int(9));
        assert_eq!(expected_offline_opt_exact(&inst).unwrap(), ratio(171, 100));
        assert_eq!(online_opt_exact(&inst).unwrap(), ratio(99, 100));
    }

    #[test]
    fn integrality_gap_expected_offline() {
        assert_eq!(
            expected_offline_opt_exact(&gap(4)).unwrap(),
            ratio(175, 256)
        );
    }

    #[test]
    fn deterministic_arrivals_collapse_to_one_scenario() {
        let mut inst = half_tight();
        inst.queries[0].prob = int(1);
        inst.queries[1].prob = int(0);
        let scenarios = enumerate_scenarios(&inst).unwrap();
        assert_eq!(scenarios.len(), 1);
        let offline = offline_opt_exact(&inst, &scenarios[0].0).unwrap().0;
        assert_eq!(expected_offline_opt_exact(&inst).unwrap(), offline);
    }

    #[test]
    fn scenario_probabilities_sum_to_one() {
        let inst = Instance::new(
            vec![Advertiser { budget: int(1) }],
            vec![
                Query::new(0, 0, ratio(1, 3), [(0, int(1))]),
                Query::new(0, 0, ratio(1, 2), [(0, int(1))]),
                Query::new(0, 1, ratio(1, 4), [(0, int(1))]),
            ],
            vec![Customer { capacity: 1 }],
        );
        let all = enumerate_scenarios(&inst).unwrap();
        assert_eq!(all.len(), 6);
        assert_eq!(all.iter().map(|(_, p)| p).sum::<Rational>(), int(1));
        assert!(all.iter().all(|(s, _)| s.check(&inst).is_ok()));
    }

    #[test]
    fn guards_trip() {
        let inst = Instance::new(
            vec![Advertiser { budget: int(1) }; 9],
            (0..8)
                .map(|t| Query::new(0, t, int(1), (0..9).map(|i| (i, int(1)))))
                .collect(),
            vec![Customer { capacity: 8 }],
        );
        assert!(matches!(
            offline_opt_exact(&inst, &Scenario::all_arrived(8)),
            Err(OracleError::SizeGuard { .. })
        ));
        let many = gap(21);
        assert!(matches!(
            enumerate_scenarios(&many),
            Err(OracleError::SizeGuard { .. })
        ));
    }

    #[test]
    fn online_is_dominated_by_offline() {
        let inst = Instance::new(
            vec![Advertiser { budget: int(2) }, Advertiser { budget: int(3) }],
            vec![
                Query::new(0, 0, ratio(1, 2), [(0, int(2)), (1, int(1))]),
                Query::new(0, 1, ratio(2, 3), [(1, int(3))]),
                Query::new(1, 1, ratio(1, 4), [(0, int(1)), (1, int(2))]),
            ],
            vec![Customer { capacity: 1 }, Customer { capacity: 1 }],
        );
        let online = online_opt_exact(&inst).unwrap();
        let offline = expected_offline_opt_exact(&inst).unwrap();
        assert!(online <= offline);
        assert!(online > int(0));
    }
}

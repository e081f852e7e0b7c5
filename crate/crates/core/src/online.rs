//! Online allocators guided by a solution of the expectation LP.
//!
//! When query `j` arrives, advertiser `i` is drawn with probability
//! `x*_ij / p_j`. The budget-only allocator hands the query over directly;
//! the capacity-aware allocators first ask the customer's dynamic program
//! whether spending one of the remaining slots on this bid beats keeping
//! it. Budgets are never checked at allocation time: spend beyond a budget
//! simply earns nothing when revenue is computed.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::knapsack::{
    decide_on, fill_table, Decision, KnapsackError, KnapsackPolicy, DEFAULT_CAPACITY_LIMIT,
};
use crate::lp::{LpError, LpMode, LpStatus, Variant};
use crate::model::{
    capped_revenue, exclusivity_groups, FractionalAssignment, Instance, IntegralAssignment,
    ModelError, Scenario,
};
use crate::rational::{format_rational, Rational};
use crate::sampling::{Categorical, SamplingError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OnlinePolicy {
    /// Budget-only allocator: draw and allocate.
    Ipb,
    /// Capacity-only allocator: draw, then the per-customer DP test.
    Ipc,
    /// Same mechanics as `Ipc`, fed a solution with budget rows too.
    Ipbc,
}

impl OnlinePolicy {
    /// LP relaxation whose expectation form feeds this allocator.
    pub fn variant(self) -> Variant {
        match self {
            OnlinePolicy::Ipb => Variant::B,
            OnlinePolicy::Ipc => Variant::C,
            OnlinePolicy::Ipbc => Variant::BC,
        }
    }

    /// Whether revenue is capped at budgets. The capacity-only setting has
    /// no budget rows, so its revenue is the raw spend.
    pub fn caps_budgets(self) -> bool {
        !matches!(self, OnlinePolicy::Ipc)
    }

    fn uses_dp(self) -> bool {
        !matches!(self, OnlinePolicy::Ipb)
    }
}

/// One exclusivity group reaching the allocator, in time order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamEvent {
    pub time: i64,
    pub group: usize,
    pub arrived_query: Option<usize>,
}

/// One event per exclusivity group, in group order.
pub fn stream_from_scenario(inst: &Instance, scenario: &Scenario) -> Vec<StreamEvent> {
    exclusivity_groups(inst)
        .into_iter()
        .enumerate()
        .map(|(g, members)| StreamEvent {
            time: inst.queries[members[0]].time,
            group: g,
            arrived_query: members.iter().copied().find(|&j| scenario.arrived[j]),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventOutcome {
    Allocated {
        query: usize,
        advertiser: usize,
    },
    /// `drawn` is the advertiser drawn before the capacity test, if any.
    Discarded {
        query: usize,
        drawn: Option<usize>,
    },
    NoArrival,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationLog {
    pub outcomes: Vec<EventOutcome>,
    /// Uncapped spend per advertiser.
    pub spend: Vec<Rational>,
    /// Ads shown per customer.
    pub usage: Vec<u32>,
    pub assignment: IntegralAssignment,
}

impl AllocationLog {
    /// `sum_i min(spend_i, b_i)`.
    pub fn revenue(&self, inst: &Instance) -> Rational {
        capped_revenue(inst, &self.spend)
    }

    /// Revenue as scored under `policy`: capped unless the policy ignores budgets.
    pub fn revenue_under(&self, inst: &Instance, policy: OnlinePolicy) -> Rational {
        if policy.caps_budgets() {
            self.revenue(inst)
        } else {
            self.spend.iter().sum()
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OnlineError {
    #[error("fractional solution is infeasible for the expectation LP: {0}")]
    InfeasibleSolution(String),
    #[error("stream event {index} is inconsistent with the instance: {reason}")]
    BadStream { index: usize, reason: String },
    #[error(transparent)]
    Knapsack(#[from] KnapsackError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

/// Solves the expectation form of the LP the policy needs.
pub fn expectation_solution(
    inst: &Instance,
    policy: OnlinePolicy,
) -> Result<(FractionalAssignment, Rational), OnlineError> {
    let lp = crate::lp::build_lp(inst, policy.variant(), LpMode::Expectation)?;
    let sol = crate::lp::solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(OnlineError::InfeasibleSolution(
            "expectation LP is infeasible".into(),
        ));
    }
    Ok((sol.assignment(&lp), sol.objective_value))
}

/// Checks `x*_ij <= p_j` and `sum_i x*_ij <= p_j`, and that only bid pairs
/// carry mass.
pub fn check_solution(inst: &Instance, x_star: &FractionalAssignment) -> Result<(), OnlineError> {
    let mut per_query: BTreeMap<usize, Rational> = BTreeMap::new();
    for (i, j, v) in x_star.iter() {
        let query = inst
            .queries
            .get(j)
            .ok_or_else(|| OnlineError::InfeasibleSolution(format!("query {j} does not exist")))?;
        if query.bid(i).is_none() {
            return Err(OnlineError::InfeasibleSolution(format!(
                "mass on ({i}, {j}) without a bid"
            )));
        }
        if v.is_negative() || *v > query.prob {
            return Err(OnlineError::InfeasibleSolution(format!(
                "x*[{i},{j}] = {} exceeds p_{j} = {}",
                format_rational(v),
                format_rational(&query.prob)
            )));
        }
        *per_query.entry(j).or_insert_with(Rational::zero) += v;
    }
    for (j, total) in per_query {
        if total > inst.queries[j].prob {
            return Err(OnlineError::InfeasibleSolution(format!(
                "sum_i x*[i,{j}] = {} exceeds p_{j} = {}",
                format_rational(&total),
                format_rational(&inst.queries[j].prob)
            )));
        }
    }
    Ok(())
}

/// Per-customer value tables over (advertiser, query) items, plus the
/// precomputed take/skip answer for every bid and remaining capacity.
#[derive(Debug, Clone)]
pub struct DpTables {
    /// Indexed by customer; partitions are that customer's query times.
    pub customers: Vec<KnapsackPolicy>,
    /// Per query, per advertiser with mass: `take[r]` for `r` in `0..=c_k`.
    take: Vec<BTreeMap<usize, Vec<bool>>>,
}

impl DpTables {
    pub fn policy(&self, customer: usize) -> &KnapsackPolicy {
        &self.customers[customer]
    }

    /// Whether advertiser `i` drawn for query `j` should be allocated when
    /// its customer has `remaining` slots.
    pub fn accepts(&self, advertiser: usize, query: usize, remaining: u32) -> bool {
        self.take[query]
            .get(&advertiser)
            .and_then(|row| row.get(remaining as usize).copied())
            .unwrap_or(false)
    }
}

pub fn build_dp_tables(
    inst: &Instance,
    x_star: &FractionalAssignment,
) -> Result<DpTables, OnlineError> {
    check_solution(inst, x_star)?;
    let mut customers = Vec::with_capacity(inst.num_customers());
    let mut take: Vec<BTreeMap<usize, Vec<bool>>> = vec![BTreeMap::new(); inst.num_queries()];
    let per_customer = inst.customer_queries();
    for (k, queries) in per_customer.iter().enumerate() {
        let capacity = inst.customers[k].capacity;
        if capacity > DEFAULT_CAPACITY_LIMIT {
            return Err(KnapsackError::CapacityTooLarge {
                capacity,
                limit: DEFAULT_CAPACITY_LIMIT,
            }
            .into());
        }
        let mut by_time: BTreeMap<i64, Vec<(Rational, Rational)>> = BTreeMap::new();
        for &j in queries {
            let entry = by_time.entry(inst.queries[j].time).or_default();
            for (&i, bid) in &inst.queries[j].bids {
                let mass = x_star.get(i, j);
                if !mass.is_zero() {
                    entry.push((mass, bid.clone()));
                }
            }
        }
        let (partitions, groups): (Vec<i64>, Vec<_>) = by_time.into_iter().unzip();
        let table = fill_table(&groups, capacity as usize);
        let policy = KnapsackPolicy { table, partitions };
        for &j in queries {
            let t = policy
                .partition_index(inst.queries[j].time)
                .expect("every query time is a partition");
            for (&i, bid) in &inst.queries[j].bids {
                if x_star.get(i, j).is_zero() {
                    continue;
                }
                let row = (0..=capacity as usize)
                    .map(|r| decide_on(&policy.table, t, r, bid) == Decision::Take)
                    .collect();
                take[j].insert(i, row);
            }
        }
        customers.push(policy);
    }
    Ok(DpTables { customers, take })
}

#[derive(Debug, Clone)]
struct QueryDraw {
    advertisers: Vec<usize>,
    dist: Categorical,
}

/// A prepared allocator: per-query draw distributions and, for the
/// capacity-aware policies, the DP decision tables.
#[derive(Debug, Clone)]
pub struct OnlineAllocator {
    policy: OnlinePolicy,
    draws: Vec<Option<QueryDraw>>,
    dp: Option<DpTables>,
    customer_of: Vec<usize>,
    capacity: Vec<u32>,
}

/// Result of one arrival, before any bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Allocate(usize),
    Discard(Option<usize>),
}

impl OnlineAllocator {
    pub fn new(
        inst: &Instance,
        policy: OnlinePolicy,
        x_star: &FractionalAssignment,
    ) -> Result<Self, OnlineError> {
        check_solution(inst, x_star)?;
        let dp = if policy.uses_dp() {
            Some(build_dp_tables(inst, x_star)?)
        } else {
            None
        };
        let mut draws = Vec::with_capacity(inst.num_queries());
        for (j, q) in inst.queries.iter().enumerate() {
            let mut advertisers = Vec::new();
            let mut weights = Vec::new();
            for &i in q.bids.keys() {
                let mass = x_star.get(i, j);
                if !mass.is_zero() {
                    advertisers.push(i);
                    weights.push(mass / &q.prob);
                }
            }
            draws.push(if advertisers.is_empty() {
                None
            } else {
                Some(QueryDraw {
                    advertisers,
                    dist: Categorical::new(&weights)?,
                })
            });
        }
        Ok(OnlineAllocator {
            policy,
            draws,
            dp,
            customer_of: inst.queries.iter().map(|q| q.customer).collect(),
            capacity: inst.customers.iter().map(|c| c.capacity).collect(),
        })
    }

    pub fn policy(&self) -> OnlinePolicy {
        self.policy
    }

    pub fn dp(&self) -> Option<&DpTables> {
        self.dp.as_ref()
    }

    /// Handles an arrival of `query` when its customer has shown `used` ads.
    /// Consumes randomness only for the advertiser draw.
    pub fn step<R: RngCore + ?Sized>(&self, query: usize, used: u32, rng: &mut R) -> Step {
        let drawn = self.draws[query]
            .as_ref()
            .and_then(|d| d.dist.sample(rng).map(|pos| d.advertisers[pos]));
        let Some(i) = drawn else {
            return Step::Discard(None);
        };
        let remaining = self.capacity[self.customer_of[query]].saturating_sub(used);
        let accept = match &self.dp {
            Some(dp) => dp.accepts(i, query, remaining),
            None => remaining > 0,
        };
        if accept {
            Step::Allocate(i)
        } else {
            Step::Discard(Some(i))
        }
    }

    pub fn run<R: RngCore + ?Sized>(
        &self,
        inst: &Instance,
        stream: &[StreamEvent],
        rng: &mut R,
    ) -> Result<AllocationLog, OnlineError> {
        let mut log = AllocationLog {
            outcomes: Vec::with_capacity(stream.len()),
            spend: vec![Rational::zero(); inst.num_advertisers()],
            usage: vec![0; inst.num_customers()],
            assignment: IntegralAssignment::new(),
        };
        let mut last_time: Option<i64> = None;
        for (index, event) in stream.iter().enumerate() {
            if last_time.is_some_and(|t| event.time < t) {
                return Err(OnlineError::BadStream {
                    index,
                    reason: "events are not in time order".into(),
                });
            }
            last_time = Some(event.time);
            let Some(j) = event.arrived_query else {
                log.outcomes.push(EventOutcome::NoArrival);
                continue;
            };
            let q = inst.queries.get(j).ok_or_else(|| OnlineError::BadStream {
                index,
                reason: format!("query {j} does not exist"),
            })?;
            if q.time != event.time {
                return Err(OnlineError::BadStream {
                    index,
                    reason: format!("query {j} has time {} not {}", q.time, event.time),
                });
            }
            if log.assignment.advertiser_of(j).is_some() {
                return Err(OnlineError::BadStream {
                    index,
                    reason: format!("query {j} arrives twice"),
                });
            }
            match self.step(j, log.usage[q.customer], rng) {
                Step::Allocate(i) => {
                    log.usage[q.customer] += 1;
                    log.spend[i] += q.bid(i).expect("draws only cover bids");
                    log.assignment.assign(j, i);
                    log.outcomes.push(EventOutcome::Allocated {
                        query: j,
                        advertiser: i,
                    });
                }
                Step::Discard(drawn) => log
                    .outcomes
                    .push(EventOutcome::Discarded { query: j, drawn }),
            }
        }
        Ok(log)
    }
}

pub fn allocate_ipb<R: RngCore + ?Sized>(
    inst: &Instance,
    x_star: &FractionalAssignment,
    stream: &[StreamEvent],
    rng: &mut R,
) -> Result<AllocationLog, OnlineError> {
    OnlineAllocator::new(inst, OnlinePolicy::Ipb, x_star)?.run(inst, stream, rng)
}

pub fn allocate_ipc<R: RngCore + ?Sized>(
    inst: &Instance,
    x_star: &FractionalAssignment,
    stream: &[StreamEvent],
    rng: &mut R,
) -> Result<AllocationLog, OnlineError> {
    OnlineAllocator::new(inst, OnlinePolicy::Ipc, x_star)?.run(inst, stream, rng)
}

pub fn allocate_ipbc<R: RngCore + ?Sized>(
    inst: &Instance,
    x_star: &FractionalAssignment,
    stream: &[StreamEvent],
    rng: &mut R,
) -> Result<AllocationLog, OnlineError> {
    OnlineAllocator::new(inst, OnlinePolicy::Ipbc, x_star)?.run(inst, stream, rng)
}

/// Lower bound `(1 - e^{-mu/C}) C` on `E[min(sum X_i, C)]` for independent
/// nonnegative `X_i <= C` with total mean `mu`.
pub fn min_sum_lower_bound(capacity: f64, mu: f64) -> f64 {
    (1.0 - (-mu / capacity).exp()) * capacity
}

/// Each entry of `samples` is one joint realization of the variables.
/// True iff the sample mean of `min(sum, C)` clears the bound minus three
/// standard errors.
pub fn min_sum_bound_check(samples: &[Vec<f64>], capacity: f64, mu: f64) -> bool {
    let values: Vec<f64> = samples
        .iter()
        .map(|xs| xs.iter().sum::<f64>().min(capacity))
        .collect();
    let n = values.len() as f64;
    if values.is_empty() {
        return false;
    }
    let mean = values.iter().sum::<f64>() / n;
    let se = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    mean >= min_sum_lower_bound(capacity, mu) - 3.0 * se
}

/// Exact `E[min(sum X_i, C)]` for independent two-point variables taking
/// `value_i` with probability `p_i` and 0 otherwise (at most 20 variables).
pub fn min_sum_exact(variables: &[(Rational, Rational)], capacity: &Rational) -> Rational {
    assert!(
        variables.len() <= 20,
        "exact enumeration limited to 20 variables"
    );
    let mut total = Rational::zero();
    for mask in 0u32..(1u32 << variables.len()) {
        let mut prob = Rational::one();
        let mut sum = Rational::zero();
        for (b, (value, p)) in variables.iter().enumerate() {
            if mask >> b & 1 == 1 {
                prob *= p;
                sum += value;
            } else {
                prob *= Rational::one() - p;
            }
        }
        total += prob
            * if sum < *capacity {
                sum
            } else {
                capacity.clone()
            };
    }
    total
}

/// Convenience: expectation LP for the policy plus a prepared allocator.
pub fn prepare(
    inst: &Instance,
    policy: OnlinePolicy,
) -> Result<(OnlineAllocator, Rational), OnlineError> {
    let (x_star, objective) = expectation_solution(inst, policy)?;
    Ok((OnlineAllocator::new(inst, policy, &x_star)?, objective))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knapsack::{knapsack_dp, KnapsackInstance, KnapsackItem};
    use crate::model::{Advertiser, Customer, Query};
    use crate::rational::{int, ratio};
    use crate::sampling::trial_rng;

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

    fn saturating(inst: &Instance) -> FractionalAssignment {
        let mut x = FractionalAssignment::new();
        for (j, q) in inst.queries.iter().enumerate() {
            if let Some(&i) = q.bids.keys().next() {
                x.set(i, j, q.prob.clone());
            }
        }
        x
    }

    #[test]
    fn certain_allocation_when_mass_equals_prob() {
        let inst = half_tight();
        let x = saturating(&inst);
        let stream = stream_from_scenario(
            &inst,
            &Scenario {
                arrived: vec![true, false],
            },
        );
        for seed in 0..20 {
            let log = allocate_ipb(&inst, &x, &stream, &mut trial_rng(seed, 0)).unwrap();
            assert_eq!(log.assignment.advertiser_of(0), Some(0));
            assert_eq!(log.outcomes[1], EventOutcome::NoArrival);
        }
    }

    #[test]
    fn zero_mass_discards_everything() {
        let inst = half_tight();
        let x = FractionalAssignment::new();
        let stream = stream_from_scenario(&inst, &Scenario::all_arrived(2));
        let log = allocate_ipb(&inst, &x, &stream, &mut trial_rng(1, 0)).unwrap();
        assert!(log.assignment.is_empty());
        assert_eq!(log.revenue(&inst), int(0));
    }

    #[test]
    fn only_budget_aware_policies_cap_revenue() {
        let inst = Instance::new(
            vec![Advertiser { budget: int(1) }],
            vec![
                Query::new(0, 1, int(1), [(0, int(1))]),
                Query::new(0, 2, int(1), [(0, int(1))]),
            ],
            vec![Customer { capacity: 2 }],
        );
        let stream = stream_from_scenario(&inst, &Scenario::all_arrived(2));
        let log = allocate_ipb(&inst, &saturating(&inst), &stream, &mut trial_rng(0, 0)).unwrap();
        assert_eq!(log.revenue_under(&inst, OnlinePolicy::Ipb), int(1));
        assert_eq!(log.revenue_under(&inst, OnlinePolicy::Ipbc), int(1));
        assert_eq!(log.revenue_under(&inst, OnlinePolicy::Ipc), int(2));
    }

    #[test]
    fn rejects_mass_above_probability() {
        let inst = half_tight();
        let mut x = FractionalAssignment::new();
        x.set(0, 1, ratio(1, 5));
        assert!(matches!(
            allocate_ipb(&inst, &x, &[], &mut trial_rng(0, 0)),
            Err(OnlineError::InfeasibleSolution(_))
        ));
    }

    #[test]
    fn tables_reduce_to_knapsack() {
        let inst = half_tight();
        let dp = build_dp_tables(&inst, &saturating(&inst)).unwrap();
        let ki = KnapsackInstance {
            capacity: 1,
            items: vec![
                KnapsackItem {
                    value: int(1),
                    prob: ratio(9, 10),
                    partition: 1,
                },
                KnapsackItem {
                    value: int(9),
                    prob: ratio(1, 10),
                    partition: 2,
                },
            ],
        };
        assert_eq!(dp.policy(0), &knapsack_dp(&ki).unwrap());
        assert!(dp.accepts(0, 0, 1));
        assert!(!dp.accepts(0, 0, 0));
    }

    #[test]
    fn slack_capacity_and_zero_solution_tables() {
        let mut inst = half_tight();
        inst.customers[0].capacity = 2;
        let x = saturating(&inst);
        let dp = build_dp_tables(&inst, &x).unwrap();
        let total: Rational = x.iter().map(|(i, j, v)| v * inst.bid(i, j).unwrap()).sum();
        assert_eq!(dp.policy(0).expected_value(), &total);

        let zero = build_dp_tables(&inst, &FractionalAssignment::new()).unwrap();
        assert!(zero.policy(0).table.iter().flatten().all(|v| v.is_zero()));
    }

    #[test]
    fn ipc_follows_the_dp_on_the_tight_instance() {
        let inst = half_tight();
        let x = saturating(&inst);
        let alloc = OnlineAllocator::new(&inst, OnlinePolicy::Ipc, &x).unwrap();
        let both = stream_from_scenario(
            &inst,
            &Scenario {
                arrived: vec![true, true],
            },
        );
        let log = alloc.run(&inst, &both, &mut trial_rng(3, 0)).unwrap();
        assert_eq!(log.assignment.advertiser_of(0), Some(0));
        assert_eq!(
            log.outcomes[1],
            EventOutcome::Discarded {
                query: 1,
                drawn: Some(0)
            }
        );
        assert_eq!(log.usage, vec![1]);
    }

    #[test]
    fn min_sum_examples() {
        assert!(min_sum_bound_check(&vec![vec![1.0]; 10], 1.0, 1.0));
        let vars = [(int(1), ratio(1, 2)), (int(1), ratio(1, 2))];
        assert_eq!(min_sum_exact(&vars, &int(1)), ratio(3, 4));
        assert!(0.75 >= min_sum_lower_bound(1.0, 1.0));
        let samples = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ];
        assert!(min_sum_bound_check(&samples, 1.0, 1.0));
    }

    proptest::proptest! {
        #[test]
        fn capacity_never_exceeded(seed in 0u64..500, cap in 1u32..3, policy in 0usize..3) {
            let policy = [OnlinePolicy::Ipb, OnlinePolicy::Ipc, OnlinePolicy::Ipbc][policy];
            let inst = Instance::new(
                vec![Advertiser { budget: int(3) }, Advertiser { budget: int(2) }],
                (0..5).map(|t| Query::new(0, t, ratio(3, 4), [(0, int(1)), (1, ratio(3, 2))])).collect(),
                vec![Customer { capacity: cap }],
            );
            let (alloc, _) = prepare(&inst, policy).unwrap();
            let mut rng = trial_rng(seed, 0);
            let scenario = Scenario { arrived: (0..5).map(|t| (seed >> t) & 1 == 1).collect() };
            let log = alloc.run(&inst, &stream_from_scenario(&inst, &scenario), &mut rng).unwrap();
            proptest::prop_assert!(log.usage[0] <= cap);
            proptest::prop_assert!(log.assignment.check(&inst, Some(&scenario)).is_ok());
        }
    }
}

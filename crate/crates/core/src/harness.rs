//! Scenario sampling, named instance generators, and seeded Monte Carlo
//! evaluation of the allocators against exact references.
//!
//! Per-trial revenues are exact; floats appear only in the summaries.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{build_lp, solve_lp, LpError, LpMode, LpStatus, Variant};
use crate::model::{
    exclusivity_groups, validate_instance, Advertiser, Customer, Instance, IntegralAssignment,
    ModelError, MoneyScale, Query, Scenario,
};
use crate::offline_rounding::{approx_ratio_bound, OfflineRounder, RoundingError, RoundingOptions};
use crate::online::{prepare, OnlineAllocator, OnlineError, OnlinePolicy, Step};
use crate::oracle::{expected_offline_opt_exact, online_opt_exact, OracleError};
use crate::rational::{format_rational, to_f64, Rational};
use crate::sampling::{trial_rng, Categorical};

pub const MIN_TRIALS: u64 = 100;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("at least {MIN_TRIALS} trials are required, got {0}")]
    TooFewTrials(u64),
    #[error("invalid generator parameter: {0}")]
    Parameter(String),
    #[error("realized program for trial {0} is infeasible")]
    InfeasibleRealization(u64),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Online(#[from] OnlineError),
    #[error(transparent)]
    Rounding(#[from] RoundingError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Draws arrivals: one categorical outcome per exclusivity group.
#[derive(Debug, Clone)]
pub struct ScenarioSampler {
    groups: Vec<(Vec<usize>, Categorical)>,
    n: usize,
}

impl ScenarioSampler {
    pub fn new(inst: &Instance) -> Result<Self, ModelError> {
        let report = validate_instance(inst);
        if !report.is_empty() {
            return Err(ModelError::Invalid(report));
        }
        let groups = exclusivity_groups(inst)
            .into_iter()
            .map(|members| {
                let probs: Vec<Rational> = members
                    .iter()
                    .map(|&j| inst.queries[j].prob.clone())
                    .collect();
                let dist = Categorical::new(&probs)
                    .map_err(|e| ModelError::constraint("arrival probabilities", e.to_string()))?;
                Ok((members, dist))
            })
            .collect::<Result<_, ModelError>>()?;
        Ok(ScenarioSampler {
            groups,
            n: inst.num_queries(),
        })
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Scenario {
        let mut arrived = vec![false; self.n];
        for (members, dist) in &self.groups {
            if let Some(k) = dist.sample(rng) {
                arrived[members[k]] = true;
            }
        }
        Scenario { arrived }
    }
}

pub fn sample_scenario<R: RngCore + ?Sized>(
    inst: &Instance,
    rng: &mut R,
) -> Result<Scenario, ModelError> {
    Ok(ScenarioSampler::new(inst)?.sample(rng))
}

/// Pipelines the Monte Carlo driver can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McPolicy {
    Ipb,
    Ipc,
    Ipbc,
    OfflineRound,
}

impl McPolicy {
    pub fn online(self) -> Option<OnlinePolicy> {
        match self {
            McPolicy::Ipb => Some(OnlinePolicy::Ipb),
            McPolicy::Ipc => Some(OnlinePolicy::Ipc),
            McPolicy::Ipbc => Some(OnlinePolicy::Ipbc),
            McPolicy::OfflineRound => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            McPolicy::Ipb => "ipb",
            McPolicy::Ipc => "ipc",
            McPolicy::Ipbc => "ipbc",
            McPolicy::OfflineRound => "offline_round",
        }
    }
}

impl fmt::Display for McPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for McPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "ipb" => Ok(McPolicy::Ipb),
            "ipc" => Ok(McPolicy::Ipc),
            "ipbc" => Ok(McPolicy::Ipbc),
            "offline_round" | "offline" => Ok(McPolicy::OfflineRound),
            other => Err(format!(
                "unknown policy '{other}' (expected ipb, ipc, ipbc or offline_round)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation over the square root of the count.
    pub std_error: f64,
}

/// Mean and standard error, summed in slice order.
pub fn summarize(values: &[f64]) -> Summary {
    let count = values.len();
    if count == 0 {
        return Summary {
            count,
            mean: f64::NAN,
            std_error: f64::NAN,
        };
    }
    let mean = values.iter().sum::<f64>() / count as f64;
    let std_error = if count < 2 {
        f64::NAN
    } else {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (count - 1) as f64).sqrt() / (count as f64).sqrt()
    };
    Summary {
        count,
        mean,
        std_error,
    }
}

/// `|observed - expected| <= 3 * std_error`.
pub fn within_three_sigma(observed: f64, expected: f64, std_error: f64) -> bool {
    (observed - expected).abs() <= 3.0 * std_error
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McOptions {
    pub trials: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Also compute the exact oracle values when the size guards allow.
    pub with_oracle: bool,
    /// Keep per-trial records in the report.
    pub keep_trials: bool,
}

impl McOptions {
    pub fn new(trials: u64, seed: u64) -> Self {
        McOptions {
            trials,
            seed,
            jobs: None,
            with_oracle: false,
            keep_trials: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub revenue: f64,
    /// Realized program objective (offline rounding only).
    pub realized_lp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub policy: McPolicy,
    pub trials: u64,
    pub seed: u64,
    pub mean_revenue: f64,
    pub std_error: f64,
    /// Exact expectation-program objective (online policies).
    pub lp_objective: Option<String>,
    /// Mean realized-program objective (offline rounding).
    pub mean_realized_lp: Option<f64>,
    /// `mean_revenue` over the LP reference in use.
    pub ratio_to_lp: f64,
    /// Exact expected offline optimum, when small enough to enumerate.
    pub expected_offline_opt: Option<String>,
    /// Exact optimal online value, when small enough to enumerate.
    pub online_opt: Option<String>,
    pub ratio_to_offline_opt: Option<f64>,
    pub ratio_to_online_opt: Option<f64>,
    /// Guaranteed rounding ratio (offline rounding only).
    pub approx_bound: Option<String>,
    /// Mean and standard error of `revenue - approx_bound * realized_lp`.
    pub bound_margin: Option<f64>,
    pub bound_margin_std_error: Option<f64>,
    /// Rounded allocations breaking a capacity or assignment row.
    pub violations: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_trial: Vec<TrialRecord>,
}

fn opt_str(v: &Option<String>) -> String {
    v.clone().unwrap_or_default()
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl McReport {
    pub const CSV_HEADER: &'static str = "policy,trials,seed,mean_revenue,std_error,lp_objective,\
mean_realized_lp,ratio_to_lp,expected_offline_opt,online_opt,ratio_to_offline_opt,\
ratio_to_online_opt,approx_bound,bound_margin,bound_margin_std_error,violations";

    pub fn to_csv_row(&self) -> String {
        [
            self.policy.to_string(),
            self.trials.to_string(),
            self.seed.to_string(),
            self.mean_revenue.to_string(),
            self.std_error.to_string(),
            opt_str(&self.lp_objective),
            opt_f64(self.mean_realized_lp),
            self.ratio_to_lp.to_string(),
            opt_str(&self.expected_offline_opt),
            opt_str(&self.online_opt),
            opt_f64(self.ratio_to_offline_opt),
            opt_f64(self.ratio_to_online_opt),
            opt_str(&self.approx_bound),
            opt_f64(self.bound_margin),
            opt_f64(self.bound_margin_std_error),
            self.violations.to_string(),
        ]
        .join(",")
    }

    pub fn trials_csv(&self) -> String {
        let mut out = String::from("trial,revenue,realized_lp\n");
        for t in &self.per_trial {
            out.push_str(&format!(
                "{},{},{}\n",
                t.trial,
                t.revenue,
                opt_f64(t.realized_lp)
            ));
        }
        out
    }
}

struct TrialOutcome {
    revenue: f64,
    realized_lp: Option<f64>,
    margin: Option<f64>,
    violation: bool,
}

fn with_pool<T: Send>(
    jobs: Option<usize>,
    work: impl FnOnce() -> T + Send,
) -> Result<T, HarnessError> {
    match jobs {
        None => Ok(work()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| HarnessError::Pool(e.to_string()))?;
            Ok(pool.install(work))
        }
    }
}

/// Integral money view of one online run, using the allocator's fast path.
fn online_trial(
    inst: &Instance,
    allocator: &OnlineAllocator,
    groups: &[Vec<usize>],
    money: &MoneyScale,
    sampler: &ScenarioSampler,
    rng: &mut ChaCha8Rng,
) -> i128 {
    let scenario = sampler.sample(rng);
    let mut usage = vec![0u32; inst.num_customers()];
    let mut spend = vec![0i128; inst.num_advertisers()];
    for members in groups {
        let Some(&j) = members.iter().find(|&&j| scenario.arrived[j]) else {
            continue;
        };
        let k = inst.queries[j].customer;
        if let Step::Allocate(i) = allocator.step(j, usage[k], rng) {
            usage[k] += 1;
            spend[i] += money.bid(i, j);
        }
    }
    if allocator.policy().caps_budgets() {
        money.capped(&spend)
    } else {
        spend.iter().sum()
    }
}

type RealizedCache = HashMap<Vec<bool>, Arc<(OfflineRounder, Rational)>>;

/// Realized program for `scenario`, solved and prepared for rounding.
pub fn prepare_realized(
    inst: &Instance,
    scenario: &Scenario,
) -> Result<Option<(OfflineRounder, Rational)>, HarnessError> {
    let lp = build_lp(inst, Variant::BC, LpMode::Realized(scenario))?;
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Ok(None);
    }
    let options = RoundingOptions {
        record_trace: false,
        check_rows: true,
        max_steps: None,
    };
    let rounder = OfflineRounder::with_options(inst, scenario, &sol.assignment(&lp), options)?;
    Ok(Some((rounder, sol.objective_value)))
}

fn offline_trial(
    inst: &Instance,
    money: &MoneyScale,
    sampler: &ScenarioSampler,
    bound: &Rational,
    cache: &mut RealizedCache,
    trial: u64,
    rng: &mut ChaCha8Rng,
) -> Result<TrialOutcome, HarnessError> {
    let scenario = sampler.sample(rng);
    let entry = match cache.get(&scenario.arrived) {
        Some(e) => e.clone(),
        None => {
            let prepared = prepare_realized(inst, &scenario)?
                .ok_or(HarnessError::InfeasibleRealization(trial))?;
            let e = Arc::new(prepared);
            cache.insert(scenario.arrived.clone(), e.clone());
            e
        }
    };
    let (rounder, lp_value) = &*entry;
    let (assignment, _) = rounder.round(rng)?;
    let violation = assignment.check(inst, Some(&scenario)).is_err();
    let revenue = money.to_rational(money.revenue(&assignment));
    let margin = &revenue - bound * lp_value;
    Ok(TrialOutcome {
        revenue: to_f64(&revenue),
        realized_lp: Some(to_f64(lp_value)),
        margin: Some(to_f64(&margin)),
        violation,
    })
}

fn oracle_values(inst: &Instance) -> (Option<Rational>, Option<Rational>) {
    (
        expected_offline_opt_exact(inst).ok(),
        online_opt_exact(inst).ok(),
    )
}

/// Runs `options.trials` independent trials of the chosen pipeline. Trial
/// `t` uses `trial_rng(seed, t)`, so the report does not depend on `jobs`.
pub fn monte_carlo(
    inst: &Instance,
    policy: McPolicy,
    options: McOptions,
) -> Result<McReport, HarnessError> {
    if options.trials < MIN_TRIALS {
        return Err(HarnessError::TooFewTrials(options.trials));
    }
    let sampler = ScenarioSampler::new(inst)?;
    let money = MoneyScale::new(inst)?;
    let seed = options.seed;

    let (outcomes, lp_objective, approx_bound) = match policy.online() {
        Some(online) => {
            let (allocator, objective) = prepare(inst, online)?;
            let groups = exclusivity_groups(inst);
            let outcomes: Vec<TrialOutcome> = with_pool(options.jobs, || {
                (0..options.trials)
                    .into_par_iter()
                    .map(|t| {
                        let mut rng = trial_rng(seed, t);
                        let scaled =
                            online_trial(inst, &allocator, &groups, &money, &sampler, &mut rng);
                        TrialOutcome {
                            revenue: money.to_f64(scaled),
                            realized_lp: None,
                            margin: None,
                            violation: false,
                        }
                    })
                    .collect()
            })?;
            (outcomes, Some(objective), None)
        }
        None => {
            let bound = approx_ratio_bound(inst)?;
            let results: Vec<Result<TrialOutcome, HarnessError>> = with_pool(options.jobs, || {
                (0..options.trials)
                    .into_par_iter()
                    .map_init(RealizedCache::new, |cache, t| {
                        let mut rng = trial_rng(seed, t);
                        offline_trial(inst, &money, &sampler, &bound, cache, t, &mut rng)
                    })
                    .collect()
            })?;
            let outcomes = results.into_iter().collect::<Result<Vec<_>, _>>()?;
            (outcomes, None, Some(bound))
        }
    };

    let revenues: Vec<f64> = outcomes.iter().map(|o| o.revenue).collect();
    let rev = summarize(&revenues);
    let realized: Vec<f64> = outcomes.iter().filter_map(|o| o.realized_lp).collect();
    let margins: Vec<f64> = outcomes.iter().filter_map(|o| o.margin).collect();
    let mean_realized_lp = (!realized.is_empty()).then(|| summarize(&realized).mean);
    let margin = (!margins.is_empty()).then(|| summarize(&margins));
    let reference = match (&lp_objective, mean_realized_lp) {
        (Some(obj), _) => to_f64(obj),
        (None, Some(m)) => m,
        _ => f64::NAN,
    };
    let (offline_opt, online_opt) = if options.with_oracle {
        oracle_values(inst)
    } else {
        (None, None)
    };
    let ratio = |v: &Option<Rational>| {
        v.as_ref()
            .filter(|x| !x.is_zero())
            .map(|x| rev.mean / to_f64(x))
    };

    Ok(McReport {
        policy,
        trials: options.trials,
        seed,
        mean_revenue: rev.mean,
        std_error: rev.std_error,
        lp_objective: lp_objective.as_ref().map(format_rational),
        mean_realized_lp,
        ratio_to_lp: rev.mean / reference,
        ratio_to_offline_opt: ratio(&offline_opt),
        ratio_to_online_opt: ratio(&online_opt),
        expected_offline_opt: offline_opt.as_ref().map(format_rational),
        online_opt: online_opt.as_ref().map(format_rational),
        approx_bound: approx_bound.as_ref().map(format_rational),
        bound_margin: margin.map(|s| s.mean),
        bound_margin_std_error: margin.map(|s| s.std_error),
        violations: outcomes.iter().filter(|o| o.violation).count() as u64,
        per_trial: if options.keep_trials {
            outcomes
                .iter()
                .enumerate()
                .map(|(t, o)| TrialRecord {
                    trial: t as u64,
                    revenue: o.revenue,
                    realized_lp: o.realized_lp,
                })
                .collect()
        } else {
            Vec::new()
        },
    })
}

/// One advertiser with budget 1 and `n` unit-bid queries of probability
/// `1/n` at distinct times, all from one customer of capacity `n`.
pub fn gen_integrality_gap(n: usize) -> Result<Instance, HarnessError> {
    if n == 0 {
        return Err(HarnessError::Parameter("n must be positive".into()));
    }
    let p = Rational::new(1.into(), (n as i64).into());
    let queries = (0..n)
        .map(|t| Query::new(0, t as i64 + 1, p.clone(), [(0, Rational::one())]))
        .collect();
    let capacity =
        u32::try_from(n).map_err(|_| HarnessError::Parameter("n is too large".into()))?;
    Ok(Instance::new(
        vec![Advertiser {
            budget: Rational::one(),
        }],
        queries,
        vec![Customer { capacity }],
    ))
}

/// Two queries of one capacity-1 customer: a likely cheap one first, then
/// an unlikely valuable one. The budget `1 / eps` never binds.
pub fn gen_half_tight(eps: &Rational) -> Result<Instance, HarnessError> {
    if *eps <= Rational::zero() || *eps >= Rational::one() {
        return Err(HarnessError::Parameter(format!(
            "eps must lie strictly between 0 and 1, got {}",
            format_rational(eps)
        )));
    }
    let one = Rational::one();
    Ok(Instance::new(
        vec![Advertiser { budget: &one / eps }],
        vec![
            Query::new(0, 1, &one - eps, [(0, one.clone())]),
            Query::new(0, 2, eps.clone(), [(0, (&one - eps) / eps)]),
        ],
        vec![Customer { capacity: 1 }],
    ))
}

/// Seeded random instance: `m` advertisers, `n` queries, `s` customers.
/// Bids are integers in `1..=bid_scale` capped at the bidder's budget,
/// budgets integers in `1..=budget_scale`, capacities in `1..=3`, and
/// exclusivity groups of one to three queries share a denominator of at
/// most 6.
pub fn gen_random_instance(
    m: usize,
    n: usize,
    s: usize,
    bid_scale: u32,
    budget_scale: u32,
    seed: u64,
) -> Result<Instance, HarnessError> {
    if m == 0 || n == 0 || s == 0 || bid_scale == 0 || budget_scale == 0 {
        return Err(HarnessError::Parameter(
            "sizes and scales must all be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budgets: Vec<u32> = (0..m).map(|_| rng.gen_range(1..=budget_scale)).collect();
    let customers = (0..s)
        .map(|_| Customer {
            capacity: rng.gen_range(1..=3),
        })
        .collect();
    let mut queries = Vec::with_capacity(n);
    let mut time = 0i64;
    while queries.len() < n {
        time += 1;
        let size = rng.gen_range(1..=3usize).min(n - queries.len());
        let customer = rng.gen_range(0..s);
        let denom = rng.gen_range(size.max(2)..=6) as i64;
        let mut left = denom;
        for k in 0..size {
            let reserve = (size - 1 - k) as i64;
            let numer = rng.gen_range(1..=left - reserve);
            left -= numer;
            let mut bids = Vec::new();
            for (i, &budget) in budgets.iter().enumerate() {
                if rng.gen_bool(0.5) {
                    bids.push((i, rng.gen_range(1..=bid_scale).min(budget)));
                }
            }
            if bids.is_empty() {
                let i = rng.gen_range(0..m);
                bids.push((i, rng.gen_range(1..=bid_scale).min(budgets[i])));
            }
            queries.push(Query::new(
                customer,
                time,
                Rational::new(numer.into(), denom.into()),
                bids.into_iter()
                    .map(|(i, b)| (i, Rational::from_integer(b.into()))),
            ));
        }
    }
    Ok(Instance::new(
        budgets
            .into_iter()
            .map(|b| Advertiser {
                budget: Rational::from_integer(b.into()),
            })
            .collect(),
        queries,
        customers,
    ))
}

/// Every arrived pair at the same value, as large as all realized rows
/// allow. Useful as a strictly interior feasible point.
pub fn uniform_feasible_point(
    inst: &Instance,
    scenario: &Scenario,
) -> Result<crate::FractionalAssignment, HarnessError> {
    let lp = build_lp(inst, Variant::BC, LpMode::Realized(scenario))?;
    let mut v = Rational::one();
    let active: Vec<bool> = lp
        .columns
        .iter()
        .map(|&(_, j)| scenario.arrived[j])
        .collect();
    for row in &lp.constraints {
        let weight: Rational = row
            .coeffs
            .iter()
            .filter(|(c, _)| active[*c])
            .map(|(_, a)| a.clone())
            .sum();
        if !weight.is_zero() {
            let cap = &row.rhs / weight;
            if cap < v {
                v = cap;
            }
        }
    }
    let mut y = crate::FractionalAssignment::new();
    for (c, &(i, j)) in lp.columns.iter().enumerate() {
        if active[c] {
            y.set(i, j, v.clone());
        }
    }
    Ok(y)
}

/// Exact realized-program objective and an optimal solution.
pub fn solve_realized(
    inst: &Instance,
    scenario: &Scenario,
) -> Result<Option<(crate::FractionalAssignment, Rational)>, HarnessError> {
    let lp = build_lp(inst, Variant::BC, LpMode::Realized(scenario))?;
    let sol = solve_lp(&lp)?;
    Ok((sol.status == LpStatus::Optimal).then(|| (sol.assignment(&lp), sol.objective_value)))
}

/// Scaled integral revenue as an exact rational.
pub fn exact_revenue(money: &MoneyScale, assignment: &IntegralAssignment) -> Rational {
    money.to_rational(money.revenue(assignment))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn sampler_extremes() {
        let all = Instance::new(
            vec![Advertiser { budget: int(1) }],
            (0..3)
                .map(|t| Query::new(0, t, int(1), [(0, int(1))]))
                .collect(),
            vec![Customer { capacity: 3 }],
        );
        let none = Instance::new(
            vec![Advertiser { budget: int(1) }],
            (0..3)
                .map(|t| Query::new(0, t, int(0), [(0, int(1))]))
                .collect(),
            vec![Customer { capacity: 3 }],
        );
        let pair = Instance::new(
            vec![Advertiser { budget: int(1) }],
            (0..2)
                .map(|_| Query::new(0, 5, ratio(1, 2), [(0, int(1))]))
                .collect(),
            vec![Customer { capacity: 3 }],
        );
        for t in 0..50 {
            let mut rng = trial_rng(3, t);
            assert_eq!(
                sample_scenario(&all, &mut rng).unwrap().arrived,
                vec![true; 3]
            );
            assert_eq!(
                sample_scenario(&none, &mut rng).unwrap().arrived,
                vec![false; 3]
            );
            let s = sample_scenario(&pair, &mut rng).unwrap();
            assert_eq!(s.arrived.iter().filter(|&&a| a).count(), 1);
        }
    }

    #[test]
    fn group_sum_above_one_is_rejected() {
        let inst = Instance::new(
            vec![Advertiser { budget: int(1) }],
            (0..2)
                .map(|_| Query::new(0, 5, ratio(2, 3), [(0, int(1))]))
                .collect(),
            vec![Customer { capacity: 1 }],
        );
        assert!(sample_scenario(&inst, &mut trial_rng(0, 0)).is_err());
    }

    #[test]
    fn summary_statistics() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((s.std_error - sd / 2.0).abs() < 1e-12);
    }

    #[test]
    fn generators_match_their_descriptions() {
        let gap = gen_integrality_gap(4).unwrap();
        assert_eq!(gap.num_queries(), 4);
        assert!(validate_instance(&gap).is_empty());
        let ht = gen_half_tight(&ratio(1, 10)).unwrap();
        assert_eq!(ht.queries[1].bid(0), Some(&int(9)));
        assert_eq!(ht.advertisers[0].budget, int(10));
        assert!(gen_half_tight(&int(1)).is_err());
        let a = gen_random_instance(3, 8, 2, 5, 6, 11).unwrap();
        let b = gen_random_instance(3, 8, 2, 5, 6, 11).unwrap();
        assert_eq!(a, b);
        assert!(validate_instance(&a).is_empty());
        for (i, _, bid) in a.edges() {
            assert!(*bid <= a.advertisers[i].budget);
        }
    }

    #[test]
    fn report_is_independent_of_worker_count() {
        let inst = gen_random_instance(2, 5, 2, 4, 5, 3).unwrap();
        let mut opts = McOptions::new(200, 9);
        opts.jobs = Some(1);
        let one = monte_carlo(&inst, McPolicy::Ipbc, opts).unwrap();
        opts.jobs = Some(3);
        let three = monte_carlo(&inst, McPolicy::Ipbc, opts).unwrap();
        assert_eq!(one, three);
        assert!(monte_carlo(&inst, McPolicy::Ipb, McOptions::new(10, 0)).is_err());
    }
}

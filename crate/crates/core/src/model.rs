//! Problem data: advertisers with budgets, customers with ad quotas, and
//! queries carrying per-advertiser bids and an arrival probability.
//!
//! Everything here is immutable value data once built. Bids of zero are not
//! stored; an advertiser may only ever be assigned a query it bid on.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{common_denominator, format_rational, Rational, Q};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Advertiser {
    pub budget: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Customer {
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub customer: usize,
    pub time: i64,
    /// Advertiser index to bid. Only nonzero bids are kept.
    pub bids: BTreeMap<usize, Rational>,
    pub prob: Rational,
}

impl Query {
    pub fn new(
        customer: usize,
        time: i64,
        prob: Rational,
        bids: impl IntoIterator<Item = (usize, Rational)>,
    ) -> Self {
        let bids = bids.into_iter().filter(|(_, b)| !b.is_zero()).collect();
        Query {
            customer,
            time,
            bids,
            prob,
        }
    }

    pub fn bid(&self, advertiser: usize) -> Option<&Rational> {
        self.bids.get(&advertiser)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(from = "InstanceFile", into = "InstanceFile")]
pub struct Instance {
    pub advertisers: Vec<Advertiser>,
    pub queries: Vec<Query>,
    pub customers: Vec<Customer>,
}

/// Realized arrivals, one flag per query.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    pub arrived: Vec<bool>,
}

impl Scenario {
    pub fn all_arrived(n: usize) -> Self {
        Scenario {
            arrived: vec![true; n],
        }
    }

    /// Checks length and that at most one query per exclusivity group arrived.
    pub fn check(&self, inst: &Instance) -> Result<(), ModelError> {
        if self.arrived.len() != inst.queries.len() {
            return Err(ModelError::constraint(
                "scenario length",
                format!(
                    "{} arrival flags for {} queries",
                    self.arrived.len(),
                    inst.queries.len()
                ),
            ));
        }
        for group in exclusivity_groups(inst) {
            let hits: Vec<usize> = group.iter().copied().filter(|&j| self.arrived[j]).collect();
            if hits.len() > 1 {
                return Err(ModelError::constraint(
                    "mutual exclusivity",
                    format!("queries {hits:?} share (customer, time) but all arrived"),
                ));
            }
        }
        Ok(())
    }

    /// Arrival indicator as a rational right-hand side.
    pub fn indicator(&self, query: usize) -> Rational {
        if self.arrived[query] {
            Rational::one()
        } else {
            Rational::zero()
        }
    }
}

/// Fractional values over (advertiser, query) pairs; absent pairs are zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FractionalAssignment {
    values: BTreeMap<(usize, usize), Rational>,
}

impl FractionalAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, advertiser: usize, query: usize) -> Rational {
        self.values
            .get(&(advertiser, query))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, advertiser: usize, query: usize, value: Rational) {
        if value.is_zero() {
            self.values.remove(&(advertiser, query));
        } else {
            self.values.insert((advertiser, query), value);
        }
    }

    /// Nonzero entries in (advertiser, query) order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        self.values.iter().map(|(&(i, j), v)| (i, j, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_integral(&self) -> bool {
        self.values.values().all(|v| v.is_one())
    }

    /// Pairs whose value lies strictly between zero and one.
    pub fn fractional_support(&self) -> Vec<(usize, usize)> {
        self.values
            .iter()
            .filter(|(_, v)| crate::rational::is_strictly_fractional(v))
            .map(|(&k, _)| k)
            .collect()
    }

    /// Total bid mass per advertiser, `sum_j y_ij u_ij`, without budget caps.
    pub fn payments(&self, inst: &Instance) -> Vec<Rational> {
        let mut pay = vec![Rational::zero(); inst.advertisers.len()];
        for (i, j, v) in self.iter() {
            if let (Some(p), Some(bid)) =
                (pay.get_mut(i), inst.queries.get(j).and_then(|q| q.bid(i)))
            {
                *p += v * bid;
            }
        }
        pay
    }
}

/// Each query maps to at most one advertiser.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IntegralAssignment {
    pub assigned: BTreeMap<usize, usize>,
}

impl IntegralAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn assign(&mut self, query: usize, advertiser: usize) {
        self.assigned.insert(query, advertiser);
    }

    pub fn advertiser_of(&self, query: usize) -> Option<usize> {
        self.assigned.get(&query).copied()
    }

    pub fn len(&self) -> usize {
        self.assigned.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assigned.is_empty()
    }

    /// Uncapped spend per advertiser.
    pub fn payments(&self, inst: &Instance) -> Vec<Rational> {
        let mut pay = vec![Rational::zero(); inst.advertisers.len()];
        for (&j, &i) in &self.assigned {
            if let Some(bid) = inst.queries.get(j).and_then(|q| q.bid(i)) {
                pay[i] += bid;
            }
        }
        pay
    }

    /// Checks the structural constraints: indices in range, positive bid on
    /// every assigned pair, per-customer quota, and (when given) arrival.
    pub fn check(&self, inst: &Instance, scenario: Option<&Scenario>) -> Result<(), ModelError> {
        let mut usage = vec![0u64; inst.customers.len()];
        for (&j, &i) in &self.assigned {
            let query = inst.queries.get(j).ok_or_else(|| {
                ModelError::constraint("assignment", format!("query {j} does not exist"))
            })?;
            if i >= inst.advertisers.len() {
                return Err(ModelError::constraint(
                    "assignment",
                    format!("advertiser {i} does not exist"),
                ));
            }
            if query.bid(i).is_none() {
                return Err(ModelError::constraint(
                    "assignment",
                    format!("advertiser {i} has no bid on query {j}"),
                ));
            }
            if let Some(s) = scenario {
                if !s.arrived.get(j).copied().unwrap_or(false) {
                    return Err(ModelError::constraint(
                        "assign (F)",
                        format!("query {j} did not arrive but is assigned"),
                    ));
                }
            }
            if let Some(u) = usage.get_mut(query.customer) {
                *u += 1;
            }
        }
        for (k, (&used, customer)) in usage.iter().zip(&inst.customers).enumerate() {
            if used > u64::from(customer.capacity) {
                return Err(ModelError::constraint(
                    "capacity (C)",
                    format!(
                        "customer {k} receives {used} ads, capacity {}",
                        customer.capacity
                    ),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, v) in self.violations.iter().enumerate() {
            if n > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}: {}", v.path, v.message)?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid instance: {0}")]
    Invalid(ValidationReport),
    #[error("{constraint} violated: {detail}")]
    Constraint { constraint: String, detail: String },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl ModelError {
    pub fn constraint(constraint: impl Into<String>, detail: impl Into<String>) -> Self {
        ModelError::Constraint {
            constraint: constraint.into(),
            detail: detail.into(),
        }
    }
}

impl Instance {
    pub fn new(
        advertisers: Vec<Advertiser>,
        queries: Vec<Query>,
        customers: Vec<Customer>,
    ) -> Self {
        Instance {
            advertisers,
            queries,
            customers,
        }
    }

    pub fn num_advertisers(&self) -> usize {
        self.advertisers.len()
    }

    pub fn num_queries(&self) -> usize {
        self.queries.len()
    }

    pub fn num_customers(&self) -> usize {
        self.customers.len()
    }

    pub fn bid(&self, advertiser: usize, query: usize) -> Option<&Rational> {
        self.queries.get(query).and_then(|q| q.bid(advertiser))
    }

    /// All positive-bid pairs as (advertiser, query, bid), ordered by query
    /// then advertiser.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        self.queries
            .iter()
            .enumerate()
            .flat_map(|(j, q)| q.bids.iter().map(move |(&i, b)| (i, j, b)))
    }

    /// Queries belonging to each customer.
    pub fn customer_queries(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.customers.len()];
        for (j, q) in self.queries.iter().enumerate() {
            if let Some(v) = out.get_mut(q.customer) {
                v.push(j);
            }
        }
        out
    }

    pub fn validated(self) -> Result<Self, ModelError> {
        let report = validate_instance(&self);
        if report.is_empty() {
            Ok(self)
        } else {
            Err(ModelError::Invalid(report))
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let inst: Instance = serde_json::from_str(text)?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization is infallible")
    }
}

pub fn validate_instance(inst: &Instance) -> ValidationReport {
    let mut report = ValidationReport::default();
    let m = inst.advertisers.len();
    let s = inst.customers.len();
    for (i, adv) in inst.advertisers.iter().enumerate() {
        if !adv.budget.is_positive() {
            report.push(
                format!("advertisers[{i}].budget"),
                format!("budget > 0 required, got {}", format_rational(&adv.budget)),
            );
        }
    }
    for (k, customer) in inst.customers.iter().enumerate() {
        if customer.capacity < 1 {
            report.push(
                format!("customers[{k}].capacity"),
                "capacity ≥ 1 required, got 0",
            );
        }
    }
    for (j, q) in inst.queries.iter().enumerate() {
        if q.customer >= s {
            report.push(
                format!("queries[{j}].customer"),
                format!("customer index {} out of range [0, {s})", q.customer),
            );
        }
        if !crate::rational::in_unit_interval(&q.prob) {
            report.push(
                format!("queries[{j}].prob"),
                format!(
                    "probability must lie in [0, 1], got {}",
                    format_rational(&q.prob)
                ),
            );
        }
        for (&i, bid) in &q.bids {
            if i >= m {
                report.push(
                    format!("queries[{j}].bids[{i}]"),
                    format!("advertiser index {i} out of range [0, {m})"),
                );
            }
            if bid.is_negative() {
                report.push(
                    format!("queries[{j}].bids[{i}]"),
                    format!("bid ≥ 0 required, got {}", format_rational(bid)),
                );
            }
        }
    }
    for group in exclusivity_groups(inst) {
        let total: Rational = group.iter().map(|&j| &inst.queries[j].prob).sum();
        if total > Rational::one() {
            let q = &inst.queries[group[0]];
            report.push(
                format!("queries{group:?}"),
                format!(
                    "group (customer {}, time {}) probability sum {} > 1",
                    q.customer,
                    q.time,
                    format_rational(&total)
                ),
            );
        }
    }
    report
}

/// Partition of the queries by (customer, time), ordered by time and then
/// customer. Members of a group are listed in index order.
pub fn exclusivity_groups(inst: &Instance) -> Vec<Vec<usize>> {
    let mut groups: BTreeMap<(i64, usize), Vec<usize>> = BTreeMap::new();
    for (j, q) in inst.queries.iter().enumerate() {
        groups.entry((q.time, q.customer)).or_default().push(j);
    }
    groups.into_values().collect()
}

/// Payment of an integral allocation: `sum_i min(spend_i, budget_i)`.
pub fn integral_revenue(inst: &Instance, x: &IntegralAssignment) -> Result<Rational, ModelError> {
    x.check(inst, None)?;
    Ok(capped_revenue(inst, &x.payments(inst)))
}

/// `sum_i min(spend_i, budget_i)` for given uncapped spends.
pub fn capped_revenue(inst: &Instance, spend: &[Rational]) -> Rational {
    spend
        .iter()
        .zip(&inst.advertisers)
        .map(|(s, a)| {
            if *s < a.budget {
                s.clone()
            } else {
                a.budget.clone()
            }
        })
        .sum()
}

/// Linear LP objective `sum_ij y_ij u_ij`; requires every budget row to hold.
pub fn fractional_revenue(
    inst: &Instance,
    y: &FractionalAssignment,
) -> Result<Rational, ModelError> {
    let mut per_query = vec![Rational::zero(); inst.queries.len()];
    for (i, j, v) in y.iter() {
        if i >= inst.advertisers.len() || j >= inst.queries.len() {
            return Err(ModelError::constraint(
                "assignment",
                format!("pair ({i}, {j}) is out of range"),
            ));
        }
        if inst.bid(i, j).is_none() {
            return Err(ModelError::constraint(
                "assignment",
                format!("advertiser {i} has no bid on query {j}"),
            ));
        }
        if !crate::rational::in_unit_interval(v) {
            return Err(ModelError::constraint(
                "bounds",
                format!("y[{i},{j}] = {} outside [0, 1]", format_rational(v)),
            ));
        }
        per_query[j] += v;
    }
    for (j, total) in per_query.iter().enumerate() {
        if *total > Rational::one() {
            return Err(ModelError::constraint(
                "assign (F)",
                format!("query {j} is assigned total {}", format_rational(total)),
            ));
        }
    }
    let pay = y.payments(inst);
    for (i, (p, adv)) in pay.iter().zip(&inst.advertisers).enumerate() {
        if *p > adv.budget {
            return Err(ModelError::constraint(
                "budget (B)",
                format!(
                    "advertiser {i} spends {} over budget {}",
                    format_rational(p),
                    format_rational(&adv.budget)
                ),
            ));
        }
    }
    Ok(pay.into_iter().sum())
}

/// Integer money accounting: every bid and budget multiplied by the common
/// denominator of all of them. Sums then stay exact in machine integers.
#[derive(Debug, Clone)]
pub struct MoneyScale {
    pub denominator: BigInt,
    /// Per query: (advertiser, scaled bid), ordered by advertiser.
    pub bids: Vec<Vec<(usize, i128)>>,
    pub budgets: Vec<i128>,
}

/// Largest scaled magnitude accepted; leaves headroom for sums and squares
/// over many trials.
const SCALE_LIMIT: i128 = 1 << 52;

impl MoneyScale {
    /// Fails when the scaled values would not fit comfortably in `i128`.
    pub fn new(inst: &Instance) -> Result<Self, ModelError> {
        let denominator = common_denominator(
            inst.advertisers
                .iter()
                .map(|a| &a.budget)
                .chain(inst.edges().map(|(_, _, b)| b)),
        );
        let scale = |v: &Rational| -> Result<i128, ModelError> {
            let scaled: BigInt = v.numer() * (&denominator / v.denom());
            scaled
                .to_i128()
                .filter(|s| s.abs() <= SCALE_LIMIT)
                .ok_or_else(|| {
                    ModelError::constraint(
                        "numeric range",
                        "bids and budgets have too large a common denominator",
                    )
                })
        };
        let budgets = inst
            .advertisers
            .iter()
            .map(|a| scale(&a.budget))
            .collect::<Result<Vec<_>, _>>()?;
        let bids = inst
            .queries
            .iter()
            .map(|q| {
                q.bids
                    .iter()
                    .map(|(&i, b)| scale(b).map(|s| (i, s)))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MoneyScale {
            denominator,
            bids,
            budgets,
        })
    }

    pub fn bid(&self, advertiser: usize, query: usize) -> i128 {
        self.bids[query]
            .iter()
            .find(|(i, _)| *i == advertiser)
            .map_or(0, |(_, b)| *b)
    }

    /// Scaled `sum_i min(spend_i, budget_i)`.
    pub fn capped(&self, spend: &[i128]) -> i128 {
        spend
            .iter()
            .zip(&self.budgets)
            .map(|(&s, &b)| s.min(b))
            .sum()
    }

    pub fn to_rational(&self, scaled: i128) -> Rational {
        Rational::new(BigInt::from(scaled), self.denominator.clone())
    }

    pub fn to_f64(&self, scaled: i128) -> f64 {
        crate::rational::to_f64(&self.to_rational(scaled))
    }

    /// Scaled revenue of an integral assignment (no structural checks).
    pub fn revenue(&self, assignment: &IntegralAssignment) -> i128 {
        let mut spend = vec![0i128; self.budgets.len()];
        for (&j, &i) in &assignment.assigned {
            spend[i] += self.bid(i, j);
        }
        self.capped(&spend)
    }
}

#[derive(Serialize, Deserialize)]
struct AdvertiserFile {
    budget: Q,
}

#[derive(Serialize, Deserialize)]
struct CustomerFile {
    capacity: u32,
}

#[derive(Serialize, Deserialize)]
struct QueryFile {
    customer: usize,
    time: i64,
    prob: Q,
    #[serde(default)]
    bids: BTreeMap<usize, Q>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    advertisers: Vec<AdvertiserFile>,
    customers: Vec<CustomerFile>,
    queries: Vec<QueryFile>,
}

impl From<InstanceFile> for Instance {
    fn from(file: InstanceFile) -> Self {
        Instance {
            advertisers: file
                .advertisers
                .into_iter()
                .map(|a| Advertiser { budget: a.budget.0 })
                .collect(),
            customers: file
                .customers
                .into_iter()
                .map(|c| Customer {
                    capacity: c.capacity,
                })
                .collect(),
            queries: file
                .queries
                .into_iter()
                .map(|q| {
                    Query::new(
                        q.customer,
                        q.time,
                        q.prob.0,
                        q.bids.into_iter().map(|(i, b)| (i, b.0)),
                    )
                })
                .collect(),
        }
    }
}

impl From<Instance> for InstanceFile {
    fn from(inst: Instance) -> Self {
        InstanceFile {
            advertisers: inst
                .advertisers
                .into_iter()
                .map(|a| AdvertiserFile {
                    budget: Q(a.budget),
                })
                .collect(),
            customers: inst
                .customers
                .into_iter()
                .map(|c| CustomerFile {
                    capacity: c.capacity,
                })
                .collect(),
            queries: inst
                .queries
                .into_iter()
                .map(|q| QueryFile {
                    customer: q.customer,
                    time: q.time,
                    prob: Q(q.prob),
                    bids: q.bids.into_iter().map(|(i, b)| (i, Q(b))).collect(),
                })
                .collect(),
        }
    }
}

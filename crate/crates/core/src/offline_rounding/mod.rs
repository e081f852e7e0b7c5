//! Dependent randomized rounding of the realized budgeted and capacitated
//! relaxation.
//!
//! The fractional solution is first made acyclic without changing any
//! advertiser's spend. The rounding loop then repeatedly picks a chain of
//! fractional edges (or a whole tree of the support forest), moves along
//! the free direction of the rows that must be kept, and stops when every
//! variable is 0 or 1. Each randomized move is unbiased, so every
//! advertiser's expected final spend equals its fractional spend, while
//! assignment and capacity rows hold exactly after every step.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;

use num_traits::{One, Zero};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

mod context;
mod engine;
mod forest;
mod forestify;
mod linalg;
mod subsystem;

pub use forest::{Node, SupportForest};
pub use subsystem::{directed_move, direction, rand_move, Branch, Guard, MoveOutcome, Subsystem};

use crate::lp::{build_lp, LpError, LpMode, Variant};
use crate::model::{FractionalAssignment, Instance, IntegralAssignment, ModelError, Scenario};
use crate::rational::{
    format_rational, in_unit_interval, is_strictly_fractional, text, text_vec, Rational,
};
use context::{Context, Row};
use engine::{Plan, View};

#[derive(Debug, Error)]
pub enum RoundingError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("fractional solution is not feasible: {0}")]
    Infeasible(String),
    #[error(
        "advertiser {advertiser} bids {bid} on query {query}, above its budget {budget}; \
         truncate bids to the budget first"
    )]
    BidExceedsBudget {
        advertiser: usize,
        query: usize,
        bid: String,
        budget: String,
    },
    #[error("no rounding case applies after {steps} steps\n{dump}")]
    Stuck { steps: usize, dump: String },
    #[error("rounding did not finish within {0} steps")]
    StepCap(usize),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("internal rounding error: {0}")]
    Internal(String),
}

/// Which rule produced a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    #[serde(rename = "cycle-break")]
    CycleBreak,
    /// Path between two leaf advertisers.
    #[serde(rename = "i")]
    TwoLeafAdvertisers,
    /// Path between two slack leaf queries of one customer.
    #[serde(rename = "ii.1")]
    SameSetQueries,
    /// Path between two slack leaf queries of different customers.
    #[serde(rename = "ii.2")]
    CrossSetQueries,
    /// Path between two slack queries of one at-capacity customer.
    #[serde(rename = "ii.3")]
    TightSetPair,
    /// Path between a leaf advertiser and a slack leaf query.
    #[serde(rename = "ii.4")]
    AdvertiserAndQuery,
    /// Path from a leaf advertiser through linked trees.
    #[serde(rename = "ii.5")]
    LinkedPath,
    /// Every tight row of one tree kept at once.
    #[serde(rename = "tree")]
    WholeTree,
    /// Chain between query endpoints, possibly through linked trees.
    #[serde(rename = "iii")]
    NoLeafAdvertiser,
}

impl CaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::CycleBreak => "cycle-break",
            CaseLabel::TwoLeafAdvertisers => "i",
            CaseLabel::SameSetQueries => "ii.1",
            CaseLabel::CrossSetQueries => "ii.2",
            CaseLabel::TightSetPair => "ii.3",
            CaseLabel::AdvertiserAndQuery => "ii.4",
            CaseLabel::LinkedPath => "ii.5",
            CaseLabel::WholeTree => "tree",
            CaseLabel::NoLeafAdvertiser => "iii",
        }
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedVariable {
    pub advertiser: usize,
    pub query: usize,
    pub value: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub case: CaseLabel,
    /// (advertiser, query) pairs the step moved.
    pub variables: Vec<(usize, usize)>,
    #[serde(with = "text")]
    pub alpha: Rational,
    #[serde(with = "text")]
    pub beta: Rational,
    pub branch: Branch,
    pub fixed: Vec<FixedVariable>,
    /// Rows that had slack before the step and none after.
    pub tightened: Vec<String>,
    /// Fractional spend of every advertiser after the step.
    #[serde(with = "text_vec")]
    pub payments: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RoundingTrace {
    pub steps: Vec<TraceStep>,
}

impl RoundingTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            out.push_str(&serde_json::to_string(step).expect("trace steps serialize"));
            out.push('\n');
        }
        out
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(self.to_jsonl().as_bytes())
    }

    pub fn from_jsonl(text: &str) -> Result<Self, serde_json::Error> {
        let steps = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()?;
        Ok(RoundingTrace { steps })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundingOptions {
    /// Keep a step log. Costs a copy of the state per step.
    pub record_trace: bool,
    /// Recheck every assignment and capacity row after each step.
    pub check_rows: bool,
    /// Overrides the default step cap.
    pub max_steps: Option<usize>,
}

impl Default for RoundingOptions {
    fn default() -> Self {
        RoundingOptions {
            record_trace: true,
            check_rows: true,
            max_steps: None,
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn describe_step(
    ctx: &Context,
    case: CaseLabel,
    cols: &[usize],
    before: &[Rational],
    after: &[Rational],
    alpha: &Rational,
    beta: &Rational,
    branch: Branch,
) -> TraceStep {
    let mut touched = BTreeSet::new();
    let mut fixed = Vec::new();
    for &c in cols {
        let (i, j) = ctx.columns[c];
        touched.insert(Row::Assign(j));
        touched.insert(Row::Capacity(ctx.query_customer[j]));
        touched.insert(Row::Budget(i));
        if is_strictly_fractional(&before[c]) && !is_strictly_fractional(&after[c]) {
            fixed.push(FixedVariable {
                advertiser: i,
                query: j,
                value: u8::from(after[c].is_one()),
            });
        }
    }
    let tightened = touched
        .into_iter()
        .filter(|&r| !ctx.is_tight(r, before) && ctx.is_tight(r, after))
        .map(|r| r.tag().to_string())
        .collect();
    TraceStep {
        case,
        variables: cols.iter().map(|&c| ctx.columns[c]).collect(),
        alpha: alpha.clone(),
        beta: beta.clone(),
        branch,
        fixed,
        tightened,
        payments: ctx.payments(after),
    }
}

fn column_values(ctx: &Context, y: &FractionalAssignment) -> Result<Vec<Rational>, RoundingError> {
    let mut x = vec![Rational::zero(); ctx.columns.len()];
    for (i, j, v) in y.iter() {
        let col = ctx
            .columns
            .binary_search_by_key(&(j, i), |&(a, q)| (q, a))
            .map_err(|_| {
                RoundingError::Infeasible(format!("advertiser {i} has no bid on query {j}"))
            })?;
        if !in_unit_interval(v) {
            return Err(RoundingError::Infeasible(format!(
                "value {} for advertiser {i}, query {j} is outside [0, 1]",
                format_rational(v)
            )));
        }
        x[col] = v.clone();
    }
    Ok(x)
}

fn to_assignment(ctx: &Context, x: &[Rational]) -> FractionalAssignment {
    let mut y = FractionalAssignment::new();
    for (c, &(i, j)) in ctx.columns.iter().enumerate() {
        y.set(i, j, x[c].clone());
    }
    y
}

/// Rounds one realized scenario. The cycle removal runs once in `new`, so
/// repeated calls to `round` share it.
#[derive(Debug, Clone)]
pub struct OfflineRounder {
    ctx: Context,
    start: Vec<Rational>,
    preface: Vec<TraceStep>,
    options: RoundingOptions,
}

impl OfflineRounder {
    pub fn new(
        inst: &Instance,
        scenario: &Scenario,
        y_star: &FractionalAssignment,
    ) -> Result<Self, RoundingError> {
        Self::with_options(inst, scenario, y_star, RoundingOptions::default())
    }

    pub fn with_options(
        inst: &Instance,
        scenario: &Scenario,
        y_star: &FractionalAssignment,
        options: RoundingOptions,
    ) -> Result<Self, RoundingError> {
        let lp = build_lp(inst, Variant::BC, LpMode::Realized(scenario))?;
        let ctx = Context::new(
            inst,
            (0..inst.num_queries())
                .map(|j| scenario.indicator(j))
                .collect(),
        );
        let mut start = column_values(&ctx, y_star)?;
        if let Some(v) = lp.first_violation(&start) {
            return Err(RoundingError::Infeasible(v));
        }
        let mut preface = Vec::new();
        forestify::break_cycles(
            &ctx,
            &mut start,
            options.record_trace.then_some(&mut preface),
        )?;
        Ok(OfflineRounder {
            ctx,
            start,
            preface,
            options,
        })
    }

    /// The acyclic solution every run starts from.
    pub fn forest_solution(&self) -> FractionalAssignment {
        to_assignment(&self.ctx, &self.start)
    }

    fn step_cap(&self) -> usize {
        self.options.max_steps.unwrap_or_else(|| {
            let rows = self.ctx.n + self.ctx.capacity.len();
            (self.ctx.columns.len() + rows + 1) * (self.ctx.m + 2)
        })
    }

    pub fn round<R: RngCore + ?Sized>(
        &self,
        rng: &mut R,
    ) -> Result<(IntegralAssignment, RoundingTrace), RoundingError> {
        let ctx = &self.ctx;
        let mut x = self.start.clone();
        let mut steps = if self.options.record_trace {
            self.preface.clone()
        } else {
            Vec::new()
        };
        let cap = self.step_cap();
        let mut count = 0;
        loop {
            let plan = {
                let view = View::new(ctx, &x);
                if view.forest().edge_count() == 0 {
                    break;
                }
                view.plan().ok_or_else(|| RoundingError::Stuck {
                    steps: count,
                    dump: dump_state(ctx, &x),
                })?
            };
            count += 1;
            if count > cap {
                return Err(RoundingError::StepCap(cap));
            }
            let sub = plan.sub();
            let local: Vec<Rational> = sub.columns.iter().map(|&c| x[c].clone()).collect();
            let outcome = match &plan {
                Plan::Random { sub, .. } => rand_move(sub, &local, rng)?,
                Plan::Directed { sub, direction, .. } => {
                    directed_move(sub, &local, direction.clone())?
                }
            };
            let before = self.options.record_trace.then(|| x.clone());
            for (&c, v) in sub.columns.iter().zip(outcome.values) {
                x[c] = v;
            }
            if self.options.check_rows {
                if let Some(row) = ctx.first_hard_violation(&x) {
                    return Err(RoundingError::InvariantViolation(format!(
                        "row {} exceeded after a {} step",
                        row.tag(),
                        plan.case()
                    )));
                }
            }
            if let Some(before) = before {
                steps.push(describe_step(
                    ctx,
                    plan.case(),
                    &sub.columns,
                    &before,
                    &x,
                    &outcome.alpha,
                    &outcome.beta,
                    outcome.branch,
                ));
            }
        }
        let mut assignment = IntegralAssignment::new();
        for (c, &(i, j)) in ctx.columns.iter().enumerate() {
            if x[c].is_one() {
                assignment.assign(j, i);
            } else if !x[c].is_zero() {
                return Err(RoundingError::Internal(format!(
                    "variable ({i}, {j}) left at {}",
                    format_rational(&x[c])
                )));
            }
        }
        Ok((assignment, RoundingTrace { steps }))
    }
}

fn dump_state(ctx: &Context, x: &[Rational]) -> String {
    let mut out = String::from("fractional variables:\n");
    for (c, &(i, j)) in ctx.columns.iter().enumerate() {
        if is_strictly_fractional(&x[c]) {
            out.push_str(&format!("  x[{i},{j}] = {}\n", format_rational(&x[c])));
        }
    }
    out.push_str("tight rows:");
    for row in ctx.all_rows() {
        if ctx.is_tight(row, x) {
            out.push_str(&format!(" {}", row.tag()));
        }
    }
    out
}

/// Rounds an optimal (or any feasible) solution of the realized program to
/// an integral allocation.
pub fn round_offline<R: RngCore + ?Sized>(
    inst: &Instance,
    scenario: &Scenario,
    y_star: &FractionalAssignment,
    rng: &mut R,
) -> Result<(IntegralAssignment, RoundingTrace), RoundingError> {
    OfflineRounder::new(inst, scenario, y_star)?.round(rng)
}

/// Removes every cycle from the fractional support. Every advertiser's
/// spend, hence the objective, is unchanged; query totals can only drop.
pub fn forestify(
    inst: &Instance,
    y: &FractionalAssignment,
) -> Result<FractionalAssignment, RoundingError> {
    let ctx = Context::new(inst, vec![Rational::one(); inst.num_queries()]);
    let mut x = column_values(&ctx, y)?;
    forestify::break_cycles(&ctx, &mut x, None)?;
    Ok(to_assignment(&ctx, &x))
}

/// Support graph of the strictly fractional entries of `y`.
pub fn support_forest(inst: &Instance, y: &FractionalAssignment) -> SupportForest {
    let mut edges: Vec<(usize, usize, usize)> = y
        .iter()
        .filter(|(_, _, v)| is_strictly_fractional(v))
        .map(|(i, j, _)| (i, j))
        .enumerate()
        .map(|(c, (i, j))| (i, j, c))
        .collect();
    edges.sort_unstable();
    SupportForest::new(inst.num_advertisers(), inst.num_queries(), edges)
}

/// `(4 - max u/b) / 4` over all bids. Fails when a bid exceeds its budget.
pub fn approx_ratio_bound(inst: &Instance) -> Result<Rational, RoundingError> {
    let mut worst = Rational::zero();
    for (i, j, bid) in inst.edges() {
        let budget = &inst.advertisers[i].budget;
        if bid > budget {
            return Err(RoundingError::BidExceedsBudget {
                advertiser: i,
                query: j,
                bid: format_rational(bid),
                budget: format_rational(budget),
            });
        }
        let r = bid / budget;
        if r > worst {
            worst = r;
        }
    }
    let four = Rational::from_integer(4.into());
    Ok((&four - worst) / four)
}

#[cfg(test)]
mod tests;

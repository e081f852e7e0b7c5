//! Cycle removal that keeps every advertiser's spend, and hence the
//! objective, exactly unchanged.

use num_traits::{Signed, Zero};

use super::context::Context;
use super::subsystem::{max_step, Branch};
use super::{describe_step, CaseLabel, RoundingError, TraceStep};
use crate::rational::Rational;

/// Per-unit changes along a cycle `i1 j1 i2 j2 ... il jl`: the first edge
/// moves by -1, each query keeps its total and each inner advertiser keeps
/// its spend.
fn cycle_direction(ctx: &Context, nodes: &[usize], cols: &[usize]) -> Vec<Rational> {
    let mut z = Vec::with_capacity(cols.len());
    z.push(-Rational::from_integer(1.into()));
    for k in 1..cols.len() {
        let prev: &Rational = &z[k - 1];
        let next = if nodes[k] < ctx.m {
            -(&ctx.bids[cols[k - 1]] * prev) / &ctx.bids[cols[k]]
        } else {
            -prev.clone()
        };
        z.push(next);
    }
    z
}

/// Spend change at the starting advertiser per unit step.
fn start_gain(ctx: &Context, cols: &[usize], z: &[Rational]) -> Rational {
    let last = cols.len() - 1;
    &ctx.bids[cols[0]] * &z[0] + &ctx.bids[cols[last]] * &z[last]
}

/// Repeatedly breaks the lowest cycle of the fractional support until the
/// support is a forest. Each pass fixes at least one variable.
pub(crate) fn break_cycles(
    ctx: &Context,
    x: &mut [Rational],
    mut trace: Option<&mut Vec<TraceStep>>,
) -> Result<(), RoundingError> {
    loop {
        let forest = ctx.forest(x);
        let Some((mut nodes, mut cols)) = forest.find_cycle() else {
            return Ok(());
        };
        let mut z = cycle_direction(ctx, &nodes, &cols);
        if start_gain(ctx, &cols, &z).is_negative() {
            nodes = std::iter::once(nodes[0])
                .chain(nodes[1..].iter().rev().copied())
                .collect();
            cols.reverse();
            z = cycle_direction(ctx, &nodes, &cols);
            if start_gain(ctx, &cols, &z).is_negative() {
                return Err(RoundingError::Internal(
                    "cycle loses spend in both orientations".into(),
                ));
            }
        }
        // Shrink the closing edge so the first advertiser's spend is exact;
        // this can only lower the last query's total.
        let last = cols.len() - 1;
        z[last] = &ctx.bids[cols[0]] / &ctx.bids[cols[last]];

        let local: Vec<Rational> = cols.iter().map(|&c| x[c].clone()).collect();
        let step = max_step(&local, &z, &[]).unwrap_or_else(Rational::zero);
        if step.is_zero() {
            return Err(RoundingError::Internal("cycle step has zero length".into()));
        }
        let before = trace.as_ref().map(|_| x.to_vec());
        for (&c, d) in cols.iter().zip(&z) {
            x[c] += &step * d;
        }
        if let (Some(log), Some(before)) = (trace.as_deref_mut(), before) {
            log.push(describe_step(
                ctx,
                CaseLabel::CycleBreak,
                &cols,
                &before,
                x,
                &step,
                &Rational::zero(),
                Branch::Deterministic,
            ));
        }
    }
}

//! The randomized step: move along a null-space direction of the active
//! equality rows as far as the box and the guard inequalities allow.

use num_traits::{One, Signed, Zero};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::linalg::null_space;
use super::RoundingError;
use crate::lp::RowTag;
use crate::rational::{format_rational, Rational};
use crate::sampling::Categorical;

/// `coeffs · x <= rhs` over the subsystem's columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guard {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
    pub tag: Option<RowTag>,
}

impl Guard {
    pub fn slack(&self, x: &[Rational]) -> Rational {
        &self.rhs - dot(&self.coeffs, x)
    }
}

/// Equality rows are homogeneous: any move `r` must satisfy `row · r = 0`,
/// so their current activity is kept exactly.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Subsystem {
    /// LP columns the subsystem acts on, in local order.
    pub columns: Vec<usize>,
    pub rows: Vec<Vec<Rational>>,
    pub guards: Vec<Guard>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
    Deterministic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveOutcome {
    pub values: Vec<Rational>,
    pub direction: Vec<Rational>,
    pub alpha: Rational,
    pub beta: Rational,
    pub branch: Branch,
}

pub(crate) fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, _)| !x.is_zero())
        .map(|(x, y)| x * y)
        .sum()
}

/// Largest `t >= 0` keeping `x + t d` in the box and under every guard.
pub(crate) fn max_step(x: &[Rational], d: &[Rational], guards: &[Guard]) -> Option<Rational> {
    let mut best: Option<Rational> = None;
    let mut offer = |t: Rational| {
        if best.as_ref().is_none_or(|b| t < *b) {
            best = Some(t);
        }
    };
    for (xi, di) in x.iter().zip(d) {
        if di.is_positive() {
            offer((Rational::one() - xi) / di);
        } else if di.is_negative() {
            offer(xi / -di.clone());
        }
    }
    for g in guards {
        let rate = dot(&g.coeffs, d);
        if rate.is_positive() {
            offer(g.slack(x) / rate);
        }
    }
    best
}

fn check_start(sub: &Subsystem, current: &[Rational]) -> Result<(), RoundingError> {
    if current.len() != sub.columns.len() {
        return Err(RoundingError::Internal(format!(
            "{} values for a subsystem over {} columns",
            current.len(),
            sub.columns.len()
        )));
    }
    for g in &sub.guards {
        let slack = g.slack(current);
        if slack.is_negative() {
            return Err(RoundingError::Internal(format!(
                "guard {:?} already violated by {}",
                g.tag,
                format_rational(&-slack)
            )));
        }
    }
    Ok(())
}

/// First null-space basis vector, scaled so its first nonzero entry is
/// positive.
pub fn direction(sub: &Subsystem) -> Result<Vec<Rational>, RoundingError> {
    let mut r = null_space(&sub.rows, sub.columns.len())
        .into_iter()
        .next()
        .ok_or_else(|| RoundingError::Internal("subsystem has a trivial null space".into()))?;
    if r.iter()
        .find(|v| !v.is_zero())
        .is_some_and(|v| v.is_negative())
    {
        for v in r.iter_mut() {
            *v = -v.clone();
        }
    }
    Ok(r)
}

/// Moves to `x + alpha r` with probability `beta / (alpha + beta)` and to
/// `x - beta r` otherwise, with both step lengths maximal. The expected
/// position equals `current`.
pub fn rand_move<R: RngCore + ?Sized>(
    sub: &Subsystem,
    current: &[Rational],
    rng: &mut R,
) -> Result<MoveOutcome, RoundingError> {
    check_start(sub, current)?;
    let r = direction(sub)?;
    let neg: Vec<Rational> = r.iter().map(|v| -v.clone()).collect();
    let alpha = max_step(current, &r, &sub.guards).unwrap_or_else(Rational::zero);
    let beta = max_step(current, &neg, &sub.guards).unwrap_or_else(Rational::zero);
    if alpha.is_zero() || beta.is_zero() {
        return Err(RoundingError::Internal(format!(
            "degenerate move: alpha = {}, beta = {}",
            format_rational(&alpha),
            format_rational(&beta)
        )));
    }
    let plus_prob = &beta / (&alpha + &beta);
    let plus = Categorical::bernoulli(&plus_prob)
        .expect("beta / (alpha + beta) lies in (0, 1)")
        .sample(rng)
        .is_some();
    let (step, branch) = if plus {
        (alpha.clone(), Branch::Plus)
    } else {
        (-beta.clone(), Branch::Minus)
    };
    let values = current.iter().zip(&r).map(|(x, d)| x + &step * d).collect();
    Ok(MoveOutcome {
        values,
        direction: r,
        alpha,
        beta,
        branch,
    })
}

/// Deterministic maximal step along `d` (no randomness).
pub fn directed_move(
    sub: &Subsystem,
    current: &[Rational],
    d: Vec<Rational>,
) -> Result<MoveOutcome, RoundingError> {
    check_start(sub, current)?;
    let t = max_step(current, &d, &sub.guards).unwrap_or_else(Rational::zero);
    if t.is_zero() {
        return Err(RoundingError::Internal(
            "deterministic move has zero length".into(),
        ));
    }
    let values = current.iter().zip(&d).map(|(x, v)| x + &t * v).collect();
    Ok(MoveOutcome {
        values,
        direction: d,
        alpha: t,
        beta: Rational::zero(),
        branch: Branch::Deterministic,
    })
}

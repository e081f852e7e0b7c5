//! Exact sampling from distributions with rational probabilities.
//!
//! Weights are scaled to integers over their common denominator and a
//! uniform integer below that denominator picks the outcome, so no
//! floating-point rounding enters any draw.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rational::{common_denominator, Rational};

/// Deterministic per-trial generator derived from a master seed.
///
/// Trials use disjoint ChaCha streams, so results do not depend on the
/// order in which workers pick up trials.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone)]
enum Scale {
    Small {
        total: u64,
        cumulative: Vec<u64>,
    },
    Big {
        total: BigUint,
        cumulative: Vec<BigUint>,
    },
}

/// Categorical distribution over `0..k` plus an implicit "none" outcome
/// carrying the residual mass `1 - sum(weights)`.
#[derive(Debug, Clone)]
pub struct Categorical {
    scale: Scale,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SamplingError {
    #[error("probability weight {0} is outside [0, 1]")]
    OutOfRange(String),
    #[error("probability weights sum to {0}, which exceeds 1")]
    MassExceedsOne(String),
}

impl Categorical {
    pub fn new(weights: &[Rational]) -> Result<Self, SamplingError> {
        let mut sum = Rational::zero();
        for w in weights {
            if w.is_negative() || *w > Rational::one() {
                return Err(SamplingError::OutOfRange(crate::rational::format_rational(
                    w,
                )));
            }
            sum += w;
        }
        if sum > Rational::one() {
            return Err(SamplingError::MassExceedsOne(
                crate::rational::format_rational(&sum),
            ));
        }
        let denom = common_denominator(weights.iter());
        let scaled: Vec<BigUint> = weights
            .iter()
            .map(|w| {
                let v: BigInt = w.numer() * (&denom / w.denom());
                v.to_biguint().unwrap_or_default()
            })
            .collect();
        let total = denom.to_biguint().expect("denominators are positive");
        let mut cumulative = Vec::with_capacity(scaled.len());
        let mut acc = BigUint::zero();
        for s in scaled {
            acc += s;
            cumulative.push(acc.clone());
        }
        let scale = match (
            total.to_u64(),
            cumulative
                .iter()
                .map(|c| c.to_u64())
                .collect::<Option<Vec<_>>>(),
        ) {
            (Some(total), Some(cumulative)) => Scale::Small { total, cumulative },
            _ => Scale::Big { total, cumulative },
        };
        Ok(Categorical { scale })
    }

    /// Bernoulli draw with rational success probability.
    pub fn bernoulli(p: &Rational) -> Result<Self, SamplingError> {
        Self::new(std::slice::from_ref(p))
    }

    /// Returns the chosen index, or `None` for the residual outcome.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        match &self.scale {
            Scale::Small { total, cumulative } => {
                if cumulative.last().copied().unwrap_or(0) == 0 {
                    return None;
                }
                let u = rng.gen_range(0..*total);
                cumulative.iter().position(|&c| u < c)
            }
            Scale::Big { total, cumulative } => {
                if cumulative.last().is_none_or(|c| c.is_zero()) {
                    return None;
                }
                let u = uniform_below(total, rng);
                cumulative.iter().position(|c| &u < c)
            }
        }
    }
}

/// Uniform integer in `[0, bound)` by rejection from random bytes.
fn uniform_below<R: RngCore + ?Sized>(bound: &BigUint, rng: &mut R) -> BigUint {
    let bits = bound.bits();
    let bytes = bits.div_ceil(8) as usize;
    let excess = (bytes as u64) * 8 - bits;
    let mut buf = vec![0u8; bytes];
    loop {
        rng.fill_bytes(&mut buf);
        // big-endian: mask the leading byte down to `bits` bits
        buf[0] &= 0xffu8 >> excess;
        let candidate = BigUint::from_bytes_be(&buf);
        if &candidate < bound {
            return candidate;
        }
    }
}

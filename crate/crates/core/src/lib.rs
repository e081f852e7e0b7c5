//! Budgeted and capacitated ad allocation.
//!
//! The crate covers the offline problem (exact LP relaxations and a
//! dependent randomized rounding that keeps capacities exact) and the
//! stochastic online problem (three LP-guided allocators and the
//! knapsack dynamic program behind them), plus brute-force oracles and a
//! seeded Monte Carlo harness for checking them against each other.

pub mod cli;
pub mod harness;
pub mod knapsack;
pub mod lp;
pub mod model;
pub mod offline_rounding;
pub mod online;
pub mod oracle;
pub mod rational;
pub mod sampling;

pub use model::{
    Advertiser, Customer, FractionalAssignment, Instance, IntegralAssignment, ModelError, Query,
    Scenario,
};
pub use rational::Rational;

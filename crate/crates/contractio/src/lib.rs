//! A numerical laboratory for moments of contraction of quantum channels.
//!
//! The crate samples random quantum states, pushes them through channels,
//! evaluates divergences, estimates the p-th moments of the contraction
//! ratio by seeded Monte Carlo, and evaluates the analytic bounds and
//! asymptotic verdicts that govern those moments.

pub mod bounds;
pub mod channels;
pub mod circuits;
pub mod config;
pub mod divergences;
pub mod ensembles;
pub mod error;
pub mod estimator;
pub mod exec;
pub mod linalg;
pub mod quad;
pub mod runner;

pub mod testutil;

pub use error::{Error, Result};

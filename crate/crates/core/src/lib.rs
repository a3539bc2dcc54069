//! Least-cost hydrogen supply-chain planning.
//!
//! The crate turns a case (network, technology catalog, representative-period
//! time grid and scenario) into a sparse MILP, solves it with a reference
//! simplex and branch-and-bound solver or exports it as MPS, and audits the
//! result against the domain equations.

pub mod audit;
pub mod error;
pub mod instance;
pub mod io;
pub mod builder;
pub mod model;
pub mod solver;
pub mod sweep;

#[cfg(test)]
mod testkit;

pub use error::Error;

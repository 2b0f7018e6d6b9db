//! Exact computation with tilted, conditioned and coupled distributions of
//! independent integer-valued random variables.
//!
//! The crate provides:
//!
//! - construction, validation and exponential tilting of pmfs on the
//!   nonnegative integers ([`pmf`], [`family`]);
//! - exact partial-sum laws by log-domain convolution, cumulant functions
//!   and tail bounds ([`sumstats`]);
//! - conditional (fixed-sum) joint distributions, their marginals, and
//!   exact stochastic-dominance certification by transportation feasibility
//!   ([`canonical`]);
//! - continuous-time chains whose stationary laws are those conditionals:
//!   constrained birth-death chains and capacity-limited particle systems,
//!   with order-preserving couplings and an exact-event simulator
//!   ([`chains`]);
//! - total-variation convergence experiments for conditioned laws against
//!   their tilted product targets ([`gcp`]);
//! - a deterministic command-line front end ([`cli`]).
//!
//! All probability arithmetic is log-domain; randomness enters only through
//! explicit seeds.

pub mod canonical;
pub mod chains;
pub mod cli;
pub mod error;
pub mod family;
pub mod gcp;
pub mod interval;
pub mod logsum;
pub mod maxflow;
pub mod pmf;
pub mod sumstats;

pub use error::{Error, Result};
pub use family::{Family, FamilySpec, MemberSpec};
pub use interval::IntInterval;
pub use pmf::{check_log_concave, LogConcavityReport, Pmf};

//! Continuous-time Markov chains whose stationary laws are the conditioned
//! distributions built elsewhere in the crate.
//!
//! Every chain variant implements [`sim::JumpProcess`], so one exact-event
//! simulator drives all of them: single and coupled birth-death chains on an
//! interval, and single and coupled capacity-limited particle systems.

pub mod bd;
pub mod sim;
pub mod stationary;
pub mod zr;

pub use bd::{bd_stationary, coupled_bd_stationary, BirthDeathChain, CoupledBirthDeathChain};
pub use sim::{simulate, CtmcTrace, JumpProcess};
pub use zr::{CoupledZeroRangeChain, ZeroRangeChain, ZeroRangeSpec};

//! Birth-death chains on an interval, reversible for tilted conditioned
//! laws, and the order-preserving coupling of two of them.
//!
//! For a base pmf π, the chain moves up at rate λ and down from k at rate
//! π(k−1)/π(k), both clamped to the interval. Detailed balance makes the
//! λ-tilt of π, conditioned on the interval, its stationary law. Coupling
//! two chains that share the base (so death rates agree) with λ ≤ λ′ keeps
//! the marginals ordered for all time.

use serde::Serialize;

use crate::chains::sim::JumpProcess;
use crate::chains::stationary::gth_stationary;
use crate::error::{Error, Result};
use crate::interval::IntInterval;
use crate::logsum::{normalize_log, LOG_ZERO};
use crate::pmf::Pmf;

/// Single constrained birth-death chain.
#[derive(Debug, Clone)]
pub struct BirthDeathChain {
    base: Pmf,
    lambda: f64,
    interval: IntInterval,
}

impl BirthDeathChain {
    pub fn new(base: Pmf, lambda: f64, interval: IntInterval) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "birth rate must be positive, got {lambda}"
            )));
        }
        if interval.is_empty() {
            return Err(Error::InvalidParameter("empty interval".into()));
        }
        if interval.lo() < 0 || interval.hi() > base.support_max() as i64 {
            return Err(Error::InvalidParameter(format!(
                "interval {interval} outside the base support [0, {}]",
                base.support_max()
            )));
        }
        for k in interval.iter() {
            if base.log_prob(k as usize) == LOG_ZERO {
                return Err(Error::InvalidDistribution(format!(
                    "base mass vanishes at {k} inside the interval; death rates undefined"
                )));
            }
        }
        Ok(BirthDeathChain {
            base,
            lambda,
            interval,
        })
    }

    pub fn interval(&self) -> IntInterval {
        self.interval
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn base(&self) -> &Pmf {
        &self.base
    }

    /// Rate of k → k+1.
    pub fn up_rate(&self, k: i64) -> f64 {
        if self.interval.contains(k) && self.interval.contains(k + 1) {
            self.lambda
        } else {
            0.0
        }
    }

    /// Rate of k → k−1: π(k−1)/π(k), independent of λ.
    pub fn down_rate(&self, k: i64) -> f64 {
        if self.interval.contains(k) && self.interval.contains(k - 1) {
            (self.base.log_prob(k as usize - 1) - self.base.log_prob(k as usize)).exp()
        } else {
            0.0
        }
    }
}

impl JumpProcess for BirthDeathChain {
    type State = i64;

    fn transitions(&self, state: &i64, out: &mut Vec<(i64, f64)>) {
        let up = self.up_rate(*state);
        if up > 0.0 {
            out.push((state + 1, up));
        }
        let down = self.down_rate(*state);
        if down > 0.0 {
            out.push((state - 1, down));
        }
    }
}

/// A distribution supported on an integer interval.
#[derive(Debug, Clone)]
pub struct IntervalDist {
    pub lo: i64,
    pub log_probs: Vec<f64>,
}

impl IntervalDist {
    pub fn log_prob(&self, k: i64) -> f64 {
        let idx = k - self.lo;
        if idx < 0 || idx as usize >= self.log_probs.len() {
            LOG_ZERO
        } else {
            self.log_probs[idx as usize]
        }
    }

    pub fn prob(&self, k: i64) -> f64 {
        self.log_prob(k).exp()
    }
}

/// Stationary law of the single chain, from the detailed-balance recursion
/// s(k+1)/s(k) = up(k)/down(k+1). Equals the λ-tilt of the base conditioned
/// on the interval.
pub fn bd_stationary(chain: &BirthDeathChain) -> IntervalDist {
    let i = chain.interval();
    let mut log_probs = Vec::with_capacity(i.len());
    let mut cur = 0.0f64;
    log_probs.push(cur);
    for k in i.lo()..i.hi() {
        cur += chain.up_rate(k).ln() - chain.down_rate(k + 1).ln();
        log_probs.push(cur);
    }
    normalize_log(&mut log_probs);
    IntervalDist {
        lo: i.lo(),
        log_probs,
    }
}

/// Coupled pair of birth-death chains sharing base and interval, λ ≤ λ′.
#[derive(Debug, Clone)]
pub struct CoupledBirthDeathChain {
    first: BirthDeathChain,
    lambda_prime: f64,
}

impl CoupledBirthDeathChain {
    pub fn new(base: Pmf, lambda: f64, lambda_prime: f64, interval: IntInterval) -> Result<Self> {
        if !(lambda <= lambda_prime) {
            return Err(Error::InvalidParameter(format!(
                "coupling needs lambda <= lambda2, got {lambda} > {lambda_prime}"
            )));
        }
        Ok(CoupledBirthDeathChain {
            first: BirthDeathChain::new(base, lambda, interval)?,
            lambda_prime,
        })
    }

    pub fn interval(&self) -> IntInterval {
        self.first.interval()
    }

    pub fn lambda(&self) -> f64 {
        self.first.lambda()
    }

    pub fn lambda_prime(&self) -> f64 {
        self.lambda_prime
    }

    pub fn first(&self) -> &BirthDeathChain {
        &self.first
    }

    fn in_i(&self, k: i64) -> bool {
        self.first.interval().contains(k)
    }

    fn death(&self, k: i64) -> f64 {
        self.first.down_rate(k)
    }
}

impl JumpProcess for CoupledBirthDeathChain {
    type State = (i64, i64);

    /// The coupled rates: on the diagonal the chains move together (joint
    /// birth at λ, joint death at the shared rate) and the second marginal
    /// gains the birth excess λ′−λ alone; off the diagonal the marginals
    /// jump independently.
    fn transitions(&self, state: &(i64, i64), out: &mut Vec<((i64, i64), f64)>) {
        let (k, kp) = *state;
        let lambda = self.first.lambda();
        if k == kp {
            if self.in_i(k + 1) {
                out.push(((k + 1, kp + 1), lambda));
                let excess = self.lambda_prime - lambda;
                if excess > 0.0 {
                    out.push(((k, kp + 1), excess));
                }
            }
            if self.in_i(k - 1) {
                out.push(((k - 1, kp - 1), self.death(k)));
            }
        } else {
            if self.in_i(k + 1) {
                out.push(((k + 1, kp), lambda));
            }
            if self.in_i(kp + 1) {
                out.push(((k, kp + 1), self.lambda_prime));
            }
            if self.in_i(kp - 1) {
                out.push(((k, kp - 1), self.death(kp)));
            }
            if self.in_i(k - 1) {
                out.push(((k - 1, kp), self.death(k)));
            }
        }
    }
}

/// Stationary distribution of the coupled chain.
#[derive(Debug, Clone, Serialize)]
pub struct CoupledStationary {
    pub lo: i64,
    pub len: usize,
    /// Dense row-major probabilities over the interval square; states the
    /// chain cannot reach from the ordered class carry zero.
    pub probs: Vec<f64>,
    pub mass_unordered: f64,
    pub marginal_first: Vec<f64>,
    pub marginal_second: Vec<f64>,
}

impl CoupledStationary {
    pub fn prob(&self, k: i64, kp: i64) -> f64 {
        let (a, b) = ((k - self.lo) as usize, (kp - self.lo) as usize);
        self.probs[a * self.len + b]
    }
}

/// Default cap on the interval length for the dense stationary solve; the
/// reachable class holds |I|(|I|+1)/2 states and the solve is cubic in that.
pub const DEFAULT_COUPLED_SOLVE_CAP: usize = 64;

/// Solve the global balance equations of the coupled chain on the class
/// reachable from the bottom state (the chain is not reversible, so this is
/// a genuine linear solve).
///
/// Starting from (lo, lo), states with k > k′ are unreachable; restricting
/// to the ordered class keeps the system irreducible and nonsingular.
pub fn coupled_bd_stationary(
    chain: &CoupledBirthDeathChain,
    max_interval_len: usize,
) -> Result<CoupledStationary> {
    let i = chain.interval();
    let len = i.len();
    if len > max_interval_len {
        return Err(Error::InstanceTooLarge(format!(
            "interval length {len} above the dense-solve cap {max_interval_len}"
        )));
    }
    let lo = i.lo();
    // Enumerate the reachable class.
    let diagonal_only = chain.lambda() == chain.lambda_prime();
    let mut index: std::collections::HashMap<(i64, i64), usize> = std::collections::HashMap::new();
    let mut states: Vec<(i64, i64)> = Vec::new();
    for k in i.iter() {
        for kp in k..=i.hi() {
            if diagonal_only && kp != k {
                continue;
            }
            index.insert((k, kp), states.len());
            states.push((k, kp));
        }
    }
    let m = states.len();
    let mut rates = vec![0.0f64; m * m];
    let mut buf = Vec::new();
    for (s_idx, s) in states.iter().enumerate() {
        buf.clear();
        chain.transitions(s, &mut buf);
        for (target, rate) in &buf {
            let t_idx = *index.get(target).ok_or_else(|| {
                Error::Internal(format!(
                    "transition left the ordered class: {s:?} -> {target:?}"
                ))
            })?;
            rates[s_idx * m + t_idx] += rate;
        }
    }
    let pi = gth_stationary(&mut rates, m);

    let mut probs = vec![0.0f64; len * len];
    for (p, (k, kp)) in pi.iter().zip(&states) {
        probs[((k - lo) as usize) * len + (kp - lo) as usize] = *p;
    }
    let mut mass_unordered = 0.0;
    let mut marginal_first = vec![0.0f64; len];
    let mut marginal_second = vec![0.0f64; len];
    for a in 0..len {
        for b in 0..len {
            let p = probs[a * len + b];
            if a > b {
                mass_unordered += p;
            }
            marginal_first[a] += p;
            marginal_second[b] += p;
        }
    }
    Ok(CoupledStationary {
        lo,
        len,
        probs,
        mass_unordered,
        marginal_first,
        marginal_second,
    })
}

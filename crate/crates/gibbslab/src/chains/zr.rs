//! Capacity-limited particle systems with site-dependent departure rates,
//! and the basic coupling of two copies.
//!
//! A particle leaves site i at rate g_i(x_i) toward each site j with room
//! (x_j < max_j); with all capacities infinite this is the nonhomogeneous
//! zero-range dynamics. With g_i(z) = ν_i(z−1)/ν_i(z) the fixed-sum
//! conditional of the product of the ν_i is reversible, which is what makes
//! these chains useful here.

use crate::chains::sim::JumpProcess;
use crate::error::{Error, Result};
use crate::family::Family;
use crate::logsum::LOG_ZERO;

/// Sites, capacities and per-site departure rates.
#[derive(Debug, Clone)]
pub struct ZeroRangeSpec {
    /// Per-site capacity.
    max: Vec<u32>,
    /// g[i][z] for z in 0..=max[i]; g[i][0] = 0.
    g: Vec<Vec<f64>>,
}

impl ZeroRangeSpec {
    pub fn new(max: Vec<u32>, g: Vec<Vec<f64>>) -> Result<Self> {
        if max.len() != g.len() || max.is_empty() {
            return Err(Error::InvalidParameter(
                "need one rate function per site".into(),
            ));
        }
        for (i, (gi, mi)) in g.iter().zip(&max).enumerate() {
            if gi.len() != *mi as usize + 1 {
                return Err(Error::InvalidParameter(format!(
                    "rate function at site {i} must have max+1 = {} entries",
                    mi + 1
                )));
            }
            if gi[0] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "g({i})(0) must be 0, got {}",
                    gi[0]
                )));
            }
            if gi.iter().any(|&v| !v.is_finite() || v < 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "rates at site {i} must be finite and nonnegative"
                )));
            }
        }
        Ok(ZeroRangeSpec { max, g })
    }

    /// Rates from the first `n` family members: g_i(z) = ν_i(z−1)/ν_i(z) on
    /// the member support, which requires positivity there.
    pub fn from_family(family: &Family, n: usize) -> Result<Self> {
        let mut max = Vec::with_capacity(n);
        let mut g = Vec::with_capacity(n);
        for i in 0..n {
            let m = family.member(i);
            let top = m.last_positive();
            if (0..=top).any(|x| m.log_prob(x) == LOG_ZERO) {
                return Err(Error::InvalidDistribution(format!(
                    "member {i} has zero mass inside [0, {top}]; departure rates undefined"
                )));
            }
            let mut gi = Vec::with_capacity(top + 1);
            gi.push(0.0);
            for z in 1..=top {
                gi.push((m.log_prob(z - 1) - m.log_prob(z)).exp());
            }
            // Ratios that are equal in exact arithmetic can wiggle by a few
            // ulps; snap those so the monotone contract is decided by the
            // real shape of the pmf, not rounding noise.
            for z in 2..gi.len() {
                if gi[z] < gi[z - 1] && gi[z] >= gi[z - 1] * (1.0 - 1e-12) {
                    gi[z] = gi[z - 1];
                }
            }
            max.push(top as u32);
            g.push(gi);
        }
        ZeroRangeSpec::new(max, g)
    }

    pub fn n_sites(&self) -> usize {
        self.max.len()
    }

    pub fn max(&self, i: usize) -> u32 {
        self.max[i]
    }

    pub fn capacity(&self) -> u64 {
        self.max.iter().map(|&m| m as u64).sum()
    }

    pub fn rate(&self, i: usize, z: u32) -> f64 {
        self.g[i][z as usize]
    }

    /// All rate functions nondecreasing — the hypothesis for the monotone
    /// coupling.
    pub fn is_monotone(&self) -> bool {
        self.g
            .iter()
            .all(|gi| gi.windows(2).all(|w| w[1] >= w[0]))
    }

    /// `k` particles stacked leftward: fill site 0 to capacity, overflow to
    /// site 1, and so on.
    pub fn stacked_initial(&self, k: u64) -> Result<Vec<u32>> {
        if k > self.capacity() {
            return Err(Error::InvalidParameter(format!(
                "{k} particles exceed total capacity {}",
                self.capacity()
            )));
        }
        let mut left = k;
        let mut x = vec![0u32; self.n_sites()];
        for (xi, &mi) in x.iter_mut().zip(&self.max) {
            let take = left.min(mi as u64);
            *xi = take as u32;
            left -= take;
            if left == 0 {
                break;
            }
        }
        Ok(x)
    }

    pub fn is_valid_config(&self, x: &[u32]) -> bool {
        x.len() == self.n_sites() && x.iter().zip(&self.max).all(|(xi, mi)| xi <= mi)
    }
}

/// Single particle system.
#[derive(Debug, Clone)]
pub struct ZeroRangeChain {
    pub spec: ZeroRangeSpec,
}

impl ZeroRangeChain {
    pub fn new(spec: ZeroRangeSpec) -> Self {
        ZeroRangeChain { spec }
    }

    /// Enumerate all moves (i, j, rate) from `x`.
    pub fn moves(&self, x: &[u32]) -> Vec<(usize, usize, f64)> {
        let n = self.spec.n_sites();
        let mut out = Vec::new();
        for i in 0..n {
            if x[i] == 0 {
                continue;
            }
            let r = self.spec.rate(i, x[i]);
            if r <= 0.0 {
                continue;
            }
            for j in 0..n {
                if j != i && x[j] < self.spec.max(j) {
                    out.push((i, j, r));
                }
            }
        }
        out
    }
}

fn apply_move(x: &[u32], i: usize, j: usize) -> Vec<u32> {
    let mut z = x.to_vec();
    z[i] -= 1;
    z[j] += 1;
    z
}

impl JumpProcess for ZeroRangeChain {
    type State = Vec<u32>;

    fn transitions(&self, state: &Vec<u32>, out: &mut Vec<(Vec<u32>, f64)>) {
        for (i, j, r) in self.moves(state) {
            out.push((apply_move(state, i, j), r));
        }
    }
}

/// Which clause of the basic coupling produced a move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingClause {
    /// Both copies move i→j at the shared rate min(g(x_i), g(x′_i)).
    Joint,
    /// Only the second moves at the shared rate: the first's target is full.
    SecondOnlyFirstBlocked,
    /// Only the first moves at the shared rate: the second's target is full.
    FirstOnlySecondBlocked,
    /// Second moves alone on its rate excess (g(x′_i) − g(x_i))⁺.
    SecondExcess,
    /// First moves alone on its rate excess (g(x_i) − g(x′_i))⁺.
    FirstExcess,
}

/// One coupled transition.
#[derive(Debug, Clone)]
pub struct CoupledMove {
    pub from_site: usize,
    pub to_site: usize,
    pub clause: CouplingClause,
    pub rate: f64,
    pub target: (Vec<u32>, Vec<u32>),
}

/// The basic coupling of two copies of the same particle system.
#[derive(Debug, Clone)]
pub struct CoupledZeroRangeChain {
    pub spec: ZeroRangeSpec,
}

impl CoupledZeroRangeChain {
    /// Monotone contract: refuses non-nondecreasing rates unless
    /// `allow_non_monotone` is set (counterexample exploration).
    pub fn new(spec: ZeroRangeSpec, allow_non_monotone: bool) -> Result<Self> {
        if !spec.is_monotone() && !allow_non_monotone {
            return Err(Error::MonotonicityUnavailable(
                "a departure rate decreases in the occupancy; pass the override to simulate anyway"
                    .into(),
            ));
        }
        Ok(CoupledZeroRangeChain { spec })
    }

    /// All coupled moves from `(x, x′)`, clause by clause.
    pub fn coupled_moves(&self, x: &[u32], xp: &[u32]) -> Vec<CoupledMove> {
        let n = self.spec.n_sites();
        let mut out = Vec::new();
        for i in 0..n {
            let a = if x[i] > 0 { self.spec.rate(i, x[i]) } else { 0.0 };
            let b = if xp[i] > 0 { self.spec.rate(i, xp[i]) } else { 0.0 };
            let shared = a.min(b);
            for j in 0..n {
                if j == i {
                    continue;
                }
                let x_free = x[j] < self.spec.max(j);
                let xp_free = xp[j] < self.spec.max(j);
                if shared > 0.0 {
                    match (x_free, xp_free) {
                        (true, true) => out.push(CoupledMove {
                            from_site: i,
                            to_site: j,
                            clause: CouplingClause::Joint,
                            rate: shared,
                            target: (apply_move(x, i, j), apply_move(xp, i, j)),
                        }),
                        (false, true) => out.push(CoupledMove {
                            from_site: i,
                            to_site: j,
                            clause: CouplingClause::SecondOnlyFirstBlocked,
                            rate: shared,
                            target: (x.to_vec(), apply_move(xp, i, j)),
                        }),
                        (true, false) => out.push(CoupledMove {
                            from_site: i,
                            to_site: j,
                            clause: CouplingClause::FirstOnlySecondBlocked,
                            rate: shared,
                            target: (apply_move(x, i, j), xp.to_vec()),
                        }),
                        (false, false) => {}
                    }
                }
                let second_excess = (b - a).max(0.0);
                if second_excess > 0.0 && xp_free {
                    out.push(CoupledMove {
                        from_site: i,
                        to_site: j,
                        clause: CouplingClause::SecondExcess,
                        rate: second_excess,
                        target: (x.to_vec(), apply_move(xp, i, j)),
                    });
                }
                let first_excess = (a - b).max(0.0);
                if first_excess > 0.0 && x_free {
                    out.push(CoupledMove {
                        from_site: i,
                        to_site: j,
                        clause: CouplingClause::FirstExcess,
                        rate: first_excess,
                        target: (apply_move(x, i, j), xp.to_vec()),
                    });
                }
            }
        }
        out
    }
}

impl JumpProcess for CoupledZeroRangeChain {
    type State = (Vec<u32>, Vec<u32>);

    fn transitions(&self, state: &(Vec<u32>, Vec<u32>), out: &mut Vec<((Vec<u32>, Vec<u32>), f64)>) {
        for mv in self.coupled_moves(&state.0, &state.1) {
            out.push((mv.target, mv.rate));
        }
    }
}

pub fn config_leq(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Simulate the basic coupling from an ordered pair, asserting the order
/// after every event. Returns the trace and the violation count, which the
/// monotone contract pins at zero.
pub fn coupled_zr_simulate(
    chain: &CoupledZeroRangeChain,
    x0: Vec<u32>,
    x0p: Vec<u32>,
    t_end: f64,
    seed: u64,
    stream: u64,
    event_cap: usize,
) -> Result<(crate::chains::sim::CtmcTrace<(Vec<u32>, Vec<u32>)>, u64)> {
    if !chain.spec.is_valid_config(&x0) || !chain.spec.is_valid_config(&x0p) {
        return Err(Error::InvalidParameter(
            "initial configurations violate site capacities".into(),
        ));
    }
    if !config_leq(&x0, &x0p) {
        return Err(Error::InvalidParameter(
            "initial configurations must be ordered x0 <= x0'".into(),
        ));
    }
    let trace =
        crate::chains::sim::simulate_with_stream(chain, (x0, x0p), t_end, seed, stream, event_cap);
    let violations = trace
        .events
        .iter()
        .filter(|(_, (x, xp))| !config_leq(x, xp))
        .count() as u64;
    Ok((trace, violations))
}

//! Convergence of conditioned laws to tilted product laws.
//!
//! Conditioning the first ℓ coordinates on a sum event {S_n > r}, {S_n < r}
//! or {S_n = ⌊r⌋} yields an exact finite table: the leading product weights
//! times the tail-sum mass of the shifted event, normalized. Experiments
//! track the total-variation distance of that table to the matching tilted
//! product law as n grows; on a fixed finite table TV convergence and
//! setwise convergence coincide, so TV is the strictest summary available.

use serde::Serialize;

use crate::canonical::{stochastic_dominance, JointTable, CONFIG_CAP};
use crate::error::{Error, Result};
use crate::family::Family;
use crate::interval::IntInterval;
use crate::logsum::{log_sum_exp, normalize_log, LOG_ZERO};
use crate::pmf::Pmf;
use crate::sumstats::{condition_check, r_star, ConditionTrend, SumLawChain};

/// Side of the threshold a conditioning event takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// {S_n > r}
    Above,
    /// {S_n < r}
    Below,
    /// {S_n = ⌊r⌋}
    EqualFloor,
}

impl Mode {
    pub fn event(&self, r: f64) -> IntInterval {
        match self {
            Mode::Above => IntInterval::above(r),
            Mode::Below => IntInterval::below(r),
            Mode::EqualFloor => IntInterval::singleton(r.floor() as i64),
        }
    }
}

/// Exact law of the first ℓ coordinates given a sum event.
#[derive(Debug, Clone)]
pub struct ConditionedLaw {
    pub ell: usize,
    pub n: usize,
    pub lambda: f64,
    pub mode: Mode,
    pub r: f64,
    pub joint: JointTable,
    pub log_event_mass: f64,
}

/// Log-mass of `interval` under the law stored as `log_probs`, through
/// one-directional cumulative sums (no cancellation).
fn interval_mass(log_probs: &[f64], interval: &IntInterval) -> f64 {
    let i = interval.clamp_to_support(log_probs.len() as i64 - 1);
    if i.is_empty() {
        return LOG_ZERO;
    }
    log_sum_exp(&log_probs[i.lo() as usize..=i.hi() as usize])
}

/// Dense dims of the first ℓ members, capped.
fn leading_dims(family: &Family, ell: usize) -> Result<Vec<usize>> {
    let dims: Vec<usize> = (0..ell).map(|i| family.member(i).len()).collect();
    dims.iter()
        .try_fold(1usize, |acc, &d| {
            acc.checked_mul(d).filter(|&t| t <= CONFIG_CAP)
        })
        .ok_or_else(|| {
            Error::InstanceTooLarge(format!(
                "product of the first {ell} member supports exceeds {CONFIG_CAP}"
            ))
        })?;
    Ok(dims)
}

fn conditioned_from_tail(
    family: &Family,
    lambda: f64,
    ell: usize,
    n: usize,
    tail_log: &[f64],
    mode: Mode,
    r: f64,
) -> Result<ConditionedLaw> {
    let dims = leading_dims(family, ell)?;
    let tilted: Vec<Pmf> = (0..ell)
        .map(|i| family.tilted_member(i, lambda))
        .collect::<Result<_>>()?;
    let event = mode.event(r);
    let total: usize = dims.iter().product();
    let mut weights = vec![LOG_ZERO; total];
    let mut cfg = vec![0usize; ell];
    for (idx, slot) in weights.iter_mut().enumerate() {
        let mut rem = idx;
        for (s, d) in cfg.iter_mut().zip(&dims).rev() {
            *s = rem % d;
            rem /= d;
        }
        let mut w = 0.0f64;
        for (i, &x) in cfg.iter().enumerate() {
            let l = tilted[i].log_prob(x);
            if l == LOG_ZERO {
                w = LOG_ZERO;
                break;
            }
            w += l;
        }
        if w == LOG_ZERO {
            continue;
        }
        let s_x: usize = cfg.iter().sum();
        let tail_mass = interval_mass(tail_log, &event.shifted_down(s_x as i64));
        if tail_mass == LOG_ZERO {
            continue;
        }
        *slot = w + tail_mass;
    }
    let log_event_mass = log_sum_exp(&weights);
    if log_event_mass == LOG_ZERO {
        return Err(Error::EmptyCondition {
            interval: event.to_string(),
            available_log_mass: LOG_ZERO,
        });
    }
    for w in &mut weights {
        if *w != LOG_ZERO {
            *w -= log_event_mass;
        }
    }
    Ok(ConditionedLaw {
        ell,
        n,
        lambda,
        mode,
        r,
        joint: JointTable::from_log_probs(dims, weights),
        log_event_mass,
    })
}

/// P(X₁..X_ℓ = · | S_n ∈ event) under a common tilt λ of all n members.
pub fn conditioned_law(
    family: &Family,
    lambda: f64,
    ell: usize,
    n: usize,
    mode: Mode,
    r: f64,
) -> Result<ConditionedLaw> {
    if ell == 0 || ell > n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= ell <= n, got ell {ell}, n {n}"
        )));
    }
    family.check_lambda(lambda)?;
    let mut chain = SumLawChain::new(family, lambda, ell)?;
    chain.advance_to(n - ell, ell)?;
    let mut tail = chain.raw_log_probs().to_vec();
    normalize_log(&mut tail);
    conditioned_from_tail(family, lambda, ell, n, &tail, mode, r)
}

/// Product of the λ-tilted leading marginals, the convergence target.
pub fn tilted_target(family: &Family, lambda: f64, ell: usize) -> Result<JointTable> {
    let tilted: Vec<Pmf> = (0..ell)
        .map(|i| family.tilted_member(i, lambda))
        .collect::<Result<_>>()?;
    JointTable::product_of(&tilted)
}

/// One row of a convergence experiment.
#[derive(Debug, Clone, Serialize)]
pub struct GcpRow {
    pub n: usize,
    pub r_star: f64,
    pub event_mass: f64,
    pub tv: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GcpReport {
    pub lambda_star: f64,
    pub ell: usize,
    pub mode: Mode,
    /// Tilt applied to the conditioned variables (1 = base variables).
    pub condition_lambda: f64,
    pub rows: Vec<GcpRow>,
    pub condition: ConditionTrend,
}

#[derive(Debug, Clone, Copy)]
pub struct GcpOptions {
    /// Tilt of the variables being conditioned; the default 1 conditions
    /// the base variables.
    pub condition_lambda: f64,
    /// Skip the mode/λ* hypothesis validation (exploration only).
    pub force: bool,
    /// Offset used for the cumulant-gap diagnostic.
    pub eps: f64,
}

impl Default for GcpOptions {
    fn default() -> Self {
        GcpOptions {
            condition_lambda: 1.0,
            force: false,
            eps: 0.1,
        }
    }
}

/// For each n: take r = E(S_n) under λ*, condition the first ℓ variables on
/// the mode event at r, and record the TV distance to the λ*-tilted product
/// target. The cumulant-gap diagnostic runs alongside on the same grid.
pub fn gcp_experiment(
    family: &Family,
    lambda_star: f64,
    ell: usize,
    n_list: &[usize],
    mode: Mode,
    opts: GcpOptions,
) -> Result<GcpReport> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter("empty n list".into()));
    }
    if n_list.iter().any(|&n| n < ell) {
        return Err(Error::InvalidParameter(format!(
            "every n must be at least ell = {ell}"
        )));
    }
    if !opts.force {
        match mode {
            Mode::Above if !(lambda_star > 1.0) => {
                return Err(Error::InvalidParameter(format!(
                    "mode above needs lambda_star > 1, got {lambda_star} (pass force to explore)"
                )));
            }
            Mode::Below if !(lambda_star < 1.0) => {
                return Err(Error::InvalidParameter(format!(
                    "mode below needs lambda_star < 1, got {lambda_star} (pass force to explore)"
                )));
            }
            _ => {}
        }
    }
    family.check_lambda(lambda_star)?;
    let target = tilted_target(family, lambda_star, ell)?;
    let condition = condition_check(family, lambda_star, opts.eps, n_list)?;

    let mut sorted: Vec<usize> = n_list.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut chain = SumLawChain::new(family, opts.condition_lambda, ell)?;
    let mut by_n = std::collections::HashMap::new();
    for &n in &sorted {
        chain.advance_to(n - ell, ell)?;
        let mut tail = chain.raw_log_probs().to_vec();
        normalize_log(&mut tail);
        let r = r_star(family, lambda_star, n)?;
        let law = conditioned_from_tail(
            family,
            opts.condition_lambda,
            ell,
            n,
            &tail,
            mode,
            r,
        )?;
        let tv = law.joint.tv_distance(&target)?;
        by_n.insert(
            n,
            GcpRow {
                n,
                r_star: r,
                event_mass: law.log_event_mass.exp(),
                tv,
            },
        );
    }
    let rows: Vec<GcpRow> = n_list.iter().map(|n| by_n[n].clone()).collect();
    Ok(GcpReport {
        lambda_star,
        ell,
        mode,
        condition_lambda: opts.condition_lambda,
        rows,
        condition,
    })
}

/// One side of a sandwich bracket.
#[derive(Debug, Clone, Serialize)]
pub struct BracketSide {
    pub lambda: f64,
    pub mode: Mode,
    pub event_mass: f64,
    /// TV distance of the bracket law to the λ*-tilted target.
    pub tv_to_target: f64,
    pub dominance_holds: bool,
    pub flow: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub lambda_star: f64,
    pub ell: usize,
    pub n: usize,
    pub r: f64,
    pub mode: Mode,
    pub lower: BracketSide,
    pub upper: BracketSide,
    pub holds: bool,
}

/// Bracket the conditioned base law between conditioned tilted laws.
///
/// The upper bracket conditions the λ_hi-tilted variables on the above
/// event and must dominate the base law; the lower bracket conditions the
/// λ_lo-tilted variables on the below event and must be dominated by it.
/// The base law uses the mode's own event at r = E(S_n) under λ*.
pub fn sandwich_check(
    family: &Family,
    lambda_star: f64,
    lambda_lo: f64,
    lambda_hi: f64,
    ell: usize,
    n: usize,
    mode: Mode,
) -> Result<SandwichReport> {
    match mode {
        Mode::Above => {
            if !(1.0 < lambda_lo && lambda_lo < lambda_star && lambda_star < lambda_hi) {
                return Err(Error::InvalidParameter(format!(
                    "mode above needs 1 < lambda_lo < lambda_star < lambda_hi, got {lambda_lo}, {lambda_star}, {lambda_hi}"
                )));
            }
        }
        Mode::Below => {
            if !(0.0 < lambda_lo
                && lambda_lo < lambda_star
                && lambda_star < lambda_hi
                && lambda_hi < 1.0)
            {
                return Err(Error::InvalidParameter(format!(
                    "mode below needs 0 < lambda_lo < lambda_star < lambda_hi < 1, got {lambda_lo}, {lambda_star}, {lambda_hi}"
                )));
            }
        }
        Mode::EqualFloor => {
            return Err(Error::InvalidParameter(
                "sandwich brackets are defined for the above and below modes".into(),
            ));
        }
    }
    family.check_lambda(lambda_hi)?;
    let r = r_star(family, lambda_star, n)?;
    let base = conditioned_law(family, 1.0, ell, n, mode, r)?;
    let upper = conditioned_law(family, lambda_hi, ell, n, Mode::Above, r)?;
    let lower = conditioned_law(family, lambda_lo, ell, n, Mode::Below, r)?;
    let target = tilted_target(family, lambda_star, ell)?;

    let up_dom = stochastic_dominance(&base.joint, &upper.joint)?;
    let low_dom = stochastic_dominance(&lower.joint, &base.joint)?;
    let upper_side = BracketSide {
        lambda: lambda_hi,
        mode: Mode::Above,
        event_mass: upper.log_event_mass.exp(),
        tv_to_target: upper.joint.tv_distance(&target)?,
        dominance_holds: up_dom.holds,
        flow: up_dom.flow,
    };
    let lower_side = BracketSide {
        lambda: lambda_lo,
        mode: Mode::Below,
        event_mass: lower.log_event_mass.exp(),
        tv_to_target: lower.joint.tv_distance(&target)?,
        dominance_holds: low_dom.holds,
        flow: low_dom.flow,
    };
    let holds = upper_side.dominance_holds && lower_side.dominance_holds;
    Ok(SandwichReport {
        lambda_star,
        ell,
        n,
        r,
        mode,
        lower: lower_side,
        upper: upper_side,
        holds,
    })
}

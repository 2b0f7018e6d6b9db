//! Ordered families of base pmfs with a shared tilt budget.
//!
//! A [`Family`] owns a finite pool of members and hands out member `i` for
//! any `i` by cycling the pool, so experiments can grow `n` without a new
//! spec. `lambda_max` is the supremum of tilts with finite partition
//! functions across members (the minimum over distinct member kinds), and
//! `lambda_cap` is the working cap all tilting operations are validated
//! against: truncation certificates are issued at the cap, and tilts beyond
//! it would amplify truncation error without bound.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::Pmf;

/// One member entry in a family specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MemberSpec {
    Geometric { p: f64 },
    Poisson { mu: f64 },
    Binomial { m: usize, q: f64 },
    Uniform { m: usize },
    Weights { w: Vec<f64> },
}

impl MemberSpec {
    /// Analytic supremum of tilts with a finite partition function.
    fn lambda_max(&self) -> f64 {
        match self {
            MemberSpec::Geometric { p } => 1.0 / p,
            _ => f64::INFINITY,
        }
    }

    fn has_infinite_support(&self) -> bool {
        matches!(self, MemberSpec::Geometric { .. } | MemberSpec::Poisson { .. })
    }

    fn build(&self, trunc_eps: f64, lambda_cap: f64) -> Result<Pmf> {
        match self {
            MemberSpec::Geometric { p } => Pmf::geometric(*p, trunc_eps, lambda_cap),
            MemberSpec::Poisson { mu } => Pmf::poisson(*mu, trunc_eps, lambda_cap),
            MemberSpec::Binomial { m, q } => Pmf::binomial(*m, *q),
            MemberSpec::Uniform { m } => Pmf::uniform(*m),
            MemberSpec::Weights { w } => Pmf::from_weights(w),
        }
    }
}

/// On-disk family description.
///
/// `repeat` replicates the member list cyclically to the given pool length
/// at load time; operations that ask for members beyond the pool keep
/// cycling it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub members: Vec<MemberSpec>,
    #[serde(default)]
    pub repeat: Option<usize>,
    #[serde(default = "default_trunc_eps")]
    pub trunc_eps: f64,
    #[serde(default)]
    pub lambda_cap: Option<f64>,
}

fn default_trunc_eps() -> f64 {
    1e-13
}

/// Fraction of a finite `lambda_max` used when no cap is supplied.
const DEFAULT_CAP_FRACTION: f64 = 0.95;

/// An ordered family of base pmfs with cached tilt budget.
#[derive(Debug, Clone)]
pub struct Family {
    pool: Vec<Pmf>,
    lambda_max: f64,
    lambda_cap: f64,
    trunc_eps: f64,
}

impl Family {
    /// Build from an explicit pool of pmfs (finite supports, so
    /// `lambda_max` is infinite). Used heavily in tests.
    pub fn from_members(pool: Vec<Pmf>, lambda_cap: f64) -> Result<Self> {
        if pool.is_empty() {
            return Err(Error::InvalidParameter("family has no members".into()));
        }
        if !(lambda_cap >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda_cap must be at least 1, got {lambda_cap}"
            )));
        }
        Ok(Family {
            pool,
            lambda_max: f64::INFINITY,
            lambda_cap,
            trunc_eps: 0.0,
        })
    }

    pub fn from_spec(spec: &FamilySpec) -> Result<Self> {
        if spec.members.is_empty() {
            return Err(Error::InvalidParameter(
                "family spec has no members".into(),
            ));
        }
        let lambda_max = spec
            .members
            .iter()
            .map(MemberSpec::lambda_max)
            .fold(f64::INFINITY, f64::min);
        let lambda_cap = match spec.lambda_cap {
            Some(cap) => {
                if !(cap >= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "lambda_cap must be at least 1, got {cap}"
                    )));
                }
                if cap >= lambda_max {
                    return Err(Error::InvalidParameter(format!(
                        "lambda_cap {cap} must stay below lambda_max {lambda_max}"
                    )));
                }
                cap
            }
            None if lambda_max.is_finite() => (DEFAULT_CAP_FRACTION * lambda_max).max(1.0),
            None => {
                if spec.members.iter().any(MemberSpec::has_infinite_support) {
                    return Err(Error::InvalidParameter(
                        "members with infinite support and unbounded lambda_max need an explicit lambda_cap"
                            .into(),
                    ));
                }
                f64::INFINITY
            }
        };
        let mut pool = Vec::new();
        for m in &spec.members {
            pool.push(m.build(spec.trunc_eps, lambda_cap)?);
        }
        if let Some(repeat) = spec.repeat {
            if repeat == 0 {
                return Err(Error::InvalidParameter("repeat must be positive".into()));
            }
            let base = pool.clone();
            pool = (0..repeat).map(|i| base[i % base.len()].clone()).collect();
        }
        Ok(Family {
            pool,
            lambda_max,
            lambda_cap,
            trunc_eps: spec.trunc_eps,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut de = serde_json::Deserializer::from_str(&text);
        let spec: FamilySpec =
            serde_path_to_error::deserialize(&mut de).map_err(|e| Error::FamilySpec {
                path: path.to_path_buf(),
                detail: format!("field `{}`: {}", e.path(), e.inner()),
            })?;
        Family::from_spec(&spec)
    }

    pub fn pool_len(&self) -> usize {
        self.pool.len()
    }

    /// Member `i` (zero-based), cycling the pool.
    pub fn member(&self, i: usize) -> &Pmf {
        &self.pool[i % self.pool.len()]
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn lambda_cap(&self) -> f64 {
        self.lambda_cap
    }

    pub fn trunc_eps(&self) -> f64 {
        self.trunc_eps
    }

    /// Validate a tilt value against the working cap.
    pub fn check_lambda(&self, lambda: f64) -> Result<()> {
        if !(lambda > 0.0) || lambda > self.lambda_cap {
            return Err(Error::InvalidParameter(format!(
                "lambda {lambda} outside the working range (0, {}]",
                self.lambda_cap
            )));
        }
        Ok(())
    }

    /// Member `i` tilted by `lambda`, validated against the cap.
    pub fn tilted_member(&self, i: usize, lambda: f64) -> Result<Pmf> {
        self.check_lambda(lambda)?;
        self.member(i).tilt(lambda)
    }

    /// log Z_i(λ) for member `i`.
    pub fn member_log_partition(&self, i: usize, lambda: f64) -> Result<f64> {
        self.check_lambda(lambda)?;
        self.member(i).log_partition(lambda)
    }

    /// Sum of member truncation bounds over the first `n` members; a union
    /// bound on the base mass dropped anywhere in a length-`n` experiment.
    pub fn accumulated_tail_bound(&self, n: usize) -> f64 {
        (0..n).map(|i| self.member(i).tail_mass_bound()).sum()
    }
}

//! Probability mass functions on the nonnegative integers.
//!
//! A [`Pmf`] stores log-probabilities on `0..=support_max`, normalized so the
//! kept mass sums to one. Built-in kinds with infinite support (geometric,
//! poisson) are truncated at construction so that the tilted tail mass at the
//! declared working cap stays below `trunc_eps`; the base-measure mass that
//! was cut is recorded in `tail_mass_bound`.

use crate::error::{Error, Result};
use crate::logsum::{log_sum_exp, normalize_log, LOG_ZERO};

/// A finite (possibly truncated) pmf on `{0, 1, ..., support_max}`.
#[derive(Debug, Clone)]
pub struct Pmf {
    log_probs: Vec<f64>,
    tail_mass_bound: f64,
    is_truncated: bool,
}

/// Result of the log-concavity check.
///
/// A pmf is log-concave when it is positive on `[0, max]` (with `max` its
/// last positive index) and `ν(x)² ≥ ν(x−1)·ν(x+1)` for all interior `x`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LogConcavityReport {
    pub is_log_concave: bool,
    pub has_internal_zero: bool,
    pub first_violation: Option<LcViolation>,
}

/// First index where the nondecreasing-ratio condition fails, with the two
/// offending ratios ν(x−1)/ν(x) and ν(x)/ν(x+1).
#[derive(Debug, Clone, serde::Serialize)]
pub struct LcViolation {
    pub x: usize,
    pub left_ratio: f64,
    pub right_ratio: f64,
}

/// Slack on the log scale when comparing consecutive ratios; absorbs the
/// rounding of ratios that are exactly equal in real arithmetic.
const LC_LOG_TOL: f64 = 1e-9;

impl Pmf {
    /// Normalize a vector of nonnegative weights into a pmf.
    ///
    /// Trailing zero weights are kept: `[2,0,0]` yields a point mass at 0
    /// with `support_max = 2` and exact zeros at 1 and 2.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution(
                "weight vector is empty".into(),
            ));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "weight at index {i} is {w}; weights must be finite and nonnegative"
                )));
            }
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::InvalidDistribution(
                "all weights are zero".into(),
            ));
        }
        let mut log_probs: Vec<f64> = weights
            .iter()
            .map(|&w| if w > 0.0 { w.ln() } else { LOG_ZERO })
            .collect();
        normalize_log(&mut log_probs);
        Ok(Pmf {
            log_probs,
            tail_mass_bound: 0.0,
            is_truncated: false,
        })
    }

    /// Build directly from already-normalized log-probabilities.
    ///
    /// Checks that the mass is 1 within 1e-12 and renormalizes the rounding
    /// residue away.
    pub fn from_log_probs(mut log_probs: Vec<f64>, tail_mass_bound: f64, is_truncated: bool) -> Result<Self> {
        if log_probs.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let z = log_sum_exp(&log_probs);
        if !(z.exp() - 1.0).abs().le(&1e-12) {
            return Err(Error::InvalidDistribution(format!(
                "log-probabilities sum to {} rather than 1",
                z.exp()
            )));
        }
        normalize_log(&mut log_probs);
        Ok(Pmf {
            log_probs,
            tail_mass_bound,
            is_truncated,
        })
    }

    /// Geometric with ratio `p`: P(x) = (1−p)·pˣ. Truncated so the tail
    /// mass of the tilt at `lambda_cap` is below `trunc_eps`.
    pub fn geometric(p: f64, trunc_eps: f64, lambda_cap: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) || p <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "geometric ratio p must lie in (0,1), got {p}"
            )));
        }
        check_trunc_eps(trunc_eps)?;
        let lambda_max = 1.0 / p;
        if !(lambda_cap >= 1.0 && lambda_cap < lambda_max) {
            return Err(Error::InvalidParameter(format!(
                "lambda_cap {lambda_cap} must lie in [1, {lambda_max}) for geometric({p})"
            )));
        }
        // Tilting by c multiplies the ratio: tail mass of the tilt beyond K
        // is (c·p)^{K+1} exactly.
        let cp = lambda_cap * p;
        let support_max = ((trunc_eps.ln() / cp.ln()).ceil() as usize).max(2);
        let lq = (1.0 - p).ln();
        let lp = p.ln();
        let mut log_probs: Vec<f64> = (0..=support_max)
            .map(|x| lq + x as f64 * lp)
            .collect();
        let base_tail = (support_max as f64 + 1.0) * lp; // p^{K+1}
        normalize_log(&mut log_probs);
        Ok(Pmf {
            log_probs,
            tail_mass_bound: base_tail.exp(),
            is_truncated: true,
        })
    }

    /// Poisson with mean `mu`, truncated like [`Pmf::geometric`].
    pub fn poisson(mu: f64, trunc_eps: f64, lambda_cap: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "poisson mean must be positive and finite, got {mu}"
            )));
        }
        check_trunc_eps(trunc_eps)?;
        if !(lambda_cap >= 1.0 && lambda_cap.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "poisson truncation needs a finite lambda_cap >= 1, got {lambda_cap}"
            )));
        }
        // The tilt at c is poisson(c·mu); find the smallest K whose
        // poisson(c·mu) tail is certified <= trunc_eps by the geometric
        // ratio bound term(K+1)/(1 − c·mu/(K+2)).
        let support_max = poisson_trunc_point(lambda_cap * mu, trunc_eps);
        let lmu = mu.ln();
        let mut log_probs = Vec::with_capacity(support_max + 1);
        let mut lfact = 0.0f64;
        for x in 0..=support_max {
            if x > 0 {
                lfact += (x as f64).ln();
            }
            log_probs.push(-mu + x as f64 * lmu - lfact);
        }
        let kept = log_sum_exp(&log_probs).exp();
        normalize_log(&mut log_probs);
        Ok(Pmf {
            log_probs,
            tail_mass_bound: (1.0 - kept).max(0.0),
            is_truncated: true,
        })
    }

    /// Binomial(m, q) on `0..=m`. Finite support, no truncation.
    pub fn binomial(m: usize, q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "binomial success probability must lie in (0,1), got {q}"
            )));
        }
        let lq = q.ln();
        let l1q = (1.0 - q).ln();
        let mut lc = 0.0f64; // log C(m, x), built by the ratio recursion
        let mut log_probs = Vec::with_capacity(m + 1);
        for x in 0..=m {
            if x > 0 {
                lc += ((m - x + 1) as f64).ln() - (x as f64).ln();
            }
            log_probs.push(lc + x as f64 * lq + (m - x) as f64 * l1q);
        }
        normalize_log(&mut log_probs);
        Ok(Pmf {
            log_probs,
            tail_mass_bound: 0.0,
            is_truncated: false,
        })
    }

    /// Uniform on `0..=m`.
    pub fn uniform(m: usize) -> Result<Self> {
        let lp = -((m + 1) as f64).ln();
        Ok(Pmf {
            log_probs: vec![lp; m + 1],
            tail_mass_bound: 0.0,
            is_truncated: false,
        })
    }

    /// Point mass at 0.
    pub fn delta_zero() -> Self {
        Pmf {
            log_probs: vec![0.0],
            tail_mass_bound: 0.0,
            is_truncated: false,
        }
    }

    pub fn support_max(&self) -> usize {
        self.log_probs.len() - 1
    }

    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tail_mass_bound(&self) -> f64 {
        self.tail_mass_bound
    }

    pub fn is_truncated(&self) -> bool {
        self.is_truncated
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    /// Log-probability at `x`; `LOG_ZERO` outside the stored support.
    pub fn log_prob(&self, x: usize) -> f64 {
        self.log_probs.get(x).copied().unwrap_or(LOG_ZERO)
    }

    pub fn prob(&self, x: usize) -> f64 {
        self.log_prob(x).exp()
    }

    /// Last index with positive mass.
    pub fn last_positive(&self) -> usize {
        self.log_probs
            .iter()
            .rposition(|&lp| lp > LOG_ZERO)
            .expect("a pmf has at least one positive entry")
    }

    /// log Z(λ) = log Σ λˣ ν(x) over the stored support.
    pub fn log_partition(&self, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tilt parameter must be positive, got {lambda}"
            )));
        }
        let ll = lambda.ln();
        let terms: Vec<f64> = self
            .log_probs
            .iter()
            .enumerate()
            .map(|(x, &lp)| {
                if lp == LOG_ZERO {
                    LOG_ZERO
                } else {
                    lp + x as f64 * ll
                }
            })
            .collect();
        Ok(log_sum_exp(&terms))
    }

    /// The tilted pmf ν_λ(x) ∝ λˣ ν(x) on the same support.
    pub fn tilt(&self, lambda: f64) -> Result<Pmf> {
        let log_z = self.log_partition(lambda)?;
        let ll = lambda.ln();
        let log_probs: Vec<f64> = self
            .log_probs
            .iter()
            .enumerate()
            .map(|(x, &lp)| {
                if lp == LOG_ZERO {
                    LOG_ZERO
                } else {
                    lp + x as f64 * ll - log_z
                }
            })
            .collect();
        Ok(Pmf {
            log_probs,
            // The truncation certificate was issued for tilts up to the
            // family cap, so the bound carries over.
            tail_mass_bound: self.tail_mass_bound,
            is_truncated: self.is_truncated,
        })
    }

    /// Exact mean and variance over the stored support.
    pub fn moments(&self) -> (f64, f64) {
        let mut mean = 0.0;
        for (x, &lp) in self.log_probs.iter().enumerate() {
            if lp > LOG_ZERO {
                mean += x as f64 * lp.exp();
            }
        }
        let mut var = 0.0;
        for (x, &lp) in self.log_probs.iter().enumerate() {
            if lp > LOG_ZERO {
                let d = x as f64 - mean;
                var += d * d * lp.exp();
            }
        }
        (mean, var)
    }

    pub fn mean(&self) -> f64 {
        self.moments().0
    }
}

fn check_trunc_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1e-6) {
        return Err(Error::InvalidParameter(format!(
            "trunc_eps must lie in (0, 1e-6], got {eps}"
        )));
    }
    Ok(())
}

/// Smallest K whose Poisson(rate) tail beyond K is certified <= eps.
fn poisson_trunc_point(rate: f64, eps: f64) -> usize {
    let mut log_term = -rate; // log P(X = 0)
    let mut x = 0usize;
    loop {
        let next = log_term + rate.ln() - ((x + 1) as f64).ln();
        let ratio = rate / (x as f64 + 2.0);
        if ratio < 1.0 {
            let log_tail_bound = next - (-ratio).ln_1p();
            if log_tail_bound <= eps.ln() {
                return (x + 1).max(2);
            }
        }
        log_term = next;
        x += 1;
        assert!(x < 100_000_000, "poisson truncation did not converge");
    }
}

/// Check positivity on `[0, max]` and the nondecreasing-ratio condition.
pub fn check_log_concave(pmf: &Pmf) -> LogConcavityReport {
    let lp = pmf.log_probs();
    let max_i = pmf.last_positive();
    let has_internal_zero = lp[..=max_i].iter().any(|&v| v == LOG_ZERO);
    let mut first_violation = None;
    if !has_internal_zero {
        for x in 1..max_i {
            // ν(x−1)·ν(x+1) ≤ ν(x)² in log domain.
            if lp[x - 1] + lp[x + 1] > 2.0 * lp[x] + LC_LOG_TOL {
                first_violation = Some(LcViolation {
                    x,
                    left_ratio: (lp[x - 1] - lp[x]).exp(),
                    right_ratio: (lp[x] - lp[x + 1]).exp(),
                });
                break;
            }
        }
    }
    LogConcavityReport {
        is_log_concave: !has_internal_zero && first_violation.is_none(),
        has_internal_zero,
        first_violation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn weights_symmetric_pair() {
        let p = Pmf::from_weights(&[1.0, 1.0]).unwrap();
        assert_close(p.prob(0), 0.5, 1e-15);
        assert_close(p.prob(1), 0.5, 1e-15);
    }

    #[test]
    fn weights_single_atom_keeps_trailing_zeros() {
        let p = Pmf::from_weights(&[2.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.support_max(), 2);
        assert_close(p.prob(0), 1.0, 1e-15);
        assert_eq!(p.log_prob(1), LOG_ZERO);
        assert_eq!(p.log_prob(2), LOG_ZERO);
    }

    #[test]
    fn weights_triangle() {
        let p = Pmf::from_weights(&[1.0, 2.0, 1.0]).unwrap();
        assert_close(p.prob(0), 0.25, 1e-15);
        assert_close(p.prob(1), 0.5, 1e-15);
        assert_close(p.prob(2), 0.25, 1e-15);
    }

    #[test]
    fn weights_rejects_bad_input() {
        assert!(matches!(
            Pmf::from_weights(&[0.0, 0.0]),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(matches!(
            Pmf::from_weights(&[1.0, -0.5]),
            Err(Error::InvalidDistribution(_))
        ));
    }

    #[test]
    fn geometric_pointwise() {
        let p = Pmf::geometric(0.5, 1e-13, 1.9).unwrap();
        // P(x) = 0.5^{x+1}, up to the (renormalized) truncation.
        for x in 0..6 {
            assert_close(p.prob(x), 0.5f64.powi(x as i32 + 1), 1e-13);
        }
        assert!(p.is_truncated());
        assert!(p.tail_mass_bound() <= 1e-13);
    }

    #[test]
    fn geometric_trunc_certificate_at_cap() {
        let eps = 1e-13;
        let cap = 1.9;
        let p = Pmf::geometric(0.5, eps, cap).unwrap();
        // Tail mass of the tilt at the cap, beyond the stored support,
        // computed from the closed form (c·p)^{K+1}.
        let tilted_tail = (cap * 0.5f64).powi(p.support_max() as i32 + 1);
        assert!(tilted_tail <= eps, "tilted tail {tilted_tail} above {eps}");
    }

    #[test]
    fn poisson_value_at_zero() {
        let p = Pmf::poisson(1.0, 1e-13, 2.5).unwrap();
        assert_close(p.prob(0), (-1.0f64).exp(), 1e-13);
        assert!(p.tail_mass_bound() <= 1e-13);
    }

    #[test]
    fn binomial_fair_coin() {
        let p = Pmf::binomial(1, 0.5).unwrap();
        assert_close(p.prob(0), 0.5, 1e-15);
        assert_close(p.prob(1), 0.5, 1e-15);
    }

    #[test]
    fn builtin_rejects_bad_parameters() {
        assert!(Pmf::geometric(1.0, 1e-13, 1.9).is_err());
        assert!(Pmf::geometric(0.5, 1e-13, 2.0).is_err()); // cap at λ^max
        assert!(Pmf::poisson(-1.0, 1e-13, 2.0).is_err());
        assert!(Pmf::binomial(3, 1.5).is_err());
        assert!(Pmf::geometric(0.5, 1e-3, 1.9).is_err()); // eps > 1e-6
    }

    #[test]
    fn log_concave_geometric() {
        let p = Pmf::geometric(0.5, 1e-13, 1.9).unwrap();
        let rep = check_log_concave(&p);
        assert!(rep.is_log_concave);
        assert!(!rep.has_internal_zero);
    }

    #[test]
    fn log_concave_poisson() {
        // Ratio ν(x−1)/ν(x) = x/μ is increasing.
        let p = Pmf::poisson(1.0, 1e-13, 2.5).unwrap();
        assert!(check_log_concave(&p).is_log_concave);
    }

    #[test]
    fn internal_zero_fails_log_concavity() {
        let p = Pmf::from_weights(&[1.0, 0.0, 1.0]).unwrap();
        let rep = check_log_concave(&p);
        assert!(rep.has_internal_zero);
        assert!(!rep.is_log_concave);
    }

    #[test]
    fn convex_weights_yield_violation_index() {
        let p = Pmf::from_weights(&[1.0, 0.01, 1.0]).unwrap();
        let rep = check_log_concave(&p);
        assert!(!rep.is_log_concave);
        let v = rep.first_violation.expect("violation expected");
        assert_eq!(v.x, 1);
        assert!(v.left_ratio > v.right_ratio);
    }

    #[test]
    fn partition_at_one_is_zero() {
        for p in [
            Pmf::geometric(0.3, 1e-13, 2.0).unwrap(),
            Pmf::binomial(4, 0.25).unwrap(),
            Pmf::from_weights(&[3.0, 1.0, 2.0]).unwrap(),
        ] {
            assert_close(p.log_partition(1.0).unwrap(), 0.0, 1e-13);
        }
    }

    #[test]
    fn partition_bernoulli_two_term() {
        let p = Pmf::binomial(1, 0.5).unwrap();
        assert_close(p.log_partition(2.0).unwrap(), 1.5f64.ln(), 1e-14);
    }

    #[test]
    fn partition_geometric_closed_form() {
        // Σ 0.5^{x+1}·1.5^x = 0.5/(1−0.75) = 2 up to truncation.
        let p = Pmf::geometric(0.5, 1e-13, 1.9).unwrap();
        assert_close(p.log_partition(1.5).unwrap().exp(), 2.0, 1e-12);
        // Cross-check against a partial-sum oracle on the stored support.
        let direct: f64 = (0..=p.support_max())
            .map(|x| 1.5f64.powi(x as i32) * p.prob(x))
            .sum();
        assert_close(p.log_partition(1.5).unwrap().exp(), direct, 1e-12);
    }

    #[test]
    fn partition_rejects_nonpositive_lambda() {
        let p = Pmf::uniform(2).unwrap();
        assert!(p.log_partition(0.0).is_err());
        assert!(p.log_partition(-1.0).is_err());
    }

    #[test]
    fn tilt_identity() {
        let p = Pmf::from_weights(&[1.0, 2.0, 3.0]).unwrap();
        let t = p.tilt(1.0).unwrap();
        for x in 0..=2 {
            assert_close(t.log_prob(x), p.log_prob(x), 1e-14);
        }
    }

    #[test]
    fn tilt_bernoulli() {
        let p = Pmf::binomial(1, 0.5).unwrap();
        let t = p.tilt(2.0).unwrap();
        assert_close(t.prob(0), 1.0 / 3.0, 1e-15);
        assert_close(t.prob(1), 2.0 / 3.0, 1e-15);
    }

    #[test]
    fn tilt_poisson_is_poisson() {
        let eps = 1e-13;
        let p1 = Pmf::poisson(1.0, eps, 3.0).unwrap();
        let tilted = p1.tilt(2.0).unwrap();
        // poisson(2) restricted to the same support and renormalized.
        let lmu = 2.0f64.ln();
        let mut reference: Vec<f64> = (0..=p1.support_max())
            .map(|x| {
                let lfact: f64 = (1..=x).map(|k| (k as f64).ln()).sum();
                -2.0 + x as f64 * lmu - lfact
            })
            .collect();
        normalize_log(&mut reference);
        for x in 0..=p1.support_max() {
            assert_close(tilted.log_prob(x), reference[x], 1e-12);
        }
    }

    #[test]
    fn moments_basic() {
        let (m, v) = Pmf::delta_zero().moments();
        assert_eq!((m, v), (0.0, 0.0));
        let (m, v) = Pmf::binomial(1, 0.5).unwrap().moments();
        assert_close(m, 0.5, 1e-15);
        assert_close(v, 0.25, 1e-15);
        // geometric ratio p: mean p/(1−p).
        let (m, _) = Pmf::geometric(0.5, 1e-13, 1.9).unwrap().moments();
        assert_close(m, 1.0, 1e-12);
    }

    #[test]
    fn tilt_preserves_zero_pattern() {
        let p = Pmf::from_weights(&[1.0, 0.0, 1.0]).unwrap();
        let t = p.tilt(2.0).unwrap();
        assert_eq!(t.log_prob(1), LOG_ZERO);
        assert!(t.prob(0) > 0.0 && t.prob(2) > 0.0);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_weights() -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(0.01f64..10.0, 1..12)
        }

        proptest! {
            // tilt(tilt(ν,a),b) = tilt(ν,ab)
            #[test]
            fn tilt_composition(w in arb_weights(), a in 0.05f64..4.0, b in 0.05f64..4.0) {
                let p = Pmf::from_weights(&w).unwrap();
                let lhs = p.tilt(a).unwrap().tilt(b).unwrap();
                let rhs = p.tilt(a * b).unwrap();
                for x in 0..p.len() {
                    prop_assert!((lhs.prob(x) - rhs.prob(x)).abs() < 1e-12);
                }
            }

            #[test]
            fn partition_at_one_normalized(w in arb_weights()) {
                let p = Pmf::from_weights(&w).unwrap();
                prop_assert!(p.log_partition(1.0).unwrap().abs() < 1e-12);
            }

            // Tilting scales every ratio by the same constant, so
            // log-concavity survives.
            #[test]
            fn tilt_preserves_log_concavity(w in arb_weights(), lambda in 0.1f64..5.0) {
                let p = Pmf::from_weights(&w).unwrap();
                if check_log_concave(&p).is_log_concave {
                    let t = p.tilt(lambda).unwrap();
                    prop_assert!(check_log_concave(&t).is_log_concave);
                }
            }

            // Mean of the tilt is nondecreasing in λ.
            #[test]
            fn tilted_mean_monotone(w in arb_weights(), lambda in 0.1f64..3.0) {
                let p = Pmf::from_weights(&w).unwrap();
                let lo = p.tilt(lambda).unwrap().mean();
                let hi = p.tilt(lambda * 1.25).unwrap().mean();
                prop_assert!(hi >= lo - 1e-10);
            }
        }
    }
}

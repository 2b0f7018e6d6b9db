//! Log-domain arithmetic on probability vectors.
//!
//! Probabilities are stored as natural logs, with `f64::NEG_INFINITY` as the
//! sentinel for an exact zero. Sums use log-sum-exp with a shared shift: the
//! vector is rescaled by its maximum, accumulated in the linear domain, and
//! mapped back. Entries more than ~745 nats below the running maximum flush
//! to exact zero; callers that condition on events that deep get an
//! `EmptyCondition` rather than a wrong value.

/// Sentinel for an exact zero probability.
pub const LOG_ZERO: f64 = f64::NEG_INFINITY;

/// log(e^a + e^b), safe for the zero sentinel.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == LOG_ZERO {
        return b;
    }
    if b == LOG_ZERO {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// log Σ e^{x_i} over a slice; `LOG_ZERO` for an empty or all-zero slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(LOG_ZERO, f64::max);
    if m == LOG_ZERO {
        return LOG_ZERO;
    }
    let s: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// Shift a log vector so its exponentials sum to one. Returns the log-mass
/// that was subtracted.
pub fn normalize_log(xs: &mut [f64]) -> f64 {
    let z = log_sum_exp(xs);
    assert!(z > LOG_ZERO, "cannot normalize a zero-mass vector");
    for x in xs.iter_mut() {
        if *x != LOG_ZERO {
            *x -= z;
        }
    }
    z
}

/// |e^a − e^b| without cancellation for nearby arguments.
pub fn abs_diff_exp(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == LOG_ZERO {
        return 0.0;
    }
    -hi.exp() * (lo - hi).exp_m1()
}

/// Log-domain convolution of two pmfs on {0,1,...}.
///
/// Both inputs are rescaled by their maxima, convolved linearly, and mapped
/// back; this is log-sum-exp with one shared shift per output vector.
pub fn log_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    assert!(!a.is_empty() && !b.is_empty());
    let out_len = a.len() + b.len() - 1;
    let ma = a.iter().copied().fold(LOG_ZERO, f64::max);
    let mb = b.iter().copied().fold(LOG_ZERO, f64::max);
    if ma == LOG_ZERO || mb == LOG_ZERO {
        return vec![LOG_ZERO; out_len];
    }
    let ea: Vec<f64> = a.iter().map(|&x| (x - ma).exp()).collect();
    let eb: Vec<f64> = b.iter().map(|&x| (x - mb).exp()).collect();
    let mut acc = vec![0.0f64; out_len];
    // Iterate the shorter vector on the outside so the inner loop streams.
    if ea.len() <= eb.len() {
        for (i, &va) in ea.iter().enumerate() {
            if va > 0.0 {
                for (j, &vb) in eb.iter().enumerate() {
                    acc[i + j] += va * vb;
                }
            }
        }
    } else {
        for (j, &vb) in eb.iter().enumerate() {
            if vb > 0.0 {
                for (i, &va) in ea.iter().enumerate() {
                    acc[i + j] += va * vb;
                }
            }
        }
    }
    let shift = ma + mb;
    acc.iter()
        .map(|&v| if v > 0.0 { v.ln() + shift } else { LOG_ZERO })
        .collect()
}

/// Convolve a sequence of pmfs left to right. The unit of convolution (a
/// point mass at zero) is returned for an empty sequence.
pub fn log_convolve_all<'a, I>(pmfs: I) -> Vec<f64>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut acc = vec![0.0f64];
    for p in pmfs {
        acc = log_convolve(&acc, p);
    }
    acc
}

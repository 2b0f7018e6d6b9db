//! Closed integer intervals used for conditioning events.

use std::fmt;

/// A closed interval `[lo, hi]` of integers, possibly unbounded above.
///
/// Strict threshold events map onto closed intervals: `{k > r}` starts at
/// `floor(r) + 1` (so an integral `r` is excluded), and `{k < r}` ends at
/// `ceil(r) − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntInterval {
    lo: i64,
    hi: i64,
}

impl IntInterval {
    pub const UNBOUNDED: i64 = i64::MAX;

    pub fn closed(lo: i64, hi: i64) -> Self {
        IntInterval { lo, hi }
    }

    pub fn singleton(k: i64) -> Self {
        IntInterval { lo: k, hi: k }
    }

    /// The event `{k > r}`.
    pub fn above(r: f64) -> Self {
        IntInterval {
            lo: r.floor() as i64 + 1,
            hi: Self::UNBOUNDED,
        }
    }

    /// The event `{k < r}`.
    pub fn below(r: f64) -> Self {
        IntInterval {
            lo: i64::MIN,
            hi: r.ceil() as i64 - 1,
        }
    }

    pub fn all() -> Self {
        IntInterval {
            lo: i64::MIN,
            hi: Self::UNBOUNDED,
        }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn contains(&self, k: i64) -> bool {
        self.lo <= k && k <= self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    /// Clamp to `[0, max]` (a law's stored support).
    pub fn clamp_to_support(&self, max: i64) -> IntInterval {
        IntInterval {
            lo: self.lo.max(0),
            hi: self.hi.min(max),
        }
    }

    /// The interval shifted by `-offset` (used for tail-law lookups).
    pub fn shifted_down(&self, offset: i64) -> IntInterval {
        IntInterval {
            lo: if self.lo == i64::MIN { i64::MIN } else { self.lo - offset },
            hi: if self.hi == Self::UNBOUNDED { Self::UNBOUNDED } else { self.hi - offset },
        }
    }

    /// Parse `"lo:hi"` as a closed interval.
    pub fn parse_colon(text: &str) -> Option<IntInterval> {
        let (a, b) = text.split_once(':')?;
        let lo = a.trim().parse().ok()?;
        let hi = b.trim().parse().ok()?;
        if lo > hi {
            return None;
        }
        Some(IntInterval::closed(lo, hi))
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            (self.hi - self.lo + 1) as usize
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

impl fmt::Display for IntInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "{{}}");
        }
        match (self.lo == i64::MIN, self.hi == Self::UNBOUNDED) {
            (true, true) => write!(f, "[-inf, inf]"),
            (true, false) => write!(f, "[-inf, {}]", self.hi),
            (false, true) => write!(f, "[{}, inf]", self.lo),
            (false, false) => write!(f, "[{}, {}]", self.lo, self.hi),
        }
    }
}

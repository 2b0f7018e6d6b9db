//! Exact-event simulation of pure-jump processes.

use std::collections::HashMap;
use std::hash::Hash;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A pure-jump process described by its outgoing transitions.
pub trait JumpProcess {
    type State: Clone + PartialEq + std::fmt::Debug;

    /// Append all `(target, rate)` pairs with positive rate to `out`.
    fn transitions(&self, state: &Self::State, out: &mut Vec<(Self::State, f64)>);
}

/// A simulated trajectory: the initial state at time 0 followed by every
/// jump, with strictly increasing times.
#[derive(Debug, Clone)]
pub struct CtmcTrace<S> {
    pub seed: u64,
    pub events: Vec<(f64, S)>,
    pub t_end: f64,
    /// The run stopped on the event cap rather than at `t_end`.
    pub cap_hit: bool,
    /// The chain hit a state with zero total rate and stayed there.
    pub absorbed: bool,
}

impl<S> CtmcTrace<S> {
    pub fn n_events(&self) -> usize {
        self.events.len() - 1
    }

    pub fn final_state(&self) -> &S {
        &self.events.last().unwrap().1
    }

    /// State at time `t` (piecewise constant, right-continuous).
    pub fn state_at(&self, t: f64) -> &S {
        let idx = self.events.partition_point(|(s, _)| *s <= t);
        &self.events[idx.saturating_sub(1)].1
    }
}

/// Default per-trajectory event budget.
pub const DEFAULT_EVENT_CAP: usize = 10_000_000;

/// RNG for one trajectory: one ChaCha stream per `stream` index on a shared
/// base seed, so parallel trajectories never share a sequence.
pub fn trajectory_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Exponential holding times and categorical jump selection; byte-for-byte
/// reproducible per `(seed, stream)`.
pub fn simulate_with_stream<P: JumpProcess>(
    process: &P,
    init: P::State,
    t_end: f64,
    seed: u64,
    stream: u64,
    event_cap: usize,
) -> CtmcTrace<P::State> {
    let mut rng = trajectory_rng(seed, stream);
    let mut events = vec![(0.0, init.clone())];
    let mut state = init;
    let mut t = 0.0;
    let mut buf: Vec<(P::State, f64)> = Vec::new();
    let mut cap_hit = false;
    let mut absorbed = false;
    loop {
        if events.len() - 1 >= event_cap {
            cap_hit = true;
            break;
        }
        buf.clear();
        process.transitions(&state, &mut buf);
        let total: f64 = buf.iter().map(|(_, r)| r).sum();
        if total <= 0.0 {
            absorbed = true;
            break;
        }
        let dt = loop {
            let u: f64 = rng.gen();
            let dt = -(1.0 - u).ln() / total;
            if dt > 0.0 {
                break dt;
            }
        };
        t += dt;
        if t > t_end {
            t = t_end;
            break;
        }
        let mut pick = rng.gen::<f64>() * total;
        let mut chosen = buf.len() - 1;
        for (i, (_, r)) in buf.iter().enumerate() {
            pick -= r;
            if pick < 0.0 {
                chosen = i;
                break;
            }
        }
        state = buf.swap_remove(chosen).0;
        events.push((t, state.clone()));
    }
    CtmcTrace {
        seed,
        events,
        t_end: if cap_hit { t } else { t_end },
        cap_hit,
        absorbed,
    }
}

pub fn simulate<P: JumpProcess>(
    process: &P,
    init: P::State,
    t_end: f64,
    seed: u64,
    event_cap: usize,
) -> CtmcTrace<P::State> {
    simulate_with_stream(process, init, t_end, seed, 0, event_cap)
}

/// Time-weighted occupation fractions of `f(state)` over `[burn_in, end]`.
pub fn occupation_fractions<S, K, F>(trace: &CtmcTrace<S>, burn_in: f64, f: F) -> HashMap<K, f64>
where
    K: Eq + Hash,
    F: Fn(&S) -> K,
{
    let end = trace.t_end;
    let mut acc: HashMap<K, f64> = HashMap::new();
    let mut total = 0.0;
    for (i, (t, s)) in trace.events.iter().enumerate() {
        let t_next = trace
            .events
            .get(i + 1)
            .map(|(tn, _)| *tn)
            .unwrap_or(end);
        let lo = t.max(burn_in);
        let hi = t_next.min(end);
        if hi > lo {
            let w = hi - lo;
            *acc.entry(f(s)).or_insert(0.0) += w;
            total += w;
        }
    }
    for v in acc.values_mut() {
        *v /= total;
    }
    acc
}

/// States sampled at `count` equally spaced times over `[burn_in, t_end]`.
pub fn thinned_samples<'a, S>(trace: &'a CtmcTrace<S>, burn_in: f64, count: usize) -> Vec<&'a S> {
    let span = trace.t_end - burn_in;
    (1..=count)
        .map(|j| trace.state_at(burn_in + span * j as f64 / count as f64))
        .collect()
}

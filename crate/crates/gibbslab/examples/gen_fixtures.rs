//! Regenerates the frozen fixtures used by the acceptance suite.
//!
//! Run with `cargo run --release --example gen_fixtures`. Prints:
//!
//! - the seeded random search for a non-log-concave family whose
//!   consecutive fixed-sum conditionals fail dominance (the found instance
//!   is frozen into the suite);
//! - the exact TV sequences of the three convergence runs, from which the
//!   frozen thresholds were taken;
//! - the closed-form per-n constant of the poisson tail bound.

use gibbslab::canonical::efron_check;
use gibbslab::gcp::{gcp_experiment, GcpOptions, Mode};
use gibbslab::{Family, FamilySpec, Pmf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const COUNTEREXAMPLE_SEARCH_SEED: u64 = 20_240_811;

/// Random weight vectors, one per member, the second with an internal zero.
/// Returns the first family whose consecutive-sum dominance fails.
pub fn search_counterexample(seed: u64) -> (Vec<f64>, Vec<f64>, i64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let len_a = rng.gen_range(2..=4usize);
        let len_b = rng.gen_range(3..=5usize);
        let a: Vec<f64> = (0..len_a).map(|_| rng.gen_range(0.1..2.0)).collect();
        let mut b: Vec<f64> = (0..len_b).map(|_| rng.gen_range(0.1..2.0)).collect();
        let hole = rng.gen_range(1..len_b - 1);
        b[hole] = 0.0;
        let family = Family::from_members(
            vec![
                Pmf::from_weights(&a).unwrap(),
                Pmf::from_weights(&b).unwrap(),
            ],
            4.0,
        )
        .unwrap();
        let k_max = (len_a + len_b - 2) as i64;
        let rep = match efron_check(&family, 2, k_max) {
            Ok(rep) => rep,
            Err(_) => continue, // a consecutive sum with zero mass; skip
        };
        if let Some(bad) = rep.pairs.iter().find(|p| !p.holds) {
            return (a, b, bad.k);
        }
    }
}

fn main() {
    let (a, b, k) = search_counterexample(COUNTEREXAMPLE_SEARCH_SEED);
    println!("counterexample search (seed {COUNTEREXAMPLE_SEARCH_SEED}):");
    println!("  member 1 weights: {a:?}");
    println!("  member 2 weights: {b:?}");
    println!("  first failing pair: k = {k} vs k+1");
    println!();

    let spec: FamilySpec = serde_json::from_str(
        r#"{"members":[{"kind":"geometric","p":0.5}],"trunc_eps":1e-13,"lambda_cap":1.7}"#,
    )
    .unwrap();
    let family = Family::from_spec(&spec).unwrap();
    let n_list = [25usize, 50, 100, 200, 400];
    for (mode, lambda_star) in [
        (Mode::Above, 1.5),
        (Mode::Below, 0.6),
        (Mode::EqualFloor, 1.5),
    ] {
        let t0 = std::time::Instant::now();
        let rep = gcp_experiment(
            &family,
            lambda_star,
            1,
            &n_list,
            mode,
            GcpOptions::default(),
        )
        .unwrap();
        println!(
            "mode {mode:?}, lambda_star {lambda_star} ({} ms):",
            t0.elapsed().as_millis()
        );
        for row in &rep.rows {
            println!(
                "  n {:4}  r_star {:10.4}  event_mass {:.6e}  tv {:.12e}",
                row.n, row.r_star, row.event_mass, row.tv
            );
        }
        println!(
            "  condition: diverging {} (last gaps {:.3}, {:.3})",
            rep.condition.diverging,
            rep.condition.rows.last().unwrap().lower,
            rep.condition.rows.last().unwrap().upper,
        );
        println!();
    }

    let per_n = (1.5f64 - 1.0) - (2.0 - 1.0) + (2.0f64 / 1.5).ln() * 1.5;
    println!("poisson tail bound per-n constant: {per_n:.12}");
}

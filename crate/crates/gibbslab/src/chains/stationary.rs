//! Stationary distributions of finite-state chains by the GTH elimination.
//!
//! GTH (state reduction) solves πQ = 0 with no subtractions, so the result
//! is accurate to machine precision even for badly scaled rates. Dense
//! O(m³); meant for the desk-scale state spaces used here.

/// Stationary distribution of an irreducible rate matrix given as a dense
/// row-major `m × m` slice (diagonal entries are ignored).
pub fn gth_stationary(rates: &mut [f64], m: usize) -> Vec<f64> {
    assert_eq!(rates.len(), m * m);
    assert!(m >= 1);
    // Elimination: fold state s into the remaining chain.
    for s in (1..m).rev() {
        let tot: f64 = (0..s).map(|j| rates[s * m + j]).sum();
        assert!(tot > 0.0, "state {s} cannot reach lower-indexed states");
        for i in 0..s {
            let f = rates[i * m + s] / tot;
            if f > 0.0 {
                for j in 0..s {
                    if j != i {
                        rates[i * m + j] += f * rates[s * m + j];
                    }
                }
            }
        }
    }
    // Back substitution.
    let mut pi = vec![0.0f64; m];
    pi[0] = 1.0;
    for s in 1..m {
        let tot: f64 = (0..s).map(|j| rates[s * m + j]).sum();
        let inflow: f64 = (0..s).map(|i| pi[i] * rates[i * m + s]).sum();
        pi[s] = inflow / tot;
    }
    let z: f64 = pi.iter().sum();
    for p in &mut pi {
        *p /= z;
    }
    pi
}

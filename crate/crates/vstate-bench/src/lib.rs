//! Shared fixtures for the criterion benches under `benches/`.

use vstate::reduction::{ls_solve, LsConfig};
use vstate::spectral::FourierState;

/// A converged boundary perturbation near the annulus: the range solution at
/// amplitude `t` and `λ = λ_{2p}`.
pub fn near_annulus_state(p: u32, n: usize, t: f64) -> (f64, FourierState) {
    let b = vstate::exactnum::b2p_f64(p);
    let lambda = (1.0 + b * b) / 2.0;
    let sol = ls_solve(lambda, t, 0.0, p, &LsConfig::with_n(n)).expect("annulus solve converges");
    (lambda, sol.state())
}

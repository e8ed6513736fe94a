//! MaxEnt deviation as the tomogram noise grows. Usage: noisy_tomography [seed]
use qrecon::hilbert::C64;
use qrecon::maxent::SolverOptions;
use qrecon::states::{make_state, StateKind, StateSpec};
use qrecon::tomography::*;

fn main() {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse().expect("seed")).unwrap_or(0);
    let rho = make_state(&StateSpec::new(StateKind::IncoherentPair(C64::new(1.25, 0.0), C64::new(0.0, 1.25)), 30)).expect("state");
    let nbar: f64 = rho.diagonal().iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    for eta in [0.01, 0.05, 0.1, 0.5] {
        let t = simulate_tomogram(&rho, &equidistant_angles(4), &uniform_grid(-2.0, 2.0, 13), TomoMode::Noisy { eta, seed }).expect("tomogram");
        let me = maxent_tomo(&t, nbar, 30, &SolverOptions::default().with_fallback()).expect("maxent");
        println!("eta {eta:<5} Δ_maxent {:.4e}  converged {}", deviation(&me.sigma.m, &rho.m).unwrap(), me.converged);
    }
}

//! Pattern functions against MaxEnt on sparse homodyne data (four phases, thirteen bins).
use qrecon::hilbert::C64;
use qrecon::maxent::SolverOptions;
use qrecon::states::{make_state, StateKind, StateSpec};
use qrecon::tomography::*;

fn main() {
    let n_max = 30;
    let specs = [
        ("incoherent pair", StateSpec::new(StateKind::IncoherentPair(C64::new(1.25, 0.0), C64::new(0.0, 1.25)), n_max)),
        ("coherent pair", StateSpec::new(StateKind::CoherentPair(C64::new(1.25, 0.0), C64::new(0.0, 1.25)), n_max)),
        ("rectangular", StateSpec::new(StateKind::Rectangular(1.25), n_max).with_tail_tol(0.5)),
        ("Fock 4", StateSpec::new(StateKind::Fock(4), n_max)),
    ];
    println!("{:16} {:>12} {:>12}", "state", "Δ_pattern", "Δ_maxent");
    for (name, spec) in specs {
        let rho = make_state(&spec).expect("state");
        let nbar: f64 = rho.diagonal().iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        let t = simulate_tomogram(&rho, &equidistant_angles(4), &uniform_grid(-2.0, 2.0, 13), TomoMode::Exact).expect("tomogram");
        let ds = direct_sampling(&t, n_max).expect("pattern");
        let me = maxent_tomo(&t, nbar, n_max, &SolverOptions::default()).expect("maxent");
        println!("{name:16} {:12.4e} {:12.4e}", deviation(&ds.rho, &rho.m).unwrap(), deviation(&me.sigma.m, &rho.m).unwrap());
    }
}

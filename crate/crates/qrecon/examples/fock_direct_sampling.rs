//! A Fock state |n⟩ needs only n+1 phases for exact pattern-function sampling.
use qrecon::states::{make_state, StateKind, StateSpec};
use qrecon::tomography::*;

fn main() {
    for n in 1..=5 {
        let rho = make_state(&StateSpec::new(StateKind::Fock(n), n)).expect("state");
        let t = simulate_tomogram(&rho, &equidistant_angles(n + 1), &uniform_grid(-6.0, 6.0, 241), TomoMode::Exact).expect("tomogram");
        let ds = direct_sampling(&t, n).expect("pattern");
        println!("n {n}  rho_nn {:.6}", ds.rho[(n, n)].re);
    }
}

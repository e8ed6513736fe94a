//! GHZ state: two-body correlations leave ln 2; adding XXX and YYY pins it down.
use qrecon::maxent::SolverOptions;
use qrecon::spin::*;

fn main() {
    let g = ghz(std::f64::consts::FRAC_PI_4);
    let b3 = spin_closed_form(SpinPreset::B3, &SpinLevel::measured(&SpinPreset::B3.words(), &g.m).unwrap().means()).unwrap();
    let c3 = spin_maxent(&SpinLevel::measured(&SpinPreset::C3.words(), &g.m).unwrap(), &SolverOptions::spin()).unwrap();
    println!("S(B3) {:.9}  (ln 2 = {:.9})", b3.entropy, std::f64::consts::LN_2);
    println!("S(C3) {:.3e}  trace distance to GHZ {:.3e}", c3.entropy, qrecon::hilbert::trace_distance(&c3.sigma.m, &g.m));
}

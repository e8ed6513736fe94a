//! Bell-state data on each two-spin preset level.
use qrecon::maxent::SolverOptions;
use qrecon::spin::*;

fn main() {
    let bell = bell_phi(0.6);
    for p in SpinPreset::ALL.into_iter().filter(|p| p.sites() == 2) {
        let lvl = SpinLevel::measured(&p.words(), &bell.m).expect("level");
        let (s, how) = if p.has_closed_form() {
            (spin_closed_form(p, &lvl.means()).expect("closed form").entropy, "closed")
        } else {
            (spin_maxent(&lvl, &SolverOptions::spin()).expect("solve").entropy, "numeric")
        };
        println!("{:4} {how:8} S = {s:.9}", p.name());
    }
}

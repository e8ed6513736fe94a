//! Large-record limits against MaxEnt on the same means.
use qrecon::bayes::*;
use qrecon::hilbert::max_abs_diff;
use qrecon::maxent::SolverOptions;
use qrecon::spin::*;

fn main() {
    let w = |s: &str| PauliWord::parse(s).unwrap();
    let data = [(w("Z"), 0.4), (w("X"), -0.3)];
    let pure = asymptotic_estimate(BayesSystem::Spin1, &data).unwrap();
    let purified = asymptotic_estimate(BayesSystem::Spin1Purified, &data).unwrap();
    let me = spin_maxent(&SpinLevel::new(data.to_vec()).unwrap(), &SolverOptions::default()).unwrap();
    println!("pure prior:     purity {:.6}", pure.purity());
    println!("purified prior: purity {:.6}, |σ_Bayes - σ_MaxEnt| {:.2e}", purified.purity(), max_abs_diff(&purified.m, &me.sigma.m));
    let c = concentration_check(&[0.3, 0.7], 1000.0).unwrap();
    println!("concentration at N=1000: means {:?} variances {:?}", c.means, c.variances);
}

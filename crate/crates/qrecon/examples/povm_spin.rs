//! Optimal finite POVMs for N copies of a qubit, audited by Monte Carlo.
use qrecon::povm::*;

fn main() {
    println!("N  elements  closed_sum, mc_estimate, mc_stderr, bound");
    for n in 1..=6 {
        let p = build_spin_povm(n).unwrap();
        let r = mean_fidelity(&p, Task::SpinState(n), 200_000, n as u64).unwrap();
        println!("{n}  {:8}  {}", p.len(), r.line());
    }
}

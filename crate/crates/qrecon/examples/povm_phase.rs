//! Phase estimation with the discrete-Fourier projective measurement.
use qrecon::povm::*;

fn main() {
    for n in [1, 2, 4, 8, 16, 32] {
        let ph = build_phase_povm(n).unwrap();
        println!("N {n:2}  mean fidelity {:.6}  bound {:.6}", ph.mean_fidelity, build_f(Task::Phase(n)).unwrap().bound);
    }
}

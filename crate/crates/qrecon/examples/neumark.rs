//! Projective realizations of the qubit trine and the two-copy spin POVM.
use qrecon::povm::*;

fn main() {
    for (name, p) in [("trine", trine()), ("spin N=1", build_spin_povm(1).unwrap())] {
        let d = neumark_extend(&p).unwrap();
        println!(
            "{name:9} R={} ancilla {}  unitarity {:.1e}  recovery {:.1e}  Gram {:?}",
            p.len(),
            d.ancilla_dim,
            d.unitarity_defect,
            d.recovery_defect,
            d.gram_spectrum.iter().map(|v| (v * 1e9).round() / 1e9).collect::<Vec<_>>()
        );
    }
}

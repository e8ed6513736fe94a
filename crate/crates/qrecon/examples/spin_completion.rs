//! Four transverse correlations of a Bell state predict ⟨ZZ⟩ = 1.
use qrecon::spin::*;

fn main() {
    let bell = bell_phi(0.3);
    let lvl = SpinLevel::measured(&SpinPreset::H2.words(), &bell.m).unwrap();
    let zz = PauliWord::parse("ZZ").unwrap();
    let c = parametric_completion(&lvl, &[zz]).unwrap();
    println!("completed ZZ = {:.6}  entropy {:.3e}", c.free_values[0], c.entropy);
}

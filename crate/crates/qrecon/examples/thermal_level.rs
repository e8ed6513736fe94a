//! Mean photon number alone: the reconstruction is the thermal state.
use qrecon::maxent::{closed_form_reconstruct, FieldLevelSpec};

fn main() {
    for nbar in [0.5, 1.0, 2.0, 5.0] {
        let r = closed_form_reconstruct(&FieldLevelSpec::Th { nbar }, 200).expect("thermal level");
        let p = r.rho.diagonal();
        println!("nbar {nbar:4.1}  S {:.9}  P0 {:.6}  P1 {:.6}", r.entropy, p[0], p[1]);
    }
}

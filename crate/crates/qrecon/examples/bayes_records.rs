//! Posterior mean of one qubit as measurement outcomes accumulate.
use qrecon::bayes::*;
use qrecon::spin::{pauli_mean, PauliWord};

fn main() {
    let lines = ["z +1", "z +1", "x -1", "z +1", "y +1", "x -1"];
    let mut text = String::new();
    for l in lines {
        text.push_str(l);
        text.push('\n');
        let rec = MeasurementRecord::parse(BayesSystem::Spin1, &text).unwrap();
        let p = posterior_estimate(&rec, Quadrature::default_for(BayesSystem::Spin1)).unwrap();
        let m: Vec<String> = ["X", "Y", "Z"].iter().map(|w| format!("{:+.4}", pauli_mean(&p.rho.m, &PauliWord::parse(w).unwrap()))).collect();
        println!("{:2} outcomes  <σ> = ({})  S = {:.4}", rec.entries.len(), m.join(", "), p.rho.entropy());
    }
}

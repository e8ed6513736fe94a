//! Entropies of one source state across a chain of observation levels.
use qrecon::hilbert::C64;
use qrecon::maxent::{level_entropy_chain, FieldLevel, FieldLevelSpec};
use qrecon::states::{make_state, StateKind, StateSpec};

fn main() {
    let n_max = 60;
    let kind = std::env::args().nth(1).unwrap_or_else(|| "coherent".into());
    let spec = match kind.as_str() {
        "cat" => StateSpec::new(StateKind::EvenCat(1.2), n_max),
        "squeezed" => StateSpec::new(StateKind::SqueezedVacuum(0.5), n_max),
        _ => StateSpec::new(StateKind::Coherent(C64::new(1.2, 0.4)), n_max),
    };
    let rho = make_state(&spec).expect("state");
    let levels = [FieldLevel::Th, FieldLevel::O1, FieldLevel::O2, FieldLevel::OA, FieldLevel::OB, FieldLevel::OD1];
    let specs: Vec<FieldLevelSpec> = levels.iter().filter_map(|l| FieldLevelSpec::from_state(*l, &rho).ok()).collect();
    let chain = level_entropy_chain(&specs, n_max, Some(rho.entropy())).expect("chain");
    println!("{chain:#?}");
}

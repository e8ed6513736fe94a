//! Wigner function of an odd cat on a phase-space grid, written as CSV.
use qrecon::states::{make_state, StateKind, StateSpec};
use qrecon::wigner::{wigner_from_dm, PhaseGrid};

fn main() -> std::io::Result<()> {
    let rho = make_state(&StateSpec::new(StateKind::OddCat(1.5), 60)).expect("state");
    let grid = wigner_from_dm(&rho, &PhaseGrid::square(5.0, 101)).expect("grid");
    let path = std::env::temp_dir().join("odd_cat_wigner.csv");
    grid.write_csv(&path)?;
    println!("normalization {:.6}  W(0,0) {:.6}  -> {}", grid.normalization(), grid.values[(50, 50)], path.display());
    Ok(())
}

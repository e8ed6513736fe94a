use approx::assert_abs_diff_eq;
use qrecon::hilbert::*;
use qrecon::maxent::SolverOptions;
use qrecon::special::hermite_functions;
use qrecon::states::*;
use qrecon::tomography::*;
use std::f64::consts::PI;

fn state(spec: StateSpec) -> DensityMatrix {
    make_state(&spec).unwrap()
}

fn vacuum(n_max: usize) -> DensityMatrix {
    state(StateSpec::new(StateKind::Fock(0), n_max))
}

fn mean_n(rho: &DensityMatrix) -> f64 {
    rho.diagonal().iter().enumerate().map(|(n, p)| n as f64 * p).sum()
}

fn desk_tomogram(rho: &DensityMatrix, n_theta: usize, mode: TomoMode) -> Tomogram {
    simulate_tomogram(rho, &equidistant_angles(n_theta), &uniform_grid(-2.0, 2.0, 13), mode).unwrap()
}

#[test]
fn exact_vacuum_tomogram_is_normalized() {
    let t = simulate_tomogram(&vacuum(10), &equidistant_angles(3), &uniform_grid(-5.0, 5.0, 201), TomoMode::Exact).unwrap();
    for m in 0..3 {
        assert_abs_diff_eq!(t.column_mass(m), 1.0, epsilon = 1e-6);
    }
    assert!(t.values.iter().all(|v| *v >= 0.0));
}

#[test]
fn noise_free_noisy_mode_equals_exact() {
    let rho = state(StateSpec::new(StateKind::EvenCat(1.0), 30));
    let a = desk_tomogram(&rho, 4, TomoMode::Exact);
    let b = desk_tomogram(&rho, 4, TomoMode::Noisy { eta: 0.0, seed: 9 });
    assert_eq!(a.values, b.values);
}

#[test]
fn seeded_noise_is_reproducible() {
    let rho = state(StateSpec::new(StateKind::EvenCat(1.0), 30));
    let a = desk_tomogram(&rho, 4, TomoMode::Noisy { eta: 0.1, seed: 5 });
    let b = desk_tomogram(&rho, 4, TomoMode::Noisy { eta: 0.1, seed: 5 });
    let c = desk_tomogram(&rho, 4, TomoMode::Noisy { eta: 0.1, seed: 6 });
    assert_eq!(a.values, b.values);
    assert_ne!(a.values, c.values);
    assert!(a.values.iter().all(|v| *v >= 0.0));
}

#[test]
fn pattern_functions_are_dual_to_number_states() {
    // π ∫ f_mm ψ_k² dx = δ_mk for a θ-independent tomogram
    let xs = uniform_grid(-9.0, 9.0, 1801);
    let table = pattern_functions(6, &xs).unwrap();
    let h = xs[1] - xs[0];
    for m in 0..=6 {
        for k in 0..=6 {
            let s: f64 = xs.iter().enumerate().map(|(i, &x)| table.at_node(m, m, i) * hermite_functions(6, x)[k].powi(2)).sum();
            let want = if m == k { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(PI * s * h, want, epsilon = 2e-3);
        }
    }
}

#[test]
fn pattern_function_symmetries() {
    let xs = uniform_grid(-4.0, 4.0, 81);
    let t = pattern_functions(10, &xs).unwrap();
    for m in 0..=10 {
        for n in 0..=10 {
            let sign = if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..xs.len() {
                assert_eq!(t.at_node(m, n, i), t.at_node(n, m, i));
                assert!(t.at_node(m, n, i).is_finite());
                assert_abs_diff_eq!(t.at_node(m, n, 80 - i), sign * t.at_node(m, n, i), epsilon = 1e-8);
            }
        }
    }
    assert!(matches!(pattern_functions(81, &xs), Err(TomoError::NMaxTooLarge(81))));
}

#[test]
fn direct_sampling_of_dense_vacuum() {
    let t = simulate_tomogram(&vacuum(10), &equidistant_angles(8), &uniform_grid(-6.0, 6.0, 241), TomoMode::Exact).unwrap();
    let ds = direct_sampling(&t, 10).unwrap();
    assert_abs_diff_eq!(ds.rho[(0, 0)].re, 1.0, epsilon = 1e-3);
}

#[test]
fn fock_state_from_n_plus_one_angles() {
    let rho = state(StateSpec::new(StateKind::Fock(4), 4));
    let t = simulate_tomogram(&rho, &equidistant_angles(5), &uniform_grid(-6.0, 6.0, 241), TomoMode::Exact).unwrap();
    let ds = direct_sampling(&t, 4).unwrap();
    assert!((ds.rho[(4, 4)].re - 1.0).abs() < 5e-3);
}

#[test]
fn direct_sampling_is_linear() {
    let a = state(StateSpec::new(StateKind::Coherent(C64::new(0.8, 0.2)), 20));
    let b = state(StateSpec::new(StateKind::Fock(2), 20));
    let (ta, tb) = (desk_tomogram(&a, 4, TomoMode::Exact), desk_tomogram(&b, 4, TomoMode::Exact));
    let mut tm = ta.clone();
    tm.values = (&ta.values + &tb.values) * 0.5;
    let table = PatternTable::cached(20).unwrap();
    let ra = direct_sampling_with(&ta, &table, 21).unwrap().rho;
    let rb = direct_sampling_with(&tb, &table, 21).unwrap().rho;
    let rm = direct_sampling_with(&tm, &table, 21).unwrap().rho;
    assert!(max_abs_diff(&((ra + rb) * C64::from(0.5)), &rm) < 1e-12);
}

#[test]
fn maxent_is_not_linear() {
    // two angles and five points leave a lot unconstrained
    let a = state(StateSpec::new(StateKind::Coherent(C64::new(0.8, 0.2)), 20));
    let b = state(StateSpec::new(StateKind::Fock(2), 20));
    let grid = |r: &DensityMatrix| simulate_tomogram(r, &equidistant_angles(2), &uniform_grid(-2.0, 2.0, 5), TomoMode::Exact).unwrap();
    let (ta, tb) = (grid(&a), grid(&b));
    let mut tm = ta.clone();
    tm.values = (&ta.values + &tb.values) * 0.5;
    let opts = SolverOptions::default();
    let sa = maxent_tomo(&ta, mean_n(&a), 20, &opts).unwrap().sigma.m;
    let sb = maxent_tomo(&tb, mean_n(&b), 20, &opts).unwrap().sigma.m;
    let sm = maxent_tomo(&tm, 0.5 * (mean_n(&a) + mean_n(&b)), 20, &opts).unwrap().sigma.m;
    assert!(max_abs_diff(&((sa + sb) * C64::from(0.5)), &sm) > 1e-3);
}

#[test]
fn sparse_cat_data_defeats_pattern_functions() {
    let rho = state(StateSpec::new(StateKind::CoherentPair(C64::new(1.25, 0.0), C64::new(0.0, 1.25)), 30));
    let ds = direct_sampling(&desk_tomogram(&rho, 4, TomoMode::Exact), 30).unwrap();
    let d = deviation(&ds.rho, &rho.m).unwrap();
    assert!((0.05..=20.0).contains(&d), "{d}");
    assert!(ds.non_psd);
}

#[test]
fn maxent_sees_through_sparse_data() {
    let specs = [
        StateSpec::new(StateKind::IncoherentPair(C64::new(1.25, 0.0), C64::new(0.0, 1.25)), 30),
        StateSpec::new(StateKind::CoherentPair(C64::new(1.25, 0.0), C64::new(0.0, 1.25)), 30),
        StateSpec::new(StateKind::Rectangular(1.25), 30).with_tail_tol(0.5),
        StateSpec::new(StateKind::Fock(4), 30),
    ];
    for spec in specs {
        let rho = state(spec.clone());
        for n_theta in [4, 6] {
            let t = desk_tomogram(&rho, n_theta, TomoMode::Exact);
            let dp = deviation(&direct_sampling(&t, 30).unwrap().rho, &rho.m).unwrap();
            let me = maxent_tomo(&t, mean_n(&rho), 30, &SolverOptions::default()).unwrap();
            let dm = deviation(&me.sigma.m, &rho.m).unwrap();
            assert!(dm <= 1e-2 * dp, "{:?} N_θ={n_theta}: {dm:e} vs {dp:e}", spec.kind);
            if matches!(spec.kind, StateKind::IncoherentPair(..)) {
                assert!(dm <= 1e-3);
            }
        }
    }
}

#[test]
fn vacuum_tomogram_gives_vacuum() {
    let t = desk_tomogram(&vacuum(20), 4, TomoMode::Exact);
    let s = maxent_tomo(&t, 0.0, 20, &SolverOptions::default().with_fallback()).unwrap();
    assert!(s.entropy < 1e-6, "{}", s.entropy);
    assert_abs_diff_eq!(s.sigma.m[(0, 0)].re, 1.0, epsilon = 1e-6);
}

#[test]
fn weak_noise_keeps_maxent_accurate() {
    let rho = state(StateSpec::new(StateKind::IncoherentPair(C64::new(1.25, 0.0), C64::new(0.0, 1.25)), 30));
    let t = desk_tomogram(&rho, 4, TomoMode::Noisy { eta: 0.01, seed: 0 });
    let me = maxent_tomo(&t, mean_n(&rho), 30, &SolverOptions::default().with_fallback()).unwrap();
    let d = deviation(&me.sigma.m, &rho.m).unwrap();
    assert!((5e-4..5e-2).contains(&d), "{d}");
}

#[test]
fn deviation_examples() {
    let p0 = state(StateSpec::new(StateKind::Fock(0), 1)).m;
    let p1 = state(StateSpec::new(StateKind::Fock(1), 1)).m;
    let half = CMat::identity(2, 2) * C64::from(0.5);
    assert_eq!(deviation(&p0, &p0).unwrap(), 0.0);
    assert_abs_diff_eq!(deviation(&p0, &p1).unwrap(), 2.0, epsilon = 1e-15);
    assert_abs_diff_eq!(deviation(&half, &p0).unwrap(), 0.5, epsilon = 1e-15);
    assert!(matches!(deviation(&p0, &CMat::identity(3, 3)), Err(TomoError::DimMismatch(2, 3))));
}

#[test]
fn tomogram_csv_records_the_mode() {
    let dir = std::env::temp_dir().join(format!("qrecon-tomo-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let t = desk_tomogram(&vacuum(5), 2, TomoMode::Noisy { eta: 0.1, seed: 3 });
    let path = dir.join("t.csv");
    t.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().next().unwrap().contains("eta=0.1 seed=3"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 26);
    std::fs::remove_dir_all(&dir).unwrap();
}

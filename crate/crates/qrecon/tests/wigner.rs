use approx::assert_abs_diff_eq;
use qrecon::hilbert::*;
use qrecon::states::*;
use qrecon::wigner::*;
use std::f64::consts::{PI, SQRT_2};

fn state(kind: StateKind, n_max: usize) -> DensityMatrix {
    make_state(&StateSpec::new(kind, n_max)).unwrap()
}

fn xi(q: f64, p: f64) -> C64 {
    C64::new(q, p) / SQRT_2
}

#[test]
fn vacuum_and_one_photon_at_origin() {
    assert_abs_diff_eq!(wigner_point(&state(StateKind::Fock(0), 5), 0.0, 0.0).unwrap(), 2.0, epsilon = 1e-14);
    assert_abs_diff_eq!(wigner_point(&state(StateKind::Fock(1), 5), 0.0, 0.0).unwrap(), -2.0, epsilon = 1e-14);
}

#[test]
fn wigner_is_linear() {
    let a = state(StateKind::Coherent(C64::new(0.5, 1.0)), 40);
    let b = state(StateKind::SqueezedVacuum(0.3), 40);
    let mix = a.mix(&b, 0.5);
    let g = PhaseGrid::square(3.0, 21);
    let (wa, wb, wm) = (wigner_from_dm(&a, &g).unwrap(), wigner_from_dm(&b, &g).unwrap(), wigner_from_dm(&mix, &g).unwrap());
    let avg = (&wa.values + &wb.values) * 0.5;
    assert!((avg - &wm.values).abs().max() < 1e-12);
}

#[test]
fn empty_grid_is_rejected() {
    let r = state(StateKind::Fock(0), 3);
    assert!(matches!(wigner_from_dm(&r, &PhaseGrid::square(1.0, 0)), Err(WignerError::GridTooCoarse(0, 0))));
}

#[test]
fn quadrature_distributions() {
    let vac = state(StateKind::Fock(0), 10);
    let xs: Vec<f64> = (0..41).map(|i| -4.0 + 0.2 * i as f64).collect();
    for theta in [0.0, 0.7, 2.0] {
        let d = quadrature_pdf(&vac, theta, &xs).unwrap();
        for (x, w) in xs.iter().zip(&d.w) {
            assert_abs_diff_eq!(*w, (-x * x).exp() / PI.sqrt(), epsilon = 1e-14);
        }
    }
    let one = state(StateKind::Fock(1), 10);
    assert_abs_diff_eq!(quadrature_pdf(&one, 0.3, &[0.0]).unwrap().w[0], 0.0, epsilon = 1e-15);
}

#[test]
fn quadrature_mass_is_bounded() {
    let r = state(StateKind::EvenCat(1.3), 60);
    let xs: Vec<f64> = (0..301).map(|i| -7.5 + 0.05 * i as f64).collect();
    for theta in [0.0, 0.5, 1.5] {
        let d = quadrature_pdf(&r, theta, &xs).unwrap();
        let mass: f64 = d.w.iter().sum::<f64>() * 0.05;
        assert!((0.95..=1.0 + 1e-9).contains(&mass), "{mass}");
        assert!(d.w.iter().all(|w| *w >= -1e-10));
    }
}

#[test]
fn marginal_matches_quadrature_pdf() {
    let r = state(StateKind::CoherentPair(C64::new(1.0, 0.0), C64::new(-0.5, 0.8)), 40);
    let xs = [-1.5, -0.4, 0.0, 0.9, 2.1];
    let pdf = quadrature_pdf(&r, 0.0, &xs).unwrap();
    // ∫ W dp / 2π by trapezoid on a wide p grid
    let np = 801;
    let h = 16.0 / (np - 1) as f64;
    for (x, want) in xs.iter().zip(&pdf.w) {
        let mut s = 0.0;
        for j in 0..np {
            let w = if j == 0 || j + 1 == np { 0.5 } else { 1.0 };
            s += w * wigner_point(&r, *x, -8.0 + h * j as f64).unwrap();
        }
        assert_abs_diff_eq!(s * h / (2.0 * PI), *want, epsilon = 1e-4);
    }
}

#[test]
fn quadrature_covariance_under_rotation() {
    let f = FockOps::new(30);
    let r = state(StateKind::CoherentPair(C64::new(0.9, 0.3), C64::new(-0.2, 1.1)), 30);
    let xs = [-2.0, -0.3, 0.5, 1.7];
    for theta in [0.4, 1.9] {
        let u = f.rotation(theta);
        let rotated = DensityMatrix { basis: r.basis, m: &u * &r.m * u.adjoint() };
        let a = quadrature_pdf(&r, theta, &xs).unwrap();
        let b = quadrature_pdf(&rotated, 0.0, &xs).unwrap();
        for (x, y) in a.w.iter().zip(&b.w) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
    }
}

#[test]
fn states_match_complete_level_formulas() {
    let cases = [
        (StateKind::Coherent(C64::new(1.0, -0.6)), AnalyticState::Coherent(C64::new(1.0, -0.6))),
        (StateKind::Fock(3), AnalyticState::Fock(3)),
        (StateKind::SqueezedVacuum(0.5), AnalyticState::SqueezedVacuum(0.5)),
        (StateKind::EvenCat(1.2), AnalyticState::EvenCat(1.2)),
        (StateKind::OddCat(1.2), AnalyticState::OddCat(1.2)),
        (StateKind::Thermal(0.8), AnalyticState::Thermal(0.8)),
    ];
    for (kind, an) in cases {
        let rho = make_state(&StateSpec::new(kind, 60).with_tail_tol(1e-6)).unwrap();
        let mut worst = 0f64;
        for i in 0..17 {
            for j in 0..17 {
                let (q, p) = (-4.0 + 0.5 * i as f64, -4.0 + 0.5 * j as f64);
                let a = analytic_wigner(an, AnalyticLevel::Complete, xi(q, p)).unwrap();
                worst = worst.max((wigner_point(&rho, q, p).unwrap() - a).abs());
            }
        }
        assert!(worst < 1e-6, "{an:?}: {worst}");
    }
}

#[test]
fn tabulated_reconstructions() {
    // coherent n̄=2 on the photon-statistics level: 2 e^{-2n̄} J0(0)
    let c = analytic_wigner(AnalyticState::Coherent(C64::new(2f64.sqrt(), 0.0)), AnalyticLevel::OA, C64::new(0.0, 0.0)).unwrap();
    assert_abs_diff_eq!(c, 2.0 * (-4.0f64).exp(), epsilon = 1e-12);
    for a in [0.3, 1.0, 2.2] {
        assert_abs_diff_eq!(analytic_wigner(AnalyticState::OddCat(a), AnalyticLevel::OA, C64::new(0.0, 0.0)).unwrap(), -2.0, epsilon = 1e-12);
    }
    assert_abs_diff_eq!(analytic_wigner(AnalyticState::Coherent(C64::new(1.0, 1.0)), AnalyticLevel::Th, C64::new(0.0, 0.0)).unwrap(), 0.4, epsilon = 1e-14);
}

#[test]
fn thermal_level_matches_gibbs_state() {
    let nbar = 1.4;
    let rho = state(StateKind::Thermal(nbar), 80);
    for (q, p) in [(0.0, 0.0), (1.0, -0.5), (2.0, 1.5)] {
        let a = analytic_wigner(AnalyticState::Coherent(C64::new(nbar.sqrt(), 0.0)), AnalyticLevel::Th, xi(q, p)).unwrap();
        assert_abs_diff_eq!(wigner_point(&rho, q, p).unwrap(), a, epsilon = 1e-9);
    }
}

#[test]
fn unsupported_combinations_are_errors() {
    // O_D2 needs an integer mean photon number
    let e = analytic_wigner(AnalyticState::Coherent(C64::new(1.1, 0.0)), AnalyticLevel::OD2, C64::new(0.0, 0.0));
    assert!(matches!(e, Err(WignerError::UnsupportedCombination(..))));
}

#[test]
fn normalization_of_made_states() {
    for kind in [StateKind::Fock(2), StateKind::OddCat(1.0), StateKind::Coherent(C64::new(-1.0, 0.5))] {
        let g = wigner_from_dm(&state(kind, 60), &PhaseGrid::square(6.0, 201)).unwrap();
        assert_abs_diff_eq!(g.normalization(), 1.0, epsilon = 1e-3);
    }
}

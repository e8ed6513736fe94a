use approx::assert_abs_diff_eq;
use qrecon::hilbert::*;
use qrecon::states::*;

fn state(kind: StateKind, n_max: usize) -> DensityMatrix {
    make_state(&StateSpec::new(kind, n_max)).unwrap()
}

fn moment(rho: &DensityMatrix, k: usize, l: usize) -> f64 {
    central_moments(rho, &[(k, l)]).unwrap()[0].1
}

#[test]
fn fock_state_is_a_number_projector() {
    let r = state(StateKind::Fock(2), 10);
    assert_abs_diff_eq!(r.m[(2, 2)].re, 1.0, epsilon = 1e-15);
    let s = state_stats(&r).unwrap();
    assert_abs_diff_eq!(s.nbar, 2.0, epsilon = 1e-14);
    assert_abs_diff_eq!(s.mandel_q.unwrap(), -1.0, epsilon = 1e-14);
    assert_abs_diff_eq!(s.var_q, 2.5, epsilon = 1e-14);
}

#[test]
fn squeezed_vacuum_moments() {
    for eta in [0.5, -0.3, 0.7] {
        let r = state(StateKind::SqueezedVacuum(eta), 80);
        let s = state_stats(&r).unwrap();
        let nbar = eta * eta / (1.0 - eta * eta);
        assert_abs_diff_eq!(s.nbar, nbar, epsilon = 1e-9);
        assert_abs_diff_eq!(s.var_q * s.var_p, 0.25, epsilon = 1e-8);
        assert_abs_diff_eq!(s.mandel_q.unwrap(), 2.0 * nbar + 1.0, epsilon = 1e-8);
    }
    let s = state_stats(&state(StateKind::SqueezedVacuum(0.5), 80)).unwrap();
    assert_abs_diff_eq!(s.var_q, 1.5, epsilon = 1e-9);
}

#[test]
fn cat_states() {
    for alpha in [0.6f64, 1.0, 1.5] {
        let even = state(StateKind::EvenCat(alpha), 60);
        let odd = state(StateKind::OddCat(alpha), 60);
        let a2 = alpha * alpha;
        let se = state_stats(&even).unwrap();
        assert_abs_diff_eq!(se.nbar, a2 * a2.tanh(), epsilon = 1e-9);
        // ⟨a†²a²⟩ = α⁴ gives Q = (α⁴ − n̄²)/n̄
        assert_abs_diff_eq!(se.mandel_q.unwrap(), (a2 * a2 - se.nbar * se.nbar) / se.nbar, epsilon = 1e-8);
        assert_abs_diff_eq!(state_stats(&odd).unwrap().nbar, a2 / a2.tanh(), epsilon = 1e-9);
        for n in 0..30 {
            assert_eq!(even.m[(2 * n + 1, 2 * n + 1)].re, 0.0);
            assert_eq!(odd.m[(2 * n, 2 * n)].re, 0.0);
        }
    }
}

#[test]
fn coherent_state_is_poissonian() {
    let alpha = C64::new(1.2, -0.4);
    let r = state(StateKind::Coherent(alpha), 50);
    let s = state_stats(&r).unwrap();
    assert_abs_diff_eq!(s.mandel_q.unwrap(), 0.0, epsilon = 1e-9);
    assert_abs_diff_eq!(s.mean_q, 2f64.sqrt() * alpha.re, epsilon = 1e-10);
    assert_abs_diff_eq!(s.mean_p, 2f64.sqrt() * alpha.im, epsilon = 1e-10);
    for n in 0..10 {
        assert_abs_diff_eq!(s.photon_distribution[n], poisson(alpha.norm_sqr(), n), epsilon = 1e-12);
    }
    let vq = moment(&r, 2, 0);
    assert_abs_diff_eq!(moment(&r, 4, 0), 3.0 * vq * vq, epsilon = 1e-9);
}

#[test]
fn first_central_moments_vanish() {
    let pair = state(StateKind::IncoherentPair(C64::new(1.25, 0.0), C64::new(0.0, 1.25)), 30);
    for (k, l) in [(1, 0), (0, 1)] {
        assert_abs_diff_eq!(moment(&pair, k, l), 0.0, epsilon = 1e-12);
    }
    assert!(matches!(central_moments(&pair, &[(3, 2)]), Err(StateError::OrderTooHigh(3, 2))));
}

#[test]
fn pure_gaussian_moment_identity() {
    // N(N+1) = |M|² with N = ⟨a†a⟩ − |⟨a⟩|², M = ⟨a²⟩ − ⟨a⟩²
    let kinds = [
        StateKind::Coherent(C64::new(0.7, 0.9)),
        StateKind::SqueezedVacuum(0.4),
        StateKind::SqueezedVacuum(-0.6),
    ];
    for k in kinds {
        let s = state_stats(&state(k.clone(), 80)).unwrap();
        let n = s.nbar - s.mean_a.norm_sqr();
        let m = s.mean_a2 - s.mean_a * s.mean_a;
        assert_abs_diff_eq!(n * (n + 1.0), m.norm_sqr(), epsilon = 1e-8);
    }
}

#[test]
fn thermal_state_is_geometric() {
    let r = state(StateKind::Thermal(1.5), 80);
    for n in 0..20 {
        assert_abs_diff_eq!(r.m[(n, n)].re, 1.5f64.powi(n as i32) / 2.5f64.powi(n as i32 + 1), epsilon = 1e-12);
    }
}

#[test]
fn truncation_is_checked() {
    let e = make_state(&StateSpec::new(StateKind::Coherent(C64::new(3.0, 0.0)), 10));
    assert!(matches!(e, Err(StateError::TailMassTooLarge(_))));
}

#[test]
fn rectangular_wavefunction_overlaps() {
    // the flat wavefunction on [-2a, 2a] has zero overlap with odd oscillator states
    let ov = rectangular_overlaps(1.0, 40);
    for n in (1..40).step_by(2) {
        assert_abs_diff_eq!(ov[n], 0.0, epsilon = 1e-12);
    }
    let r = make_state(&StateSpec::new(StateKind::Rectangular(1.0), 60).with_tail_tol(0.5)).unwrap();
    assert_abs_diff_eq!(r.m.trace().re, 1.0, epsilon = 1e-9);
}

#[test]
fn spec_strings() {
    let s = StateSpec::parse("kind=evencat alpha=1.414 nmax=40").unwrap();
    assert_eq!(s.kind, StateKind::EvenCat(1.414));
    assert_eq!(s.n_max, 40);
    let c = StateSpec::parse("state=coherent nbar=2").unwrap();
    assert_eq!(c.kind, StateKind::Coherent(C64::new(2f64.sqrt(), 0.0)));
    let p = StateSpec::parse("kind=incoherentpair alpha1=1.25 alpha2=1.25i").unwrap();
    assert_eq!(p.kind, StateKind::IncoherentPair(C64::new(1.25, 0.0), C64::new(0.0, 1.25)));
    assert!(StateSpec::parse("kind=banana").is_err());
    let cat = StateSpec::parse("kind=evencat nbar=2").unwrap();
    let StateKind::EvenCat(a) = cat.kind else { panic!() };
    assert_abs_diff_eq!(a * a * (a * a).tanh(), 2.0, epsilon = 1e-10);
}

#[test]
fn stats_need_fock_basis() {
    let r = DensityMatrix::maximally_mixed(Basis::Generic(2));
    assert_eq!(state_stats(&r).unwrap_err(), StateError::NotFockBasis);
}

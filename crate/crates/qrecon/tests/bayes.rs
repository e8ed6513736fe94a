use approx::assert_abs_diff_eq;
use qrecon::bayes::*;
use qrecon::hilbert::*;
use qrecon::maxent::SolverOptions;
use qrecon::spin::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, LN_2};

fn w(s: &str) -> PauliWord {
    PauliWord::parse(s).unwrap()
}

fn record(system: BayesSystem, text: &str) -> MeasurementRecord {
    MeasurementRecord::parse(system, text).unwrap()
}

fn spin1(rec: &MeasurementRecord) -> Posterior {
    posterior_estimate(rec, Quadrature::default_for(BayesSystem::Spin1)).unwrap()
}

#[test]
fn likelihood_examples() {
    let up = StateParams::Spin1 { theta: 0.0, phi: 0.0 };
    let side = StateParams::Spin1 { theta: FRAC_PI_2, phi: 0.3 };
    assert_eq!(likelihood(&MeasurementRecord::empty(BayesSystem::Spin1), &side), 1.0);
    let r = record(BayesSystem::Spin1, "z +1");
    assert_abs_diff_eq!(likelihood(&r, &up), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(likelihood(&r, &side), 0.5, epsilon = 1e-15);
    let many = record(BayesSystem::Spin1, "x +1\ny -1\nz +1\nx +1");
    let v = likelihood(&many, &side);
    assert!((0.0..=1.0).contains(&v));
}

#[test]
fn single_up_outcome() {
    let p = spin1(&record(BayesSystem::Spin1, "z +1"));
    let want = (CMat::identity(2, 2) + pauli('Z') * C64::from(1.0 / 3.0)) * C64::from(0.5);
    assert!(max_abs_diff(&p.rho.m, &want) < 1e-6);
    assert!(p.stderr.is_none());
}

#[test]
fn empty_record_is_maximally_mixed() {
    for system in [BayesSystem::Spin1, BayesSystem::Spin2, BayesSystem::Spin1Purified] {
        let p = posterior_estimate(&MeasurementRecord::empty(system), Quadrature::default_for(system)).unwrap();
        let d = p.rho.dim();
        assert_eq!(p.rho.m, CMat::identity(d, d) * C64::from(1.0 / d as f64));
    }
}

#[test]
fn opposite_outcomes_cancel() {
    let p = spin1(&record(BayesSystem::Spin1, "z +1\nz -1"));
    assert_abs_diff_eq!(pauli_mean(&p.rho.m, &w("Z")), 0.0, epsilon = 1e-12);
}

#[test]
fn posterior_is_a_valid_state_with_lower_entropy() {
    for text in ["z +1", "x -1\ny +1", "z +1\nz +1\nx +1\nx -1\ny +1"] {
        let p = spin1(&record(BayesSystem::Spin1, text));
        let v = dm_validate(p.rho.m.clone(), p.rho.basis).unwrap();
        assert!(v.entropy() < LN_2 - 1e-6);
    }
}

#[test]
fn two_spin_single_outcome() {
    // unitarily invariant prior on pure states of C⁴: posterior (P + 2I)/10
    let p = posterior_estimate(&record(BayesSystem::Spin2, "zi +1"), Quadrature::default_for(BayesSystem::Spin2)).unwrap();
    let se = p.stderr.unwrap();
    assert!(se < 1e-2);
    assert_abs_diff_eq!(pauli_mean(&p.rho.m, &w("ZI")), 0.2, epsilon = 1e-3_f64.max(4.0 * se));
    assert_abs_diff_eq!(pauli_mean(&p.rho.m, &w("IZ")), 0.0, epsilon = 1e-3_f64.max(4.0 * se));
    assert!(dm_validate(p.rho.m.clone(), p.rho.basis).is_ok());
}

#[test]
fn purified_single_outcome() {
    // trace of (P + 2I)/10 over the ancilla
    let p = posterior_estimate(&record(BayesSystem::Spin1Purified, "z +1"), Quadrature::default_for(BayesSystem::Spin1Purified)).unwrap();
    assert_eq!(p.rho.dim(), 2);
    assert_abs_diff_eq!(pauli_mean(&p.rho.m, &w("Z")), 0.2, epsilon = 1e-3_f64.max(4.0 * p.stderr.unwrap()));
}

#[test]
fn quasi_random_runs_are_reproducible() {
    let r = record(BayesSystem::Spin2, "zz +1\nxi -1");
    let q = Quadrature::QuasiRandom { points: 20_000, replicas: 4, seed: 3 };
    let a = posterior_estimate(&r, q).unwrap();
    let b = posterior_estimate(&r, q).unwrap();
    assert_eq!(a.rho.m, b.rho.m);
}

#[test]
fn spin2_states_are_pure() {
    let p = StateParams::Spin2 { alpha: 0.4, psi: 1.2, phi1: 0.3, theta1: 2.0, phi2: -0.7, theta2: 0.9 };
    let s = state_of(&p);
    assert_abs_diff_eq!(s.purity(), 1.0, epsilon = 1e-12);
    let t = spin2_correlations(0.4, 1.2, 0.3, 2.0, -0.7, 0.9);
    for (i, a) in ['I', 'X', 'Y', 'Z'].iter().enumerate() {
        for (j, b) in ['I', 'X', 'Y', 'Z'].iter().enumerate() {
            let word = w(&format!("{a}{b}"));
            assert_abs_diff_eq!(pauli_mean(&s.m, &word), t[i][j], epsilon = 1e-12);
        }
    }
}

#[test]
fn rotated_record_gives_rotated_posterior() {
    // z → x rotation about y by π/2 maps (x, y, z) to (−z, y, x)
    let rec = record(BayesSystem::Spin1, "z +1\nz +1\nx -1\ny +1");
    let rot = record(BayesSystem::Spin1, "x +1\nx +1\nz +1\ny +1");
    let (a, b) = (spin1(&rec), spin1(&rot));
    let m = |p: &Posterior, s: &str| pauli_mean(&p.rho.m, &w(s));
    assert_abs_diff_eq!(m(&b, "X"), m(&a, "Z"), epsilon = 1e-4);
    assert_abs_diff_eq!(m(&b, "Z"), -m(&a, "X"), epsilon = 1e-4);
    assert_abs_diff_eq!(m(&b, "Y"), m(&a, "Y"), epsilon = 1e-4);
}

#[test]
fn long_records_approach_the_asymptotic_limit() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (th, ph) = (1.1f64, 0.8f64);
    let r = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
    let mut entries = Vec::new();
    for k in 0..10_000 {
        let (word, m) = if k % 2 == 0 { ("Z", r[2]) } else { ("X", r[0]) };
        let s = if rng.random::<f64>() < 0.5 * (1.0 + m) { 1 } else { -1 };
        entries.push((w(word), s));
    }
    let rec = MeasurementRecord::new(BayesSystem::Spin1, entries).unwrap();
    let post = posterior_estimate(&rec, Quadrature::Product { n_theta: 256, n_phi: 256 }).unwrap();
    let mean = |word: &str| {
        let n = rec.entries.iter().filter(|(x, _)| *x == w(word)).count() as f64;
        rec.entries.iter().filter(|(x, _)| *x == w(word)).map(|(_, s)| *s as f64).sum::<f64>() / n
    };
    let lim = asymptotic_estimate(BayesSystem::Spin1, &[(w("Z"), mean("Z")), (w("X"), mean("X"))]).unwrap();
    let d = trace_distance(&post.rho.m, &lim.m);
    assert!(d < 0.02, "{d}");
}

#[test]
fn asymptotic_examples() {
    let q = asymptotic_estimate(BayesSystem::Spin1, &[(w("X"), 0.0), (w("Y"), 0.0), (w("Z"), 0.5)]);
    assert!(matches!(q, Err(BayesError::PurityViolation(s)) if (s - 0.25).abs() < 1e-12));
    let pure = asymptotic_estimate(BayesSystem::Spin1, &[(w("X"), 0.6), (w("Y"), 0.0), (w("Z"), 0.8)]).unwrap();
    assert_abs_diff_eq!(pure.purity(), 1.0, epsilon = 1e-12);
    let uu = asymptotic_estimate(BayesSystem::Spin2, &[(w("ZI"), 1.0), (w("IZ"), 1.0)]).unwrap();
    assert_abs_diff_eq!(uu.m[(0, 0)].re, 1.0, epsilon = 1e-12);
    assert!(matches!(asymptotic_estimate(BayesSystem::Spin2, &[(w("XX"), 0.1)]), Err(BayesError::UnsupportedLevel(_))));
}

#[test]
fn bayesian_and_maxent_limits_differ_below_full_polarization() {
    for (a, c, same) in [(0.5, 0.3, false), (-0.4, 0.7, false), (1.0, 0.6, true)] {
        let bayes = asymptotic_estimate(BayesSystem::Spin2, &[(w("ZI"), a), (w("ZZ"), c)]).unwrap();
        let lvl = SpinLevel::new(vec![(w("ZI"), a), (w("ZZ"), c)]).unwrap();
        let me = spin_maxent(&lvl, &SolverOptions::spin()).unwrap();
        let diff = max_abs_diff(&bayes.m, &me.sigma.m);
        assert_eq!(diff < 1e-6, same, "a={a} c={c}: {diff}");
    }
}

#[test]
fn purified_limits_are_maxent_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let v: [f64; 3] = [rng.random_range(-0.55..0.55), rng.random_range(-0.55..0.55), rng.random_range(-0.55..0.55)];
        for k in 1..=3 {
            let words: Vec<(PauliWord, f64)> = ["Z", "X", "Y"][..k].iter().zip(v).map(|(s, m)| (w(s), m)).collect();
            let a = asymptotic_estimate(BayesSystem::Spin1Purified, &words).unwrap();
            let lvl = SpinLevel::new(words).unwrap();
            let me = spin_maxent(&lvl, &SolverOptions::default()).unwrap();
            assert!(max_abs_diff(&a.m, &me.sigma.m) < 1e-6);
        }
    }
}

#[test]
fn concentration_moments() {
    let r = concentration_check(&[0.5, 0.5], 0.0).unwrap();
    assert_eq!(r.means, vec![0.5, 0.5]);
    // uniform on [0, 1]: ⟨x²⟩ = 1/3
    assert_abs_diff_eq!(r.second_moments[0], 1.0 / 3.0, epsilon = 1e-15);
    let u = concentration_check(&[0.2, 0.3, 0.5], 0.0).unwrap();
    for m in u.means {
        assert_abs_diff_eq!(m, 1.0 / 3.0, epsilon = 1e-15);
    }
    let big = concentration_check(&[0.5, 0.5], 1e6).unwrap();
    assert_abs_diff_eq!(big.means[0], 0.5, epsilon = 1e-12);
    let v = concentration_check(&[0.3, 0.7], 1000.0).unwrap();
    assert!(v.variances.iter().all(|x| *x < 1e-3));
    assert!(matches!(concentration_check(&[0.3, 0.3], 1.0), Err(BayesError::InvalidAlphas)));
}

#[test]
fn concentration_matches_direct_integration() {
    // x^{aN} (1−x)^{bN} on [0, 1] by a fine midpoint rule
    let (a, n) = (0.3, 20.0);
    let k = 200_000;
    let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for i in 0..k {
        let x = (i as f64 + 0.5) / k as f64;
        let f = x.powf(a * n) * (1.0 - x).powf((1.0 - a) * n);
        z += f;
        m1 += x * f;
        m2 += x * x * f;
    }
    let r = concentration_check(&[a, 1.0 - a], n).unwrap();
    assert_abs_diff_eq!(r.means[0], m1 / z, epsilon = 1e-9);
    assert_abs_diff_eq!(r.second_moments[0], m2 / z, epsilon = 1e-9);
}

#[test]
fn record_parsing() {
    let r = record(BayesSystem::Spin2, "# header\nxz -1\nzz +1  # trailing\n\n");
    assert_eq!(r.entries, vec![(w("XZ"), -1), (w("ZZ"), 1)]);
    assert!(matches!(MeasurementRecord::parse(BayesSystem::Spin1, "z 0"), Err(BayesError::Parse(1, _))));
    assert!(matches!(MeasurementRecord::parse(BayesSystem::Spin1, "zz +1"), Err(BayesError::BadObservable(..))));
    assert_eq!(BayesSystem::parse("Spin1Purified"), Some(BayesSystem::Spin1Purified));
}

#[test]
fn long_uniform_record_keeps_finite_evidence() {
    let text = "z +1\n".repeat(5000);
    let p = spin1(&record(BayesSystem::Spin1, &text));
    assert!(p.log_evidence < -5.0 && p.log_evidence.is_finite());
    assert!(pauli_mean(&p.rho.m, &w("Z")) > 0.99);
}

use approx::assert_abs_diff_eq;
use qrecon::hilbert::*;
use std::f64::consts::LN_2;

fn diag(v: &[f64]) -> CMat {
    CMat::from_fn(v.len(), v.len(), |i, j| if i == j { C64::from(v[i]) } else { C64::from(0.0) })
}

#[test]
fn maximally_mixed_qubit_is_valid() {
    let r = dm_validate(diag(&[0.5, 0.5]), Basis::Generic(2)).unwrap();
    assert_abs_diff_eq!(von_neumann_entropy(&r), LN_2, epsilon = 1e-14);
}

#[test]
fn validation_names_the_violation() {
    assert!(matches!(dm_validate(diag(&[0.6, 0.5]), Basis::Generic(2)), Err(HilbertError::TraceNotOne(t)) if (t - 1.1).abs() < 1e-12));
    assert!(matches!(dm_validate(diag(&[1.2, -0.2]), Basis::Generic(2)), Err(HilbertError::NotPositive(v)) if (v + 0.2).abs() < 1e-12));
    let mut m = diag(&[0.5, 0.5]);
    m[(0, 1)] = C64::new(0.1, 0.0);
    assert!(matches!(dm_validate(m, Basis::Generic(2)), Err(HilbertError::NotHermitian(_))));
}

#[test]
fn entropy_of_pure_and_mixed() {
    let psi = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
    assert_abs_diff_eq!(DensityMatrix::pure(Basis::Generic(2), &psi).entropy(), 0.0, epsilon = 1e-12);
    for n in [2usize, 5, 17] {
        assert_abs_diff_eq!(DensityMatrix::maximally_mixed(Basis::Generic(n)).entropy(), (n as f64).ln(), epsilon = 1e-12);
    }
}

#[test]
fn truncated_thermal_entropy() {
    // geometric populations nbar^n / (nbar+1)^(n+1) at nbar = 1
    let p: Vec<f64> = (0..=60).map(|n| 0.5f64.powi(n + 1)).collect();
    let norm: f64 = p.iter().sum();
    let rho = DensityMatrix { basis: Basis::Fock(60), m: diag(&p) / C64::from(norm) };
    assert_abs_diff_eq!(rho.entropy(), 2.0 * LN_2, epsilon = 1e-6);
}

#[test]
fn gibbs_of_number_operator_is_thermal() {
    let f = FockOps::new(80);
    let nbar: f64 = 2.0;
    let lam = ((nbar + 1.0) / nbar).ln();
    let (sigma, _) = gibbs_state(&[Observable::new("n", f.n.clone())], &[lam], f.basis()).unwrap();
    let want = CMat::from_fn(81, 81, |i, j| if i == j { C64::from(nbar.powi(i as i32) / (nbar + 1.0).powi(i as i32 + 1)) } else { C64::from(0.0) });
    assert!(max_abs_diff(&sigma.m, &want) < 1e-10);
}

#[test]
fn gibbs_at_zero_multipliers_is_uniform() {
    let obs = vec![Observable::new("z", pauli('Z')), Observable::new("x", pauli('X'))];
    let (s, log_z) = gibbs_state(&obs, &[0.0, 0.0], Basis::Generic(2)).unwrap();
    assert!(max_abs_diff(&s.m, &(CMat::identity(2, 2) * C64::from(0.5))) < 1e-15);
    assert_abs_diff_eq!(log_z, LN_2, epsilon = 1e-14);
}

#[test]
fn gibbs_spin_half_closed_form() {
    let l = [0.3, -0.7, 1.1];
    let obs: Vec<Observable> = ['X', 'Y', 'Z'].iter().map(|c| Observable::new(c.to_string(), pauli(*c))).collect();
    let (s, log_z) = gibbs_state(&obs, &l, Basis::Generic(2)).unwrap();
    let r = (l[0] * l[0] + l[1] * l[1] + l[2] * l[2]).sqrt();
    let dot = pauli('X') * C64::from(l[0]) + pauli('Y') * C64::from(l[1]) + pauli('Z') * C64::from(l[2]);
    let want = (CMat::identity(2, 2) * C64::from(r.cosh()) - dot * C64::from(r.sinh() / r)) / C64::from(2.0 * r.cosh());
    assert!(max_abs_diff(&s.m, &want) < 1e-14);
    assert_abs_diff_eq!(log_z, (2.0 * r.cosh()).ln(), epsilon = 1e-13);
}

#[test]
fn gibbs_survives_large_exponents() {
    let (s, log_z) = gibbs_state(&[Observable::new("z", pauli('Z'))], &[900.0], Basis::Generic(2)).unwrap();
    assert_abs_diff_eq!(s.m[(1, 1)].re, 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(log_z, 900.0, epsilon = 1e-9);
}

#[test]
fn expectations() {
    let f = FockOps::new(20);
    let mut e = vec![C64::from(0.0); 21];
    e[3] = C64::from(1.0);
    let fock3 = DensityMatrix::pure(f.basis(), &e);
    assert_abs_diff_eq!(expectation(&fock3, &Observable::new("n", f.n.clone())).unwrap(), 3.0, epsilon = 1e-14);
    let mixed = DensityMatrix::maximally_mixed(Basis::Generic(2));
    assert_abs_diff_eq!(expectation(&mixed, &Observable::new("z", pauli('Z'))).unwrap(), 0.0, epsilon = 1e-15);
    assert!(matches!(expectation(&mixed, &Observable::new("n", f.n.clone())), Err(HilbertError::DimMismatch(..))));
}

#[test]
fn coherent_mean_number() {
    let f = FockOps::new(60);
    let d = f.displacement(C64::new(2f64.sqrt(), 0.0));
    let psi: Vec<C64> = d.column(0).iter().cloned().collect();
    let rho = DensityMatrix::pure(f.basis(), &psi);
    assert_abs_diff_eq!(expectation(&rho, &Observable::new("n", f.n.clone())).unwrap(), 2.0, epsilon = 1e-8);
}

#[test]
fn ladder_and_commutator() {
    let f = FockOps::new(30);
    let mut one = vec![C64::from(0.0); 31];
    one[1] = C64::from(1.0);
    let v = &f.a * nalgebra::DVector::from_vec(one);
    assert_abs_diff_eq!(v[0].re, 1.0, epsilon = 1e-15);
    assert!(v.iter().skip(1).all(|x| x.norm() < 1e-15));
    let c = &f.a * &f.a_dag - &f.a_dag * &f.a;
    let block = c.view((0, 0), (25, 25)).clone_owned();
    assert!(max_abs_diff(&block, &CMat::identity(25, 25)) < 1e-12);
}

#[test]
fn displacement_matches_series() {
    let f = FockOps::new(30);
    let alpha = C64::new(0.8, -0.5);
    let d = f.displacement(alpha);
    let mut coef = (-alpha.norm_sqr() / 2.0).exp();
    let mut apow = C64::from(1.0);
    let mut worst = 0f64;
    for n in 0..=30usize {
        if n > 0 {
            apow *= alpha;
            coef /= (n as f64).sqrt();
        }
        worst = worst.max((d[(n, 0)] - apow * coef).norm());
    }
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn rotation_invariance_under_recombination() {
    // G' = A G with λ' = A^{-T} λ leaves the Gibbs state unchanged
    let g = [pauli('X'), pauli('Z'), kron(&pauli('Z'), &pauli('Z'))];
    let g4: Vec<CMat> = vec![kron(&g[0], &pauli('Z')), kron(&pauli('Z'), &CMat::identity(2, 2)), g[2].clone()];
    let lam = [0.4, -0.9, 0.25];
    let a = nalgebra::Matrix3::new(1.0, 0.5, 0.0, 0.0, 2.0, 0.3, -0.4, 0.0, 1.0);
    let obs: Vec<Observable> = g4.iter().enumerate().map(|(i, m)| Observable::new(format!("g{i}"), m.clone())).collect();
    let rec: Vec<Observable> = (0..3)
        .map(|i| {
            let m = (0..3).fold(CMat::zeros(4, 4), |acc, j| acc + &g4[j] * C64::from(a[(i, j)]));
            Observable::new(format!("h{i}"), m)
        })
        .collect();
    let lam_v = nalgebra::Vector3::from_row_slice(&lam);
    let lam2 = a.transpose().try_inverse().unwrap() * lam_v;
    let (s1, _) = gibbs_state(&obs, &lam, Basis::Generic(4)).unwrap();
    let (s2, _) = gibbs_state(&rec, lam2.as_slice(), Basis::Generic(4)).unwrap();
    assert!(max_abs_diff(&s1.m, &s2.m) < 1e-10);
}

#[test]
fn level_rejects_dependent_observables() {
    let z = Observable::new("z", pauli('Z')).with_mean(0.1);
    let z2 = Observable::new("2z", pauli('Z') * C64::from(2.0)).with_mean(0.2);
    assert!(ObservationLevel::new(vec![z.clone(), z2]).is_err());
    let n = Observable::new("n", FockOps::new(3).n.clone()).with_mean(1.0);
    assert!(ObservationLevel::new(vec![z, n]).is_err());
}

#[test]
fn partial_trace_of_product() {
    let a = CMat::from_fn(2, 2, |i, j| C64::new((i + 2 * j) as f64, i as f64 - j as f64));
    let b = DensityMatrix::maximally_mixed(Basis::Generic(3)).m;
    assert!(max_abs_diff(&partial_trace_second(&kron(&a, &b), 2, 3), &a) < 1e-14);
}

//! Bayesian posterior-mean estimation of spin states from finite measurement
//! records, with a uniform prior on the pure-state manifold.

use crate::hilbert::{pauli, Basis, CMat, DensityMatrix, C64};
use crate::special::gauss_legendre;
use crate::spin::{Pauli, PauliWord};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BayesError {
    #[error("observable `{0}` is not measurable on {1:?}")]
    BadObservable(String, BayesSystem),
    #[error("every integration node has zero likelihood")]
    QuadratureUnderflow,
    #[error("purity condition fails: sum of squared means is {0}, need 1")]
    PurityViolation(f64),
    #[error("means are unphysical (Bloch length² {0})")]
    Unphysical(f64),
    #[error("no asymptotic form for this set of observables on {0:?}")]
    UnsupportedLevel(BayesSystem),
    #[error("line {0}: {1}")]
    Parse(usize, String),
    #[error("weights must be positive and sum to one")]
    InvalidAlphas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BayesSystem {
    /// One spin, pure states on the Bloch sphere.
    Spin1,
    /// Two spins, pure states of the pair.
    Spin2,
    /// One spin modelled as half of a pure two-spin state.
    Spin1Purified,
}

impl BayesSystem {
    pub fn parse(s: &str) -> Option<BayesSystem> {
        match s.to_ascii_lowercase().as_str() {
            "spin1" => Some(BayesSystem::Spin1),
            "spin2" => Some(BayesSystem::Spin2),
            "spin1purified" | "purified" => Some(BayesSystem::Spin1Purified),
            _ => None,
        }
    }

    /// Number of sites the record's words act on.
    pub fn word_sites(self) -> usize {
        match self {
            BayesSystem::Spin2 => 2,
            _ => 1,
        }
    }
}

/// Ordered outcomes (word, ±1).
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub system: BayesSystem,
    pub entries: Vec<(PauliWord, i8)>,
}

impl MeasurementRecord {
    pub fn new(system: BayesSystem, entries: Vec<(PauliWord, i8)>) -> Result<MeasurementRecord, BayesError> {
        for (w, s) in &entries {
            if w.sites() != system.word_sites() || w.is_identity() || !(*s == 1 || *s == -1) {
                return Err(BayesError::BadObservable(format!("{w} {s}"), system));
            }
        }
        Ok(MeasurementRecord { system, entries })
    }

    pub fn empty(system: BayesSystem) -> MeasurementRecord {
        MeasurementRecord { system, entries: Vec::new() }
    }

    /// One `observable outcome` pair per line, e.g. `z +1` or `xz -1`; `#` starts a comment.
    pub fn parse(system: BayesSystem, text: &str) -> Result<MeasurementRecord, BayesError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(w), Some(s), None) = (it.next(), it.next(), it.next()) else {
                return Err(BayesError::Parse(i + 1, format!("expected `observable outcome`, got `{line}`")));
            };
            let word = PauliWord::parse(w).map_err(|e| BayesError::Parse(i + 1, e.to_string()))?;
            let s = match s {
                "+1" | "1" | "+" => 1,
                "-1" | "-" => -1,
                _ => return Err(BayesError::Parse(i + 1, format!("outcome `{s}` is not ±1"))),
            };
            entries.push((word, s));
        }
        MeasurementRecord::new(system, entries)
    }

    pub fn read(system: BayesSystem, path: &Path) -> std::io::Result<Result<MeasurementRecord, BayesError>> {
        Ok(MeasurementRecord::parse(system, &std::fs::read_to_string(path)?))
    }

    /// Outcome counts per word: (n₊, n₋).
    fn counts(&self) -> Vec<(PauliWord, u64, u64)> {
        let mut m: BTreeMap<PauliWord, (u64, u64)> = BTreeMap::new();
        for (w, s) in &self.entries {
            let e = m.entry(w.clone()).or_default();
            if *s > 0 {
                e.0 += 1
            } else {
                e.1 += 1
            }
        }
        m.into_iter().map(|(w, (p, n))| (w, p, n)).collect()
    }
}

fn axis(p: Pauli) -> usize {
    match p {
        Pauli::I => 0,
        Pauli::X => 1,
        Pauli::Y => 2,
        Pauli::Z => 3,
    }
}

/// Parameters of a pure state on the manifold of a system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateParams {
    /// Bloch angles.
    Spin1 { theta: f64, phi: f64 },
    /// Schmidt angle α, relative phase ψ, and the two local Bloch frames.
    Spin2 { alpha: f64, psi: f64, phi1: f64, theta1: f64, phi2: f64, theta2: f64 },
}

/// Pauli coefficients T_ij = ⟨σ_i ⊗ σ_j⟩ (index 0 = identity) of the pure two-spin state.
pub fn spin2_correlations(alpha: f64, psi: f64, phi1: f64, theta1: f64, phi2: f64, theta2: f64) -> [[f64; 4]; 4] {
    let frame = |phi: f64, theta: f64| {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let k = [sp, -cp, 0.0];
        let l = [ct * cp, ct * sp, -st];
        let r = [st * cp, st * sp, ct];
        (k, l, r)
    };
    let (k1, l1, r1) = frame(phi1, theta1);
    let (k2, l2, r2) = frame(phi2, theta2);
    let (sa, ca) = alpha.sin_cos();
    let (sps, cps) = psi.sin_cos();
    let mut t = [[0.0; 4]; 4];
    t[0][0] = 1.0;
    for i in 0..3 {
        t[i + 1][0] = ca * r1[i];
        t[0][i + 1] = ca * r2[i];
        for j in 0..3 {
            t[i + 1][j + 1] = r1[i] * r2[j] + sa * cps * (k1[i] * k2[j] - l1[i] * l2[j]) - sa * sps * (k1[i] * l2[j] + l1[i] * k2[j]);
        }
    }
    t
}

fn pauli_coeffs(p: &StateParams) -> [[f64; 4]; 4] {
    match *p {
        StateParams::Spin1 { theta, phi } => {
            let mut t = [[0.0; 4]; 4];
            t[0][0] = 1.0;
            t[1][0] = theta.sin() * phi.cos();
            t[2][0] = theta.sin() * phi.sin();
            t[3][0] = theta.cos();
            t
        }
        StateParams::Spin2 { alpha, psi, phi1, theta1, phi2, theta2 } => spin2_correlations(alpha, psi, phi1, theta1, phi2, theta2),
    }
}

fn word_mean(t: &[[f64; 4]; 4], w: &PauliWord) -> f64 {
    match w.factors.as_slice() {
        [a] => t[axis(*a)][0],
        [a, b] => t[axis(*a)][axis(*b)],
        _ => f64::NAN,
    }
}

/// Density matrix of the parameterized pure state.
pub fn state_of(p: &StateParams) -> DensityMatrix {
    let t = pauli_coeffs(p);
    match p {
        StateParams::Spin1 { .. } => DensityMatrix { basis: Basis::SpinProduct(1), m: one_spin(&t) },
        StateParams::Spin2 { .. } => DensityMatrix { basis: Basis::SpinProduct(2), m: two_spin(&t) },
    }
}

fn one_spin(t: &[[f64; 4]; 4]) -> CMat {
    let mut m = CMat::identity(2, 2);
    for (i, c) in ['X', 'Y', 'Z'].iter().enumerate() {
        m += pauli(*c) * C64::from(t[i + 1][0]);
    }
    m * C64::from(0.5)
}

fn two_spin(t: &[[f64; 4]; 4]) -> CMat {
    let letters = ['I', 'X', 'Y', 'Z'];
    let mut m = CMat::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            if t[i][j] != 0.0 {
                m += crate::hilbert::kron(&pauli(letters[i]), &pauli(letters[j])) * C64::from(t[i][j]);
            }
        }
    }
    m * C64::from(0.25)
}

/// Π over entries of (1 + s⟨W⟩)/2.
pub fn likelihood(record: &MeasurementRecord, params: &StateParams) -> f64 {
    log_likelihood(&record.counts(), &pauli_coeffs(params)).exp()
}

fn log_likelihood(counts: &[(PauliWord, u64, u64)], t: &[[f64; 4]; 4]) -> f64 {
    let mut s = 0.0;
    for (w, np, nm) in counts {
        let m = word_mean(t, w).clamp(-1.0, 1.0);
        if *np > 0 {
            s += *np as f64 * (0.5 * (1.0 + m)).ln();
        }
        if *nm > 0 {
            s += *nm as f64 * (0.5 * (1.0 - m)).ln();
        }
    }
    s
}

/// Integration rule for the posterior mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quadrature {
    /// Product Gauss–Legendre in (θ, φ); single spin only.
    Product { n_theta: usize, n_phi: usize },
    /// Scrambled Sobol points split into independent replicas.
    QuasiRandom { points: usize, replicas: usize, seed: u32 },
}

impl Quadrature {
    pub fn default_for(system: BayesSystem) -> Quadrature {
        match system {
            BayesSystem::Spin1 => Quadrature::Product { n_theta: 64, n_phi: 64 },
            _ => Quadrature::QuasiRandom { points: 200_000, replicas: 8, seed: 0 },
        }
    }
}

#[derive(Debug, Clone)]
pub struct Posterior {
    pub rho: DensityMatrix,
    /// Largest standard error of a Pauli coefficient, for stochastic rules.
    pub stderr: Option<f64>,
    /// ln of the prior-averaged likelihood.
    pub log_evidence: f64,
}

/// Accumulates Σ w L T with a running maximum of ln L.
struct Acc {
    max_log: f64,
    weight: f64,
    t: [[f64; 4]; 4],
}

impl Acc {
    fn new() -> Acc {
        Acc { max_log: f64::NEG_INFINITY, weight: 0.0, t: [[0.0; 4]; 4] }
    }

    fn add(&mut self, prior: f64, log_l: f64, t: &[[f64; 4]; 4]) {
        if log_l == f64::NEG_INFINITY || prior == 0.0 {
            return;
        }
        if log_l > self.max_log {
            let f = (self.max_log - log_l).exp();
            self.weight *= f;
            for row in self.t.iter_mut() {
                for v in row.iter_mut() {
                    *v *= f;
                }
            }
            self.max_log = log_l;
        }
        let w = prior * (log_l - self.max_log).exp();
        self.weight += w;
        for i in 0..4 {
            for j in 0..4 {
                self.t[i][j] += w * t[i][j];
            }
        }
    }

    fn mean(&self) -> Option<[[f64; 4]; 4]> {
        if self.weight <= 0.0 {
            return None;
        }
        let mut m = self.t;
        for row in m.iter_mut() {
            for v in row.iter_mut() {
                *v /= self.weight;
            }
        }
        Some(m)
    }
}

fn sobol_params(i: u32, seed: u32) -> StateParams {
    let u = |d: u32| sobol_burley::sample(i, d, seed) as f64;
    let x = (2.0 * u(0) - 1.0).cbrt();
    StateParams::Spin2 {
        alpha: x.clamp(-1.0, 1.0).acos(),
        psi: 2.0 * PI * u(1),
        phi1: 2.0 * PI * u(2),
        theta1: (2.0 * u(3) - 1.0).clamp(-1.0, 1.0).acos(),
        phi2: 2.0 * PI * u(4),
        theta2: (2.0 * u(5) - 1.0).clamp(-1.0, 1.0).acos(),
    }
}

/// Posterior mean ∫ L ρ dμ / ∫ L dμ.
pub fn posterior_estimate(record: &MeasurementRecord, quad: Quadrature) -> Result<Posterior, BayesError> {
    let counts = record.counts();
    let sys = record.system;
    if counts.is_empty() {
        // the prior mean is maximally mixed on every manifold
        let basis = Basis::SpinProduct(if sys == BayesSystem::Spin2 { 2 } else { 1 });
        return Ok(Posterior { rho: DensityMatrix::maximally_mixed(basis), stderr: None, log_evidence: 0.0 });
    }
    let (mean, stderr, log_ev) = match (sys, quad) {
        (BayesSystem::Spin1, Quadrature::Product { n_theta, n_phi }) => {
            let (th, wt) = gauss_legendre(n_theta, 0.0, PI);
            let (ph, wp) = gauss_legendre(n_phi, 0.0, 2.0 * PI);
            let mut acc = Acc::new();
            let mut prior_total = 0.0;
            for (&t, &w1) in th.iter().zip(&wt) {
                for (&p, &w2) in ph.iter().zip(&wp) {
                    let prior = w1 * w2 * t.sin();
                    prior_total += prior;
                    let c = pauli_coeffs(&StateParams::Spin1 { theta: t, phi: p });
                    acc.add(prior, log_likelihood(&counts, &c), &c);
                }
            }
            let m = acc.mean().ok_or(BayesError::QuadratureUnderflow)?;
            (m, None, acc.max_log + (acc.weight / prior_total).ln())
        }
        (BayesSystem::Spin1, Quadrature::QuasiRandom { points, replicas, seed }) => {
            quasi_random(&counts, points, replicas, seed, |i, s| {
                let u = |d: u32| sobol_burley::sample(i, d, s) as f64;
                StateParams::Spin1 { theta: (2.0 * u(0) - 1.0).clamp(-1.0, 1.0).acos(), phi: 2.0 * PI * u(1) }
            })?
        }
        (_, Quadrature::QuasiRandom { points, replicas, seed }) => quasi_random(&counts, points, replicas, seed, sobol_params)?,
        (_, Quadrature::Product { .. }) => return Err(BayesError::UnsupportedLevel(sys)),
    };
    let rho = match sys {
        BayesSystem::Spin2 => DensityMatrix { basis: Basis::SpinProduct(2), m: two_spin(&mean) },
        _ => DensityMatrix { basis: Basis::SpinProduct(1), m: one_spin(&mean) },
    };
    Ok(Posterior { rho, stderr, log_evidence: log_ev })
}

type QmcOut = ([[f64; 4]; 4], Option<f64>, f64);

fn quasi_random(counts: &[(PauliWord, u64, u64)], points: usize, replicas: usize, seed: u32, gen: impl Fn(u32, u32) -> StateParams + Sync) -> Result<QmcOut, BayesError> {
    use rayon::prelude::*;
    let replicas = replicas.max(1);
    let per = (points / replicas).max(1);
    let results: Vec<Option<([[f64; 4]; 4], f64)>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let s = seed.wrapping_mul(7919).wrapping_add(r as u32);
            let mut acc = Acc::new();
            for i in 0..per {
                let c = pauli_coeffs(&gen(i as u32, s));
                acc.add(1.0, log_likelihood(counts, &c), &c);
            }
            acc.mean().map(|m| (m, acc.max_log + (acc.weight / per as f64).ln()))
        })
        .collect();
    let ok: Vec<_> = results.into_iter().flatten().collect();
    if ok.is_empty() {
        return Err(BayesError::QuadratureUnderflow);
    }
    let n = ok.len() as f64;
    let mut mean = [[0.0; 4]; 4];
    for (m, _) in &ok {
        for i in 0..4 {
            for j in 0..4 {
                mean[i][j] += m[i][j] / n;
            }
        }
    }
    let mut se: f64 = 0.0;
    if ok.len() > 1 {
        for i in 0..4 {
            for j in 0..4 {
                let var = ok.iter().map(|(m, _)| (m[i][j] - mean[i][j]).powi(2)).sum::<f64>() / (n - 1.0);
                se = se.max((var / n).sqrt());
            }
        }
    }
    let log_ev = ok.iter().map(|(_, l)| *l).fold(f64::NEG_INFINITY, f64::max);
    Ok((mean, Some(se), log_ev))
}

fn mean_of(means: &[(PauliWord, f64)], s: &str) -> Option<f64> {
    let w = PauliWord::parse(s).ok()?;
    means.iter().find(|(x, _)| *x == w).map(|(_, v)| *v)
}

fn same_words(means: &[(PauliWord, f64)], want: &[&str]) -> bool {
    means.len() == want.len() && want.iter().all(|s| mean_of(means, s).is_some())
}

fn pauli_sum(sites: usize, terms: &[(&str, f64)]) -> DensityMatrix {
    let t: Vec<(PauliWord, f64)> = terms.iter().map(|(s, v)| (PauliWord::parse(s).expect("static word"), *v)).collect();
    DensityMatrix { basis: Basis::SpinProduct(sites), m: crate::spin::pauli_expansion(sites, &t) }
}

/// Posterior mean in the limit of infinitely many outcomes with the given means.
pub fn asymptotic_estimate(system: BayesSystem, means: &[(PauliWord, f64)]) -> Result<DensityMatrix, BayesError> {
    let get = |s: &str| mean_of(means, s).unwrap_or(0.0);
    match system {
        BayesSystem::Spin1 => {
            if same_words(means, &["Z"]) {
                Ok(pauli_sum(1, &[("Z", get("Z"))]))
            } else if same_words(means, &["Z", "X"]) {
                let (z, x) = (get("Z"), get("X"));
                if z * z + x * x > 1.0 + 1e-12 {
                    return Err(BayesError::Unphysical(z * z + x * x));
                }
                Ok(pauli_sum(1, &[("X", x), ("Z", z)]))
            } else if same_words(means, &["X", "Y", "Z"]) {
                let s = get("X").powi(2) + get("Y").powi(2) + get("Z").powi(2);
                // only pure states carry prior weight
                if (s - 1.0).abs() > 1e-9 {
                    return Err(BayesError::PurityViolation(s));
                }
                Ok(pauli_sum(1, &[("X", get("X")), ("Y", get("Y")), ("Z", get("Z"))]))
            } else {
                Err(BayesError::UnsupportedLevel(system))
            }
        }
        BayesSystem::Spin2 => {
            let ratio = |num: f64, s: f64| if s > 0.0 { num / s } else { 0.0 };
            if same_words(means, &["ZI", "IZ"]) {
                let (a, b) = (get("ZI"), get("IZ"));
                let s = a.abs().max(b.abs());
                Ok(pauli_sum(2, &[("ZI", a), ("IZ", b), ("ZZ", ratio(a * b, s))]))
            } else if same_words(means, &["ZI", "ZZ"]) {
                let (a, c) = (get("ZI"), get("ZZ"));
                let s = a.abs().max(c.abs());
                Ok(pauli_sum(2, &[("ZI", a), ("IZ", ratio(a * c, s)), ("ZZ", c)]))
            } else if same_words(means, &["ZI", "IZ", "ZZ"]) {
                Ok(pauli_sum(2, &[("ZI", get("ZI")), ("IZ", get("IZ")), ("ZZ", get("ZZ"))]))
            } else {
                Err(BayesError::UnsupportedLevel(system))
            }
        }
        BayesSystem::Spin1Purified => {
            let mut terms = Vec::new();
            for (w, v) in means {
                if w.sites() != 1 || w.is_identity() {
                    return Err(BayesError::UnsupportedLevel(system));
                }
                terms.push((w.clone(), *v));
            }
            let r2: f64 = terms.iter().map(|(_, v)| v * v).sum();
            if r2 > 1.0 + 1e-12 {
                return Err(BayesError::Unphysical(r2));
            }
            Ok(DensityMatrix { basis: Basis::SpinProduct(1), m: crate::spin::pauli_expansion(1, &terms) })
        }
    }
}

/// First and second moments of the normalized density ∝ Π x_i^{α_i N} on the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub means: Vec<f64>,
    pub second_moments: Vec<f64>,
    pub variances: Vec<f64>,
}

/// Moments via B(a+1, b)/B(a, b) = a/(a+b): the density is Dirichlet(α_i N + 1).
pub fn concentration_check(alphas: &[f64], n: f64) -> Result<ConcentrationReport, BayesError> {
    if alphas.is_empty() || alphas.iter().any(|&a| a <= 0.0) || (alphas.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(BayesError::InvalidAlphas);
    }
    let total = n + alphas.len() as f64;
    let mut means = Vec::new();
    let mut second = Vec::new();
    for &a in alphas {
        let ai = a * n + 1.0;
        means.push(ai / total);
        second.push(ai * (ai + 1.0) / (total * (total + 1.0)));
    }
    let variances = means.iter().zip(&second).map(|(m, s)| s - m * m).collect();
    Ok(ConcentrationReport { means, second_moments: second, variances })
}

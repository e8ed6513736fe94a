//! Reference states of a single bosonic mode as truncated density matrices.

use crate::hilbert::{
    annihilation, displacement_padded, squeeze_padded, Basis, CMat, DensityMatrix, FockOps, C64, TOL,
};
use crate::io::parse_complex;
use crate::special::{hermite_functions, ln_factorial};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("truncation drops too much weight: tail mass {0:e}")]
    TailMassTooLarge(f64),
    #[error("state is not in a Fock basis")]
    NotFockBasis,
    #[error("moment order {0}+{1} exceeds 4")]
    OrderTooHigh(usize, usize),
    #[error("invalid state parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateKind {
    Coherent(C64),
    Fock(usize),
    /// η = tanh r, |η| < 1.
    SqueezedVacuum(f64),
    EvenCat(f64),
    OddCat(f64),
    Thermal(f64),
    /// Flat wavefunction 1/√(4α₁) on [−2α₁, 2α₁].
    Rectangular(f64),
    IncoherentPair(C64, C64),
    CoherentPair(C64, C64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpec {
    pub kind: StateKind,
    pub n_max: usize,
    /// Weight allowed on the top five kept levels plus everything beyond.
    pub tail_tol: f64,
}

impl StateSpec {
    pub fn new(kind: StateKind, n_max: usize) -> Self {
        StateSpec { kind, n_max, tail_tol: TOL.tail }
    }

    pub fn with_tail_tol(mut self, tol: f64) -> Self {
        self.tail_tol = tol;
        self
    }

    /// Parse `kind=evencat alpha=1.414 nmax=40` style arguments.
    pub fn parse(args: &str) -> Result<StateSpec, StateError> {
        let kv: HashMap<String, String> = args
            .split_whitespace()
            .filter_map(|t| t.split_once('=').map(|(k, v)| (k.to_ascii_lowercase(), v.to_string())))
            .collect();
        StateSpec::from_map(&kv)
    }

    pub fn from_map(kv: &HashMap<String, String>) -> Result<StateSpec, StateError> {
        let bad = |m: String| StateError::InvalidParameter(m);
        let get = |k: &str| kv.get(k).map(|s| s.as_str());
        let num = |k: &str| -> Result<f64, StateError> {
            get(k).ok_or_else(|| bad(format!("missing `{k}`")))?.parse::<f64>().map_err(|e| bad(format!("`{k}`: {e}")))
        };
        let cnum = |k: &str| -> Result<C64, StateError> {
            parse_complex(get(k).ok_or_else(|| bad(format!("missing `{k}`")))?).map_err(|e| bad(format!("`{k}`: {e}")))
        };
        let n_max = match get("nmax") {
            Some(s) => s.parse::<usize>().map_err(|e| bad(format!("`nmax`: {e}")))?,
            None => 60,
        };
        let kind_s = get("kind").or_else(|| get("state")).ok_or_else(|| bad("missing `kind`".into()))?;
        // alpha may also be given through the mean photon number
        let alpha_or_nbar = |cat: Option<bool>| -> Result<f64, StateError> {
            if get("alpha").is_some() {
                return num("alpha");
            }
            let nbar = num("nbar")?;
            Ok(match cat {
                None => nbar.sqrt(),
                Some(even) => cat_alpha_for_nbar(nbar, even).ok_or_else(|| bad(format!("no cat with nbar={nbar}")))?,
            })
        };
        let kind = match kind_s.to_ascii_lowercase().as_str() {
            "coherent" => {
                if get("alpha").is_some() {
                    StateKind::Coherent(cnum("alpha")?)
                } else {
                    StateKind::Coherent(C64::new(alpha_or_nbar(None)?, 0.0))
                }
            }
            "fock" => StateKind::Fock(num("n")? as usize),
            "squeezed" | "squeezedvacuum" => {
                if get("eta").is_some() {
                    StateKind::SqueezedVacuum(num("eta")?)
                } else {
                    // n̄ = η²/(1−η²)
                    let n = num("nbar")?;
                    StateKind::SqueezedVacuum((n / (1.0 + n)).sqrt())
                }
            }
            "evencat" => StateKind::EvenCat(alpha_or_nbar(Some(true))?),
            "oddcat" => StateKind::OddCat(alpha_or_nbar(Some(false))?),
            "thermal" => StateKind::Thermal(num("nbar")?),
            "rectangular" => StateKind::Rectangular(num("alpha")?),
            "incoherentpair" => StateKind::IncoherentPair(cnum("alpha1")?, cnum("alpha2")?),
            "coherentpair" | "cat" => StateKind::CoherentPair(cnum("alpha1")?, cnum("alpha2")?),
            other => return Err(bad(format!("unknown state kind `{other}`"))),
        };
        let mut spec = StateSpec::new(kind, n_max);
        if let Some(t) = get("tailtol") {
            spec.tail_tol = t.parse().map_err(|e| bad(format!("`tailtol`: {e}")))?;
        }
        Ok(spec)
    }
}

/// Real α of the even (or odd) cat with the given mean photon number.
pub fn cat_alpha_for_nbar(nbar: f64, even: bool) -> Option<f64> {
    let f = |a2: f64| if even { a2 * a2.tanh() } else { a2 / a2.tanh() };
    if !even && nbar < 1.0 {
        return None;
    }
    let (mut lo, mut hi) = (1e-12, nbar.max(1.0) + 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < nbar {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((0.5 * (lo + hi)).sqrt())
}

fn coherent_amplitudes(alpha: C64, len: usize) -> Vec<C64> {
    let mut c = vec![C64::new(0.0, 0.0); len];
    if len == 0 {
        return c;
    }
    c[0] = C64::from((-0.5 * alpha.norm_sqr()).exp());
    for n in 1..len {
        c[n] = c[n - 1] * alpha / (n as f64).sqrt();
    }
    c
}

/// Keep levels 0..=n_max of `p(n)` (an infinite distribution of unit mass),
/// check the tail and renormalize.
pub(crate) fn crop_distribution(p: impl Fn(usize) -> f64, n_max: usize, tail_tol: f64) -> Result<Vec<f64>, StateError> {
    let v: Vec<f64> = (0..=n_max).map(&p).collect();
    let head: f64 = v.iter().take((n_max + 1).saturating_sub(5)).sum();
    let tail = (1.0 - head).max(0.0);
    if tail > tail_tol {
        return Err(StateError::TailMassTooLarge(tail));
    }
    let s: f64 = v.iter().sum();
    Ok(v.into_iter().map(|x| x / s).collect())
}

pub(crate) fn diag_state(p: &[f64], n_max: usize) -> DensityMatrix {
    let d = n_max + 1;
    let m = CMat::from_fn(d, d, |i, j| if i == j { C64::from(p.get(i).cloned().unwrap_or(0.0)) } else { C64::new(0.0, 0.0) });
    DensityMatrix { basis: Basis::Fock(n_max), m }
}

fn check_tail_and_normalize(m: CMat, n_max: usize, tail_tol: f64, total: f64) -> Result<DensityMatrix, StateError> {
    let d = n_max + 1;
    let head: f64 = (0..d.saturating_sub(5)).map(|i| m[(i, i)].re).sum();
    let tail = (total - head).max(0.0);
    if tail > tail_tol {
        return Err(StateError::TailMassTooLarge(tail));
    }
    let tr = m.trace().re;
    let m = m / C64::from(tr);
    // restore exact Hermiticity after floating-point products
    let m = (&m + m.adjoint()) * C64::from(0.5);
    Ok(DensityMatrix { basis: Basis::Fock(n_max), m })
}

fn from_amplitudes(c: &[C64], n_max: usize, tail_tol: f64) -> Result<DensityMatrix, StateError> {
    let d = n_max + 1;
    let m = CMat::from_fn(d, d, |i, j| c[i] * c[j].conj());
    check_tail_and_normalize(m, n_max, tail_tol, 1.0)
}

/// D(γ) U(θ/2) S(r) ρ_th(χ) S† U† D†, built on a padded space and cropped.
pub(crate) fn gaussian_state(n_max: usize, gamma: C64, r: f64, theta: f64, chi: f64, tail_tol: f64) -> Result<DensityMatrix, StateError> {
    let extra = 40 + (8.0 * gamma.norm_sqr()) as usize + (60.0 * r.abs()) as usize + (10.0 * chi) as usize;
    let big = n_max + 1 + extra;
    let th = CMat::from_fn(big, big, |i, j| {
        if i != j {
            C64::new(0.0, 0.0)
        } else if chi == 0.0 {
            C64::from(if i == 0 { 1.0 } else { 0.0 })
        } else {
            C64::from((chi / (chi + 1.0)).powi(i as i32) / (chi + 1.0))
        }
    });
    let ops = FockOps::new(big - 1);
    let u = displacement_padded(big, gamma, 0) * ops.rotation(0.5 * theta) * squeeze_padded(big, r, 0);
    let full = &u * th * u.adjoint();
    let m = full.view((0, 0), (n_max + 1, n_max + 1)).into_owned();
    check_tail_and_normalize(m, n_max, tail_tol, full.trace().re)
}

/// Build the truncated density matrix of a reference state.
pub fn make_state(spec: &StateSpec) -> Result<DensityMatrix, StateError> {
    let n_max = spec.n_max;
    let len = n_max + 1;
    let tol = spec.tail_tol;
    let bad = |m: String| Err(StateError::InvalidParameter(m));
    if n_max < 1 {
        return bad("n_max must be at least 1".into());
    }
    match spec.kind {
        StateKind::Coherent(a) => from_amplitudes(&coherent_amplitudes(a, len), n_max, tol),
        StateKind::Fock(n) => {
            if n > n_max {
                return bad(format!("Fock({n}) does not fit below n_max = {n_max}"));
            }
            // an exact representation, so no tail check
            let mut c = vec![C64::new(0.0, 0.0); len];
            c[n] = C64::from(1.0);
            let d = len;
            Ok(DensityMatrix { basis: Basis::Fock(n_max), m: CMat::from_fn(d, d, |i, j| c[i] * c[j].conj()) })
        }
        StateKind::SqueezedVacuum(eta) => {
            if eta.abs() >= 1.0 || !eta.is_finite() {
                return bad(format!("squeezing |eta| = {} must be below 1", eta.abs()));
            }
            let mut c = vec![C64::new(0.0, 0.0); len];
            let mut a = (1.0 - eta * eta).powf(0.25);
            for k in 0..=(n_max / 2) {
                c[2 * k] = C64::from(a);
                let kf = k as f64;
                a *= eta * ((2.0 * kf + 1.0) / (2.0 * kf + 2.0)).sqrt();
            }
            from_amplitudes(&c, n_max, tol)
        }
        StateKind::EvenCat(alpha) | StateKind::OddCat(alpha) => {
            let even = matches!(spec.kind, StateKind::EvenCat(_));
            if !alpha.is_finite() || (!even && alpha == 0.0) {
                return bad(format!("cat amplitude {alpha}"));
            }
            let a2 = alpha * alpha;
            // exact norms: N_e² = 1/(2(1+e^{−2α²})), N_o² = 1/(2(1−e^{−2α²}))
            let norm = if even { 1.0 / (2.0 * (1.0 + (-2.0 * a2).exp())) } else { 1.0 / (2.0 * (-(-2.0 * a2).exp_m1())) };
            let base = coherent_amplitudes(C64::from(alpha), len);
            let c: Vec<C64> = base
                .iter()
                .enumerate()
                .map(|(n, &b)| if (n % 2 == 0) == even { b * 2.0 * norm.sqrt() } else { C64::new(0.0, 0.0) })
                .collect();
            from_amplitudes(&c, n_max, tol)
        }
        StateKind::Thermal(nbar) => {
            if nbar < 0.0 || !nbar.is_finite() {
                return bad(format!("thermal nbar = {nbar}"));
            }
            let p = crop_distribution(|n| (nbar / (nbar + 1.0)).powi(n as i32) / (nbar + 1.0), n_max, tol)?;
            Ok(diag_state(&p, n_max))
        }
        StateKind::Rectangular(a1) => {
            if a1 <= 0.0 || !a1.is_finite() {
                return bad(format!("rectangular half-width parameter {a1}"));
            }
            let c: Vec<C64> = rectangular_overlaps(a1, n_max).into_iter().map(C64::from).collect();
            from_amplitudes(&c, n_max, tol)
        }
        StateKind::IncoherentPair(a1, a2) => {
            let c1 = coherent_amplitudes(a1, len);
            let c2 = coherent_amplitudes(a2, len);
            let m = CMat::from_fn(len, len, |i, j| 0.5 * (c1[i] * c1[j].conj() + c2[i] * c2[j].conj()));
            check_tail_and_normalize(m, n_max, tol, 1.0)
        }
        StateKind::CoherentPair(a1, a2) => {
            let overlap = (-0.5 * a1.norm_sqr() - 0.5 * a2.norm_sqr() + a1.conj() * a2).exp();
            let norm2 = 2.0 + 2.0 * overlap.re;
            if norm2 < 1e-14 {
                return bad("coherent pair cancels to zero".into());
            }
            let c1 = coherent_amplitudes(a1, len);
            let c2 = coherent_amplitudes(a2, len);
            let c: Vec<C64> = c1.iter().zip(&c2).map(|(x, y)| (x + y) / norm2.sqrt()).collect();
            from_amplitudes(&c, n_max, tol)
        }
    }
}

/// ⟨n|ψ⟩ for the flat wavefunction on [−2α₁, 2α₁], by composite Gauss–Legendre.
pub fn rectangular_overlaps(a1: f64, n_max: usize) -> Vec<f64> {
    let panels = n_max.max(1) + 1;
    let (xs, ws) = crate::special::composite_gauss_legendre(64, panels, -2.0 * a1, 2.0 * a1);
    let amp = 1.0 / (4.0 * a1).sqrt();
    let mut c = vec![0.0; n_max + 1];
    for (x, w) in xs.iter().zip(&ws) {
        let psi = hermite_functions(n_max, *x);
        for n in 0..=n_max {
            c[n] += w * amp * psi[n];
        }
    }
    c
}

/// Moments of a Fock-basis state, from exact restrictions of a, a†a and a².
#[derive(Debug, Clone, PartialEq)]
pub struct StateStats {
    pub nbar: f64,
    pub mean_q: f64,
    pub mean_p: f64,
    pub var_q: f64,
    pub var_p: f64,
    /// None for the vacuum, where Q is undefined.
    pub mandel_q: Option<f64>,
    pub photon_distribution: Vec<f64>,
    pub mean_a: C64,
    pub mean_a2: C64,
}

fn require_fock(rho: &DensityMatrix) -> Result<usize, StateError> {
    match rho.basis {
        Basis::Fock(n) => Ok(n),
        _ => Err(StateError::NotFockBasis),
    }
}

pub fn state_stats(rho: &DensityMatrix) -> Result<StateStats, StateError> {
    let n_max = require_fock(rho)?;
    let d = n_max + 1;
    let p = rho.diagonal();
    let nbar: f64 = p.iter().enumerate().map(|(n, v)| n as f64 * v).sum();
    let n2: f64 = p.iter().enumerate().map(|(n, v)| (n * n) as f64 * v).sum();
    let a: C64 = (1..d).map(|n| rho.m[(n, n - 1)] * (n as f64).sqrt()).sum();
    let a2: C64 = (2..d).map(|n| rho.m[(n, n - 2)] * ((n * (n - 1)) as f64).sqrt()).sum();
    let s2 = std::f64::consts::SQRT_2;
    let mean_q = s2 * a.re;
    let mean_p = s2 * a.im;
    let q2 = a2.re + nbar + 0.5;
    let p2 = -a2.re + nbar + 0.5;
    let mandel_q = if nbar > 1e-300 { Some((n2 - nbar * nbar - nbar) / nbar) } else { None };
    Ok(StateStats {
        nbar,
        mean_q,
        mean_p,
        var_q: q2 - mean_q * mean_q,
        var_p: p2 - mean_p * mean_p,
        mandel_q,
        photon_distribution: p,
        mean_a: a,
        mean_a2: a2,
    })
}

/// Symmetrized central moments ⟨{δq^k δp^l}⟩ for each requested (k, l) with k + l ≤ 4.
pub fn central_moments(rho: &DensityMatrix, orders: &[(usize, usize)]) -> Result<Vec<((usize, usize), f64)>, StateError> {
    let n_max = require_fock(rho)?;
    for &(k, l) in orders {
        if k + l > 4 {
            return Err(StateError::OrderTooHigh(k, l));
        }
    }
    // four extra levels keep every product of ≤ 4 ladder operators exact on the support
    let d = n_max + 1;
    let big = d + 4;
    let rho_big = CMat::from_fn(big, big, |i, j| if i < d && j < d { rho.m[(i, j)] } else { C64::new(0.0, 0.0) });
    let a = annihilation(big);
    let ad = a.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let q = (&a + &ad) * C64::from(s);
    let p = (&a - &ad) * C64::new(0.0, -s);
    let mean = |m: &CMat| crate::hilbert::expect_mat(&rho_big, m).unwrap();
    let id = CMat::identity(big, big);
    let dq = &q - &id * C64::from(mean(&q));
    let dp = &p - &id * C64::from(mean(&p));
    let mut out = Vec::new();
    for &(k, l) in orders {
        let words = distinct_words(k, l);
        let mut acc = 0.0;
        for w in &words {
            let mut m = id.clone();
            for &c in w {
                m = if c { &m * &dq } else { &m * &dp };
            }
            acc += mean(&m);
        }
        out.push(((k, l), if words.is_empty() { 1.0 } else { acc / words.len() as f64 }));
    }
    Ok(out)
}

/// Every distinct arrangement of k `true`s and l `false`s.
fn distinct_words(k: usize, l: usize) -> Vec<Vec<bool>> {
    let n = k + l;
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == k {
            out.push((0..n).map(|b| mask & (1 << b) != 0).collect());
        }
    }
    out
}

/// P_n of a coherent state, handy for analytic comparisons.
pub fn poisson(nbar: f64, n: usize) -> f64 {
    if nbar == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (-nbar + n as f64 * nbar.ln() - ln_factorial(n)).exp()
}

//! Wigner functions and quadrature distributions.
//!
//! Phase-space coordinates: `ξ = (q + ip)/√2`. With this convention the vacuum
//! Wigner function is `2 exp(−2|ξ|²)` and `(1/2π) ∫∫ W dq dp = 1`.

use crate::hilbert::{Basis, DensityMatrix, C64};
use crate::special::{bessel_i0_scaled, bessel_j0, hermite_functions, laguerre_fns};
use rayon::prelude::*;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WignerError {
    #[error("grid has no nodes ({0}x{1})")]
    GridTooCoarse(usize, usize),
    #[error("state is not in a Fock basis")]
    NotFockBasis,
    #[error("no closed form for {0:?} on level {1:?}")]
    UnsupportedCombination(AnalyticState, AnalyticLevel),
}

/// Rectangular phase-space grid with Wigner values; `values[(i, j)]` sits at (q_i, p_j).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nq: usize,
    pub np: usize,
    pub values: nalgebra::DMatrix<f64>,
}

fn node(min: f64, max: f64, n: usize, i: usize) -> f64 {
    if n <= 1 {
        min
    } else {
        min + (max - min) * i as f64 / (n - 1) as f64
    }
}

impl PhaseGrid {
    pub fn new(q: (f64, f64), p: (f64, f64), nq: usize, np: usize) -> PhaseGrid {
        PhaseGrid { q_min: q.0, q_max: q.1, p_min: p.0, p_max: p.1, nq, np, values: nalgebra::DMatrix::zeros(nq, np) }
    }

    /// Square grid on [−half, half]².
    pub fn square(half: f64, n: usize) -> PhaseGrid {
        PhaseGrid::new((-half, half), (-half, half), n, n)
    }

    pub fn q(&self, i: usize) -> f64 {
        node(self.q_min, self.q_max, self.nq, i)
    }

    pub fn p(&self, j: usize) -> f64 {
        node(self.p_min, self.p_max, self.np, j)
    }

    pub fn dq(&self) -> f64 {
        if self.nq > 1 {
            (self.q_max - self.q_min) / (self.nq - 1) as f64
        } else {
            0.0
        }
    }

    pub fn dp(&self) -> f64 {
        if self.np > 1 {
            (self.p_max - self.p_min) / (self.np - 1) as f64
        } else {
            0.0
        }
    }

    /// (1/2π) ∫∫ W dq dp by the trapezoidal rule.
    pub fn normalization(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.nq {
            let wi = if i == 0 || i + 1 == self.nq { 0.5 } else { 1.0 };
            for j in 0..self.np {
                let wj = if j == 0 || j + 1 == self.np { 0.5 } else { 1.0 };
                s += wi * wj * self.values[(i, j)];
            }
        }
        s * self.dq() * self.dp() / (2.0 * std::f64::consts::PI)
    }

    pub fn fill(&mut self, f: impl Fn(f64, f64) -> f64 + Sync) {
        let cols: Vec<Vec<f64>> = (0..self.nq).into_par_iter().map(|i| (0..self.np).map(|j| f(self.q(i), self.p(j))).collect()).collect();
        for (i, row) in cols.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                self.values[(i, j)] = v;
            }
        }
    }

    /// CSV with header `q,p,w`, one row per node.
    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let rows = (0..self.nq).flat_map(|i| (0..self.np).map(move |j| (i, j))).map(|(i, j)| vec![self.q(i), self.p(j), self.values[(i, j)]]);
        crate::io::write_csv(path, &[], "q,p,w", rows)
    }
}

fn fock_dim(rho: &DensityMatrix) -> Result<usize, WignerError> {
    match rho.basis {
        Basis::Fock(n) => Ok(n + 1),
        _ => Err(WignerError::NotFockBasis),
    }
}

/// W(q, p) of a Fock-basis density matrix.
///
/// Uses W_{|n+d⟩⟨n|}(ξ) = 2(−1)^n √(n!/(n+d)!) (2ξ*)^d e^{−2|ξ|²} L_n^{(d)}(4|ξ|²)
/// written through normalized Laguerre functions.
pub fn wigner_point(rho: &DensityMatrix, q: f64, p: f64) -> Result<f64, WignerError> {
    let d = fock_dim(rho)?;
    Ok(wigner_point_unchecked(rho, d, q, p))
}

fn wigner_point_unchecked(rho: &DensityMatrix, d: usize, q: f64, p: f64) -> f64 {
    let y = 2.0 * (q * q + p * p);
    let phase = C64::new(q, -p); // ∝ ξ*
    let unit = if phase.norm() > 0.0 { phase / phase.norm() } else { C64::new(1.0, 0.0) };
    let mut w = 0.0;
    let mut rot = C64::new(1.0, 0.0);
    for dd in 0..d {
        let l = laguerre_fns(d - 1 - dd, dd, y);
        let mut acc = C64::new(0.0, 0.0);
        for (n, ln) in l.iter().enumerate() {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            acc += rho.m[(n + dd, n)] * (sign * ln);
        }
        if dd == 0 {
            w += 2.0 * acc.re;
        } else {
            w += 4.0 * (acc * rot).re;
        }
        rot *= unit;
    }
    w
}

/// Evaluate W on every node of `grid` (rows in parallel).
pub fn wigner_from_dm(rho: &DensityMatrix, grid: &PhaseGrid) -> Result<PhaseGrid, WignerError> {
    if grid.nq == 0 || grid.np == 0 {
        return Err(WignerError::GridTooCoarse(grid.nq, grid.np));
    }
    let d = fock_dim(rho)?;
    let mut out = grid.clone();
    out.fill(|q, p| wigner_point_unchecked(rho, d, q, p));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureDist {
    pub theta: f64,
    pub xs: Vec<f64>,
    pub w: Vec<f64>,
}

impl QuadratureDist {
    /// CSV `x,w` preceded by a `# theta=` line.
    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let rows = self.xs.iter().zip(&self.w).map(|(x, w)| vec![*x, *w]);
        crate::io::write_csv(path, &[format!("theta={}", self.theta)], "x,w", rows)
    }
}

/// ⟨x_θ|ρ|x_θ⟩ for the rotated quadrature x_θ = q cos θ + p sin θ, where
/// ⟨n|x_θ⟩ = ψ_n(x) e^{inθ}.
pub fn quadrature_pdf(rho: &DensityMatrix, theta: f64, xs: &[f64]) -> Result<QuadratureDist, WignerError> {
    let d = fock_dim(rho)?;
    let w = xs
        .iter()
        .map(|&x| {
            let psi = hermite_functions(d - 1, x);
            let u: Vec<C64> = (0..d).map(|n| C64::from_polar(psi[n], theta * n as f64)).collect();
            let mut s = C64::new(0.0, 0.0);
            for i in 0..d {
                let mut row = C64::new(0.0, 0.0);
                for j in 0..d {
                    row += rho.m[(i, j)] * u[j];
                }
                s += u[i].conj() * row;
            }
            s.re
        })
        .collect();
    Ok(QuadratureDist { theta, xs: xs.to_vec(), w })
}

/// States with tabulated Wigner functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticState {
    Coherent(C64),
    Fock(usize),
    SqueezedVacuum(f64),
    EvenCat(f64),
    OddCat(f64),
    Thermal(f64),
}

/// Observation levels of the tabulated reconstructions; `Complete` is the state itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyticLevel {
    Complete,
    Th,
    O1,
    O2,
    OA,
    OB,
    OC,
    OD1,
    OD2,
}

/// Series are summed until the coefficient drops below this.
const SERIES_EPS: f64 = 1e-12;

fn fock_w(n: usize, y: f64) -> f64 {
    let l = laguerre_fns(n, 0, y)[n];
    2.0 * if n.is_multiple_of(2) { l } else { -l }
}

fn thermal_w(nbar: f64, xi2: f64) -> f64 {
    2.0 / (1.0 + 2.0 * nbar) * (-2.0 * xi2 / (1.0 + 2.0 * nbar)).exp()
}

/// Gaussian level with central moments N, M about γ.
fn gaussian_w(xi: C64, gamma: C64, n: f64, m: C64) -> f64 {
    let z = xi - gamma;
    let det = (n + 0.5).powi(2) - m.norm_sqr();
    let num = (n + 0.5) * z.norm_sqr() - (m.conj() * z * z).re;
    (-num / det).exp() / det.sqrt()
}

/// Σ_n P_n W_{|n⟩}, with `p(n)` returning None past the last term.
fn photon_sum(y: f64, n_terms: usize, p: impl Fn(usize) -> f64) -> f64 {
    let l = laguerre_fns(n_terms, 0, y);
    (0..=n_terms).map(|n| p(n) * 2.0 * if n % 2 == 0 { l[n] } else { -l[n] }).sum()
}

/// Number of photon terms needed before a distribution's weights drop below SERIES_EPS.
fn terms_until(p: impl Fn(usize) -> f64, start: usize) -> usize {
    let mut n = start;
    while n < 4000 && (p(n) > SERIES_EPS || p(n + 1) > SERIES_EPS) {
        n += 1;
    }
    n + 1
}

struct Moments {
    nbar: f64,
    gamma: C64,
    mu: C64,
    p: Box<dyn Fn(usize) -> f64>,
}

fn moments(s: AnalyticState) -> Moments {
    match s {
        AnalyticState::Coherent(a) => {
            let nb = a.norm_sqr();
            Moments { nbar: nb, gamma: a, mu: a * a, p: Box::new(move |n| crate::states::poisson(nb, n)) }
        }
        AnalyticState::Fock(k) => Moments { nbar: k as f64, gamma: C64::new(0.0, 0.0), mu: C64::new(0.0, 0.0), p: Box::new(move |n| if n == k { 1.0 } else { 0.0 }) },
        AnalyticState::SqueezedVacuum(eta) => {
            let e2 = eta * eta;
            Moments {
                nbar: e2 / (1.0 - e2),
                gamma: C64::new(0.0, 0.0),
                mu: C64::from(eta / (1.0 - e2)),
                p: Box::new(move |n| {
                    if n % 2 == 1 {
                        0.0
                    } else {
                        let k = n / 2;
                        // (1−η²)^{1/2} (2k)!/(2^k k!)² η^{2k}
                        let ln = 0.5 * (1.0 - e2).ln() + crate::special::ln_factorial(2 * k) - 2.0 * (k as f64 * 2f64.ln() + crate::special::ln_factorial(k)) + if k > 0 { k as f64 * e2.ln() } else { 0.0 };
                        ln.exp()
                    }
                }),
            }
        }
        AnalyticState::EvenCat(a) => {
            let a2 = a * a;
            Moments {
                nbar: a2 * a2.tanh(),
                gamma: C64::new(0.0, 0.0),
                mu: C64::from(a2),
                p: Box::new(move |n| if n % 2 == 1 { 0.0 } else { (n as f64 * a2.ln() - crate::special::ln_factorial(n)).exp() / a2.cosh() }),
            }
        }
        AnalyticState::OddCat(a) => {
            let a2 = a * a;
            Moments {
                nbar: a2 / a2.tanh(),
                gamma: C64::new(0.0, 0.0),
                mu: C64::from(a2),
                p: Box::new(move |n| if n % 2 == 0 { 0.0 } else { (n as f64 * a2.ln() - crate::special::ln_factorial(n)).exp() / a2.sinh() }),
            }
        }
        AnalyticState::Thermal(nb) => Moments {
            nbar: nb,
            gamma: C64::new(0.0, 0.0),
            mu: C64::new(0.0, 0.0),
            p: Box::new(move |n| (nb / (nb + 1.0)).powi(n as i32) / (nb + 1.0)),
        },
    }
}

/// Closed-form Wigner function of `state` reconstructed on `level`, at ξ.
pub fn analytic_wigner(state: AnalyticState, level: AnalyticLevel, xi: C64) -> Result<f64, WignerError> {
    use AnalyticLevel as L;
    use AnalyticState as S;
    let xi2 = xi.norm_sqr();
    let y = 4.0 * xi2;
    let mo = moments(state);
    let nbar = mo.nbar;
    Ok(match (state, level) {
        (S::Coherent(a), L::Complete) => 2.0 * (-2.0 * (xi - a).norm_sqr()).exp(),
        (S::Fock(n), L::Complete | L::OA | L::OD2) => fock_w(n, y),
        (S::SqueezedVacuum(eta), L::Complete) => {
            let vq = (1.0 + eta) / (2.0 * (1.0 - eta));
            let vp = 0.25 / vq;
            let (q, p) = (std::f64::consts::SQRT_2 * xi.re, std::f64::consts::SQRT_2 * xi.im);
            2.0 * (-q * q / (2.0 * vq) - p * p / (2.0 * vp)).exp()
        }
        (S::EvenCat(a) | S::OddCat(a), L::Complete) => {
            let sign = if matches!(state, S::EvenCat(_)) { 1.0 } else { -1.0 };
            let a2 = a * a;
            let norm = 1.0 / (2.0 * (1.0 + sign * (-2.0 * a2).exp()));
            let g = |c: f64| 2.0 * (-2.0 * (xi - C64::from(c)).norm_sqr()).exp();
            let cross = 4.0 * (-2.0 * xi2).exp() * (4.0 * a * xi.im).cos();
            norm * (g(a) + g(-a) + sign * cross)
        }
        (S::Thermal(n), L::Complete | L::Th | L::O1 | L::O2 | L::OA | L::OB | L::OC | L::OD1) => thermal_w(n, xi2),
        (_, L::Th) => thermal_w(nbar, xi2),
        (_, L::O1) => thermal_w(nbar - mo.gamma.norm_sqr(), (xi - mo.gamma).norm_sqr()),
        (_, L::O2) => {
            let n = nbar - mo.gamma.norm_sqr();
            let m = mo.mu - mo.gamma * mo.gamma;
            gaussian_w(xi, mo.gamma, n, m)
        }
        (S::Coherent(a), L::OA) => {
            // 2 e^{−2|ξ|²−2|α|²} I_0(4|α||ξ|)
            let z = 4.0 * a.norm() * xi2.sqrt();
            2.0 * bessel_i0_scaled(z) * (z - 2.0 * xi2 - 2.0 * a.norm_sqr()).exp()
        }
        (S::SqueezedVacuum(_), L::OA | L::OB) => {
            // series: 2(1−η²)^{1/2} e^{−2|ξ|²} Σ (2n)! η^{2n}/(2^{2n}(n!)²) L_{2n}(4|ξ|²)
            let n_terms = terms_until(&mo.p, 0);
            photon_sum(y, n_terms, &mo.p)
        }
        (S::EvenCat(a), L::OA | L::OB) => {
            let a2 = a * a;
            let z = 4.0 * a * xi2.sqrt();
            let e = (-2.0 * xi2).exp();
            // e^{−α²} I_0(z) carried in scaled form
            (bessel_i0_scaled(z) * (z - a2 - 2.0 * xi2).exp() + a2.exp() * e * bessel_j0(z)) / a2.cosh()
        }
        (S::OddCat(a), L::OA | L::OC) => {
            let a2 = a * a;
            let z = 4.0 * a * xi2.sqrt();
            let e = (-2.0 * xi2).exp();
            (bessel_i0_scaled(z) * (z - a2 - 2.0 * xi2).exp() - a2.exp() * e * bessel_j0(z)) / a2.sinh()
        }
        (S::OddCat(_), L::OB) => odd_thermal_w(nbar, y),
        (S::Fock(n), L::OB) => {
            if n % 2 == 0 {
                fock_w(n, y)
            } else {
                odd_thermal_w(n as f64, y)
            }
        }
        (S::SqueezedVacuum(_) | S::EvenCat(_), L::OC) => even_thermal_w(nbar, y),
        (S::Fock(n), L::OC) => {
            if n % 2 == 1 {
                fock_w(n, y)
            } else {
                even_thermal_w(n as f64, y)
            }
        }
        (S::Coherent(_), L::OB | L::OC) => {
            // measured half of the statistics plus the MaxEnt geometric other half
            let measured_even = level == L::OB;
            let keep = |n: usize| n.is_multiple_of(2) == measured_even;
            let weight: f64 = {
                let n_terms = terms_until(&mo.p, nbar as usize);
                (0..=n_terms).filter(|&n| !keep(n)).map(|n| (mo.p)(n)).sum()
            };
            let mean_other: f64 = {
                let n_terms = terms_until(&mo.p, nbar as usize);
                (0..=n_terms).filter(|&n| !keep(n)).map(|n| n as f64 * (mo.p)(n)).sum()
            };
            let (amp, ratio) = if measured_even {
                (2.0 * weight * weight / (mean_other + weight), (mean_other - weight) / (mean_other + weight))
            } else {
                (2.0 * weight * weight / (mean_other + 2.0 * weight), mean_other / (mean_other + 2.0 * weight))
            };
            let other = |n: usize| amp * ratio.powi((n / 2) as i32);
            let pf = |n: usize| if keep(n) { (mo.p)(n) } else { other(n) };
            let n_terms = terms_until(pf, nbar as usize);
            photon_sum(y, n_terms, pf)
        }
        (S::Fock(0), L::OD1) => fock_w(0, y),
        (_, L::OD1) => {
            let p0 = (mo.p)(0);
            let w0 = 2.0 * (-2.0 * xi2).exp();
            if p0 == 0.0 && (nbar - 1.0).abs() < 1e-12 {
                fock_w(1, y)
            } else if p0 == 0.0 {
                // thermal part carries n̄ − 1 photons
                -w0 / (nbar - 1.0) + nbar / (nbar - 1.0) * thermal_w(nbar - 1.0, xi2)
            } else {
                let nt = nbar / (1.0 - p0) - 1.0;
                (p0 - (1.0 - p0) / nt) * w0 + (1.0 - p0) * (nt + 1.0) / nt * thermal_w(nt, xi2)
            }
        }
        (_, L::OD2) => {
            let n = nbar.round();
            if (nbar - n).abs() > 1e-9 || n < 1.0 {
                return Err(WignerError::UnsupportedCombination(state, level));
            }
            let k = n as usize;
            let pn = (mo.p)(k);
            // (1+N)/Z_D2 = (1−P)(1+N)^{N+1}/((1+N)^{N+1} − N^N)
            let ratio = (n / (n + 1.0)).powi(k as i32) / (n + 1.0);
            let w_over_z = (1.0 - pn) / (1.0 - ratio);
            (1.0 - w_over_z) * fock_w(k, y) + w_over_z * thermal_w(n, xi2)
        }
    })
}

/// −4e^{−2|ξ|²}/(n̄+1) Σ_k ((n̄−1)/(n̄+1))^k L_{2k+1}(4|ξ|²)
fn odd_thermal_w(nbar: f64, y: f64) -> f64 {
    let r = (nbar - 1.0) / (nbar + 1.0);
    let amp = 2.0 / (nbar + 1.0);
    let p = |n: usize| if n % 2 == 1 { amp * r.powi((n / 2) as i32) } else { 0.0 };
    photon_sum(y, terms_until(p, 1), p)
}

/// 4e^{−2|ξ|²}/(n̄+2) Σ_k (n̄/(n̄+2))^k L_{2k}(4|ξ|²)
fn even_thermal_w(nbar: f64, y: f64) -> f64 {
    let r = nbar / (nbar + 2.0);
    let amp = 2.0 / (nbar + 2.0);
    let p = |n: usize| if n.is_multiple_of(2) { amp * r.powi((n / 2) as i32) } else { 0.0 };
    photon_sum(y, terms_until(p, 0), p)
}

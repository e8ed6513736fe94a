//! Homodyne tomography: simulated tomograms, pattern-function inversion and
//! MaxEnt reconstruction from quadrature histograms.

use crate::hilbert::{herm_eig, Basis, CMat, DensityMatrix, LagrangeSolution, Observable, ObservationLevel, C64};
use crate::maxent::{solve_lagrange, MaxEntError, SolverOptions};
use crate::special::{composite_gauss_legendre, hermite_functions, laguerre_fns};
use crate::wigner::quadrature_pdf;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TomoError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("state is not in a Fock basis")]
    NotFockBasis,
    #[error("pattern functions are only tabulated up to n = 80 (asked for {0})")]
    NMaxTooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TomoMode {
    Exact,
    /// Additive noise η ξ √o per cell, ξ standard normal from a seeded stream.
    Noisy { eta: f64, seed: u64 },
}

/// Histogrammed quadrature data: `values[(l, m)]` is the probability mass in
/// the cell of width `dx` around `xs[l]` at angle `thetas[m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tomogram {
    pub thetas: Vec<f64>,
    pub xs: Vec<f64>,
    pub dx: f64,
    pub values: DMatrix<f64>,
    pub mode: TomoMode,
}

/// θ_m = mπ/N for m = 0..N.
pub fn equidistant_angles(n: usize) -> Vec<f64> {
    (0..n).map(|m| m as f64 * PI / n as f64).collect()
}

/// `n` evenly spaced points on [a, b] (including both ends).
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn grid_spacing(xs: &[f64]) -> f64 {
    if xs.len() > 1 {
        (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64
    } else {
        1.0
    }
}

/// Rank-one quadrature projector scaled by Δx, in the Fock basis of dimension `dim`.
pub fn quadrature_projector(dim: usize, theta: f64, x: f64, dx: f64) -> CMat {
    let psi = hermite_functions(dim - 1, x);
    let u: Vec<C64> = (0..dim).map(|n| C64::from_polar(psi[n], theta * n as f64)).collect();
    CMat::from_fn(dim, dim, |a, b| u[a] * u[b].conj() * dx)
}

pub fn simulate_tomogram(rho: &DensityMatrix, thetas: &[f64], xs: &[f64], mode: TomoMode) -> Result<Tomogram, TomoError> {
    if !matches!(rho.basis, Basis::Fock(_)) {
        return Err(TomoError::NotFockBasis);
    }
    let dx = grid_spacing(xs);
    let mut values = DMatrix::zeros(xs.len(), thetas.len());
    for (m, &th) in thetas.iter().enumerate() {
        let q = quadrature_pdf(rho, th, xs).map_err(|_| TomoError::NotFockBasis)?;
        for (l, w) in q.w.iter().enumerate() {
            values[(l, m)] = (w * dx).max(0.0);
        }
    }
    if let TomoMode::Noisy { eta, seed } = mode {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // column-major walk: angle by angle
        for m in 0..thetas.len() {
            for l in 0..xs.len() {
                let xi: f64 = StandardNormal.sample(&mut rng);
                let o = values[(l, m)];
                values[(l, m)] = (o + eta * xi * o.sqrt()).max(0.0);
            }
        }
    }
    Ok(Tomogram { thetas: thetas.to_vec(), xs: xs.to_vec(), dx, values, mode })
}

impl Tomogram {
    /// CSV `theta,x,o`.
    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mode = match self.mode {
            TomoMode::Exact => "mode=exact".to_string(),
            TomoMode::Noisy { eta, seed } => format!("mode=noisy eta={eta} seed={seed}"),
        };
        let rows = (0..self.thetas.len()).flat_map(|m| (0..self.xs.len()).map(move |l| vec![self.thetas[m], self.xs[l], self.values[(l, m)]]));
        crate::io::write_csv(path, &[mode, format!("dx={}", self.dx)], "theta,x,o", rows)
    }

    /// Σ_l o_lm for angle index `m`.
    pub fn column_mass(&self, m: usize) -> f64 {
        self.values.column(m).sum()
    }
}

/// Pattern functions f_mn(x) for 0 ≤ m, n ≤ n_max, sampled on `xs`.
///
/// Normalized so that ρ_mn = ∫_0^π dθ ∫ dx w(x, θ) f_mn(x) e^{i(m−n)θ}.
#[derive(Debug, Clone)]
pub struct PatternTable {
    pub n_max: usize,
    pub xs: Vec<f64>,
    /// Row m(m+1)/2 + n holds the pair (m, n), m ≥ n; column = x node.
    values: DMatrix<f64>,
}

fn pair_index(m: usize, n: usize) -> usize {
    let (lo, hi) = if m <= n { (m, n) } else { (n, m) };
    hi * (hi + 1) / 2 + lo
}

/// Default cache: 2001 nodes on [−8, 8].
pub const CACHE_HALF_WIDTH: f64 = 8.0;
pub const CACHE_NODES: usize = 2001;

/// f_mn(x) = (1/π) ∫_0^∞ k ℓ_n^{(d)}(k²/2) Re[(−i)^d e^{ikx}] dk, n ≤ m, d = m − n.
///
/// This is the Fourier form of d/dx of the Hilbert transform of ψ_m ψ_n; the
/// integrand decays like e^{−k²/4}.
pub fn pattern_functions(n_max: usize, xs: &[f64]) -> Result<PatternTable, TomoError> {
    if n_max > 80 {
        return Err(TomoError::NMaxTooLarge(n_max));
    }
    let y_cut = 2.0 * (2 * n_max) as f64 + 2.0 + 80.0;
    let k_max = (2.0 * y_cut).sqrt();
    let x_ext = xs.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    // enough panels to resolve both e^{ikx} and the Laguerre oscillations
    let panels = ((k_max * (x_ext + (2.0 * n_max as f64 + 1.0).sqrt() * 2.0)) / 4.0).ceil() as usize + 8;
    let (ks, ws) = composite_gauss_legendre(16, panels, 0.0, k_max);
    let npairs = pair_index(n_max, n_max) + 1;
    // A[pair, k] = w_k k ℓ(k²/2) / π
    let mut a = DMatrix::<f64>::zeros(npairs, ks.len());
    for (j, (&k, &w)) in ks.iter().zip(&ws).enumerate() {
        let y = 0.5 * k * k;
        for d in 0..=n_max {
            let l = laguerre_fns(n_max - d, d, y);
            for (n, v) in l.iter().enumerate() {
                a[(pair_index(n + d, n), j)] = w * k * v / PI;
            }
        }
    }
    let cos = DMatrix::from_fn(ks.len(), xs.len(), |j, i| (ks[j] * xs[i]).cos());
    let sin = DMatrix::from_fn(ks.len(), xs.len(), |j, i| (ks[j] * xs[i]).sin());
    let fc = &a * cos;
    let fs = &a * sin;
    let mut values = DMatrix::zeros(npairs, xs.len());
    for m in 0..=n_max {
        for n in 0..=m {
            let p = pair_index(m, n);
            let src = match (m - n) % 4 {
                0 => fc.row(p).clone_owned(),
                1 => fs.row(p).clone_owned(),
                2 => -fc.row(p),
                _ => -fs.row(p),
            };
            values.set_row(p, &src);
        }
    }
    Ok(PatternTable { n_max, xs: xs.to_vec(), values })
}

impl PatternTable {
    /// Table on the default cache grid.
    pub fn cached(n_max: usize) -> Result<PatternTable, TomoError> {
        pattern_functions(n_max, &uniform_grid(-CACHE_HALF_WIDTH, CACHE_HALF_WIDTH, CACHE_NODES))
    }

    /// f_mn at node `i` of the table grid.
    pub fn at_node(&self, m: usize, n: usize, i: usize) -> f64 {
        self.values[(pair_index(m, n), i)]
    }

    /// f_mn(x) by linear interpolation on a uniform table grid; zero outside it.
    pub fn eval(&self, m: usize, n: usize, x: f64) -> f64 {
        let nx = self.xs.len();
        let (a, b) = (self.xs[0], self.xs[nx - 1]);
        if x < a || x > b {
            return 0.0;
        }
        let t = (x - a) / (b - a) * (nx - 1) as f64;
        let i = (t.floor() as usize).min(nx - 2);
        let f = t - i as f64;
        let p = pair_index(m, n);
        (1.0 - f) * self.values[(p, i)] + f * self.values[(p, i + 1)]
    }
}

/// Pattern-function reconstruction and whether it fails to be positive.
#[derive(Debug, Clone)]
pub struct DirectSampling {
    pub rho: CMat,
    pub min_eigenvalue: f64,
    pub non_psd: bool,
}

/// ρ_mn = Σ_θ (π/N_θ) Σ_l o_lθ f_mn(x_l) e^{i(m−n)θ}, for m, n < dim.
pub fn direct_sampling_with(tomo: &Tomogram, table: &PatternTable, dim: usize) -> Result<DirectSampling, TomoError> {
    if dim > table.n_max + 1 {
        return Err(TomoError::DimMismatch(dim, table.n_max + 1));
    }
    let nt = tomo.thetas.len() as f64;
    let mut f: Vec<Vec<f64>> = vec![Vec::new(); dim * (dim + 1) / 2];
    for m in 0..dim {
        for n in 0..=m {
            f[pair_index(m, n)] = tomo.xs.iter().map(|&x| table.eval(m, n, x)).collect();
        }
    }
    let mut rho = CMat::zeros(dim, dim);
    for (c, &th) in tomo.thetas.iter().enumerate() {
        for m in 0..dim {
            for n in 0..=m {
                let fx = &f[pair_index(m, n)];
                let s: f64 = (0..tomo.xs.len()).map(|l| tomo.values[(l, c)] * fx[l]).sum();
                let z = C64::from_polar(s * PI / nt, (m as f64 - n as f64) * th);
                rho[(m, n)] += z;
                if m != n {
                    rho[(n, m)] += z.conj();
                }
            }
        }
    }
    let min_eigenvalue = herm_eig(&rho).values.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(DirectSampling { rho, min_eigenvalue, non_psd: min_eigenvalue < -1e-6 })
}

/// Direct sampling on the default pattern-function cache.
pub fn direct_sampling(tomo: &Tomogram, n_max: usize) -> Result<DirectSampling, TomoError> {
    direct_sampling_with(tomo, &PatternTable::cached(n_max)?, n_max + 1)
}

/// MaxEnt state for {n̂ = n̄} ∪ {Δx |x_l⟩⟨x_l|_θ = o_lθ}.
pub fn maxent_tomo(tomo: &Tomogram, nbar: f64, n_max: usize, opts: &SolverOptions) -> Result<LagrangeSolution, MaxEntError> {
    let dim = n_max + 1;
    let mut obs = vec![Observable::new("n", CMat::from_fn(dim, dim, |i, j| C64::from(if i == j { i as f64 } else { 0.0 }))).with_mean(nbar)];
    for (c, &th) in tomo.thetas.iter().enumerate() {
        for (l, &x) in tomo.xs.iter().enumerate() {
            obs.push(Observable::new(format!("O[{l},{c}]"), quadrature_projector(dim, th, x, tomo.dx)).with_mean(tomo.values[(l, c)]));
        }
    }
    let level = ObservationLevel::new(obs)?.with_basis(Basis::Fock(n_max))?;
    solve_lagrange(&level, opts)
}

/// Δ = Σ_mn |a_mn − b_mn|².
pub fn deviation(a: &CMat, b: &CMat) -> Result<f64, TomoError> {
    if a.shape() != b.shape() {
        return Err(TomoError::DimMismatch(a.nrows(), b.nrows()));
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum())
}

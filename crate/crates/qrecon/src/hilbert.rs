//! Truncated Hilbert-space linear algebra.
//!
//! Density matrices, observables, Hermitian matrix functions computed by
//! eigendecomposition, and the standard bosonic operators in the Fock basis
//! with the convention `hbar = 1`, `q = (a + a†)/√2`, `p = (a − a†)/(i√2)`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

/// Numerical tolerances shared by validation routines.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub herm: f64,
    pub trace: f64,
    pub psd: f64,
    /// Fock populations above `n_max - 5` must stay below this.
    pub tail: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { herm: 1e-10, trace: 1e-9, psd: 1e-8, tail: 1e-8 }
    }
}

pub const TOL: Tolerances = Tolerances { herm: 1e-10, trace: 1e-9, psd: 1e-8, tail: 1e-8 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("matrix is not Hermitian: max |a_ij - conj(a_ji)| = {0:e}")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    TraceNotOne(f64),
    #[error("matrix is not positive: smallest eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("exponent is not finite")]
    Overflow,
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    /// Photon numbers 0..=n_max.
    Fock(usize),
    /// k spins-1/2, index 0 of each factor is spin up.
    SpinProduct(usize),
    /// Anything else (e.g. symmetric spin-N/2 subspaces).
    Generic(usize),
}

impl Basis {
    pub fn dim(&self) -> usize {
        match *self {
            Basis::Fock(n) => n + 1,
            Basis::SpinProduct(k) => 1 << k,
            Basis::Generic(d) => d,
        }
    }
}

/// A validated density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    pub basis: Basis,
    #[serde(with = "crate::io::cmat_serde")]
    pub m: CMat,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn entropy(&self) -> f64 {
        von_neumann_entropy(self)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = herm_eig(&self.m).values;
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    /// Populations ρ_nn.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }

    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).trace().re
    }

    /// Projector onto a (not necessarily normalized) state vector.
    pub fn pure(basis: Basis, psi: &[C64]) -> DensityMatrix {
        let n: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        let d = psi.len();
        let m = CMat::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / n);
        DensityMatrix { basis, m }
    }

    pub fn maximally_mixed(basis: Basis) -> DensityMatrix {
        let d = basis.dim();
        DensityMatrix { basis, m: CMat::identity(d, d) / C64::from(d as f64) }
    }

    pub fn mix(&self, other: &DensityMatrix, w: f64) -> DensityMatrix {
        DensityMatrix { basis: self.basis, m: &self.m * C64::from(1.0 - w) + &other.m * C64::from(w) }
    }
}

/// Validate a candidate matrix against the density-matrix invariants.
pub fn dm_validate(m: CMat, basis: Basis) -> Result<DensityMatrix, HilbertError> {
    dm_validate_with(m, basis, &TOL)
}

pub fn dm_validate_with(m: CMat, basis: Basis, tol: &Tolerances) -> Result<DensityMatrix, HilbertError> {
    if m.nrows() != m.ncols() {
        return Err(HilbertError::NotSquare(m.nrows(), m.ncols()));
    }
    if m.nrows() != basis.dim() {
        return Err(HilbertError::DimMismatch(m.nrows(), basis.dim()));
    }
    let h = hermiticity_defect(&m);
    if h > tol.herm {
        return Err(HilbertError::NotHermitian(h));
    }
    let tr = m.trace().re;
    if (tr - 1.0).abs() > tol.trace {
        return Err(HilbertError::TraceNotOne(tr));
    }
    let lmin = herm_eig(&m).values.iter().cloned().fold(f64::INFINITY, f64::min);
    if lmin < -tol.psd {
        return Err(HilbertError::NotPositive(lmin));
    }
    Ok(DensityMatrix { basis, m })
}

pub fn hermiticity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigendecomposition of a Hermitian matrix; values ascending is not guaranteed.
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

pub fn herm_eig(m: &CMat) -> HermEig {
    // symmetrize first so tiny anti-Hermitian noise does not leak
    let mut h = (m + m.adjoint()) * C64::from(0.5);
    // strongly graded entries (far Fock tails) make the QR sweep return NaN;
    // dropping them moves eigenvalues by at most d·1e-40 of the norm
    let floor = h.iter().map(|z| z.norm()).fold(0.0, f64::max) * 1e-40;
    h.iter_mut().filter(|z| z.norm() < floor).for_each(|z| *z = C64::new(0.0, 0.0));
    let e = SymmetricEigen::new(h);
    HermEig { values: e.eigenvalues.iter().cloned().collect(), vectors: e.eigenvectors }
}

/// f(H) for Hermitian H.
pub fn herm_fn(h: &CMat, f: impl Fn(f64) -> C64) -> CMat {
    let e = herm_eig(h);
    let d = h.nrows();
    let mut scaled = e.vectors.clone();
    for j in 0..d {
        let fj = f(e.values[j]);
        for i in 0..d {
            scaled[(i, j)] *= fj;
        }
    }
    scaled * e.vectors.adjoint()
}

/// exp(i H) for Hermitian H.
pub fn unitary_exp(h: &CMat) -> CMat {
    herm_fn(h, |x| C64::new(x.cos(), x.sin()))
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&herm_eig(&rho.m).values)
}

/// −Σ r ln r with 0 ln 0 = 0; tiny negative eigenvalues are clipped.
pub fn entropy_of_spectrum(vals: &[f64]) -> f64 {
    vals.iter().filter(|&&r| r > 1e-300).map(|&r| -r * r.ln()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub label: String,
    #[serde(with = "crate::io::cmat_serde")]
    pub m: CMat,
    pub mean: Option<f64>,
}

impl Observable {
    pub fn new(label: impl Into<String>, m: CMat) -> Self {
        Observable { label: label.into(), m, mean: None }
    }

    pub fn with_mean(mut self, mean: f64) -> Self {
        self.mean = Some(mean);
        self
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevelError {
    #[error("observable `{0}` has no measured mean")]
    MissingMean(String),
    #[error("observable `{0}` has dimension {1}, expected {2}")]
    DimMismatch(String, usize, usize),
    #[error("observables are linearly dependent (Gram rank {rank} < {count})")]
    Dependent { rank: usize, count: usize },
    #[error("observable `{0}` is not Hermitian")]
    NotHermitian(String),
    #[error("empty observation level")]
    Empty,
}

/// Ordered set of observables together with their measured means.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationLevel {
    pub observables: Vec<Observable>,
    pub dim: usize,
    pub basis: Basis,
}

impl ObservationLevel {
    pub fn new(observables: Vec<Observable>) -> Result<Self, LevelError> {
        let dim = observables.first().ok_or(LevelError::Empty)?.dim();
        for o in &observables {
            if o.mean.is_none() {
                return Err(LevelError::MissingMean(o.label.clone()));
            }
            if o.dim() != dim {
                return Err(LevelError::DimMismatch(o.label.clone(), o.dim(), dim));
            }
            if hermiticity_defect(&o.m) > 1e-9 {
                return Err(LevelError::NotHermitian(o.label.clone()));
            }
        }
        let rank = gram_rank(&observables, 1e-9);
        if rank < observables.len() {
            return Err(LevelError::Dependent { rank, count: observables.len() });
        }
        Ok(ObservationLevel { observables, dim, basis: Basis::Generic(dim) })
    }

    /// Tag the level with a concrete basis of matching dimension.
    pub fn with_basis(mut self, basis: Basis) -> Result<Self, LevelError> {
        if basis.dim() != self.dim {
            return Err(LevelError::DimMismatch("basis".into(), basis.dim(), self.dim));
        }
        self.basis = basis;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn means(&self) -> Vec<f64> {
        self.observables.iter().map(|o| o.mean.unwrap()).collect()
    }

    /// Build a level by measuring `obs` on `rho`.
    pub fn measured_on(rho: &DensityMatrix, obs: Vec<Observable>) -> Result<Self, LevelError> {
        let obs = obs
            .into_iter()
            .map(|o| {
                let v = expect_mat(&rho.m, &o.m).unwrap_or(f64::NAN);
                o.with_mean(v)
            })
            .collect();
        ObservationLevel::new(obs)?.with_basis(rho.basis)
    }
}

/// Rank of the Hilbert–Schmidt Gram matrix of the observables, relative tolerance `tol`.
pub fn gram_rank(obs: &[Observable], tol: f64) -> usize {
    let k = obs.len();
    let g = DMatrix::<f64>::from_fn(k, k, |i, j| hs_inner(&obs[i].m, &obs[j].m).re);
    let e = SymmetricEigen::new(g);
    let max = e.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    e.eigenvalues.iter().filter(|&&v| v > tol * max.max(1e-300)).count()
}

/// Tr(A† B).
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Result of a MaxEnt solve.
#[derive(Debug, Clone)]
pub struct LagrangeSolution {
    pub lambdas: Vec<f64>,
    pub sigma: DensityMatrix,
    pub entropy: f64,
    pub log_partition: f64,
    pub converged: bool,
    pub residual: f64,
    pub iterations: usize,
}

/// Tr(ρ G), dropping the (vanishing) imaginary part.
pub fn expectation(rho: &DensityMatrix, obs: &Observable) -> Result<f64, HilbertError> {
    expect_mat(&rho.m, &obs.m)
}

pub fn expect_mat(rho: &CMat, g: &CMat) -> Result<f64, HilbertError> {
    if rho.nrows() != g.nrows() {
        return Err(HilbertError::DimMismatch(rho.nrows(), g.nrows()));
    }
    // Tr(ρG) = Σ_ij ρ_ij G_ji
    let n = rho.nrows();
    let mut s = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += rho[(i, j)] * g[(j, i)];
        }
    }
    Ok(s.re)
}

/// Spectral data of a Gibbs state exp(−H)/Z.
pub struct Gibbs {
    pub rho: CMat,
    pub log_z: f64,
    /// eigenvalues h_k of H and populations p_k
    pub h: Vec<f64>,
    pub p: Vec<f64>,
    pub vectors: CMat,
}

pub fn gibbs_from_exponent(hmat: &CMat) -> Result<Gibbs, HilbertError> {
    let e = herm_eig(hmat);
    if e.values.iter().any(|v| !v.is_finite()) {
        return Err(HilbertError::Overflow);
    }
    let hmin = e.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = e.values.iter().map(|&h| (-(h - hmin)).exp()).collect();
    let s: f64 = w.iter().sum();
    let p: Vec<f64> = w.iter().map(|x| x / s).collect();
    let d = hmat.nrows();
    let mut scaled = e.vectors.clone();
    for j in 0..d {
        for i in 0..d {
            scaled[(i, j)] *= p[j];
        }
    }
    let rho = &scaled * e.vectors.adjoint();
    Ok(Gibbs { rho, log_z: -hmin + s.ln(), h: e.values, p, vectors: e.vectors })
}

/// exp(−Σ λ_ν G_ν)/Z together with ln Z.
pub fn gibbs_state(observables: &[Observable], lambdas: &[f64], basis: Basis) -> Result<(DensityMatrix, f64), HilbertError> {
    let d = basis.dim();
    let mut h = CMat::zeros(d, d);
    for (o, &l) in observables.iter().zip(lambdas) {
        if o.dim() != d {
            return Err(HilbertError::DimMismatch(o.dim(), d));
        }
        h += &o.m * C64::from(l);
    }
    let g = gibbs_from_exponent(&h)?;
    Ok((DensityMatrix { basis, m: g.rho }, g.log_z))
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Partial trace over the second factor of a (da·db)-dim operator.
pub fn partial_trace_second(m: &CMat, da: usize, db: usize) -> CMat {
    CMat::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum())
}

pub fn cmat_real(d: usize, f: impl Fn(usize, usize) -> f64) -> CMat {
    CMat::from_fn(d, d, |i, j| C64::from(f(i, j)))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Trace distance ½‖A − B‖₁ of Hermitian matrices.
pub fn trace_distance(a: &CMat, b: &CMat) -> f64 {
    0.5 * herm_eig(&(a - b)).values.iter().map(|v| v.abs()).sum::<f64>()
}

/// Bosonic operators on Fock states 0..=n_max.
#[derive(Debug, Clone)]
pub struct FockOps {
    pub n_max: usize,
    pub a: CMat,
    pub a_dag: CMat,
    pub n: CMat,
    pub q: CMat,
    pub p: CMat,
}

/// Extra Fock levels used when exponentiating generators before cropping.
fn padding(extent: f64) -> usize {
    40 + (8.0 * extent * extent) as usize
}

pub fn annihilation(dim: usize) -> CMat {
    CMat::from_fn(dim, dim, |i, j| if j == i + 1 { C64::from((j as f64).sqrt()) } else { C64::new(0.0, 0.0) })
}

impl FockOps {
    pub fn new(n_max: usize) -> FockOps {
        assert!(n_max >= 1, "n_max must be at least 1");
        let d = n_max + 1;
        let a = annihilation(d);
        let a_dag = a.adjoint();
        let n = cmat_real(d, |i, j| if i == j { i as f64 } else { 0.0 });
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let q = (&a + &a_dag) * C64::from(s);
        let p = (&a - &a_dag) * C64::new(0.0, -s);
        FockOps { n_max, a, a_dag, n, q, p }
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn basis(&self) -> Basis {
        Basis::Fock(self.n_max)
    }

    /// D(α) = exp(α a† − α* a), exponentiated on a padded space and cropped.
    pub fn displacement(&self, alpha: C64) -> CMat {
        displacement_padded(self.dim(), alpha, padding(alpha.norm()))
    }

    /// S(r) = exp[(r/2)(a†² − a²)], exponentiated on a padded space and cropped.
    pub fn squeeze(&self, r: f64) -> CMat {
        squeeze_padded(self.dim(), r, padding(2.0 * r.abs().max(0.25)))
    }

    /// U(θ) = exp(−iθ n).
    pub fn rotation(&self, theta: f64) -> CMat {
        CMat::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j {
                C64::from_polar(1.0, -theta * i as f64)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

pub fn crop(m: &CMat, d: usize) -> CMat {
    m.view((0, 0), (d, d)).into_owned()
}

pub fn displacement_padded(d: usize, alpha: C64, pad: usize) -> CMat {
    let big = d + pad;
    let a = annihilation(big);
    // α a† − α* a = i H,  H = −i(α a† − α* a)
    let gen = &a.adjoint() * alpha - &a * alpha.conj();
    let h = &gen * C64::new(0.0, -1.0);
    crop(&unitary_exp(&h), d)
}

pub fn squeeze_padded(d: usize, r: f64, pad: usize) -> CMat {
    let big = d + pad;
    let a = annihilation(big);
    let ad = a.adjoint();
    let gen = (&ad * &ad - &a * &a) * C64::from(0.5 * r);
    let h = &gen * C64::new(0.0, -1.0);
    crop(&unitary_exp(&h), d)
}

pub fn pauli(c: char) -> CMat {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    match c.to_ascii_uppercase() {
        'I' => CMat::from_row_slice(2, 2, &[o, z, z, o]),
        'X' => CMat::from_row_slice(2, 2, &[z, o, o, z]),
        'Y' => CMat::from_row_slice(2, 2, &[z, -I, I, z]),
        'Z' => CMat::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("unknown Pauli factor {c}"),
    }
}

//! Finite optimal POVMs for estimating a spin-coherent state or a phase shift
//! from N copies, with fidelity audits and Neumark dilation.

use crate::hilbert::{herm_eig, unitary_exp, CMat, C64};
use crate::io::MatrixFile;
use crate::special::binomial;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PovmError {
    #[error("N must be at least 1")]
    BadN,
    #[error("not a POVM: {0}")]
    InvalidPovm(String),
    #[error("completeness weight c² = {0} is negative")]
    NegativeWeight(f64),
    #[error("completeness system is singular")]
    SingularSystem,
    #[error("Gram trace {trace} differs from dimension {dim}")]
    RankDeficiency { trace: f64, dim: usize },
    #[error("element {0} is not rank one")]
    NotRankOne(usize),
    #[error("POVM of dimension {got} does not fit task needing {expected}")]
    TaskMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    /// N copies of an unknown pure qubit state.
    SpinState(usize),
    /// N qubits sharing an unknown phase shift.
    Phase(usize),
}

impl Task {
    pub fn n(self) -> usize {
        match self {
            Task::SpinState(n) | Task::Phase(n) => n,
        }
    }

    pub fn dim(self) -> usize {
        self.n() + 1
    }
}

/// Estimate attached to an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Guess {
    /// Polar and azimuthal angles of the guessed qubit direction.
    Spin { theta: f64, psi: f64 },
    Phase(f64),
}

impl Guess {
    fn label(&self) -> String {
        match self {
            Guess::Spin { theta, psi } => format!("theta={theta:.15} psi={psi:.15}"),
            Guess::Phase(p) => format!("phase={p:.15}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Povm {
    pub elements: Vec<CMat>,
    pub guesses: Vec<Guess>,
    pub dim: usize,
}

impl Povm {
    /// Checks positivity within 1e-10 and completeness within 1e-8.
    pub fn new(elements: Vec<CMat>, guesses: Vec<Guess>) -> Result<Povm, PovmError> {
        if elements.is_empty() || elements.len() != guesses.len() {
            return Err(PovmError::InvalidPovm("need one guess per element".into()));
        }
        let dim = elements[0].nrows();
        for (r, e) in elements.iter().enumerate() {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(PovmError::InvalidPovm(format!("element {r} has the wrong shape")));
            }
            let lo = herm_eig(e).values.iter().cloned().fold(f64::INFINITY, f64::min);
            if lo < -1e-10 {
                return Err(PovmError::InvalidPovm(format!("element {r} has eigenvalue {lo:e}")));
            }
        }
        let p = Povm { elements, guesses, dim };
        let defect = p.completeness_defect();
        if defect > 1e-8 {
            return Err(PovmError::InvalidPovm(format!("‖ΣO − I‖max = {defect:e}")));
        }
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn completeness_defect(&self) -> f64 {
        let mut s = CMat::zeros(self.dim, self.dim);
        for e in &self.elements {
            s += e;
        }
        (s - CMat::identity(self.dim, self.dim)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// JSON list of matrices, each labelled with its guess.
    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let files: Vec<MatrixFile> = self
            .elements
            .iter()
            .zip(&self.guesses)
            .map(|(e, g)| MatrixFile { label: Some(g.label()), ..MatrixFile::from_cmat(e, None) })
            .collect();
        std::fs::write(path, serde_json::to_string_pretty(&files)? + "\n")
    }
}

#[derive(Debug, Clone)]
pub struct FOperator {
    pub task: Task,
    pub matrix: CMat,
    pub lambda_max: f64,
    /// λ_max · d; tight for the spin task, loose (> 1) for the phase task.
    pub bound: f64,
}

pub fn build_f(task: Task) -> Result<FOperator, PovmError> {
    let n = task.n();
    if n == 0 {
        return Err(PovmError::BadN);
    }
    let d = n + 1;
    let nf = n as f64;
    let matrix = match task {
        // index k carries m = N/2 − k
        Task::SpinState(_) => CMat::from_fn(d, d, |i, j| if i == j { C64::from((nf - i as f64 + 1.0) / ((nf + 2.0) * (nf + 1.0))) } else { C64::from(0.0) }),
        Task::Phase(_) => {
            let scale = 2f64.powi(n as i32 + 2);
            CMat::from_fn(d, d, |i, j| {
                let w = (binomial(n, n - i) * binomial(n, n - j)).sqrt() / scale;
                C64::from(match i.abs_diff(j) {
                    0 => 2.0 * w,
                    1 => w,
                    _ => 0.0,
                })
            })
        }
    };
    let lambda_max = herm_eig(&matrix).values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(FOperator { task, matrix, lambda_max, bound: lambda_max * d as f64 })
}

/// d^{N/2}_{m,N/2}(θ) at index k (m = N/2 − k).
pub fn wigner_d_highest(n: usize, k: usize, theta: f64) -> f64 {
    let (s, c) = (0.5 * theta).sin_cos();
    binomial(n, k).sqrt() * c.powi((n - k) as i32) * s.powi(k as i32)
}

/// Spin-N/2 angular momentum matrices (Jy, Jz) in the basis m = N/2, …, −N/2.
pub fn spin_matrices(n: usize) -> (CMat, CMat) {
    let j = n as f64 / 2.0;
    let d = n + 1;
    let m = |k: usize| j - k as f64;
    let jz = CMat::from_fn(d, d, |a, b| if a == b { C64::from(m(a)) } else { C64::from(0.0) });
    // ⟨m+1|J+|m⟩ = √(j(j+1) − m(m+1)); row a = b − 1 raises m
    let mut jp = CMat::zeros(d, d);
    for b in 1..d {
        let mb = m(b);
        jp[(b - 1, b)] = C64::from((j * (j + 1.0) - mb * (mb + 1.0)).sqrt());
    }
    let jy = (&jp - jp.adjoint()) * C64::new(0.0, -0.5);
    (jy, jz)
}

/// exp(−iψJz) exp(−iθJy).
pub fn rotation(n: usize, theta: f64, psi: f64) -> CMat {
    let (jy, jz) = spin_matrices(n);
    unitary_exp(&(jz * C64::from(-psi))) * unitary_exp(&(jy * C64::from(-theta)))
}

fn solve_weights(n: usize, thetas: &[f64]) -> Result<Vec<f64>, PovmError> {
    let d = n + 1;
    let m = DMatrix::from_fn(d, thetas.len(), |k, r| wigner_d_highest(n, k, thetas[r]).powi(2));
    let c2 = m.lu().solve(&DVector::from_element(d, 1.0)).ok_or(PovmError::SingularSystem)?;
    if c2.iter().any(|v| !v.is_finite()) {
        return Err(PovmError::SingularSystem);
    }
    if let Some(&bad) = c2.iter().find(|&&v| v < -1e-10) {
        return Err(PovmError::NegativeWeight(bad));
    }
    Ok(c2.iter().map(|v| v.max(0.0)).collect())
}

/// Optimal finite spin POVM on a caller-supplied polar grid of N+1 angles.
pub fn build_spin_povm_on_grid(n: usize, thetas: &[f64]) -> Result<Povm, PovmError> {
    if n == 0 {
        return Err(PovmError::BadN);
    }
    if thetas.len() != n + 1 {
        return Err(PovmError::SingularSystem);
    }
    let c2 = solve_weights(n, thetas)?;
    let d = n + 1;
    let mut hw = CMat::zeros(d, d);
    hw[(0, 0)] = C64::from(1.0);
    let mut elements = Vec::with_capacity(d * d);
    let mut guesses = Vec::with_capacity(d * d);
    for (r, &theta) in thetas.iter().enumerate() {
        for s in 0..d {
            let psi = 2.0 * PI * s as f64 / d as f64;
            let u = rotation(n, theta, psi);
            elements.push(&u * &hw * u.adjoint() * C64::from(c2[r] / d as f64));
            guesses.push(Guess::Spin { theta, psi });
        }
    }
    Povm::new(elements, guesses)
}

/// θ_r = rπ/N; a grid with negative weights is shifted by half a step once.
pub fn build_spin_povm(n: usize) -> Result<Povm, PovmError> {
    if n == 0 {
        return Err(PovmError::BadN);
    }
    let grid: Vec<f64> = (0..=n).map(|r| r as f64 * PI / n as f64).collect();
    match build_spin_povm_on_grid(n, &grid) {
        Err(PovmError::NegativeWeight(_)) => {
            let shifted: Vec<f64> = (0..=n).map(|r| (r as f64 + 0.5) * PI / (n + 1) as f64).collect();
            build_spin_povm_on_grid(n, &shifted)
        }
        other => other,
    }
}

pub struct PhasePovm {
    pub povm: Povm,
    pub mean_fidelity: f64,
    /// Σ_s ψ_s P_s.
    pub phase_operator: CMat,
}

/// Projective measurement onto discrete-Fourier states.
pub fn build_phase_povm(n: usize) -> Result<PhasePovm, PovmError> {
    if n == 0 {
        return Err(PovmError::BadN);
    }
    let d = n + 1;
    let mut elements = Vec::with_capacity(d);
    let mut guesses = Vec::with_capacity(d);
    let mut phase_operator = CMat::zeros(d, d);
    for s in 0..d {
        let psi = 2.0 * PI * s as f64 / d as f64;
        let v = DVector::from_fn(d, |q, _| C64::from_polar(1.0 / (d as f64).sqrt(), psi * q as f64));
        let p = &v * v.adjoint();
        phase_operator += &p * C64::from(psi);
        elements.push(p);
        guesses.push(Guess::Phase(psi));
    }
    let povm = Povm::new(elements, guesses)?;
    Ok(PhasePovm { povm, mean_fidelity: phase_fidelity_formula(n), phase_operator })
}

/// ½ + 2^{−(N+1)} Σ_i √(C(N,i) C(N,i+1)).
pub fn phase_fidelity_formula(n: usize) -> f64 {
    let s: f64 = (0..n).map(|i| (binomial(n, i) * binomial(n, i + 1)).sqrt()).sum();
    0.5 + s / 2f64.powi(n as i32 + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub closed_sum: f64,
    pub mc_estimate: f64,
    pub mc_stderr: f64,
    pub bound: f64,
}

impl FidelityReport {
    /// `closed_sum, mc_estimate, mc_stderr, bound`.
    pub fn line(&self) -> String {
        format!("{:.12}, {:.12}, {:.3e}, {:.12}", self.closed_sum, self.mc_estimate, self.mc_stderr, self.bound)
    }

    pub fn agrees(&self, sigmas: f64) -> bool {
        (self.closed_sum - self.mc_estimate).abs() <= sigmas * self.mc_stderr.max(1e-15)
    }
}

fn guess_unitary(task: Task, g: &Guess) -> Result<CMat, PovmError> {
    let n = task.n();
    match (task, g) {
        (Task::SpinState(_), Guess::Spin { theta, psi }) => Ok(rotation(n, *theta, *psi)),
        (Task::Phase(_), Guess::Phase(p)) => Ok(CMat::from_fn(n + 1, n + 1, |i, j| if i == j { C64::from_polar(1.0, p * i as f64) } else { C64::from(0.0) })),
        _ => Err(PovmError::InvalidPovm("guess kind does not match task".into())),
    }
}

/// Σ_r Tr[O_r U_r F U_r†].
pub fn closed_sum_fidelity(povm: &Povm, task: Task) -> Result<f64, PovmError> {
    check_task(povm, task)?;
    let f = build_f(task)?;
    let mut total = 0.0;
    for (o, g) in povm.elements.iter().zip(&povm.guesses) {
        let u = guess_unitary(task, g)?;
        total += (o * &u * &f.matrix * u.adjoint()).trace().re;
    }
    Ok(total)
}

fn check_task(povm: &Povm, task: Task) -> Result<(), PovmError> {
    if task.n() == 0 {
        return Err(PovmError::BadN);
    }
    if povm.dim != task.dim() {
        return Err(PovmError::TaskMismatch { expected: task.dim(), got: povm.dim });
    }
    let defect = povm.completeness_defect();
    if defect > 1e-8 {
        return Err(PovmError::InvalidPovm(format!("‖ΣO − I‖max = {defect:e}")));
    }
    Ok(())
}

const MC_WORKERS: u64 = 16;

/// Group average of Σ_r p(r|x) · fidelity(x, guess_r) with x drawn uniformly.
pub fn monte_carlo_fidelity(povm: &Povm, task: Task, samples: usize, seed: u64) -> Result<(f64, f64), PovmError> {
    use rayon::prelude::*;
    check_task(povm, task)?;
    let n = task.n();
    let d = n + 1;
    let per = samples.div_ceil(MC_WORKERS as usize).max(1);
    let stats: Vec<(f64, f64, usize)> = (0..MC_WORKERS)
        .into_par_iter()
        .map(|w| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(w);
            let (mut s1, mut s2) = (0.0, 0.0);
            let mut amp = DVector::<C64>::zeros(d);
            for _ in 0..per {
                let f = match task {
                    Task::SpinState(_) => {
                        let ct: f64 = rng.random_range(-1.0..1.0);
                        let theta = ct.acos();
                        let phi: f64 = rng.random_range(0.0..2.0 * PI);
                        let j = n as f64 / 2.0;
                        for k in 0..d {
                            amp[k] = C64::from_polar(wigner_d_highest(n, k, theta), -(j - k as f64) * phi);
                        }
                        let nv = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
                        let mut acc = 0.0;
                        for (o, g) in povm.elements.iter().zip(&povm.guesses) {
                            let Guess::Spin { theta: tr, psi: pr } = *g else { continue };
                            let nr = [tr.sin() * pr.cos(), tr.sin() * pr.sin(), tr.cos()];
                            let overlap = 0.5 * (1.0 + nv[0] * nr[0] + nv[1] * nr[1] + nv[2] * nr[2]);
                            acc += (amp.adjoint() * o * &amp)[(0, 0)].re * overlap;
                        }
                        acc
                    }
                    Task::Phase(_) => {
                        let psi: f64 = rng.random_range(0.0..2.0 * PI);
                        let norm = 2f64.powi(n as i32).sqrt();
                        for k in 0..d {
                            amp[k] = C64::from_polar(binomial(n, k).sqrt() / norm, psi * k as f64);
                        }
                        let mut acc = 0.0;
                        for (o, g) in povm.elements.iter().zip(&povm.guesses) {
                            let Guess::Phase(ps) = *g else { continue };
                            acc += (amp.adjoint() * o * &amp)[(0, 0)].re * 0.5 * (1.0 + (psi - ps).cos());
                        }
                        acc
                    }
                };
                s1 += f;
                s2 += f * f;
            }
            (s1, s2, per)
        })
        .collect();
    let (s1, s2, cnt) = stats.iter().fold((0.0, 0.0, 0usize), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let nn = cnt as f64;
    let mean = s1 / nn;
    let var = (s2 / nn - mean * mean).max(0.0) * nn / (nn - 1.0);
    Ok((mean, (var / nn).sqrt()))
}

pub fn mean_fidelity(povm: &Povm, task: Task, samples: usize, seed: u64) -> Result<FidelityReport, PovmError> {
    let closed_sum = closed_sum_fidelity(povm, task)?;
    let (mc_estimate, mc_stderr) = monte_carlo_fidelity(povm, task, samples, seed)?;
    Ok(FidelityReport { closed_sum, mc_estimate, mc_stderr, bound: build_f(task)?.bound })
}

/// Qubit trine: (2/3)|ψ_k⟩⟨ψ_k| with real states 120° apart on the Bloch circle.
pub fn trine() -> Povm {
    let mut elements = Vec::new();
    let mut guesses = Vec::new();
    for k in 0..3 {
        let t = 2.0 * PI * k as f64 / 3.0;
        let v = DVector::from_vec(vec![C64::from((t / 2.0).cos()), C64::from((t / 2.0).sin())]);
        elements.push(&v * v.adjoint() * C64::from(2.0 / 3.0));
        guesses.push(Guess::Spin { theta: t, psi: 0.0 });
    }
    Povm::new(elements, guesses).expect("trine is complete")
}

#[derive(Debug, Clone)]
pub struct Dilation {
    /// Unitary on system ⊗ ancilla (system index major).
    pub unitary: CMat,
    /// Orthonormal measurement vectors |p_r⟩; here the first R basis vectors.
    pub projectors: Vec<DVector<C64>>,
    pub ancilla_dim: usize,
    pub ancilla_state: DVector<C64>,
    /// Gram spectrum, descending.
    pub gram_spectrum: Vec<f64>,
    pub unitarity_defect: f64,
    /// max_r ‖O_r − Tr_A[U† P_r U (1 ⊗ |α⟩⟨α|)]‖max.
    pub recovery_defect: f64,
}

impl Dilation {
    /// Tr_A[U† P_r U (1 ⊗ |α⟩⟨α|)].
    pub fn recovered_element(&self, r: usize) -> CMat {
        let a = self.ancilla_dim;
        let d = self.unitary.nrows() / a;
        let row = self.projectors[r].adjoint() * &self.unitary;
        // ⟨p_r|U|i⊗α⟩ with α = e0
        let w = DVector::from_fn(d, |i, _| row[(0, i * a)]);
        w.conjugate() * w.transpose()
    }
}

/// Projective realization of a rank-one POVM on system ⊗ ancilla.
pub fn neumark_extend(povm: &Povm) -> Result<Dilation, PovmError> {
    let d = povm.dim;
    let r_count = povm.len();
    let a = r_count.div_ceil(d).max(1);
    let big = d * a;
    // ψ_r = c_r|Ψ_r⟩ ⊗ e0
    let mut psi = CMat::zeros(big, r_count);
    for (r, o) in povm.elements.iter().enumerate() {
        let e = herm_eig(o);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&x, &y| e.values[y].total_cmp(&e.values[x]));
        if order.len() > 1 && e.values[order[1]] > 1e-10 {
            return Err(PovmError::NotRankOne(r));
        }
        let c = e.values[order[0]].max(0.0).sqrt();
        for i in 0..d {
            psi[(i * a, r)] = e.vectors[(i, order[0])] * c;
        }
    }
    let gram = psi.adjoint() * &psi;
    let trace = gram.trace().re;
    if (trace - d as f64).abs() > 1e-8 {
        return Err(PovmError::RankDeficiency { trace, dim: d });
    }
    let ge = herm_eig(&gram);
    let mut order: Vec<usize> = (0..r_count).collect();
    order.sort_by(|&x, &y| ge.values[y].total_cmp(&ge.values[x]));
    let gram_spectrum: Vec<f64> = order.iter().map(|&i| ge.values[i]).collect();
    let v = CMat::from_fn(r_count, r_count, |i, j| ge.vectors[(i, order[j])]);

    let mut u = CMat::zeros(big, big);
    let basis = |k: usize| DVector::from_fn(big, |i, _| C64::from(if i == k { 1.0 } else { 0.0 }));
    // p̄_t = Σ_s V_st p_s embedded in the first R coordinates
    let pbar = |t: usize| DVector::from_fn(big, |i, _| if i < r_count { v[(i, t)] } else { C64::from(0.0) });
    for t in 0..d {
        let psibar = &psi * v.column(t);
        u += pbar(t) * psibar.adjoint();
    }
    // complement of H^d ⊗ e0: basis vectors with nonzero ancilla index
    let chis: Vec<usize> = (0..big).filter(|i| i % a != 0).collect();
    let mut chi_iter = chis.into_iter();
    for t in d..r_count {
        let k = chi_iter.next().ok_or(PovmError::RankDeficiency { trace, dim: d })?;
        u += pbar(t) * basis(k).adjoint();
    }
    for (row, k) in (r_count..big).zip(chi_iter) {
        u += basis(row) * basis(k).adjoint();
    }

    let unitarity_defect = (&u * u.adjoint() - CMat::identity(big, big)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut dil = Dilation {
        unitary: u,
        projectors: (0..r_count).map(basis).collect(),
        ancilla_dim: a,
        ancilla_state: DVector::from_fn(a, |i, _| C64::from(if i == 0 { 1.0 } else { 0.0 })),
        gram_spectrum,
        unitarity_defect,
        recovery_defect: 0.0,
    };
    dil.recovery_defect = (0..r_count)
        .map(|r| (dil.recovered_element(r) - &povm.elements[r]).iter().map(|z| z.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    Ok(dil)
}

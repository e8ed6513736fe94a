//! Maximum-entropy reconstruction.
//!
//! [`solve_lagrange`] minimizes the convex dual `F(λ) = ln Z(λ) + Σ λ_ν G_ν`
//! for any observation level. [`closed_form_reconstruct`] gives the explicit
//! generalized canonical states of the standard field observation levels.

use crate::hilbert::{
    gibbs_from_exponent, Basis, CMat, DensityMatrix, HilbertError, LagrangeSolution, LevelError, Observable,
    ObservationLevel, C64,
};
use crate::special::xlnx_neg;
use crate::states::{crop_distribution, diag_state, gaussian_state, StateError};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaxEntError {
    #[error("unphysical measured data: {0}")]
    Unphysical(String),
    #[error("super-thermal statistics (Q = {q} > nbar = {nbar}): the partition function diverges")]
    SuperThermal { q: f64, nbar: f64 },
    #[error("no state matches the constraints (residual {residual:e} after {iterations} iterations)")]
    Infeasible { residual: f64, iterations: usize },
    #[error("solver hit max_iter = {iterations} with residual {residual:e}")]
    MaxIterExceeded { residual: f64, iterations: usize },
    #[error(transparent)]
    Level(#[from] LevelError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Convergence threshold on the ∞-norm of the constraint residual.
    pub grad_tol: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Step shrink factor in backtracking.
    pub backtrack: f64,
    pub min_step: f64,
    /// On infeasible constraints, minimize the squared deviation instead of failing.
    pub infeasible_fallback: bool,
    /// Clamp every |λ_ν| to this value; residual below `accept_tol` then counts as converged.
    pub lambda_cap: Option<f64>,
    pub accept_tol: f64,
    pub stagnation_window: usize,
    pub lambda_blowup: f64,
    pub fallback_max_iter: usize,
    /// Least-deviation stops once `fallback_window` steps reduce the squared
    /// residual by less than this relative amount.
    pub fallback_rel_tol: f64,
    pub fallback_window: usize,
    pub initial: Option<Vec<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iter: 500,
            grad_tol: 1e-9,
            armijo: 1e-4,
            backtrack: 0.5,
            min_step: 1e-12,
            infeasible_fallback: false,
            lambda_cap: None,
            accept_tol: 1e-7,
            stagnation_window: 50,
            lambda_blowup: 1e6,
            fallback_max_iter: 400,
            fallback_rel_tol: 1e-4,
            fallback_window: 10,
            initial: None,
        }
    }
}

impl SolverOptions {
    /// Settings for spin levels, where means of ±1 push multipliers to infinity.
    pub fn spin() -> Self {
        SolverOptions { lambda_cap: Some(40.0), ..Default::default() }
    }

    pub fn with_fallback(mut self) -> Self {
        self.infeasible_fallback = true;
        self
    }
}

/// Everything the solver needs at one λ.
struct Eval {
    log_z: f64,
    dual: f64,
    residual: Vec<f64>,
    p: Vec<f64>,
    rho: CMat,
    /// Kubo–Mori covariance, i.e. the Hessian of the dual
    hess: Option<DMatrix<f64>>,
}

struct Problem<'a> {
    obs: &'a [Observable],
    targets: Vec<f64>,
    dim: usize,
}

impl Problem<'_> {
    fn eval(&self, lambdas: &[f64], with_hessian: bool) -> Result<Eval, HilbertError> {
        let d = self.dim;
        let mut h = CMat::zeros(d, d);
        for (o, &l) in self.obs.iter().zip(lambdas) {
            if l != 0.0 {
                h += &o.m * C64::from(l);
            }
        }
        let g = gibbs_from_exponent(&h)?;
        let k = self.obs.len();
        let rotated: Vec<CMat> = if with_hessian {
            let vd = g.vectors.adjoint();
            self.obs.iter().map(|o| &vd * &o.m * &g.vectors).collect()
        } else {
            Vec::new()
        };
        let means: Vec<f64> = if with_hessian {
            rotated.iter().map(|t| (0..d).map(|i| g.p[i] * t[(i, i)].re).sum()).collect()
        } else {
            // Tr(ρ G) = Σ ρ_ij G_ji, with G Hermitian
            self.obs.iter().map(|o| g.rho.iter().zip(o.m.iter()).map(|(r, m)| (r * m.conj()).re).sum()).collect()
        };
        let residual: Vec<f64> = self.targets.iter().zip(&means).map(|(t, m)| t - m).collect();
        let dual = g.log_z + lambdas.iter().zip(&self.targets).map(|(l, t)| l * t).sum::<f64>();
        let hess = if with_hessian {
            // Kubo–Mori weights φ_kl = (p_k − p_l)/(h_l − h_k), → p_k on degeneracy
            let mut phi = vec![0.0; d * d];
            for a in 0..d {
                for b in 0..d {
                    let delta = g.h[b] - g.h[a];
                    phi[a * d + b] = if delta.abs() < 1e-10 {
                        0.5 * (g.p[a] + g.p[b])
                    } else if delta > 0.0 {
                        g.p[a] * (-(-delta).exp_m1()) / delta
                    } else {
                        g.p[b] * (-(delta).exp_m1()) / (-delta)
                    };
                }
            }
            let mut a = DMatrix::<C64>::zeros(k, d * d);
            for (i, t) in rotated.iter().enumerate() {
                for r in 0..d {
                    for c in 0..d {
                        a[(i, r * d + c)] = t[(r, c)] * phi[r * d + c].sqrt();
                    }
                }
            }
            let aa = &a * a.adjoint();
            Some(DMatrix::from_fn(k, k, |i, j| aa[(i, j)].re - means[i] * means[j]))
        } else {
            None
        };
        Ok(Eval { log_z: g.log_z, dual, residual, p: g.p, rho: g.rho, hess })
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Solve (H + μI) x = b, escalating μ until the factorization succeeds.
const MAX_NEWTON_STEP: f64 = 10.0;

fn damped_solve(h: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = h.nrows();
    let scale = (0..n).map(|i| h[(i, i)].abs()).fold(0.0f64, f64::max).max(1e-300);
    let mut mu = 0.0;
    loop {
        let m = h + DMatrix::<f64>::identity(n, n) * mu;
        if let Some(ch) = m.clone().cholesky() {
            let x = ch.solve(b);
            if x.iter().all(|v| v.is_finite()) {
                return x;
            }
        }
        mu = if mu == 0.0 { 1e-14 * scale } else { mu * 10.0 };
        if mu > 1e6 * scale {
            return b / scale;
        }
    }
}

fn finish(level: &ObservationLevel, lambdas: Vec<f64>, e: Eval, converged: bool, iterations: usize) -> LagrangeSolution {
    let entropy: f64 = e.p.iter().map(|&p| xlnx_neg(p)).sum();
    LagrangeSolution {
        lambdas,
        sigma: DensityMatrix { basis: level.basis, m: e.rho },
        entropy,
        log_partition: e.log_z,
        converged,
        residual: inf_norm(&e.residual),
        iterations,
    }
}

/// MaxEnt state for an observation level, by Newton iteration on the dual.
pub fn solve_lagrange(level: &ObservationLevel, opts: &SolverOptions) -> Result<LagrangeSolution, MaxEntError> {
    let prob = Problem { obs: &level.observables, targets: level.means(), dim: level.dim };
    let k = level.len();
    let mut lambdas = opts.initial.clone().unwrap_or_else(|| vec![0.0; k]);
    let mut e = prob.eval(&lambdas, true)?;
    let mut best = inf_norm(&e.residual);
    let mut since_best = 0usize;
    for it in 0..opts.max_iter {
        let res = inf_norm(&e.residual);
        if res < opts.grad_tol {
            return Ok(finish(level, lambdas, e, true, it));
        }
        let capped = opts.lambda_cap.map(|c| lambdas.iter().any(|l| l.abs() >= c - 1e-12)).unwrap_or(false);
        if capped && res < opts.accept_tol {
            return Ok(finish(level, lambdas, e, true, it));
        }
        if res < best * (1.0 - 1e-3) {
            best = res;
            since_best = 0;
        } else {
            since_best += 1;
        }
        let blown = inf_norm(&lambdas) > opts.lambda_blowup;
        if since_best >= opts.stagnation_window && !blown && res < opts.accept_tol {
            // plateau at rounding level
            return Ok(finish(level, lambdas, e, true, it));
        }
        if since_best >= opts.stagnation_window || blown {
            return stalled(level, &prob, lambdas, e, opts, it);
        }

        let hess = e.hess.as_ref().expect("hessian requested");
        let g = DVector::from_vec(e.residual.clone());
        let mut step = -damped_solve(hess, &g);
        // near-singular Hessians (almost pure σ) can throw λ far past the optimum
        let len = step.amax();
        if len > MAX_NEWTON_STEP {
            step *= MAX_NEWTON_STEP / len;
        }
        let slope = g.dot(&step);
        let mut t = 1.0;
        let mut accepted = None;
        while t >= opts.min_step {
            let mut trial: Vec<f64> = lambdas.iter().zip(step.iter()).map(|(l, s)| l + t * s).collect();
            if let Some(c) = opts.lambda_cap {
                for l in trial.iter_mut() {
                    *l = l.clamp(-c, c);
                }
            }
            if let Ok(te) = prob.eval(&trial, false) {
                if te.dual.is_finite() && te.dual <= e.dual + opts.armijo * t * slope.min(0.0) {
                    accepted = Some(trial);
                    break;
                }
            }
            t *= opts.backtrack;
        }
        match accepted {
            Some(trial) => {
                lambdas = trial;
                e = prob.eval(&lambdas, true)?;
            }
            None => {
                // no descent left at double precision
                if res < opts.accept_tol {
                    return Ok(finish(level, lambdas, e, true, it));
                }
                return stalled(level, &prob, lambdas, e, opts, it);
            }
        }
    }
    let res = inf_norm(&e.residual);
    if res < opts.grad_tol {
        return Ok(finish(level, lambdas, e, true, opts.max_iter));
    }
    if opts.infeasible_fallback {
        return least_deviation(level, &prob, lambdas, opts, opts.max_iter);
    }
    Err(MaxEntError::MaxIterExceeded { residual: res, iterations: opts.max_iter })
}

fn stalled(
    level: &ObservationLevel,
    prob: &Problem,
    lambdas: Vec<f64>,
    e: Eval,
    opts: &SolverOptions,
    it: usize,
) -> Result<LagrangeSolution, MaxEntError> {
    if opts.infeasible_fallback {
        least_deviation(level, prob, lambdas, opts, it)
    } else {
        Err(MaxEntError::Infeasible { residual: inf_norm(&e.residual), iterations: it })
    }
}

/// Levenberg–Marquardt on ½ Σ (G_ν − Tr σ G_ν)², starting from `start`.
fn least_deviation(
    level: &ObservationLevel,
    prob: &Problem,
    start: Vec<f64>,
    opts: &SolverOptions,
    it0: usize,
) -> Result<LagrangeSolution, MaxEntError> {
    // restart from the origin if the dual run wandered off
    let mut lambdas = if inf_norm(&start) > 1e3 { vec![0.0; start.len()] } else { start };
    let mut e = prob.eval(&lambdas, true)?;
    let phi = |e: &Eval| 0.5 * e.residual.iter().map(|r| r * r).sum::<f64>();
    let mut cur = phi(&e);
    let mut mu = 1e-3;
    let mut history = vec![cur];
    let mut its = 0;
    for _ in 0..opts.fallback_max_iter {
        its += 1;
        let h = e.hess.as_ref().expect("hessian requested");
        let r = DVector::from_vec(e.residual.clone());
        let jtj = h * h;
        let grad = h * &r;
        let scale = (0..jtj.nrows()).map(|i| jtj[(i, i)]).fold(0.0f64, f64::max).max(1e-300);
        let n = jtj.nrows();
        let mut improved = false;
        for _ in 0..30 {
            let m = &jtj + DMatrix::<f64>::identity(n, n) * (mu * scale);
            let step = match m.cholesky() {
                Some(ch) => -ch.solve(&grad),
                None => {
                    mu *= 10.0;
                    continue;
                }
            };
            let trial: Vec<f64> = lambdas.iter().zip(step.iter()).map(|(l, s)| l + s).collect();
            if let Ok(te) = prob.eval(&trial, false) {
                let v = phi(&te);
                if v.is_finite() && v < cur {
                    e = prob.eval(&trial, true)?;
                    lambdas = trial;
                    cur = v;
                    mu = (mu * 0.3).max(1e-15);
                    improved = true;
                    break;
                }
            }
            mu *= 10.0;
        }
        history.push(cur);
        // plateau: the last `fallback_window` steps gained less than `fallback_rel_tol`
        let w = opts.fallback_window;
        let plateau = history.len() > w && (history[history.len() - 1 - w] - cur) <= opts.fallback_rel_tol * cur;
        if !improved || plateau || cur < 0.5 * opts.grad_tol * opts.grad_tol {
            break;
        }
    }
    let converged = inf_norm(&e.residual) < opts.grad_tol;
    Ok(finish(level, lambdas, e, converged, it0 + its))
}

/// The field observation levels with closed-form generalized canonical states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum FieldLevel {
    Th,
    O1,
    O2,
    OA,
    OB,
    OC,
    OD1,
    OD2,
    On,
}

impl FieldLevel {
    pub fn name(&self) -> &'static str {
        match self {
            FieldLevel::Th => "Oth",
            FieldLevel::O1 => "O1",
            FieldLevel::O2 => "O2",
            FieldLevel::OA => "OA",
            FieldLevel::OB => "OB",
            FieldLevel::OC => "OC",
            FieldLevel::OD1 => "OD1",
            FieldLevel::OD2 => "OD2",
            FieldLevel::On => "On",
        }
    }

    pub fn parse(s: &str) -> Option<FieldLevel> {
        let t = s.trim().to_ascii_lowercase().replace(['_', '-'], "");
        Some(match t.as_str() {
            "oth" | "th" | "thermal" => FieldLevel::Th,
            "o1" | "1" => FieldLevel::O1,
            "o2" | "2" => FieldLevel::O2,
            "oa" | "a" => FieldLevel::OA,
            "ob" | "b" => FieldLevel::OB,
            "oc" | "c" => FieldLevel::OC,
            "od1" | "d1" => FieldLevel::OD1,
            "od2" | "d2" => FieldLevel::OD2,
            "on" | "n" => FieldLevel::On,
            _ => return None,
        })
    }
}

/// Measured data for one field observation level.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldLevelSpec {
    Th { nbar: f64 },
    O1 { nbar: f64, gamma: C64 },
    /// `mu` is the raw second moment ⟨a²⟩.
    O2 { nbar: f64, gamma: C64, mu: C64 },
    OA { p: Vec<f64> },
    /// `p_even[k]` is P_{2k}.
    OB { nbar: f64, p_even: Vec<f64> },
    /// `p_odd[k]` is P_{2k+1}.
    OC { nbar: f64, p_odd: Vec<f64> },
    OD1 { nbar: f64, p0: f64 },
    /// Mean photon number equals the integer `n`; `pn` is P_n.
    OD2 { n: usize, pn: f64 },
    On { nbar: f64, n2: f64 },
}

impl FieldLevelSpec {
    pub fn level(&self) -> FieldLevel {
        match self {
            FieldLevelSpec::Th { .. } => FieldLevel::Th,
            FieldLevelSpec::O1 { .. } => FieldLevel::O1,
            FieldLevelSpec::O2 { .. } => FieldLevel::O2,
            FieldLevelSpec::OA { .. } => FieldLevel::OA,
            FieldLevelSpec::OB { .. } => FieldLevel::OB,
            FieldLevelSpec::OC { .. } => FieldLevel::OC,
            FieldLevelSpec::OD1 { .. } => FieldLevel::OD1,
            FieldLevelSpec::OD2 { .. } => FieldLevel::OD2,
            FieldLevelSpec::On { .. } => FieldLevel::On,
        }
    }

    /// Measure the data of `level` on a Fock-basis source state.
    ///
    /// `OD2` needs an integer mean photon number; anything more than 1e-6 away
    /// is rejected.
    pub fn from_state(level: FieldLevel, rho: &DensityMatrix) -> Result<FieldLevelSpec, MaxEntError> {
        let d = rho.dim();
        let p = rho.diagonal();
        let nbar: f64 = p.iter().enumerate().map(|(n, v)| n as f64 * v).sum();
        let gamma: C64 = (1..d).map(|n| rho.m[(n, n - 1)] * (n as f64).sqrt()).sum();
        let mu: C64 = (2..d).map(|n| rho.m[(n, n - 2)] * ((n * (n - 1)) as f64).sqrt()).sum();
        Ok(match level {
            FieldLevel::Th => FieldLevelSpec::Th { nbar },
            FieldLevel::O1 => FieldLevelSpec::O1 { nbar, gamma },
            FieldLevel::O2 => FieldLevelSpec::O2 { nbar, gamma, mu },
            FieldLevel::OA => FieldLevelSpec::OA { p },
            FieldLevel::OB => FieldLevelSpec::OB { nbar, p_even: p.iter().step_by(2).cloned().collect() },
            FieldLevel::OC => FieldLevelSpec::OC { nbar, p_odd: p.iter().skip(1).step_by(2).cloned().collect() },
            FieldLevel::OD1 => FieldLevelSpec::OD1 { nbar, p0: p[0] },
            FieldLevel::OD2 => {
                let n = nbar.round();
                if (nbar - n).abs() > 1e-6 {
                    return Err(MaxEntError::Unphysical(format!("OD2 needs an integer mean photon number, got {nbar}")));
                }
                let n = n as usize;
                FieldLevelSpec::OD2 { n, pn: p.get(n).cloned().unwrap_or(0.0) }
            }
            FieldLevel::On => {
                let n2: f64 = p.iter().enumerate().map(|(n, v)| (n * n) as f64 * v).sum();
                FieldLevelSpec::On { nbar, n2 }
            }
        })
    }

    /// The level's observables on Fock states 0..=n_max, tagged with the measured means.
    pub fn observation_level(&self, n_max: usize) -> Result<ObservationLevel, MaxEntError> {
        let ops = crate::hilbert::FockOps::new(n_max);
        let d = n_max + 1;
        let proj = |k: usize| crate::hilbert::cmat_real(d, |i, j| if i == j && i == k { 1.0 } else { 0.0 });
        let a2 = &ops.a * &ops.a;
        let a2d = a2.adjoint();
        let x2 = (&a2 + &a2d) * C64::from(0.5);
        let y2 = (&a2 - &a2d) * C64::new(0.0, -0.5);
        let s2 = std::f64::consts::SQRT_2;
        let mut obs = Vec::new();
        let number = |nbar: f64| Observable::new("n", ops.n.clone()).with_mean(nbar);
        match self {
            FieldLevelSpec::Th { nbar } => obs.push(number(*nbar)),
            FieldLevelSpec::O1 { nbar, gamma } => {
                obs.push(number(*nbar));
                obs.push(Observable::new("q", ops.q.clone()).with_mean(s2 * gamma.re));
                obs.push(Observable::new("p", ops.p.clone()).with_mean(s2 * gamma.im));
            }
            FieldLevelSpec::O2 { nbar, gamma, mu } => {
                obs.push(number(*nbar));
                obs.push(Observable::new("q", ops.q.clone()).with_mean(s2 * gamma.re));
                obs.push(Observable::new("p", ops.p.clone()).with_mean(s2 * gamma.im));
                obs.push(Observable::new("re a^2", x2).with_mean(mu.re));
                obs.push(Observable::new("im a^2", y2).with_mean(mu.im));
            }
            FieldLevelSpec::OA { p } => {
                for (k, &v) in p.iter().enumerate().take(d) {
                    obs.push(Observable::new(format!("P{k}"), proj(k)).with_mean(v));
                }
            }
            FieldLevelSpec::OB { nbar, p_even } => {
                obs.push(number(*nbar));
                for (k, &v) in p_even.iter().enumerate() {
                    if 2 * k < d {
                        obs.push(Observable::new(format!("P{}", 2 * k), proj(2 * k)).with_mean(v));
                    }
                }
            }
            FieldLevelSpec::OC { nbar, p_odd } => {
                obs.push(number(*nbar));
                for (k, &v) in p_odd.iter().enumerate() {
                    if 2 * k + 1 < d {
                        obs.push(Observable::new(format!("P{}", 2 * k + 1), proj(2 * k + 1)).with_mean(v));
                    }
                }
            }
            FieldLevelSpec::OD1 { nbar, p0 } => {
                obs.push(number(*nbar));
                obs.push(Observable::new("P0", proj(0)).with_mean(*p0));
            }
            FieldLevelSpec::OD2 { n, pn } => {
                obs.push(number(*n as f64));
                obs.push(Observable::new(format!("P{n}"), proj(*n)).with_mean(*pn));
            }
            FieldLevelSpec::On { nbar, n2 } => {
                obs.push(number(*nbar));
                obs.push(Observable::new("n^2", &ops.n * &ops.n).with_mean(*n2));
            }
        }
        Ok(ObservationLevel::new(obs)?.with_basis(Basis::Fock(n_max))?)
    }
}

/// Output of [`closed_form_reconstruct`].
#[derive(Debug, Clone)]
pub struct FieldReconstruction {
    pub level: FieldLevel,
    pub rho: DensityMatrix,
    /// Entropy of the untruncated generalized canonical state.
    pub entropy: f64,
    /// Photon-number distribution for phase-insensitive levels.
    pub populations: Option<Vec<f64>>,
    /// Effective thermal occupation of Gaussian levels.
    pub chi: Option<f64>,
    /// (λ₁, λ₂) of the O_n level.
    pub lambdas: Option<(f64, f64)>,
}

pub fn thermal_entropy(nbar: f64) -> f64 {
    if nbar <= 0.0 {
        return 0.0;
    }
    (nbar + 1.0) * (nbar + 1.0).ln() - nbar * nbar.ln()
}

const PHYS_TOL: f64 = 1e-12;

fn nonneg(x: f64, what: &str) -> Result<f64, MaxEntError> {
    if x < -PHYS_TOL || !x.is_finite() {
        Err(MaxEntError::Unphysical(format!("{what} = {x} must be nonnegative")))
    } else {
        Ok(x.max(0.0))
    }
}

/// Geometric tail `amp · ratio^k` for k ≥ 0 placed on every `stride`-th level from `start`.
struct Geometric {
    amp: f64,
    ratio: f64,
}

impl Geometric {
    fn at(&self, k: usize) -> f64 {
        if self.ratio == 0.0 {
            if k == 0 {
                self.amp
            } else {
                0.0
            }
        } else {
            self.amp * self.ratio.powi(k as i32)
        }
    }

    /// −Σ_k a r^k ln(a r^k)
    fn entropy(&self, mass: f64, k_mean: f64) -> f64 {
        if mass <= 0.0 {
            return 0.0;
        }
        let lnr = if self.ratio > 0.0 { self.ratio.ln() } else { 0.0 };
        -mass * self.amp.ln() - k_mean * lnr
    }
}

/// Explicit MaxEnt state and entropy for a field observation level.
pub fn closed_form_reconstruct(spec: &FieldLevelSpec, n_max: usize) -> Result<FieldReconstruction, MaxEntError> {
    closed_form_reconstruct_with(spec, n_max, crate::hilbert::TOL.tail)
}

pub fn closed_form_reconstruct_with(spec: &FieldLevelSpec, n_max: usize, tail_tol: f64) -> Result<FieldReconstruction, MaxEntError> {
    let level = spec.level();
    let diag = |p: Vec<f64>, entropy: f64| -> Result<FieldReconstruction, MaxEntError> {
        let rho = diag_state(&p, n_max);
        Ok(FieldReconstruction { level, rho, entropy, populations: Some(p), chi: None, lambdas: None })
    };
    match spec {
        FieldLevelSpec::Th { nbar } => {
            let nbar = nonneg(*nbar, "nbar")?;
            let g = Geometric { amp: 1.0 / (nbar + 1.0), ratio: nbar / (nbar + 1.0) };
            let p = crop_distribution(|n| g.at(n), n_max, tail_tol)?;
            diag(p, thermal_entropy(nbar))
        }
        FieldLevelSpec::O1 { nbar, gamma } => {
            let n = nonneg(nbar - gamma.norm_sqr(), "nbar - |gamma|^2")?;
            let rho = gaussian_state(n_max, *gamma, 0.0, 0.0, n, tail_tol)?;
            Ok(FieldReconstruction { level, rho, entropy: thermal_entropy(n), populations: None, chi: Some(n), lambdas: None })
        }
        FieldLevelSpec::O2 { nbar, gamma, mu } => {
            let n = nonneg(nbar - gamma.norm_sqr(), "N")?;
            let m = mu - gamma * gamma;
            let disc = (n + 0.5).powi(2) - m.norm_sqr();
            // N(N+1) ≥ |M|² is the same as (N+½)² − |M|² ≥ ¼
            if disc < 0.25 - 1e-12 {
                return Err(MaxEntError::Unphysical(format!("N(N+1) = {} < |M|^2 = {}", n * (n + 1.0), m.norm_sqr())));
            }
            let chi = (disc.max(0.25).sqrt() - 0.5).max(0.0);
            let r = 0.5 * (m.norm() / (n + 0.5)).atanh();
            let theta = -m.arg();
            let rho = gaussian_state(n_max, *gamma, r, theta, chi, tail_tol)?;
            Ok(FieldReconstruction { level, rho, entropy: thermal_entropy(chi), populations: None, chi: Some(chi), lambdas: None })
        }
        FieldLevelSpec::OA { p } => {
            let total: f64 = p.iter().sum();
            if p.iter().any(|&v| v < -PHYS_TOL) || (total - 1.0).abs() > 1e-6 {
                return Err(MaxEntError::Unphysical(format!("photon statistics sum to {total}")));
            }
            if p.len() > n_max + 1 && p[n_max + 1..].iter().sum::<f64>() > tail_tol {
                return Err(StateError::TailMassTooLarge(p[n_max + 1..].iter().sum()).into());
            }
            let s: f64 = p.iter().map(|&v| xlnx_neg(v)).sum();
            let mut q: Vec<f64> = p.iter().take(n_max + 1).map(|v| v.max(0.0) / total).collect();
            q.resize(n_max + 1, 0.0);
            diag(q, s)
        }
        FieldLevelSpec::OB { nbar, p_even } => {
            let p_ev: f64 = p_even.iter().sum();
            let p_odd = nonneg(1.0 - p_ev, "P_odd")?;
            let n_odd = nbar - p_even.iter().enumerate().map(|(k, v)| (2 * k) as f64 * v).sum::<f64>();
            if n_odd < p_odd - 1e-12 {
                return Err(MaxEntError::Unphysical(format!("odd-subspace mean {n_odd} below its weight {p_odd}")));
            }
            let n_odd = n_odd.max(p_odd);
            let g = if p_odd > 0.0 {
                Geometric { amp: 2.0 * p_odd * p_odd / (n_odd + p_odd), ratio: (n_odd - p_odd) / (n_odd + p_odd) }
            } else {
                Geometric { amp: 0.0, ratio: 0.0 }
            };
            let s_odd = g.entropy(p_odd, 0.5 * (n_odd - p_odd));
            let pe = p_even.clone();
            let p = crop_distribution(
                |n| if n % 2 == 0 { pe.get(n / 2).cloned().unwrap_or(0.0).max(0.0) } else { g.at(n / 2) },
                n_max,
                tail_tol,
            )?;
            let s = p_even.iter().map(|&v| xlnx_neg(v)).sum::<f64>() + s_odd;
            diag(p, s)
        }
        FieldLevelSpec::OC { nbar, p_odd } => {
            let p_od: f64 = p_odd.iter().sum();
            let p_even = nonneg(1.0 - p_od, "P_even")?;
            let n_even = nonneg(nbar - p_odd.iter().enumerate().map(|(k, v)| (2 * k + 1) as f64 * v).sum::<f64>(), "even-subspace mean")?;
            let g = if p_even > 0.0 {
                Geometric { amp: 2.0 * p_even * p_even / (n_even + 2.0 * p_even), ratio: n_even / (n_even + 2.0 * p_even) }
            } else if n_even > 1e-12 {
                return Err(MaxEntError::Unphysical("even-subspace mean without even weight".into()));
            } else {
                Geometric { amp: 0.0, ratio: 0.0 }
            };
            let s_even = g.entropy(p_even, 0.5 * n_even);
            let po = p_odd.clone();
            let p = crop_distribution(
                |n| if n % 2 == 1 { po.get(n / 2).cloned().unwrap_or(0.0).max(0.0) } else { g.at(n / 2) },
                n_max,
                tail_tol,
            )?;
            let s = p_odd.iter().map(|&v| xlnx_neg(v)).sum::<f64>() + s_even;
            diag(p, s)
        }
        FieldLevelSpec::OD1 { nbar, p0 } => {
            if !(0.0..=1.0).contains(p0) {
                return Err(MaxEntError::Unphysical(format!("P0 = {p0}")));
            }
            let pp = 1.0 - p0;
            if *nbar < pp - 1e-12 {
                return Err(MaxEntError::Unphysical(format!("nbar = {nbar} below 1 - P0 = {pp}")));
            }
            let nbar = nbar.max(pp);
            let (c, q) = if pp == 0.0 || nbar - pp <= 0.0 {
                (0.0, 0.0)
            } else {
                (pp * pp / (nbar - pp), (nbar - pp) / nbar)
            };
            let p = crop_distribution(
                |n| {
                    if n == 0 {
                        *p0
                    } else if q == 0.0 {
                        if n == 1 {
                            pp
                        } else {
                            0.0
                        }
                    } else {
                        c * q.powi(n as i32)
                    }
                },
                n_max,
                tail_tol,
            )?;
            let s = if q == 0.0 { xlnx_neg(*p0) + xlnx_neg(pp) } else { xlnx_neg(*p0) - pp * c.ln() - nbar * q.ln() };
            diag(p, s)
        }
        FieldLevelSpec::OD2 { n, pn } => {
            if !(0.0..=1.0).contains(pn) {
                return Err(MaxEntError::Unphysical(format!("P_{n} = {pn}")));
            }
            if *n == 0 {
                // zero mean photon number leaves only the vacuum
                if (pn - 1.0).abs() > 1e-12 {
                    return Err(MaxEntError::Unphysical(format!("nbar = 0 requires P_0 = 1, got {pn}")));
                }
                let mut p = vec![0.0; n_max + 1];
                p[0] = 1.0;
                return diag(p, 0.0);
            }
            let nn = *n as f64;
            let x = nn / (nn + 1.0);
            // K = (1 − P)(1+N)^N / ((1+N)^{1+N} − N^N), evaluated in scaled form
            let xn = if *n == 0 { 1.0 } else { x.powi(*n as i32) };
            let k = (1.0 - pn) / (nn + 1.0 - xn);
            let p = crop_distribution(|m| if m == *n { *pn } else { k * x.powi(m as i32) }, n_max, tail_tol)?;
            let s = if *pn >= 1.0 { 0.0 } else { xlnx_neg(*pn) - (1.0 - pn) * k.ln() - if *n > 0 { nn * (1.0 - pn) * x.ln() } else { 0.0 } };
            diag(p, s)
        }
        FieldLevelSpec::On { nbar, n2 } => reconstruct_on(*nbar, *n2, n_max),
    }
}

fn reconstruct_on(nbar: f64, n2: f64, n_max: usize) -> Result<FieldReconstruction, MaxEntError> {
    let nbar = nonneg(nbar, "nbar")?;
    let var = n2 - nbar * nbar;
    if var < -1e-12 {
        return Err(MaxEntError::Unphysical(format!("negative photon-number variance {var}")));
    }
    if nbar > 0.0 && var > nbar * (nbar + 1.0) * (1.0 + 1e-9) + 1e-12 {
        return Err(MaxEntError::SuperThermal { q: (var - nbar) / nbar, nbar });
    }
    let spec = FieldLevelSpec::On { nbar, n2 };
    let level = spec.observation_level(n_max)?;
    let sol = solve_lagrange(&level, &SolverOptions::default())?;
    let p = sol.sigma.diagonal();
    Ok(FieldReconstruction {
        level: FieldLevel::On,
        entropy: sol.entropy,
        rho: sol.sigma,
        populations: Some(p),
        chi: None,
        lambdas: Some((sol.lambdas[0], sol.lambdas[1])),
    })
}

/// One "finer ⊇ coarser" comparison of the level ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainVerdict {
    pub finer: String,
    pub coarser: String,
    pub finer_entropy: f64,
    pub coarser_entropy: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyChain {
    pub entropies: Vec<(String, f64)>,
    pub verdicts: Vec<ChainVerdict>,
}

impl EntropyChain {
    pub fn entropy(&self, name: &str) -> Option<f64> {
        self.entropies.iter().find(|(n, _)| n == name).map(|(_, s)| *s)
    }

    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds)
    }
}

/// Extensions of the level lattice, finer level first.
const ORDER: &[(&str, &str)] = &[
    ("O0", "O2"),
    ("O2", "O1"),
    ("O1", "Oth"),
    ("O0", "OA"),
    ("OA", "OB"),
    ("OA", "OC"),
    ("OB", "Oth"),
    ("OC", "Oth"),
    ("OA", "OD1"),
    ("OA", "OD2"),
    ("OD1", "Oth"),
    ("OD2", "Oth"),
    ("OB", "OD1"),
];

/// Entropies of several levels measured on one state, checked against the level ordering.
///
/// `source_entropy` is the entropy of the state itself (the complete level), if known.
pub fn level_entropy_chain(specs: &[FieldLevelSpec], n_max: usize, source_entropy: Option<f64>) -> Result<EntropyChain, MaxEntError> {
    let mut entropies = Vec::new();
    if let Some(s) = source_entropy {
        entropies.push(("O0".to_string(), s));
    }
    for s in specs {
        let r = closed_form_reconstruct(s, n_max)?;
        entropies.push((s.level().name().to_string(), r.entropy));
    }
    let tol = 1e-9;
    let mut verdicts = Vec::new();
    for (f, c) in ORDER {
        let sf = entropies.iter().find(|(n, _)| n == f);
        let sc = entropies.iter().find(|(n, _)| n == c);
        if let (Some((_, a)), Some((_, b))) = (sf, sc) {
            verdicts.push(ChainVerdict { finer: f.to_string(), coarser: c.to_string(), finer_entropy: *a, coarser_entropy: *b, holds: *a <= *b + tol });
        }
    }
    Ok(EntropyChain { entropies, verdicts })
}

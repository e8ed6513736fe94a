//! MaxEnt reconstruction for one to three spins-1/2.
//!
//! Basis index 0 is spin up (σz = +1); multi-spin states use the Kronecker
//! order site 1 ⊗ site 2 ⊗ site 3.

use crate::hilbert::{herm_eig, kron, pauli, Basis, CMat, DensityMatrix, LagrangeSolution, Observable, ObservationLevel, C64};
use crate::maxent::{solve_lagrange, MaxEntError, SolverOptions};
use crate::special::binary_entropy_bloch;
use rayon::prelude::*;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinError {
    #[error("no closed form for preset {0}")]
    UnsupportedPreset(String),
    #[error("means are unphysical: closed-form state has eigenvalue {0:e}")]
    UnphysicalMeans(f64),
    #[error("no positive candidate in the parametric scan")]
    NoPhysicalPoint,
    #[error("bad Pauli word `{0}`")]
    BadWord(String),
    #[error("{0} sites requested; at most 3 are supported")]
    TooManySites(usize),
    #[error("mean {1} of `{0}` is outside [-1, 1]")]
    MeanOutOfBounds(String, f64),
    #[error("expected {expected} means, got {got}")]
    WrongMeanCount { expected: usize, got: usize },
    #[error("at most 3 free words may be scanned, got {0}")]
    TooManyFree(usize),
    #[error("words act on {0} sites but the level has {1}")]
    SiteMismatch(usize, usize),
    #[error(transparent)]
    MaxEnt(#[from] MaxEntError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-site Pauli matrices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliWord {
    pub factors: Vec<Pauli>,
}

impl PauliWord {
    pub fn parse(s: &str) -> Result<PauliWord, SpinError> {
        let factors = s
            .chars()
            .map(|c| match c.to_ascii_lowercase() {
                'i' | '1' => Ok(Pauli::I),
                'x' => Ok(Pauli::X),
                'y' => Ok(Pauli::Y),
                'z' => Ok(Pauli::Z),
                _ => Err(SpinError::BadWord(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if factors.is_empty() {
            return Err(SpinError::BadWord(s.to_string()));
        }
        if factors.len() > 3 {
            return Err(SpinError::TooManySites(factors.len()));
        }
        Ok(PauliWord { factors })
    }

    pub fn sites(&self) -> usize {
        self.factors.len()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.iter().all(|&p| p == Pauli::I)
    }

    pub fn matrix(&self) -> CMat {
        self.factors.iter().fold(CMat::identity(1, 1), |acc, p| kron(&acc, &pauli(p.letter())))
    }

    /// All 4^k − 1 non-identity words on k sites.
    pub fn all(k: usize) -> Vec<PauliWord> {
        let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        let mut out = Vec::new();
        for code in 1..4usize.pow(k as u32) {
            let factors = (0..k).rev().map(|s| letters[(code >> (2 * s)) & 3]).collect();
            out.push(PauliWord { factors });
        }
        out
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.factors {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

fn w(s: &str) -> PauliWord {
    PauliWord::parse(s).expect("static word")
}

/// Named observation levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpinPreset {
    A1,
    B1,
    C1,
    A2,
    B2,
    C2,
    D2,
    E2,
    G2,
    H2,
    B3,
    C3,
}

impl SpinPreset {
    pub const ALL: [SpinPreset; 12] = [
        SpinPreset::A1,
        SpinPreset::B1,
        SpinPreset::C1,
        SpinPreset::A2,
        SpinPreset::B2,
        SpinPreset::C2,
        SpinPreset::D2,
        SpinPreset::E2,
        SpinPreset::G2,
        SpinPreset::H2,
        SpinPreset::B3,
        SpinPreset::C3,
    ];

    pub fn words(self) -> Vec<PauliWord> {
        let list: &[&str] = match self {
            SpinPreset::A1 => &["Z"],
            SpinPreset::B1 => &["Z", "X"],
            SpinPreset::C1 => &["Z", "X", "Y"],
            SpinPreset::A2 => &["ZI", "IZ"],
            SpinPreset::B2 => &["ZI", "IZ", "ZZ"],
            SpinPreset::C2 => &["ZI", "IZ", "ZZ", "IX"],
            SpinPreset::D2 => &["ZI", "IZ", "ZZ", "IX", "IY"],
            SpinPreset::E2 => &["ZZ", "XX"],
            SpinPreset::G2 => &["ZZ", "XX", "XY", "YX", "YY"],
            SpinPreset::H2 => &["XX", "XY", "YX", "YY"],
            SpinPreset::B3 => &["ZZI", "IZZ"],
            SpinPreset::C3 => &["ZZI", "IZZ", "XXX", "YYY"],
        };
        list.iter().map(|s| w(s)).collect()
    }

    pub fn sites(self) -> usize {
        match self {
            SpinPreset::A1 | SpinPreset::B1 | SpinPreset::C1 => 1,
            SpinPreset::B3 | SpinPreset::C3 => 3,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpinPreset::A1 => "OA1",
            SpinPreset::B1 => "OB1",
            SpinPreset::C1 => "OC1",
            SpinPreset::A2 => "OA2",
            SpinPreset::B2 => "OB2",
            SpinPreset::C2 => "OC2",
            SpinPreset::D2 => "OD2",
            SpinPreset::E2 => "OE2",
            SpinPreset::G2 => "OG2",
            SpinPreset::H2 => "OH2",
            SpinPreset::B3 => "OB3",
            SpinPreset::C3 => "OC3",
        }
    }

    pub fn parse(s: &str) -> Option<SpinPreset> {
        let t = s.trim().to_ascii_uppercase().replace('_', "");
        SpinPreset::ALL.into_iter().find(|p| p.name() == t)
    }

    pub fn has_closed_form(self) -> bool {
        !matches!(self, SpinPreset::C2 | SpinPreset::D2)
    }
}

/// Measured Pauli words on k sites.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinLevel {
    pub sites: usize,
    pub words: Vec<(PauliWord, f64)>,
}

impl SpinLevel {
    pub fn new(words: Vec<(PauliWord, f64)>) -> Result<SpinLevel, SpinError> {
        let sites = words.first().map(|(w, _)| w.sites()).ok_or(SpinError::WrongMeanCount { expected: 1, got: 0 })?;
        for (wd, m) in &words {
            if wd.sites() != sites {
                return Err(SpinError::SiteMismatch(wd.sites(), sites));
            }
            if wd.is_identity() {
                return Err(SpinError::BadWord(wd.to_string()));
            }
            if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(m) {
                return Err(SpinError::MeanOutOfBounds(wd.to_string(), *m));
            }
        }
        Ok(SpinLevel { sites, words })
    }

    /// Parse `ZZI=1 IZZ=1 XXX=0.707`.
    pub fn parse(s: &str) -> Result<SpinLevel, SpinError> {
        let words = s
            .split_whitespace()
            .map(|tok| {
                let (a, b) = tok.split_once('=').ok_or_else(|| SpinError::BadWord(tok.to_string()))?;
                let v = b.parse::<f64>().map_err(|_| SpinError::BadWord(tok.to_string()))?;
                Ok((PauliWord::parse(a)?, v))
            })
            .collect::<Result<Vec<_>, SpinError>>()?;
        SpinLevel::new(words)
    }

    pub fn preset(p: SpinPreset, means: &[f64]) -> Result<SpinLevel, SpinError> {
        let words = p.words();
        if means.len() != words.len() {
            return Err(SpinError::WrongMeanCount { expected: words.len(), got: means.len() });
        }
        SpinLevel::new(words.into_iter().zip(means.iter().cloned()).collect())
    }

    /// Means of `words` measured on `rho`.
    pub fn measured(words: &[PauliWord], rho: &CMat) -> Result<SpinLevel, SpinError> {
        SpinLevel::new(words.iter().map(|wd| (wd.clone(), pauli_mean(rho, wd))).collect())
    }

    pub fn dim(&self) -> usize {
        1 << self.sites
    }

    pub fn means(&self) -> Vec<f64> {
        self.words.iter().map(|(_, m)| *m).collect()
    }

    pub fn observation_level(&self) -> Result<ObservationLevel, SpinError> {
        let obs = self.words.iter().map(|(wd, m)| Observable::new(wd.to_string(), wd.matrix()).with_mean(*m)).collect();
        let lvl = ObservationLevel::new(obs).map_err(MaxEntError::from)?;
        Ok(lvl.with_basis(Basis::SpinProduct(self.sites)).map_err(MaxEntError::from)?)
    }
}

/// Tr(ρ W).
pub fn pauli_mean(rho: &CMat, word: &PauliWord) -> f64 {
    crate::hilbert::expect_mat(rho, &word.matrix()).unwrap_or(f64::NAN)
}

/// 2^{−k} (I + Σ ξ_w W).
pub fn pauli_expansion(sites: usize, terms: &[(PauliWord, f64)]) -> CMat {
    let d = 1usize << sites;
    let mut m = CMat::identity(d, d);
    for (wd, v) in terms {
        m += wd.matrix() * C64::from(*v);
    }
    m / C64::from(d as f64)
}

/// (|↑↑⟩ + e^{iφ}|↓↓⟩)/√2; φ = π gives |Φ−⟩.
pub fn bell_phi(phi: f64) -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = [C64::from(s), C64::from(0.0), C64::from(0.0), C64::from_polar(s, phi)];
    DensityMatrix::pure(Basis::SpinProduct(2), &v)
}

/// (|↑↓⟩ + e^{iφ}|↓↑⟩)/√2.
pub fn bell_psi(phi: f64) -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = [C64::from(0.0), C64::from(s), C64::from_polar(s, phi), C64::from(0.0)];
    DensityMatrix::pure(Basis::SpinProduct(2), &v)
}

/// (|↑↑↑⟩ + e^{iφ}|↓↓↓⟩)/√2.
pub fn ghz(phi: f64) -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = vec![C64::from(0.0); 8];
    v[0] = C64::from(s);
    v[7] = C64::from_polar(s, phi);
    DensityMatrix::pure(Basis::SpinProduct(3), &v)
}

/// Pure single spin with Bloch angles (θ, φ).
pub fn spin_coherent(theta: f64, phi: f64) -> DensityMatrix {
    let v = [C64::from((0.5 * theta).cos()), C64::from_polar((0.5 * theta).sin(), phi)];
    DensityMatrix::pure(Basis::SpinProduct(1), &v)
}

#[derive(Debug, Clone)]
pub struct SpinClosedForm {
    pub rho: DensityMatrix,
    pub entropy: f64,
    /// Unmeasured words with nonzero predicted mean.
    pub predicted: Vec<(PauliWord, f64)>,
}

fn checked(sites: usize, m: CMat, entropy: f64, predicted: Vec<(PauliWord, f64)>) -> Result<SpinClosedForm, SpinError> {
    let e = herm_eig(&m);
    let min = e.values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-9 {
        return Err(SpinError::UnphysicalMeans(min));
    }
    let entropy = if entropy.is_nan() { crate::hilbert::entropy_of_spectrum(&e.values) } else { entropy };
    Ok(SpinClosedForm { rho: DensityMatrix { basis: Basis::SpinProduct(sites), m }, entropy, predicted })
}

/// Generalized canonical state of a preset in closed form.
pub fn spin_closed_form(preset: SpinPreset, means: &[f64]) -> Result<SpinClosedForm, SpinError> {
    let lvl = SpinLevel::preset(preset, means)?;
    let m = lvl.means();
    let k = preset.sites();
    let terms = |extra: Vec<(&str, f64)>| {
        let mut t = lvl.words.clone();
        t.extend(extra.into_iter().map(|(s, v)| (w(s), v)));
        t
    };
    match preset {
        SpinPreset::A1 | SpinPreset::B1 | SpinPreset::C1 => {
            let r = m.iter().map(|x| x * x).sum::<f64>().sqrt();
            if r > 1.0 + 1e-12 {
                return Err(SpinError::UnphysicalMeans(0.5 * (1.0 - r)));
            }
            checked(1, pauli_expansion(1, &lvl.words), binary_entropy_bloch(r.min(1.0)), vec![])
        }
        SpinPreset::A2 => {
            let (a, b) = (m[0], m[1]);
            let pred = vec![("ZZ", a * b)];
            let s = binary_entropy_bloch(a.abs()) + binary_entropy_bloch(b.abs());
            checked(2, pauli_expansion(2, &terms(pred.clone())), s, named(pred))
        }
        SpinPreset::B2 => checked(2, pauli_expansion(2, &lvl.words), f64::NAN, vec![]),
        SpinPreset::E2 => {
            let (a, b) = (m[0], m[1]);
            // ZZ·XX = −YY
            let pred = vec![("YY", -a * b)];
            let s = binary_entropy_bloch(a.abs()) + binary_entropy_bloch(b.abs());
            checked(2, pauli_expansion(2, &terms(pred.clone())), s, named(pred))
        }
        SpinPreset::G2 => checked(2, pauli_expansion(2, &lvl.words), f64::NAN, vec![]),
        SpinPreset::H2 => {
            let (xx, xy, yx, yy) = (m[0], m[1], m[2], m[3]);
            let pred = vec![("ZZ", xy * yx - xx * yy)];
            checked(2, pauli_expansion(2, &terms(pred.clone())), f64::NAN, named(pred))
        }
        SpinPreset::B3 => {
            let (a, b) = (m[0], m[1]);
            let pred = vec![("ZIZ", a * b)];
            let s = binary_entropy_bloch(a.abs()) + binary_entropy_bloch(b.abs()) + std::f64::consts::LN_2;
            checked(3, pauli_expansion(3, &terms(pred.clone())), s, named(pred))
        }
        SpinPreset::C3 => {
            let (a, b, c, d) = (m[0], m[1], m[2], m[3]);
            let pred = vec![
                ("ZIZ", a * b),
                ("YYX", -a * c),
                ("XYY", -b * c),
                ("YXY", -a * b * c),
                ("XXY", -a * d),
                ("YXX", -b * d),
                ("XYX", -a * b * d),
            ];
            let r = (c * c + d * d).sqrt();
            if r > 1.0 + 1e-12 {
                return Err(SpinError::UnphysicalMeans(0.5 * (1.0 - r)));
            }
            let s = binary_entropy_bloch(a.abs()) + binary_entropy_bloch(b.abs()) + binary_entropy_bloch(r.min(1.0));
            checked(k, pauli_expansion(3, &terms(pred.clone())), s, named(pred))
        }
        SpinPreset::C2 | SpinPreset::D2 => Err(SpinError::UnsupportedPreset(preset.name().to_string())),
    }
}

fn named(v: Vec<(&str, f64)>) -> Vec<(PauliWord, f64)> {
    v.into_iter().map(|(s, x)| (w(s), x)).collect()
}

/// Numerical MaxEnt state for any spin level.
pub fn spin_maxent(level: &SpinLevel, opts: &SolverOptions) -> Result<LagrangeSolution, SpinError> {
    Ok(solve_lagrange(&level.observation_level()?, opts)?)
}

#[derive(Debug, Clone)]
pub struct Completion {
    pub rho: DensityMatrix,
    pub free_values: Vec<f64>,
    pub entropy: f64,
}

fn scan_step(d: usize) -> f64 {
    match d {
        1 => 1e-3,
        2 => 1e-2,
        _ => 2e-2,
    }
}

/// Candidate entropy, or None if the Pauli expansion is not positive.
fn candidate(sites: usize, base: &[(PauliWord, f64)], free: &[PauliWord], v: &[f64]) -> Option<f64> {
    let mut t = base.to_vec();
    t.extend(free.iter().cloned().zip(v.iter().cloned()));
    let e = herm_eig(&pauli_expansion(sites, &t));
    if e.values.iter().any(|&x| x < -1e-9) {
        return None;
    }
    Some(crate::hilbert::entropy_of_spectrum(&e.values))
}

fn best_on_grid(sites: usize, base: &[(PauliWord, f64)], free: &[PauliWord], axes: &[Vec<f64>]) -> Option<(f64, Vec<f64>)> {
    let total: usize = axes.iter().map(|a| a.len()).product();
    (0..total)
        .into_par_iter()
        .filter_map(|mut idx| {
            let mut v = vec![0.0; axes.len()];
            for (k, ax) in axes.iter().enumerate().rev() {
                v[k] = ax[idx % ax.len()];
                idx /= ax.len();
            }
            candidate(sites, base, free, &v).map(|s| (s, v))
        })
        .reduce_with(|a, b| match a.0.partial_cmp(&b.0) {
            Some(std::cmp::Ordering::Greater) => a,
            Some(std::cmp::Ordering::Less) => b,
            _ => {
                if a.1 <= b.1 {
                    a
                } else {
                    b
                }
            }
        })
}

/// Fix the measured means, scan the free words over [−1, 1]^d, keep the
/// positive candidate of largest entropy. All other words are set to zero.
pub fn parametric_completion(level: &SpinLevel, free: &[PauliWord]) -> Result<Completion, SpinError> {
    if free.len() > 3 {
        return Err(SpinError::TooManyFree(free.len()));
    }
    for f in free {
        if f.sites() != level.sites {
            return Err(SpinError::SiteMismatch(f.sites(), level.sites));
        }
    }
    let d = free.len();
    let h = scan_step(d);
    let n = (2.0 / h).round() as usize;
    let coarse: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
    let axes = vec![coarse; d];
    let (_, best) = best_on_grid(level.sites, &level.words, free, &axes).ok_or(SpinError::NoPhysicalPoint)?;
    // refine: step h/10 over ±h around the coarse optimum
    let axes: Vec<Vec<f64>> = best.iter().map(|&c| (-10..=10).map(|j| (c + h * j as f64 / 10.0).clamp(-1.0, 1.0)).collect()).collect();
    let (entropy, free_values) = best_on_grid(level.sites, &level.words, free, &axes).ok_or(SpinError::NoPhysicalPoint)?;
    let mut t = level.words.clone();
    t.extend(free.iter().cloned().zip(free_values.iter().cloned()));
    let rho = DensityMatrix { basis: Basis::SpinProduct(level.sites), m: pauli_expansion(level.sites, &t) };
    Ok(Completion { rho, free_values, entropy })
}

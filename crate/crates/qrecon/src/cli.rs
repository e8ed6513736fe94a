//! Command implementations behind the `qrecon` binary.
//!
//! Each command takes `key=value` parameters, writes its outputs into the
//! run directory, and always leaves a `manifest.json` there.

use crate::bayes::{posterior_estimate, BayesError, BayesSystem, MeasurementRecord, Quadrature};
use crate::hilbert::{Basis, DensityMatrix};
use crate::io::{read_matrix, write_matrix};
use crate::maxent::{closed_form_reconstruct, FieldLevel, FieldLevelSpec, MaxEntError, SolverOptions};
use crate::povm::{build_phase_povm, build_spin_povm, mean_fidelity, neumark_extend, PovmError, Task};
use crate::spin::{self, PauliWord, SpinError, SpinLevel, SpinPreset};
use crate::states::{make_state, StateError, StateSpec};
use crate::tomography::{deviation, direct_sampling, equidistant_angles, maxent_tomo, simulate_tomogram, uniform_grid, TomoError, TomoMode};
use crate::wigner::{wigner_from_dm, PhaseGrid, WignerError};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    FieldMaxent,
    Tomo,
    Spin,
    Bayes,
    Povm,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub params: BTreeMap<String, String>,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

impl RunConfig {
    /// Parses `key=value` tokens; keys are case-insensitive.
    pub fn new(command: Command, args: &[String], out: PathBuf, seed: Option<u64>) -> Result<RunConfig, CliError> {
        let mut params = BTreeMap::new();
        for a in args {
            let (k, v) = a.split_once('=').ok_or_else(|| CliError::Usage(format!("expected key=value, got `{a}`")))?;
            params.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
        }
        Ok(RunConfig { command, params, out, seed })
    }

    fn get(&self, k: &str) -> Option<&str> {
        self.params.get(k).map(|s| s.as_str())
    }

    fn num<T: std::str::FromStr>(&self, k: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(k) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|e| CliError::Usage(format!("`{k}={s}`: {e}"))),
        }
    }

    fn seed_required(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Usage("this run is stochastic: pass --seed".into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Domain(String),
    Io(String),
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Domain(_) => 2,
            CliError::Io(_) => 3,
            CliError::NonConvergence(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Domain(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
            CliError::NonConvergence(m) => write!(f, "did not converge: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<MaxEntError> for CliError {
    fn from(e: MaxEntError) -> Self {
        let name = match &e {
            MaxEntError::Unphysical(_) => "Unphysical",
            MaxEntError::SuperThermal { .. } => "SuperThermal",
            MaxEntError::Infeasible { .. } => "Infeasible",
            MaxEntError::MaxIterExceeded { .. } => return CliError::NonConvergence(e.to_string()),
            _ => "InvalidInput",
        };
        CliError::Domain(format!("{name}: {e}"))
    }
}

impl From<StateError> for CliError {
    fn from(e: StateError) -> Self {
        CliError::Domain(format!("State: {e}"))
    }
}

impl From<WignerError> for CliError {
    fn from(e: WignerError) -> Self {
        CliError::Domain(format!("Wigner: {e}"))
    }
}

impl From<TomoError> for CliError {
    fn from(e: TomoError) -> Self {
        CliError::Domain(format!("Tomography: {e}"))
    }
}

impl From<SpinError> for CliError {
    fn from(e: SpinError) -> Self {
        match e {
            SpinError::MaxEnt(m) => m.into(),
            e => CliError::Domain(format!("Spin: {e}")),
        }
    }
}

impl From<BayesError> for CliError {
    fn from(e: BayesError) -> Self {
        match e {
            BayesError::QuadratureUnderflow => CliError::NonConvergence(e.to_string()),
            e => CliError::Domain(format!("Bayes: {e}")),
        }
    }
}

impl From<PovmError> for CliError {
    fn from(e: PovmError) -> Self {
        CliError::Domain(format!("Povm: {e}"))
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: Command,
    config: &'a BTreeMap<String, String>,
    seed: Option<u64>,
    version: &'static str,
    wall_time_s: f64,
    exit_code: i32,
    outputs: Vec<String>,
    error: Option<String>,
}

/// What a finished command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<String>,
    pub summary: String,
}

impl Outcome {
    fn file(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        PathBuf::from(name)
    }
}

/// Runs a command, writes the manifest, and returns the process exit code.
pub fn run(cfg: &RunConfig) -> (i32, Result<Outcome, CliError>) {
    let t0 = Instant::now();
    if let Err(e) = std::fs::create_dir_all(&cfg.out) {
        return (3, Err(CliError::Io(format!("{}: {e}", cfg.out.display()))));
    }
    let res = match cfg.command {
        Command::FieldMaxent => cmd_field_maxent(cfg),
        Command::Tomo => cmd_tomo(cfg),
        Command::Spin => cmd_spin(cfg),
        Command::Bayes => cmd_bayes(cfg),
        Command::Povm => cmd_povm(cfg),
    };
    let code = match &res {
        Ok(_) => 0,
        Err(e) => e.exit_code(),
    };
    let mut outputs = res.as_ref().map(|o| o.files.clone()).unwrap_or_default();
    if cfg.out.join("report.txt").exists() && !outputs.iter().any(|f| f == "report.txt") {
        outputs.push("report.txt".into());
    }
    let m = Manifest {
        command: cfg.command,
        config: &cfg.params,
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION"),
        wall_time_s: t0.elapsed().as_secs_f64(),
        exit_code: code,
        outputs,
        error: res.as_ref().err().map(|e| e.to_string()),
    };
    let written = serde_json::to_string_pretty(&m).map_err(std::io::Error::other).and_then(|s| std::fs::write(cfg.out.join("manifest.json"), s + "\n"));
    match written {
        Err(e) if code == 0 => (3, Err(CliError::Io(e.to_string()))),
        _ => (code, res),
    }
}

fn write_report(dir: &Path, text: &str) -> Result<(), CliError> {
    Ok(std::fs::write(dir.join("report.txt"), text)?)
}

fn state_from(cfg: &RunConfig) -> Result<DensityMatrix, CliError> {
    let map: HashMap<String, String> = cfg.params.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    Ok(make_state(&StateSpec::from_map(&map)?)?)
}

/// Field MaxEnt: source state → level data → reconstruction σ and its Wigner grid.
pub fn cmd_field_maxent(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let level_s = cfg.get("level").ok_or_else(|| CliError::Usage("missing `level`".into()))?;
    let level = FieldLevel::parse(level_s).ok_or_else(|| CliError::Usage(format!("unknown level `{level_s}`")))?;
    let result = (|| -> Result<_, CliError> {
        let rho = state_from(cfg)?;
        let spec = FieldLevelSpec::from_state(level, &rho)?;
        let rec = closed_form_reconstruct(&spec, rho.dim() - 1)?;
        Ok((rho, rec))
    })();
    let (rho, rec) = match result {
        Ok(v) => v,
        Err(e) => {
            write_report(&cfg.out, &format!("level {}\nerror {e}\n", level.name()))?;
            return Err(e);
        }
    };
    write_matrix(&cfg.out.join(out.file("sigma.mat")), &rec.rho.m, Some(rec.rho.basis))?;
    let half = cfg.num("half", 5.0)?;
    let npts = cfg.num("npts", 101usize)?;
    let grid = wigner_from_dm(&rec.rho, &PhaseGrid::square(half, npts))?;
    grid.write_csv(&cfg.out.join(out.file("wigner.csv")))?;
    let mut r = String::new();
    writeln!(r, "level {}", level.name()).ok();
    writeln!(r, "entropy {:.12e}", rec.entropy).ok();
    writeln!(r, "source_entropy {:.12e}", rho.entropy() + 0.0).ok();
    writeln!(r, "wigner_normalization {:.9}", grid.normalization()).ok();
    if let Some(chi) = rec.chi {
        writeln!(r, "chi {chi:.12e}").ok();
    }
    if let Some((l1, l2)) = rec.lambdas {
        writeln!(r, "lambdas {l1:.12e} {l2:.12e}").ok();
    }
    write_report(&cfg.out, &r)?;
    out.files.push("report.txt".into());
    out.summary = r;
    Ok(out)
}

/// Tomogram simulation with pattern-function and MaxEnt reconstructions.
pub fn cmd_tomo(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let rho = state_from(cfg)?;
    let n_theta = cfg.num("ntheta", 4usize)?;
    let nx = cfg.num("nx", 13usize)?;
    let xmin = cfg.num("xmin", -2.0)?;
    let xmax = cfg.num("xmax", 2.0)?;
    let eta = cfg.num("eta", 0.0)?;
    let n_max = rho.dim() - 1;
    let mode = if eta > 0.0 { TomoMode::Noisy { eta, seed: cfg.seed_required()? } } else { TomoMode::Exact };
    let tomo = simulate_tomogram(&rho, &equidistant_angles(n_theta), &uniform_grid(xmin, xmax, nx), mode)?;
    tomo.write_csv(&cfg.out.join(out.file("tomogram.csv")))?;
    let ds = direct_sampling(&tomo, n_max)?;
    write_matrix(&cfg.out.join(out.file("rho_pattern.mat")), &ds.rho, Some(Basis::Fock(n_max)))?;
    let nbar: f64 = rho.diagonal().iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let opts = if eta > 0.0 { SolverOptions::default().with_fallback() } else { SolverOptions::default() };
    let me = maxent_tomo(&tomo, nbar, n_max, &opts)?;
    write_matrix(&cfg.out.join(out.file("rho_maxent.mat")), &me.sigma.m, Some(me.sigma.basis))?;
    let dp = deviation(&ds.rho, &rho.m)?;
    let dm = deviation(&me.sigma.m, &rho.m)?;
    let mut r = String::new();
    writeln!(r, "# n_theta n_x eta delta_pattern delta_maxent pattern_min_eig maxent_converged").ok();
    writeln!(r, "{n_theta} {nx} {eta} {dp:.6e} {dm:.6e} {:.6e} {}", ds.min_eigenvalue, me.converged).ok();
    std::fs::write(cfg.out.join(out.file("deltas.txt")), &r)?;
    out.summary = r;
    Ok(out)
}

fn parse_words(s: &str) -> Result<Vec<PauliWord>, CliError> {
    s.split([',', ' ']).filter(|t| !t.is_empty()).map(|t| PauliWord::parse(t).map_err(CliError::from)).collect()
}

fn spin_source(cfg: &RunConfig) -> Result<DensityMatrix, CliError> {
    if let Some(path) = cfg.get("rho") {
        let f = read_matrix(Path::new(path))?;
        let m = f.to_cmat().map_err(CliError::Io)?;
        let sites = (m.nrows() as f64).log2().round() as usize;
        return Ok(DensityMatrix { basis: f.basis.unwrap_or(Basis::SpinProduct(sites)), m });
    }
    let phi = cfg.num("phi", 0.0)?;
    let system = cfg.get("system").ok_or_else(|| CliError::Usage("missing `system` (or `rho`)".into()))?;
    Ok(match system.to_ascii_lowercase().as_str() {
        "bell" | "bellphi" => spin::bell_phi(phi),
        "bellpsi" => spin::bell_psi(phi),
        "ghz" => spin::ghz(phi),
        "coherent" => spin::spin_coherent(cfg.num("theta", 0.0)?, phi),
        other => return Err(CliError::Usage(format!("unknown spin system `{other}`"))),
    })
}

/// Spin MaxEnt on a preset or custom level measured on a source state.
pub fn cmd_spin(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let rho = spin_source(cfg)?;
    let level_s = cfg.get("level").ok_or_else(|| CliError::Usage("missing `level` (preset or word list)".into()))?;
    let preset = SpinPreset::parse(level_s);
    let words = match preset {
        Some(p) => p.words(),
        None => parse_words(level_s)?,
    };
    let level = SpinLevel::measured(&words, &rho.m)?;
    let mut r = String::new();
    let (sigma, entropy, method) = if let Some(free) = cfg.get("free") {
        let c = spin::parametric_completion(&level, &parse_words(free)?)?;
        for (w, v) in parse_words(free)?.iter().zip(&c.free_values) {
            writeln!(r, "free {w} {v:.9}").ok();
        }
        (c.rho, c.entropy, "completion")
    } else if let Some(p) = preset.filter(|p| p.has_closed_form()) {
        let c = spin::spin_closed_form(p, &level.means())?;
        (c.rho, c.entropy, "closed-form")
    } else {
        let s = spin::spin_maxent(&level, &SolverOptions::spin())?;
        (s.sigma, s.entropy, "lagrange")
    };
    write_matrix(&cfg.out.join(out.file("sigma.mat")), &sigma.m, Some(sigma.basis))?;
    writeln!(r, "level {level_s}\nmethod {method}\nentropy {entropy:.12e}").ok();
    for (w, v) in &level.words {
        writeln!(r, "mean {w} {v:.12}").ok();
    }
    writeln!(r, "trace_distance_to_source {:.6e}", crate::hilbert::trace_distance(&sigma.m, &rho.m)).ok();
    write_report(&cfg.out, &r)?;
    out.files.push("report.txt".into());
    out.summary = r;
    Ok(out)
}

/// Posterior mean from a measurement-record file.
pub fn cmd_bayes(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let sys_s = cfg.get("system").unwrap_or("spin1");
    let system = BayesSystem::parse(sys_s).ok_or_else(|| CliError::Usage(format!("unknown system `{sys_s}`")))?;
    let path = cfg.get("records").ok_or_else(|| CliError::Usage("missing `records`".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    let record = MeasurementRecord::parse(system, &text)?;
    let quad = match (system, cfg.get("quadrature")) {
        (BayesSystem::Spin1, None | Some("product")) => Quadrature::Product { n_theta: cfg.num("ntheta", 64)?, n_phi: cfg.num("nphi", 64)? },
        _ => Quadrature::QuasiRandom { points: cfg.num("points", 200_000)?, replicas: cfg.num("replicas", 8)?, seed: cfg.seed_required()? as u32 },
    };
    let post = posterior_estimate(&record, quad)?;
    write_matrix(&cfg.out.join(out.file("posterior.mat")), &post.rho.m, Some(post.rho.basis))?;
    let mut r = String::new();
    writeln!(r, "system {sys_s}\nentries {}", record.entries.len()).ok();
    for w in PauliWord::all(system.word_sites()).into_iter().filter(|w| !w.is_identity()) {
        writeln!(r, "mean {w} {:.12}", spin::pauli_mean(&post.rho.m, &w)).ok();
    }
    if let Some(se) = post.stderr {
        writeln!(r, "stderr {se:.3e}").ok();
    }
    writeln!(r, "log_evidence {:.12e}", post.log_evidence).ok();
    write_report(&cfg.out, &r)?;
    out.files.push("report.txt".into());
    out.summary = r;
    Ok(out)
}

/// Optimal finite POVM with its fidelity audit; `neumark=true` adds the dilation.
pub fn cmd_povm(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let n = cfg.num("n", 1usize)?;
    let samples = cfg.num("samples", 200_000usize)?;
    let seed = cfg.seed_required()?;
    let (task, povm) = match cfg.get("task").unwrap_or("spin") {
        "spin" => (Task::SpinState(n), build_spin_povm(n)?),
        "phase" => (Task::Phase(n), build_phase_povm(n)?.povm),
        other => return Err(CliError::Usage(format!("unknown task `{other}`"))),
    };
    povm.write(&cfg.out.join(out.file("povm.json")))?;
    let rep = mean_fidelity(&povm, task, samples, seed)?;
    let mut r = format!("closed_sum, mc_estimate, mc_stderr, bound\n{}\n", rep.line());
    std::fs::write(cfg.out.join(out.file("fidelity.txt")), &r)?;
    if cfg.get("neumark").is_some_and(|v| v == "true" || v == "1") {
        let d = neumark_extend(&povm)?;
        let mut s = String::new();
        writeln!(s, "ancilla_dim {}\nunitarity_defect {:.3e}\nrecovery_defect {:.3e}", d.ancilla_dim, d.unitarity_defect, d.recovery_defect).ok();
        let spec: Vec<String> = d.gram_spectrum.iter().map(|v| format!("{v:.12}")).collect();
        writeln!(s, "gram_spectrum {}", spec.join(" ")).ok();
        write_matrix(&cfg.out.join(out.file("neumark_unitary.mat")), &d.unitary, None)?;
        std::fs::write(cfg.out.join(out.file("neumark.txt")), &s)?;
        r.push_str(&s);
    }
    out.summary = r;
    Ok(out)
}

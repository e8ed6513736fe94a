use approx::assert_abs_diff_eq;
use qrecon::cli::{run, Command, RunConfig};
use qrecon::wigner::{analytic_wigner, AnalyticLevel, AnalyticState};
use qrecon::hilbert::C64;
use std::path::{Path, PathBuf};
use std::process::Command as Proc;

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("qrecon-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn exec(command: Command, args: &[&str], out: &Path, seed: Option<u64>) -> i32 {
    let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    let cfg = RunConfig::new(command, &args, out.to_path_buf(), seed).unwrap();
    run(&cfg).0
}

fn report_value(dir: &Path, file: &str, key: &str) -> f64 {
    let text = std::fs::read_to_string(dir.join(file)).unwrap();
    text.lines().find_map(|l| l.strip_prefix(&format!("{key} "))).unwrap_or_else(|| panic!("no `{key}` in {text}")).trim().parse().unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn field_maxent_coherent_on_first_moments() {
    let out = scratch("coh");
    assert_eq!(exec(Command::FieldMaxent, &["state=coherent", "nbar=2", "level=O1", "nmax=40", "npts=21"], &out, None), 0);
    assert!(report_value(&out, "report.txt", "entropy").abs() < 1e-9);
    let m = manifest(&out);
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["config"]["level"], "O1");
    assert!(m["outputs"].as_array().unwrap().iter().any(|f| f == "sigma.mat"));
}

#[test]
fn field_maxent_rejects_super_thermal_statistics() {
    let out = scratch("sq");
    assert_eq!(exec(Command::FieldMaxent, &["state=squeezed", "eta=0.5", "level=On"], &out, None), 2);
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("SuperThermal"), "{report}");
    assert!(manifest(&out)["error"].as_str().unwrap().contains("SuperThermal"));
}

#[test]
fn field_maxent_fock_state_wigner_grid() {
    let out = scratch("fock");
    assert_eq!(exec(Command::FieldMaxent, &["state=fock", "n=2", "level=OA", "nmax=10", "half=3", "npts=13"], &out, None), 0);
    assert_abs_diff_eq!(report_value(&out, "report.txt", "entropy"), 0.0, epsilon = 1e-12);
    let csv = std::fs::read_to_string(out.join("wigner.csv")).unwrap();
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let xi = C64::new(v[0], v[1]) / 2f64.sqrt();
        let want = analytic_wigner(AnalyticState::Fock(2), AnalyticLevel::Complete, xi).unwrap();
        assert_abs_diff_eq!(v[2], want, epsilon = 1e-9);
        rows += 1;
    }
    assert_eq!(rows, 169);
}

#[test]
fn tomography_run_beats_pattern_functions() {
    let out = scratch("tomo");
    let args = ["state=incoherentpair", "alpha1=1.25", "alpha2=1.25i", "nmax=30", "ntheta=4", "nx=13"];
    assert_eq!(exec(Command::Tomo, &args, &out, None), 0);
    let text = std::fs::read_to_string(out.join("deltas.txt")).unwrap();
    let v: Vec<&str> = text.lines().nth(1).unwrap().split_whitespace().collect();
    let (dp, dm): (f64, f64) = (v[3].parse().unwrap(), v[4].parse().unwrap());
    assert!(dm <= 1e-2 * dp, "{dm} vs {dp}");
}

#[test]
fn noisy_tomography_is_reproducible_and_needs_a_seed() {
    let args = ["state=incoherentpair", "alpha1=1.25", "alpha2=1.25i", "nmax=30", "eta=0.5"];
    let unseeded = scratch("tomo-noseed");
    assert_eq!(exec(Command::Tomo, &args, &unseeded, None), 2);
    assert!(unseeded.join("manifest.json").exists());
    let (a, b) = (scratch("tomo-a"), scratch("tomo-b"));
    assert_eq!(exec(Command::Tomo, &args, &a, Some(17)), 0);
    assert_eq!(exec(Command::Tomo, &args, &b, Some(17)), 0);
    for f in ["tomogram.csv", "rho_pattern.mat", "rho_maxent.mat", "deltas.txt"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn spin_bell_state_on_two_correlations() {
    let out = scratch("spin");
    assert_eq!(exec(Command::Spin, &["system=bell", "phi=0", "level=OE2"], &out, None), 0);
    assert!(report_value(&out, "report.txt", "entropy") < 1e-7);
}

#[test]
fn bayes_single_up_record() {
    let out = scratch("bayes");
    std::fs::create_dir_all(&out).unwrap();
    let rec = out.join("up.txt");
    std::fs::write(&rec, "z +1\n").unwrap();
    let r = format!("records={}", rec.display());
    assert_eq!(exec(Command::Bayes, &["system=spin1", &r], &out, None), 0);
    assert_abs_diff_eq!(report_value(&out, "report.txt", "mean Z"), 1.0 / 3.0, epsilon = 1e-6);
}

#[test]
fn povm_report_attains_the_bound() {
    let out = scratch("povm");
    assert_eq!(exec(Command::Povm, &["task=spin", "n=4", "samples=20000", "neumark=true"], &out, Some(1)), 0);
    let text = std::fs::read_to_string(out.join("fidelity.txt")).unwrap();
    let v: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|s| s.trim().parse().unwrap()).collect();
    assert_abs_diff_eq!(v[0], 5.0 / 6.0, epsilon = 1e-9);
    assert_abs_diff_eq!(v[3], v[0], epsilon = 1e-9);
    assert!(report_value(&out, "neumark.txt", "recovery_defect") < 1e-9);
}

#[test]
fn domain_and_io_errors_map_to_exit_codes() {
    let out = scratch("errs");
    assert_eq!(exec(Command::Spin, &["system=bell", "level=ZZ,Q"], &out, None), 2);
    assert_eq!(exec(Command::Bayes, &["records=/nonexistent/records.txt"], &out, None), 3);
    assert_eq!(manifest(&out)["exit_code"], 3);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_qrecon");
    let out = scratch("bin");
    let ok = Proc::new(bin).args(["povm", "--out"]).arg(&out).args(["--seed", "3", "task=phase", "n=3", "samples=2000"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("closed_sum, mc_estimate, mc_stderr, bound"));
    let bad = Proc::new(bin).args(["field-maxent", "--out"]).arg(&out).args(["state=squeezed", "eta=0.5", "level=On"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let usage = Proc::new(bin).args(["povm", "--out"]).arg(&out).arg("n=2").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}

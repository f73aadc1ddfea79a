use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frac-orlicz"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("FRAC_ORLICZ_SEED")
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn csv_column(path: &Path, col: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == col).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn zero_rhs_gives_zero_solution() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["solve", "--set", "rhs.kind=zero"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(csv_column(&tmp.path().join("solution.csv"), "u").iter().all(|&u| u == 0.0));
    let m = manifest(tmp.path());
    assert_eq!(m["status"], "ok");
    assert_eq!(m["summary"]["residual"], 0.0);
}

#[test]
fn reduce_p_matches_the_wsp_seminorm() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["reduce-p", "--set", "reduce_p.p_values=[2]", "--set", "reduce_p.s_values=[0.4]"]);
    assert_eq!(out.status.code(), Some(0));
    let rel = csv_column(&tmp.path().join("reduce_p.csv"), "rel_discrepancy");
    assert_eq!(rel.len(), 1);
    assert!(rel[0] <= 1e-2, "{rel:?}");
    assert_eq!(manifest(tmp.path())["summary"]["within_tolerance"], true);
}

#[test]
fn empty_sweep_writes_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["reduce-p", "--set", "reduce_p.p_values=[]"]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(tmp.path().join("reduce_p.csv")).unwrap();
    assert_eq!(text, "p,s,orlicz_seminorm,wsp_seminorm,rel_discrepancy\n");
}

#[test]
fn nfun_fits_the_sobolev_exponent() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["nfun", "--set", "nfun.dim=2", "--set", "s=0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let slope = manifest(tmp.path())["summary"]["sobolev_conjugate"]["fitted_exponent"].as_f64().unwrap();
    assert!((slope - 4.0).abs() < 1e-3, "{slope}");
    let xs = csv_column(&tmp.path().join("sobolev_conjugate.csv"), "x");
    let ms = csv_column(&tmp.path().join("sobolev_conjugate.csv"), "M_star");
    let fit = (ms[ms.len() - 1] / ms[0]).ln() / (xs[xs.len() - 1] / xs[0]).ln();
    assert!((fit - 4.0).abs() < 1e-3, "{fit}");
}

#[test]
fn reruns_and_thread_counts_give_identical_artifacts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let args = ["apply", "--set", "function.kind=random", "--set", "coverage=with_exterior"];
    for (dir, threads) in [(&a, "1"), (&b, "1"), (&c, "3")] {
        let mut full = args.to_vec();
        full.extend(["--threads", threads]);
        assert_eq!(run(dir.path(), &full).status.code(), Some(0));
    }
    let field = |d: &tempfile::TempDir| fs::read(d.path().join("field.csv")).unwrap();
    assert_eq!(field(&a), field(&b));
    assert_eq!(field(&a), field(&c));
    assert_eq!(manifest(a.path())["config_sha256"], manifest(c.path())["config_sha256"]);
}

#[test]
fn seed_comes_from_the_environment() {
    let a = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_frac-orlicz"))
        .args(["norm", "--set", "function.kind=random", "--out"])
        .arg(a.path())
        .env("FRAC_ORLICZ_SEED", "17")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(manifest(a.path())["seed"], 17);
    let b = tempfile::tempdir().unwrap();
    run(b.path(), &["norm", "--set", "function.kind=random", "--set", "seed=17"]);
    assert_eq!(fs::read(a.path().join("function.csv")).unwrap(), fs::read(b.path().join("function.csv")).unwrap());
}

#[test]
fn manifest_config_echo_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    run(tmp.path(), &["norm", "--set", "nfunction.family=power_log", "--set", "domain.nodes=[40]"]);
    let first = manifest(tmp.path());
    let cfg_path = tmp.path().join("echo.json");
    fs::write(&cfg_path, serde_json::to_string(&first["config"]).unwrap()).unwrap();
    let again = tempfile::tempdir().unwrap();
    let out = run(again.path(), &["norm", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let second = manifest(again.path());
    assert_eq!(first["config"], second["config"]);
    assert_eq!(first["config_sha256"], second["config_sha256"]);
    assert_eq!(first["summary"], second["summary"]);
}

#[test]
fn unknown_keys_exit_with_validation_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["norm", "--set", "solver.tolerance=1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("solver.tolerance"), "{err}");
}

#[test]
fn invalid_values_exit_with_validation_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["norm", "--set", "s=1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(manifest(tmp.path())["status"], "validation");
}

#[test]
fn non_convergence_exits_with_code_four() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["solve", "--set", "solver.max_iter=2"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(manifest(tmp.path())["status"], "non_convergence");
}

#[test]
fn divergence_embeds_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["verify", "--set", "verify.suites=[\"ws1\"]", "--set", "s=0.45"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(tmp.path());
    assert_eq!(m["status"], "divergence");
    assert!(m["divergence"]["estimates"].as_array().is_some_and(|e| e.len() >= 2));
}

#[test]
fn verify_writes_one_table_per_suite() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["verify", "--set", "verify.family_size=4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(tmp.path());
    let files: Vec<&str> = m["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    assert_eq!(
        files,
        [
            "poincare.csv",
            "embedding.csv",
            "norm_equivalence.csv",
            "ws1.csv",
            "lipschitz.csv",
            "mollifier.csv",
            "compactness.csv"
        ]
    );
    assert_eq!(m["summary"]["ws1"]["holds"], true);
    assert_eq!(m["summary"]["lipschitz"]["violations"], 0);
    assert!(m["summary"]["poincare"]["max_ratio"].as_f64().is_some());
}

#[test]
fn shipped_configs_run() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_stem().unwrap().to_str().unwrap().to_string();
        let sub = ["nfun", "norm", "solve", "verify", "reduce_p"]
            .into_iter()
            .find(|s| name.starts_with(s))
            .unwrap_or_else(|| panic!("no subcommand prefix in {name}"))
            .replace('_', "-");
        let tmp = tempfile::tempdir().unwrap();
        let out = run(tmp.path(), &[&sub, "--config", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        seen += 1;
    }
    assert!(seen >= 5);
}

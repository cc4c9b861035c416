use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use biotstab::benchmarks::read_sweep_csv;

fn biotstab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biotstab"))
        .args(args)
        .current_dir(cwd)
        .env("BIOTSTAB_LOG", "error")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn stabilized_column_converges_in_two_iterations() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", "benchmark = \"terzaghi\"\nscheme = \"p1p1\"\nK = 1e-10\n");
    let out = biotstab(&["run", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp.path().join("o"));
    assert_eq!(r["status"], "converged");
    assert_eq!(r["iterations"][0]["iterations"], 2);
    let profile = fs::read_to_string(tmp.path().join("o/profile.csv")).unwrap();
    assert!(profile.starts_with("# biotstab profile v1\nx,p_numeric,p_analytic\n"));
    assert_eq!(profile.lines().count(), 2 + 33);
}

#[test]
fn small_gamma_diverges_with_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "run.toml",
        "benchmark = \"terzaghi\"\nscheme = \"p1p1\"\nK = 1e-10\ngamma = 0.3\n",
    );
    let out = biotstab(&["run", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let r = report(&tmp.path().join("o"));
    assert_eq!(r["status"], "diverged");
    assert_eq!(r["iterations"][0]["diverged"], true);
    assert_eq!(r["config"]["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn unwritable_output_and_bad_configs_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", "benchmark = \"terzaghi\"\nscheme = \"mini\"\n");
    // A regular file where the output directory should go.
    let out = biotstab(&["run", "--config", &cfg, "--out", "run.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(1));

    let bad = write(tmp.path(), "bad.toml", "benchmark = \"terzaghi\"\nscheme = \"mini\"\ndim = 3\n");
    let out = biotstab(&["run", "--config", &bad], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`dim`"));

    let out = biotstab(&["run", "--config", "missing.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let out = biotstab(&["run"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

const SWEEP: &str = r#"
benchmark = "barry-mercer"
scheme = "p1p1"

[[sweep]]
name = "by-k"
n = [4, 8]
K = [1e-2, 1e-6, 1e-10]

[[sweep]]
name = "by-gamma"
n = [4]
gamma = [0.3, 0.6667, 1.0]
"#;

#[test]
fn sweeps_are_deterministic_and_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "sweep.toml", SWEEP);
    for dir in ["a", "b"] {
        let out = biotstab(&["sweep", "--config", &cfg, "--out", dir, "--jobs", "1"], tmp.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["by-k.csv", "by-gamma.csv"] {
        let a = fs::read(tmp.path().join("a").join(name)).unwrap();
        let b = fs::read(tmp.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("# biotstab sweep v1\n"));
        let cells = read_sweep_csv(text.as_bytes()).unwrap();
        assert_eq!(cells.len(), text.lines().count() - 2);
    }
    let cells = read_sweep_csv(fs::File::open(tmp.path().join("a/by-k.csv")).unwrap()).unwrap();
    assert_eq!(cells.len(), 6);
    // Outer axis (conductivity) major.
    assert_eq!((cells[0].k, cells[1].k, cells[2].k), (1e-2, 1e-2, 1e-6));
    let gamma = read_sweep_csv(fs::File::open(tmp.path().join("a/by-gamma.csv")).unwrap()).unwrap();
    assert_eq!(gamma[0].status, "diverged");
    assert!(gamma[2].converged);
}

#[test]
fn sweep_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = write(
        tmp.path(),
        "empty.toml",
        "benchmark = \"barry-mercer\"\nscheme = \"p1p1\"\n[[sweep]]\nname = \"x\"\nn = []\n",
    );
    assert_eq!(biotstab(&["sweep", "--config", &empty], tmp.path()).status.code(), Some(1));
    let none = write(tmp.path(), "none.toml", "benchmark = \"barry-mercer\"\nscheme = \"p1p1\"\n");
    assert_eq!(biotstab(&["sweep", "--config", &none], tmp.path()).status.code(), Some(1));
}

#[test]
fn sweep_exits_two_when_every_cell_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "s.toml",
        "benchmark = \"terzaghi\"\nscheme = \"p1p1\"\nK = 1e-10\n[[sweep]]\nname = \"low\"\ngamma = [0.2, 0.3]\n",
    );
    let out = biotstab(&["sweep", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(tmp.path().join("o/low.csv").exists());
}

#[test]
fn verify_suites() {
    let tmp = tempfile::tempdir().unwrap();
    let out = biotstab(&["verify", "schur", "--out", "v"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["suite"], "schur");
    assert!(tmp.path().join("v/verify-schur.json").exists());

    let out = biotstab(&["verify", "spectral"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(biotstab(&["verify", "fastest"], tmp.path()).status.code(), Some(1));
}

#[test]
fn help_and_version_exit_zero() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(biotstab(&["--help"], tmp.path()).status.code(), Some(0));
    assert_eq!(biotstab(&["--version"], tmp.path()).status.code(), Some(0));
}

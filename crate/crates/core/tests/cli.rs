use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cqed::dynamics::SeriesTable;
use cqed::expcli::{execute, parse_config, sha256_hex, write_outputs};

const BIN: &str = env!("CARGO_BIN_EXE_cqed");

fn cqed(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("CQED_OUTPUT_ROOT").output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL_FIG3: &str = "scenario = \"fig3_two_atom\"\n[time]\nt_end_ns = 0.02\ndt_ns = 1e-4\n";

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.toml", SMALL_FIG3);
    let bad = write(dir.path(), "bad.toml", "scenario = \"custom\"\n[params]\nkappa_mhz = -3\n");
    // A step far too long for the coupling makes the integrator violate positivity.
    let unstable = write(
        dir.path(),
        "unstable.toml",
        "scenario = \"custom\"\n[params]\ng_ghz = 50\n[time]\nt_end_ns = 0.1\ndt_ns = 0.05\nmax_step_ns = 0.05\n",
    );
    let out = dir.path().join("out");
    let o = cqed(&["run", &good, "--output-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let o = cqed(&["run", &bad]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("params.kappa_mhz") && err.contains("line 3"), "{err}");

    let o = cqed(&["run", &unstable, "--output-dir", dir.path().join("u").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));

    assert_eq!(cqed(&["validate", &good]).status.code(), Some(0));
    assert_eq!(cqed(&["validate", &bad]).status.code(), Some(1));
    assert_eq!(cqed(&["validate", "/nonexistent/config.toml"]).status.code(), Some(1));
}

#[test]
fn validate_prints_a_canonical_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "c.toml", SMALL_FIG3);
    let o = cqed(&["validate", &path]);
    let canonical = String::from_utf8(o.stdout).unwrap();
    let a = parse_config(SMALL_FIG3).unwrap();
    let b = parse_config(&canonical).unwrap();
    assert_eq!(a, b);
    assert!(canonical.contains("[[sweep]]"));
}

#[test]
fn scenarios_and_presets_are_listed() {
    let o = cqed(&["scenarios"]);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["fig2_single_atom", "fig5_position_map", "n_atom_wstate", "custom"] {
        assert!(text.contains(name));
        let p = cqed(&["preset", name]);
        assert_eq!(p.status.code(), Some(0));
        assert!(parse_config(&String::from_utf8(p.stdout).unwrap()).is_ok());
    }
}

#[test]
fn output_root_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "c.toml", SMALL_FIG3);
    let root = dir.path().join("root");
    let o = Command::new(BIN)
        .args(["run", &path, "--seed", "5"])
        .env("CQED_OUTPUT_ROOT", &root)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let manifest = fs::read_to_string(root.join("fig3_two_atom/manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 5"));
}

#[test]
fn manifest_hashes_match_files_and_runs_repeat_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "c.toml", SMALL_FIG3);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(cqed(&["run", &path, "--workers", "1", "--output-dir", a.to_str().unwrap()]).status.success());
    assert!(cqed(&["run", &path, "--workers", "3", "--output-dir", b.to_str().unwrap()]).status.success());

    let manifest: toml::Table = fs::read_to_string(a.join("manifest.toml")).unwrap().parse().unwrap();
    let files = manifest["files"].as_array().unwrap();
    assert_eq!(files.len(), 2 + 4);
    for f in files {
        let rel = f["path"].as_str().unwrap();
        let bytes = fs::read(a.join(rel)).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), sha256_hex(&bytes), "{rel}");
        assert_eq!(bytes, fs::read(b.join(rel)).unwrap(), "{rel} differs between worker counts");
    }
    assert_eq!(fs::read(a.join("manifest.toml")).unwrap(), fs::read(b.join("manifest.toml")).unwrap());
}

#[test]
fn summary_values_are_recomputable_from_trajectories() {
    let cfg = parse_config(SMALL_FIG3).unwrap();
    let out = execute(&cfg, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(&cfg, &out, dir.path()).unwrap();
    for (k, _) in cfg.points.iter().enumerate() {
        let run = format!("run_{k:04}");
        let table = SeriesTable::read_csv(fs::File::open(dir.path().join(format!("trajectories/{run}.csv"))).unwrap()).unwrap();
        let peak = |name: &str| table.series(name).unwrap().iter().copied().fold(f64::MIN, f64::max);
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1e-300);
        assert!(rel(peak("C_BC"), out.value(&run, "peak_concurrence").unwrap()));
        assert!(rel(peak("P_psi_plus").sqrt(), out.value(&run, "fidelity").unwrap()));
    }
}

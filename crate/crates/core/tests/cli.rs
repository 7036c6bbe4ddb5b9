use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use vofrac::app::io;

const BIN: &str = env!("CARGO_BIN_EXE_vofrac");

const TWIN: &str = "\
# linear order, weak diffusion
model.K = 0.1
model.L = 1
model.T = 1
model.k = 1
model.alpha = 0.3, 0.2
model.u0 = parabola
mesh.M = 128
mesh.r = 2
basis.N = 8
observe.noise_level = 0.001
inverse.modes = 8
inverse.degree = 1
run.seed = 3
";

fn vofrac(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN).args(args).current_dir(dir).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn heat_limit_forward_run() {
    let dir = tempfile::tempdir().unwrap();
    let k = 0.05;
    write(
        dir.path(),
        "heat.cfg",
        &format!("model.K = {k}\nmodel.L = 1\nmodel.T = 1\nmodel.k = 0\nmodel.alpha = 0.5\nmodel.u0 = mode:1\nmesh.M = 2048\nmesh.r = 1\nbasis.N = 4\n"),
    );
    let out = vofrac(&["forward", "--config", "heat.cfg", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let lambda = k * PI * PI;
    let rows = io::read_solution(&dir.path().join("o/solution.csv")).unwrap();
    assert_eq!(rows.len(), 2049 * 21);
    for r in rows {
        let exact = 2f64.sqrt() * (PI * r.x).sin() * (-lambda * r.t).exp();
        assert!((r.u - exact).abs() < 1e-4, "{r:?}");
    }
    let modes = io::read_modes(&dir.path().join("o/modes.csv")).unwrap();
    assert_eq!(modes.len(), 2049 * 4);
    let stab = io::read_stability(&dir.path().join("o/stability.csv")).unwrap();
    assert!(stab.ratio <= 1.0 + 1e-8);
}

#[test]
fn missing_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.cfg", &TWIN.replace("mesh.M = 128\n", ""));
    let out = vofrac(&["forward", "--config", "bad.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("mesh.M"), "{}", stderr(&out));
}

#[test]
fn malformed_value_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.cfg", &TWIN.replace("basis.N = 8", "basis.N = eight"));
    let out = vofrac(&["forward", "--config", "bad.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 10"), "{}", stderr(&out));
}

#[test]
fn alpha_star_of_one_cites_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.cfg", &format!("{TWIN}model.alpha_star = 1\n"));
    let out = vofrac(&["forward", "--config", "bad.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("0 ≤ α(t) ≤ α_* < 1"), "{}", stderr(&out));
}

#[test]
fn missing_config_and_unknown_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(vofrac(&["forward"], dir.path()).status.code(), Some(2));
    assert_eq!(vofrac(&["forward", "--config", "none.cfg"], dir.path()).status.code(), Some(2));
    assert_eq!(vofrac(&["frobnicate"], dir.path()).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // L = π gives λ_1 = 1, so k = −2 cancels 1/τ + λ_1 on a single unit step
    write(
        dir.path(),
        "sing.cfg",
        &format!("model.K = 1\nmodel.L = {PI:?}\nmodel.T = 1\nmodel.k = -2\nmodel.alpha = 0\nmodel.u0 = mode:1\nmesh.M = 1\nbasis.N = 1\n"),
    );
    let out = vofrac(&["forward", "--config", "sing.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn full_pipeline_is_byte_deterministic() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "twin.cfg", TWIN);
        for cmd in ["forward", "synth", "invert", "diagnose", "scan"] {
            let out = vofrac(&[cmd, "--config", "twin.cfg", "--out", "o"], dir.path());
            assert_eq!(out.status.code(), Some(0), "{cmd}: {}", stderr(&out));
        }
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir.path().join("o"))
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        (dir, files)
    };
    let (dir, first) = run();
    let (_, second) = run();
    assert_eq!(first.len(), 8);
    assert_eq!(first, second);

    let coeffs = io::read_inversion(&dir.path().join("o/inversion.csv")).unwrap();
    assert!((coeffs[0] - 0.3).abs() < 0.05 && (coeffs[1] - 0.2).abs() < 0.05, "{coeffs:?}");
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "twin.cfg", TWIN);
    for (seed, out) in [("3", "a"), ("4", "b")] {
        let o = vofrac(&["synth", "--config", "twin.cfg", "--out", out, "--seed", seed], dir.path());
        assert_eq!(o.status.code(), Some(0));
    }
    let plain = vofrac(&["synth", "--config", "twin.cfg", "--out", "c"], dir.path());
    assert_eq!(plain.status.code(), Some(0));
    let read = |d: &str| std::fs::read(dir.path().join(d).join("observations.csv")).unwrap();
    assert_ne!(read("a"), read("b"));
    assert_eq!(read("a"), read("c"));
    assert_eq!(io::read_observations(&dir.path().join("b/observations.csv")).unwrap().seed, 4);
}

#[test]
fn invert_reads_an_explicit_observation_file() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "twin.cfg", TWIN);
    assert_eq!(vofrac(&["synth", "--config", "twin.cfg", "--out", "data"], dir.path()).status.code(), Some(0));
    let out = vofrac(
        &["invert", "--config", "twin.cfg", "--out", "fit", "--observations", "data/observations.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let history = io::read_residual_history(&dir.path().join("fit/residual_history.csv")).unwrap();
    assert!(history.windows(2).all(|w| w[1] <= w[0]));
    let missing = vofrac(&["invert", "--config", "twin.cfg", "--out", "nowhere"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
}

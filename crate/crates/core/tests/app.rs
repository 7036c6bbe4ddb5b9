use std::path::Path;

use vofrac::app::{self, io, RunConfig};
use vofrac::diagnostics::{RegularityReport, Verdict};
use vofrac::forward::solve_forward;
use vofrac::inverse::{synthesize_observations, InversionResult, ScanResult};
use vofrac::{InitialDatum, ModelSpec, OrderFunction, Polynomial, TimeMesh};

const CONFIG: &str = "\
model.K = 0.1
model.L = 1
model.T = 1
model.alpha = 0.5
mesh.M = 64
mesh.r = 2
basis.N = 6
observe.noise_level = 0.01
inverse.degree = 0
inverse.modes = 6
scan.lo = 0.3
scan.hi = 0.7
scan.step = 0.1
run.seed = 21
";

fn reread_identical(path: &Path, rewrite: impl Fn(&Path)) {
    let original = std::fs::read(path).unwrap();
    let copy = path.with_extension("copy.csv");
    rewrite(&copy);
    assert_eq!(std::fs::read(&copy).unwrap(), original, "{}", path.display());
}

#[test]
fn every_output_round_trips_through_its_reader() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let cfg = RunConfig::parse(CONFIG).unwrap();
    app::run_forward(&cfg, out).unwrap();
    app::run_synth(&cfg, out).unwrap();
    app::run_invert(&cfg, &out.join(app::OBSERVATIONS_FILE), out).unwrap();
    app::run_diagnose(&cfg, out).unwrap();
    app::run_scan(&cfg, out).unwrap();

    let p = out.join(app::SOLUTION_FILE);
    let rows = io::read_solution(&p).unwrap();
    reread_identical(&p, |c| io::write_solution(c, &rows).unwrap());

    let p = out.join(app::MODES_FILE);
    let rows = io::read_modes(&p).unwrap();
    reread_identical(&p, |c| io::write_modes(c, &rows).unwrap());

    let p = out.join(app::STABILITY_FILE);
    let row = io::read_stability(&p).unwrap();
    reread_identical(&p, |c| io::write_stability(c, &row).unwrap());

    let p = out.join(app::OBSERVATIONS_FILE);
    let obs = io::read_observations(&p).unwrap();
    let direct = synthesize_observations(&cfg.model().unwrap(), &cfg.design().unwrap()).unwrap();
    assert_eq!(obs, direct);
    reread_identical(&p, |c| io::write_observations(c, &obs).unwrap());

    let p = out.join(app::HISTORY_FILE);
    let history = io::read_residual_history(&p).unwrap();
    reread_identical(&p, |c| io::write_residual_history(c, &history).unwrap());

    let p = out.join(app::INVERSION_FILE);
    let coeffs = io::read_inversion(&p).unwrap();
    assert_eq!(coeffs.len(), 1);

    let p = out.join(app::REGULARITY_FILE);
    let reports = io::read_regularity(&p).unwrap();
    assert_eq!(reports.len(), 1);
    reread_identical(&p, |c| io::write_regularity(c, &reports).unwrap());

    let p = out.join(app::SCAN_FILE);
    let entries = io::read_scan(&p).unwrap();
    assert_eq!(entries.len(), 5);
    let scan = ScanResult { entries, argmin: 0, unique: true };
    reread_identical(&p, |c| io::write_scan(c, &scan).unwrap());
}

#[test]
fn inversion_file_keeps_metadata_comments() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inv.csv");
    let result = InversionResult {
        coeffs: vec![0.1 + 0.2, -1e-300, 5e-324],
        residual_history: vec![1.0],
        converged: false,
        final_misfit: 1.0 / 3.0,
        iterations: 30,
        inverse_crime: true,
        extraction_condition: None,
    };
    io::write_inversion(&path, &result).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# converged = false\n"));
    assert!(text.contains("coeff_index,value\n"));
    assert_eq!(io::read_inversion(&path).unwrap(), result.coeffs);
}

#[test]
fn regularity_rows_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("reg.csv");
    let reports = vec![
        RegularityReport {
            alpha0: 0.2,
            fitted_slope: -0.19583,
            expected_slope: -0.2,
            weighted_norm: 1.0011,
            fit_window: (1e-3, 0.1),
            verdict: Verdict::Singular,
        },
        RegularityReport {
            alpha0: 0.0,
            fitted_slope: 0.05,
            expected_slope: -0.0,
            weighted_norm: 7.0,
            fit_window: (1e-3, 0.1),
            verdict: Verdict::Smooth,
        },
    ];
    io::write_regularity(&path, &reports).unwrap();
    assert_eq!(io::read_regularity(&path).unwrap(), reports);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("alpha0,fitted_slope,expected_slope,weighted_norm,verdict\n"));
}

#[test]
fn solution_rows_reconstruct_the_field() {
    let spec = ModelSpec {
        diffusivity: 1.0,
        length: 2.0,
        horizon: 0.5,
        reaction: Polynomial::constant(1.0),
        alpha: OrderFunction::constant(0.4, 0.9, 0.5).unwrap(),
        initial: InitialDatum::Parabola,
    };
    let field = solve_forward(&spec, &TimeMesh::uniform(0.5, 8).unwrap(), 12).unwrap();
    let rows = io::solution_rows(&field, 5);
    assert_eq!(rows.len(), 9 * 5);
    assert_eq!(rows[0].u, 0.0);
    assert_eq!(rows[4].x, 2.0);
    let mid = rows.iter().find(|r| r.t == 0.0 && r.x == 1.0).unwrap();
    assert!((mid.u - 1.0).abs() < 1e-3);
}

#[test]
fn rejects_foreign_headers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    std::fs::write(&path, "a,b,c\n1,2,3\n").unwrap();
    assert!(io::read_solution(&path).is_err());
    assert!(io::read_modes(&path).is_err());
    assert!(io::read_scan(&path).is_err());
    assert!(io::read_observations(&path).is_err());
}

#[test]
fn sampled_initial_datum_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let samples: Vec<String> = (0..=64)
        .map(|j| {
            let x = j as f64 / 64.0;
            if j == 64 {
                "0".into()
            } else {
                format!("{}", x * (1.0 - x))
            }
        })
        .collect();
    std::fs::write(dir.path().join("u0.txt"), samples.join("\n")).unwrap();
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(&cfg_path, CONFIG.replace("basis.N = 6", "basis.N = 6\nmodel.u0 = file:u0.txt")).unwrap();
    let cfg = RunConfig::load(&cfg_path).unwrap();
    let spec = cfg.model().unwrap();
    let from_file = spec.initial.coefficients(&spec.basis(6).unwrap()).unwrap();
    let exact = InitialDatum::Parabola.coefficients(&spec.basis(6).unwrap()).unwrap();
    for (a, b) in from_file.values().iter().zip(exact.values()) {
        assert!((a - b).abs() < 1e-6);
    }
}

use std::fs;
use std::path::Path;

use fracp_core::lab::*;
use fracp_core::nonlocal::{AnalyticClosure, Ball, Exterior, GridFunction, Mesh};
use fracp_core::solver::{assemble, solve, CoefficientField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn config(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).unwrap()
}

fn body(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# fracp "), "{text}");
    text.split_once('\n').unwrap().1.to_string()
}

#[test]
fn config_round_trips_through_json() {
    let c = config(r#"{"schema_version":1,"scenario":"compare","params":{"p":2,"s":0.75,"a_tilde":1},"radii":[0.1,0.2,0.4]}"#);
    assert_eq!(c.scenario, Scenario::Compare);
    assert_eq!(c.mesh, MeshConfig::default());
    let again = ExperimentConfig::from_json(&c.to_json()).unwrap();
    assert_eq!(again, c);
    assert_eq!(ExperimentConfig::new(Scenario::Check).samples, 100_000);
    assert_eq!(Scenario::parse("tails"), Some(Scenario::Tails));
    assert_eq!(Scenario::parse("plot"), None);
}

#[test]
fn malformed_configs_are_validation_errors() {
    let cases = [
        (r#"{"schema_version":1,"scenario":"oracle","params":{"n":1,"p":1.5,"s":0.5,"r":9}}"#, "OutOfRange"),
        (r#"{"schema_version":1,"scenario":"oracle","params":{"n":1,"p":1.5,"s":0.5,"r":4}}"#, "Pole"),
        (r#"{"schema_version":1,"scenario":"blowup","params":{"n":1,"p":1.5,"s":0.5}}"#, "MissingParameter"),
        (r#"{"schema_version":2,"scenario":"derive"}"#, "SchemaVersion"),
        (r#"{"schema_version":1,"scenario":"derive","colour":"red"}"#, "Malformed"),
        (r#"{"schema_version":1,"scenario":"fly"}"#, "Malformed"),
        (r#"{"schema_version":1,"scenario":"derive","params":{"p":1.5,"s":0.2}}"#, "InvalidRegime"),
        (r#"{"schema_version":1,"scenario":"solve","coefficient":"wobbly(2)"}"#, "Coefficient"),
        (r#"{"schema_version":1,"scenario":"solve","exterior":"cosine(1)"}"#, "Closure"),
        (r#"{"schema_version":1,"scenario":"derive","tolerances":{"solver":0}}"#, "Tolerance"),
        (r#"{"schema_version":1,"scenario":"compare","slope_band":2}"#, "OutOfRange"),
    ];
    for (json, kind) in cases {
        let err = ExperimentConfig::from_json(json).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{json}");
        assert_eq!(err.kind(), kind, "{json}: {err}");
        assert_eq!(err.to_json()["exit_code"], 2);
    }
}

#[test]
fn lambda_of_identity_is_root_seventeen() {
    let mesh = Mesh::new(-1.0, 1.0, 201).unwrap();
    let u = GridFunction::from_closure(mesh.clone(), AnalyticClosure::affine(1.0, 0.0));
    let f = GridFunction::from_closure(mesh, AnalyticClosure::constant(0.0));
    let d = lambda_o(&u, &f, &Ball::new(0.0, 1.0).unwrap(), &LevelInputs::new(2.0, 0.75, 1.0, 1.0, 1.0)).unwrap();
    assert!(rel(d.lambda_o, 17f64.sqrt()) < 1e-6, "{d:?}");
    assert!(rel(d.gradient_term, 1.0) < 1e-12);
    assert_eq!(d.inhomogeneity_term, 0.0);
    assert!(rel(d.tail_term, 16.0) < 1e-6);
}

#[test]
fn lambda_of_constant_data() {
    let mesh = Mesh::new(-2.0, 2.0, 101).unwrap();
    let u = GridFunction::from_closure(mesh.clone(), AnalyticClosure::constant(3.0));
    let zero = GridFunction::from_closure(mesh.clone(), AnalyticClosure::constant(0.0));
    let ball = Ball::new(0.5, 0.75).unwrap();
    let d = lambda_o(&u, &zero, &ball, &LevelInputs::new(1.5, 0.8, 1.0, 1.2, 0.75)).unwrap();
    assert!(d.lambda_o.abs() < 1e-12, "{d:?}");

    let (p, s, m, a, c) = (1.5, 0.8, 2.0, 1.3, 0.7);
    let f = GridFunction::from_closure(mesh, AnalyticClosure::constant(c));
    let d = lambda_o(&u, &f, &ball, &LevelInputs::new(p, s, m, a, 0.75)).unwrap();
    let sp_conj = s * p / (p - 1.0);
    let expected = m.powf(p) * ball.measure().powf(p * (sp_conj - 1.0)) * c.powf(p / (p - 1.0));
    assert!(rel(d.lambda_o.powf(p), expected) < 1e-10, "{} vs {expected}", d.lambda_o.powf(p));
}

#[test]
fn lambda_requires_ball_on_mesh() {
    let mesh = Mesh::new(-1.0, 1.0, 21).unwrap();
    let u = GridFunction::from_closure(mesh.clone(), AnalyticClosure::constant(1.0));
    assert!(lambda_o(&u, &u, &Ball::new(0.5, 1.0).unwrap(), &LevelInputs::new(2.0, 0.75, 1.0, 1.0, 1.0)).is_err());
}

#[test]
fn covering_factor_values() {
    assert_eq!(b_factor(1, 2.0, 1.0, 0.5, 1.0).unwrap(), 256f64.powi(2));
    assert!(rel(b_factor(2, 3.0, 2.0, 1.0, 1.5).unwrap(), 512f64.powi(2)) < 1e-14);
    assert!(b_factor(1, 2.0, 1.0, 0.4, 1.0).is_err());
    assert!(b_factor(1, 2.0, 1.0, 0.8, 0.7).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lambda_dominates_its_summands(
        p in 1.3f64..3.5,
        t in 0.05f64..0.95,
        amp in -2.0f64..2.0,
        c in 0.0f64..3.0,
        m in 1.0f64..4.0,
        radius in 0.2f64..1.0,
        gap in 0.01f64..0.99,
    ) {
        let s = (p - 1.0) / p + t * (1.0 / p);
        let mesh = Mesh::new(-1.0, 1.0, 101).unwrap();
        let u = GridFunction::from_fn(mesh.clone(), |x| amp * (2.0 * x).sin(), Exterior::zero()).unwrap();
        let f = GridFunction::from_fn(mesh, |x| c * (1.0 + x * x), Exterior::zero()).unwrap();
        let r1 = 0.5 * radius * (1.0 + gap);
        let inputs = LevelInputs { p, s, m, a_tilde: 1.1, r1, r2: radius };
        let d = lambda_o(&u, &f, &Ball::new(0.0, radius).unwrap(), &inputs).unwrap();
        for term in [d.gradient_term, d.inhomogeneity_term, d.tail_term] {
            prop_assert!(term >= 0.0);
            prop_assert!(d.lambda_o >= term.powf(1.0 / p) * (1.0 - 1e-12));
        }
        prop_assert!(d.b_factor >= 1.0);
    }
}

#[test]
fn fit_recovers_powers() {
    let xs = [0.1, 0.2, 0.4, 0.8];
    let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
    let (m, r2) = fit_slope(&xs, &ys).unwrap();
    assert!((m - 2.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let xs: Vec<f64> = (1..=12).map(|k| 0.05 * k as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x.powf(1.5) * (1.0 + 0.01 * rng.gen_range(-1.0..1.0))).collect();
    let (m, _) = fit_slope(&xs, &ys).unwrap();
    assert!((m - 1.5).abs() < 0.05);
}

#[test]
fn fit_errors() {
    assert!(matches!(fit_slope(&[0.3, 0.3, 0.3], &[1.0, 2.0, 3.0]), Err(FitError::DegenerateFit)));
    assert!(matches!(fit_slope(&[0.3], &[1.0]), Err(FitError::DegenerateFit)));
    assert!(matches!(fit_slope(&[0.1, 0.2], &[1.0, 2.0]), Err(FitError::TooFewPoints { .. })));
    assert!(matches!(fit_slope(&[0.1, 0.2, 0.3], &[1.0, -2.0, 3.0]), Err(FitError::NonPositive { .. })));
}

#[test]
fn second_differences_of_polynomials() {
    let mesh = Mesh::new(-2.0, 2.0, 257).unwrap();
    let ball = Ball::new(0.0, 1.0).unwrap();
    let steps = [1.0 / 64.0, 1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0];
    let affine = GridFunction::from_closure(mesh.clone(), AnalyticClosure::affine(2.0, 1.0));
    let fit = second_difference_scaling(&affine, &ball, &steps, 2.0).unwrap();
    assert!(fit.integrals.iter().all(|&v| v == 0.0));
    assert!(fit.slope.is_none());
    let square = GridFunction::from_fn(mesh, |x| x * x, Exterior::AnalyticClosure(AnalyticClosure::power(1.0, 2.0))).unwrap();
    for p in [1.5, 2.0, 3.0] {
        let fit = second_difference_scaling(&square, &ball, &steps, p).unwrap();
        assert!((fit.slope.unwrap() - 2.0 * p).abs() < 1e-9);
        // τ²_h x² = 2h² on the whole ball.
        assert!(rel(fit.integrals[0], 2.0 * (2.0 * steps[0] * steps[0]).powf(p)) < 1e-9);
    }
    assert!(second_difference_scaling(&square, &ball, &[0.2], 2.0).is_err());
}

#[test]
fn second_difference_slope_of_homogeneous_solution_is_reported() {
    let mesh = Mesh::new(-1.0, 1.0, 129).unwrap();
    let zero = GridFunction::from_closure(mesh.clone(), AnalyticClosure::constant(0.0));
    let g = GridFunction::from_closure(mesh.clone(), AnalyticClosure::power(1.0, 0.5));
    let problem = assemble(&mesh, 0.75, 2.0, &CoefficientField::constant(1.0).unwrap(), &zero, &g).unwrap();
    let v = solve(&problem, 1e-10).unwrap();
    let steps = [1.0 / 64.0, 1.0 / 32.0, 1.0 / 16.0];
    let fit = second_difference_scaling(&v.u, &Ball::new(0.0, 0.5).unwrap(), &steps, 2.0).unwrap();
    let slope = fit.slope.unwrap();
    assert!(slope.is_finite() && slope > 0.0, "{fit:?}");
}

fn run_in(dir: &Path, json: &str) -> Result<RunSummary, LabError> {
    run(&config(json), dir)
}

#[test]
fn check_scenario_passes_and_reproduces() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let json = r#"{"schema_version":1,"scenario":"check","seed":11,"samples":2000,"exponent_samples":200}"#;
    let first = run_in(a.path(), json).unwrap();
    let second = run_in(b.path(), json).unwrap();
    assert!(first.assertions > 10 && first.failed_assertions.is_empty());
    assert_eq!(body(&a.path().join("check.csv")), body(&b.path().join("check.csv")));
    assert_eq!(second.files.len(), first.files.len());
    let text = body(&a.path().join("check.csv"));
    assert!(text.lines().skip(1).all(|l| l.starts_with("11,") && l.ends_with(",assert,pass")), "{text}");
}

#[test]
fn blowup_boundary_for_first_configuration() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), r#"{"schema_version":1,"scenario":"blowup","params":{"n":1,"p":1.5,"s":0.5,"r":2}}"#).unwrap();
    let summary = body(&dir.path().join("blowup_summary.csv"));
    assert!(summary.contains(",boundary,2.0,2.0,assert,pass"), "{summary}");
    let table = body(&dir.path().join("blowup.csv"));
    let mut lines = table.lines();
    assert_eq!(lines.next().unwrap(), "n,p,s,r,gamma,q,C,C_err,qtilde,norm,verdict,numeric_norm,numeric_verdict,label,status");
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let qt: f64 = cols[8].parse().unwrap();
        assert_eq!(cols[10], if qt < 2.0 { "finite" } else { "divergent" }, "{line}");
    }
}

#[test]
fn every_row_carries_the_parameter_tuple() {
    let specs = [
        r#"{"schema_version":1,"scenario":"derive","params":{"n":2,"p":2,"s":0.75,"r":1.5}}"#,
        r#"{"schema_version":1,"scenario":"tails","params":{"p":2.5,"s":0.8}}"#,
        r#"{"schema_version":1,"scenario":"solve","params":{"p":3,"s":0.75},"mesh":{"nodes":65}}"#,
    ];
    for json in specs {
        let dir = tempfile::tempdir().unwrap();
        let summary = run_in(dir.path(), json).unwrap();
        for file in summary.files.iter().filter(|f| f.extension().is_some_and(|e| e == "csv")) {
            let text = body(file);
            let header = text.lines().next().unwrap();
            assert!(header.starts_with("n,p,s,"), "{}: {header}", file.display());
            assert!(header.ends_with(",label,status") || header.ends_with(",label"), "{header}");
        }
        let log = fs::read_to_string(dir.path().join(format!("{}.jsonl", summary.scenario.name()))).unwrap();
        for line in log.lines() {
            serde_json::from_str::<serde_json::Value>(line).unwrap();
        }
    }
}

#[test]
fn comparison_diagnostic_never_fails_but_assertion_does() {
    let dir = tempfile::tempdir().unwrap();
    let base = r#""schema_version":1,"scenario":"compare","params":{"p":2,"s":0.75},"mesh":{"nodes":129},"radii":[0.1,0.2,0.4]"#;
    run_in(dir.path(), &format!("{{{base}}}")).unwrap();
    let summary = body(&dir.path().join("comparison_summary.csv"));
    assert!(summary.contains("fitted_slope"));
    assert!(summary.lines().any(|l| l.contains("fitted_slope") && l.ends_with("diagnostic,reported")));
    let err = run_in(dir.path(), &format!("{{{base},\"slope_band\":1e-9}}")).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert_eq!(err.kind(), "AssertionFailed");
    assert!(body(&dir.path().join("comparison_summary.csv")).contains("fail"));
}

#[test]
fn stalled_solver_maps_to_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let err = run_in(dir.path(), r#"{"schema_version":1,"scenario":"solve","params":{"p":1.2,"s":0.75},"mesh":{"nodes":65}}"#).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
    let log = fs::read_to_string(dir.path().join("solve.jsonl")).unwrap();
    assert!(log.contains("\"event\":\"error\""));
}

#[test]
fn fast_growing_exterior_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = run_in(dir.path(), r#"{"schema_version":1,"scenario":"solve","exterior":"power(1,3)","mesh":{"nodes":33}}"#).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

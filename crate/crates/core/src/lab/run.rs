//! Scenario dispatch, CSV emission and the JSON-lines run log.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::checks::{self, Label, SuiteOutcome};
use super::config::{ExperimentConfig, Scenario, SCHEMA_VERSION};
use super::diagnostics::{b_factor, lambda_o, LevelInputs};
use super::LabError;
use crate::nonlocal::{dyadic_tail_chain, tail, tail_decomposition, AnalyticClosure, Ball, Exterior, GridFunction, Mesh};
use crate::oracle::{constant_c, default_q_grid, membership_report, pointwise_residual, CounterexampleSpec, MembershipReport};
use crate::params::{a_tilde_window, derive, fw_exponent_identity, interpolation_exponents, sharp_exponents};
use crate::solver::{assemble, comparison_experiment, solve_with, torsion_rhs, ComparisonSetup, DiscreteProblem, SolveOptions};

/// Relative tolerance of the pointwise homogeneity residual of the power-law solution.
pub const RESIDUAL_TOL: f64 = 1e-4;
/// Radii at which the power-law residual is evaluated.
pub const RESIDUAL_RADII: [f64; 2] = [0.5, 2.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: Scenario,
    pub files: Vec<PathBuf>,
    pub assertions: usize,
    pub failed_assertions: Vec<String>,
}

/// Numbers in shortest round-trip form, so identical values print identically.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

struct Table {
    name: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self { name, header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Collects tables, assertion outcomes and log records of one run.
struct Recorder {
    out: PathBuf,
    scenario: Scenario,
    log: BufWriter<File>,
    files: Vec<PathBuf>,
    assertions: usize,
    failed: Vec<String>,
}

impl Recorder {
    fn new(out: &Path, scenario: Scenario) -> Result<Self, LabError> {
        std::fs::create_dir_all(out)?;
        let path = out.join(format!("{}.jsonl", scenario.name()));
        let log = BufWriter::new(File::create(&path)?);
        Ok(Self { out: out.to_path_buf(), scenario, log, files: vec![path], assertions: 0, failed: Vec::new() })
    }

    fn log(&mut self, record: serde_json::Value) -> Result<(), LabError> {
        serde_json::to_writer(&mut self.log, &record).map_err(|e| LabError::Io(e.to_string()))?;
        self.log.write_all(b"\n")?;
        Ok(())
    }

    /// Status column for a row: assertions are counted and remembered when they fail.
    fn status(&mut self, label: Label, what: &str, holds: bool) -> String {
        match label {
            Label::Assert => {
                self.assertions += 1;
                if !holds {
                    self.failed.push(what.to_string());
                    "fail".into()
                } else {
                    "pass".into()
                }
            }
            Label::Diagnostic | Label::Value => "reported".into(),
        }
    }

    fn write(&mut self, table: &Table) -> Result<(), LabError> {
        let path = self.out.join(format!("{}.csv", table.name));
        let mut file = BufWriter::new(File::create(&path)?);
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        writeln!(file, "# fracp {} schema_version={SCHEMA_VERSION} generated_unix={stamp}", self.scenario.name())?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(&table.header).map_err(|e| LabError::Io(e.to_string()))?;
        for row in &table.rows {
            w.write_record(row).map_err(|e| LabError::Io(e.to_string()))?;
        }
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn finish(mut self) -> Result<RunSummary, LabError> {
        let record = json!({ "event": "finish", "assertions": self.assertions, "failed": self.failed });
        self.log(record)?;
        self.log.flush()?;
        Ok(RunSummary { scenario: self.scenario, files: self.files, assertions: self.assertions, failed_assertions: self.failed })
    }
}

/// Execute the scenario of `config`, writing CSV files and a JSON-lines log
/// into `out`. Failed assertions are reported after every file is written.
pub fn run(config: &ExperimentConfig, out: &Path) -> Result<RunSummary, LabError> {
    config.validate()?;
    let mut rec = Recorder::new(out, config.scenario)?;
    rec.log(json!({ "event": "config", "config": config }))?;
    match config.scenario {
        Scenario::Derive => run_derive(config, &mut rec)?,
        Scenario::Oracle => run_oracle(config, &mut rec)?,
        Scenario::Blowup => run_blowup(config, &mut rec)?,
        Scenario::Solve => run_solve(config, &mut rec)?,
        Scenario::Compare => run_compare(config, &mut rec)?,
        Scenario::Tails => run_tails(config, &mut rec)?,
        Scenario::Check => run_check(config, &mut rec)?,
    }
    let summary = rec.finish()?;
    if summary.failed_assertions.is_empty() {
        Ok(summary)
    } else {
        Err(LabError::AssertionFailed(summary.failed_assertions.join(", ")))
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(a.abs()).max(f64::MIN_POSITIVE)
}

const DERIVE_HEADER: [&str; 9] = ["n", "p", "s", "r", "a_tilde", "quantity", "value", "label", "status"];

fn run_derive(config: &ExperimentConfig, rec: &mut Recorder) -> Result<(), LabError> {
    let ps = config.params;
    let (params, base) = derive(ps.n, ps.p, ps.s).map_err(LabError::from_params)?;
    let mut values: Vec<(&str, f64, Label, bool)> = vec![
        ("p_conj", base.p_conj, Label::Value, true),
        ("sp", base.sp, Label::Value, true),
        ("sp_conj", base.sp_conj, Label::Value, true),
        ("sobolev", base.sobolev, Label::Value, true),
        ("sobolev_conj", base.sobolev_conj, Label::Value, true),
        ("s_o", base.s_o, Label::Value, true),
        ("alpha", base.alpha, Label::Value, true),
        ("r_min", base.r_min, Label::Value, true),
        ("r_max", base.r_max, Label::Value, true),
        ("theta", params.theta(), Label::Value, true),
    ];
    let mut a_used = ps.a_tilde;
    if let Some(r) = ps.r {
        let sharp = sharp_exponents(&params, r).map_err(LabError::from_params)?;
        values.push(("q", sharp.q, Label::Value, true));
        values.push(("mu", sharp.mu, Label::Value, true));
        values.push(("gamma_example", sharp.gamma_example, Label::Value, true));
        values.push(("q_minus_p", sharp.q - params.p, Label::Assert, sharp.q > params.p));
        let e = rel(sharp.q, params.dim() / (sharp.gamma_example + 1.0));
        values.push(("q_identity_error", e, Label::Assert, e <= checks::EXPONENT_TOL));
        let e = rel(sharp.mu * sharp.q, r);
        values.push(("mu_q_identity_error", e, Label::Assert, e <= checks::EXPONENT_TOL));
        if let Ok((lo, hi)) = a_tilde_window(&params, &sharp) {
            values.push(("a_tilde_lo", lo, Label::Value, true));
            values.push(("a_tilde_hi", hi, Label::Value, true));
            let a = ps.a_tilde.unwrap_or(0.5 * (lo + hi));
            a_used = Some(a);
            let ie = interpolation_exponents(&params, &sharp, a).map_err(LabError::from_params)?;
            values.push(("inner_exponent", ie.inner_exponent, Label::Value, true));
            values.push(("tail_power", ie.tail_power, Label::Value, true));
            values.push(("theta_holder", ie.theta_holder, Label::Value, true));
            values.push(("interpolation_bookkeeping", f64::from(u8::from(ie.all_hold())), Label::Assert, ie.all_hold()));
        }
    }
    if let Some(a) = a_used {
        values.push(("epsilon", params.epsilon(a), Label::Value, true));
        let fw = fw_exponent_identity(&params, a);
        values.push(("fw_identity_gap", (fw.lhs - fw.rhs).abs(), Label::Assert, fw.holds));
    }
    let mut table = Table::new("derive", &DERIVE_HEADER);
    for (name, value, label, holds) in values {
        let status = rec.status(label, name, holds);
        table.push(vec![
            ps.n.to_string(),
            num(ps.p),
            num(ps.s),
            opt(ps.r),
            opt(a_used),
            name.into(),
            num(value),
            label.name().into(),
            status,
        ]);
    }
    rec.log(json!({ "event": "derive", "base": base }))?;
    rec.write(&table)
}

fn counterexample(config: &ExperimentConfig) -> Result<CounterexampleSpec, LabError> {
    let params = config.problem_params()?;
    let r = config.params.r.ok_or_else(|| LabError::validation("MissingParameter", "params.r is required".into()))?;
    Ok(CounterexampleSpec::new(params, r)?)
}

const MEMBERSHIP_HEADER: [&str; 15] = [
    "n", "p", "s", "r", "gamma", "q", "C", "C_err", "qtilde", "norm", "verdict", "numeric_norm", "numeric_verdict", "label", "status",
];

fn membership_table(name: &'static str, spec: &CounterexampleSpec, report: &MembershipReport, rec: &mut Recorder) -> Table {
    let mut table = Table::new(name, &MEMBERSHIP_HEADER);
    let pp = spec.params;
    for row in &report.rows {
        let expected_finite = row.qtilde < spec.q * (1.0 - 1e-12);
        let holds = (row.verdict == crate::oracle::Verdict::Finite) == expected_finite;
        let status = rec.status(Label::Assert, &format!("verdict at qtilde={}", row.qtilde), holds);
        table.push(vec![
            pp.n.to_string(),
            num(pp.p),
            num(pp.s),
            num(spec.r),
            num(spec.gamma),
            num(spec.q),
            opt(spec.c),
            opt(spec.c_error),
            num(row.qtilde),
            row.norm.map(num).unwrap_or_else(|| "inf".into()),
            row.verdict.label().into(),
            row.numeric_norm.map(num).unwrap_or_else(|| "inf".into()),
            row.numeric_verdict.label().into(),
            Label::Assert.name().into(),
            status,
        ]);
    }
    table
}

/// One grid step of the default exponent grid.
pub const Q_GRID_STEP: f64 = 0.02;

fn run_oracle(config: &ExperimentConfig, rec: &mut Recorder) -> Result<(), LabError> {
    let tol = config.tolerances.quadrature;
    let spec = counterexample(config)?;
    let c = constant_c(&spec, tol)?;
    let spec = spec.with_constant(&c);
    rec.log(json!({ "event": "constant", "value": c.value, "error_estimate": c.error_estimate, "evaluations": c.evaluations }))?;
    let report = membership_report(&spec, &default_q_grid(&spec), 1.0)?;
    let table = membership_table("oracle_report", &spec, &report, rec);
    rec.write(&table)?;

    let residuals = pointwise_residual(&spec, &RESIDUAL_RADII, tol)?;
    let pp = spec.params;
    let mut table = Table::new("oracle_residual", &["n", "p", "s", "r", "gamma", "C", "radius", "residual", "tolerance", "label", "status"]);
    for (&radius, &res) in RESIDUAL_RADII.iter().zip(&residuals) {
        let status = rec.status(Label::Assert, &format!("residual at |x|={radius}"), res <= RESIDUAL_TOL);
        table.push(vec![
            pp.n.to_string(),
            num(pp.p),
            num(pp.s),
            num(spec.r),
            num(spec.gamma),
            num(c.value),
            num(radius),
            num(res),
            num(RESIDUAL_TOL),
            Label::Assert.name().into(),
            status,
        ]);
    }
    rec.write(&table)
}

fn run_blowup(config: &ExperimentConfig, rec: &mut Recorder) -> Result<(), LabError> {
    let spec = counterexample(config)?;
    let grid = default_q_grid(&spec);
    let report = membership_report(&spec, &grid, 1.0)?;
    let table = membership_table("blowup", &spec, &report, rec);
    rec.write(&table)?;

    // Closed form: the first divergent grid exponent is the first one at or above q.
    let expected = grid.iter().copied().find(|&x| x >= spec.q * (1.0 - 1e-12));
    let exact = match (report.boundary, expected) {
        (Some(b), Some(e)) => b == e,
        (None, None) => true,
        _ => false,
    };
    let numeric = match (report.numeric_boundary, report.boundary) {
        (Some(n), Some(b)) => (n - b).abs() <= Q_GRID_STEP * (1.0 + 1e-9),
        (None, None) => true,
        _ => false,
    };
    let pp = spec.params;
    let mut table = Table::new(
        "blowup_summary",
        &["n", "p", "s", "r", "gamma", "q", "quantity", "value", "reference", "label", "status"],
    );
    let rows: Vec<(&str, Option<f64>, Option<f64>, Label, bool)> = vec![
        ("boundary", report.boundary, expected, Label::Assert, exact),
        ("numeric_boundary", report.numeric_boundary, report.boundary, Label::Assert, numeric),
        ("seminorm_unit_ball", Some(report.seminorm), None, Label::Value, true),
        ("weighted_integral", Some(report.weighted_integral), None, Label::Value, true),
    ];
    for (name, value, reference, label, holds) in rows {
        let status = rec.status(label, name, holds);
        table.push(vec![
            pp.n.to_string(),
            num(pp.p),
            num(pp.s),
            num(spec.r),
            num(spec.gamma),
            num(spec.q),
            name.into(),
            opt(value),
            opt(reference),
            label.name().into(),
            status,
        ]);
    }
    rec.log(json!({ "event": "blowup", "boundary": report.boundary, "numeric_boundary": report.numeric_boundary }))?;
    rec.write(&table)
}

struct Assembled {
    problem: DiscreteProblem,
    rhs_label: String,
    torsion_fixture: bool,
}

fn assemble_from(config: &ExperimentConfig, default_rhs: AnalyticClosure) -> Result<Assembled, LabError> {
    let ps = config.params;
    let hw = config.mesh.half_width;
    let mesh = Mesh::new(-hw, hw, config.mesh.nodes)?;
    let coefficient = config.coefficient_field()?;
    let rhs = config.rhs_closure()?.unwrap_or(default_rhs);
    let exterior = config.exterior_closure()?;
    let torsion_fixture = ps.p == 2.0
        && hw == 1.0
        && coefficient.is_constant()
        && coefficient.lower == 1.0
        && exterior.growth() <= 0.0
        && exterior.eval(3.0) == 0.0
        && rhs.growth() <= 0.0
        && rel(rhs.eval(0.0), torsion_rhs(ps.s)) < 1e-12;
    let rhs_label = rhs.label().to_string();
    let f = GridFunction::from_closure(mesh.clone(), rhs);
    let g = GridFunction::from_closure(mesh.clone(), exterior);
    let problem = assemble(&mesh, ps.s, ps.p, &coefficient, &f, &g)?;
    Ok(Assembled { problem, rhs_label, torsion_fixture })
}

fn run_solve(config: &ExperimentConfig, rec: &mut Recorder) -> Result<(), LabError> {
    let ps = config.params;
    let tol = config.tolerances.solver;
    let setup = assemble_from(config, AnalyticClosure::constant(torsion_rhs(ps.s)))?;
    let problem = &setup.problem;
    let result = solve_with(problem, &SolveOptions::new(tol), None);
    let sol = match result {
        Ok(sol) => sol,
        Err(e) => {
            rec.log(json!({ "event": "error", "detail": e.to_string() }))?;
            return Err(e.into());
        }
    };
    for record in &sol.log {
        rec.log(json!({ "event": "iteration", "record": record }))?;
    }
    let nodes = config.mesh.nodes.to_string();
    let mut table = Table::new("solve", &["n", "p", "s", "nodes", "coefficient", "rhs", "exterior", "x", "u", "label"]);
    for (x, u) in sol.u.mesh().coords().into_iter().zip(sol.u.values()) {
        table.push(vec![
            ps.n.to_string(),
            num(ps.p),
            num(ps.s),
            nodes.clone(),
            config.coefficient.clone(),
            setup.rhs_label.clone(),
            config.exterior.clone(),
            num(x),
            num(*u),
            Label::Value.name().into(),
        ]);
    }
    rec.write(&table)?;

    let relative = if sol.scale > 0.0 { sol.residual / sol.scale } else { 0.0 };
    let mut rows: Vec<(&str, f64, Label, bool)> = vec![
        ("iterations", sol.iterations as f64, Label::Value, true),
        ("energy", *sol.energy_history.last().unwrap_or(&0.0), Label::Value, true),
        ("relative_residual", relative, Label::Assert, relative <= tol),
        (
            "energy_monotone",
            f64::from(u8::from(sol.energy_history.windows(2).all(|w| w[1] <= w[0]))),
            Label::Assert,
            sol.energy_history.windows(2).all(|w| w[1] <= w[0]),
        ),
        ("truncation_bound", sol.truncation_bound, Label::Diagnostic, true),
    ];
    if setup.torsion_fixture {
        let err = problem
            .free_nodes()
            .iter()
            .zip(&sol.free_values)
            .map(|(x, u)| (u - (1.0 - x * x).powf(ps.s)).abs())
            .fold(0.0, f64::max);
        rows.push(("torsion_linf_error", err, Label::Diagnostic, true));
    }
    let mut summary = Table::new("solve_summary", &["n", "p", "s", "nodes", "coefficient", "rhs", "exterior", "quantity", "value", "label", "status"]);
    for (name, value, label, holds) in rows {
        let status = rec.status(label, name, holds);
        summary.push(vec![
            ps.n.to_string(),
            num(ps.p),
            num(ps.s),
            nodes.clone(),
            config.coefficient.clone(),
            setup.rhs_label.clone(),
            config.exterior.clone(),
            name.into(),
            num(value),
            label.name().into(),
            status,
        ]);
    }
    rec.write(&summary)
}

fn run_compare(config: &ExperimentConfig, rec: &mut Recorder) -> Result<(), LabError> {
    let ps = config.params;
    let tol = config.tolerances.solver;
    let setup = assemble_from(config, AnalyticClosure::constant(1.0))?;
    let a_tilde = ps.a_tilde.unwrap_or(1.0);
    let table = match comparison_experiment(&setup.problem, &config.radii, &ComparisonSetup { a_tilde, tol }) {
        Ok(t) => t,
        Err(e) => {
            rec.log(json!({ "event": "error", "detail": e.to_string() }))?;
            return Err(e.into());
        }
    };
    let nodes = config.mesh.nodes.to_string();
    let mut csv = Table::new(
        "comparison",
        &[
            "n", "p", "s", "a_tilde", "epsilon", "chi", "coefficient", "rhs", "nodes", "R", "lhs_lp", "lhs_seminorm", "rhs_f_term",
            "rhs_chi_term", "fitted_slope", "target_slope", "frozen_residual", "unfrozen_residual", "label", "status",
        ],
    );
    for row in &table.rows {
        rec.log(json!({ "event": "ball", "row": row }))?;
        let status = rec.status(Label::Assert, &format!("frozen residual at R={}", row.radius), row.frozen_residual <= tol);
        csv.push(vec![
            ps.n.to_string(),
            num(ps.p),
            num(ps.s),
            num(a_tilde),
            num(table.epsilon),
            opt(table.chi),
            config.coefficient.clone(),
            setup.rhs_label.clone(),
            nodes.clone(),
            num(row.radius),
            num(row.lhs_lp),
            num(row.lhs_seminorm),
            num(row.rhs_f_term),
            opt(row.rhs_chi_term),
            opt(table.fitted_slope),
            num(table.target_slope),
            num(row.frozen_residual),
            opt(row.unfrozen_residual),
            Label::Assert.name().into(),
            status,
        ]);
    }
    rec.write(&csv)?;

    let slope_label = if config.slope_band.is_some() { Label::Assert } else { Label::Diagnostic };
    let band = config.slope_band.unwrap_or(0.15);
    let slope_ok = table.fitted_slope.is_some_and(|m| (m - table.target_slope).abs() <= band * table.target_slope);
    let rows: Vec<(&str, Option<f64>, Option<f64>, Label, bool)> = vec![
        ("fitted_slope", table.fitted_slope, Some(table.target_slope), slope_label, slope_ok),
        ("fit_r2", table.fit_r2, None, Label::Diagnostic, true),
        ("chi_slope", table.chi_slope, None, Label::Diagnostic, true),
    ];
    let mut summary = Table::new(
        "comparison_summary",
        &["n", "p", "s", "a_tilde", "chi", "coefficient", "rhs", "nodes", "quantity", "value", "reference", "label", "status"],
    );
    for (name, value, reference, label, holds) in rows {
        let status = rec.status(label, name, holds);
        summary.push(vec![
            ps.n.to_string(),
            num(ps.p),
            num(ps.s),
            num(a_tilde),
            opt(table.chi),
            config.coefficient.clone(),
            setup.rhs_label.clone(),
            nodes.clone(),
            name.into(),
            opt(value),
            opt(reference),
            label.name().into(),
            status,
        ]);
    }
    rec.write(&summary)
}

fn run_tails(config: &ExperimentConfig, rec: &mut Recorder) -> Result<(), LabError> {
    let ps = config.params;
    let (p, s) = (ps.p, ps.s);
    if ps.n != 1 {
        return Err(LabError::validation("Dimension", "tail fixtures are one-dimensional".into()));
    }
    let sp = s * p;
    let inv = 1.0 / (p - 1.0);
    let hw = config.mesh.half_width;
    let mesh = Mesh::new(-hw, hw, config.mesh.nodes)?;
    let unit = Ball::new(0.0, hw.min(1.0))?;
    let radius = unit.radius;
    let mut rows: Vec<(String, f64, Option<f64>, Label, bool)> = Vec::new();
    let mut fixture = |name: &str, value: f64, reference: f64, tol: f64| {
        rows.push((name.into(), value, Some(reference), Label::Assert, rel(value, reference) <= tol));
    };

    let one = GridFunction::from_closure(mesh.clone(), AnalyticClosure::constant(1.0));
    fixture("tail_of_constant", tail(&one, &unit, p, s)?, (2.0 / sp).powf(inv), checks::TAIL_FIXTURE_TOL);
    let x = GridFunction::from_closure(mesh.clone(), AnalyticClosure::affine(1.0, 0.0));
    let zero = GridFunction::from_closure(mesh.clone(), AnalyticClosure::constant(0.0));
    let a_tilde = ps.a_tilde.unwrap_or(1.0);
    if sp > p - 1.0 {
        let tail_x = (2.0 / (sp - p + 1.0)).powf(inv) * radius;
        fixture("tail_of_identity", tail(&x, &unit, p, s)?, tail_x, checks::TAIL_FIXTURE_TOL);
        let level = lambda_o(&x, &zero, &unit, &LevelInputs::new(p, s, config.level_m, a_tilde, radius))?;
        let expected = (1.0 + (tail_x / radius).powf(p)).powf(1.0 / p);
        fixture("lambda_o_identity", level.lambda_o, expected, checks::TAIL_FIXTURE_TOL);
    }

    let bump = GridFunction::from_fn(mesh.clone(), |t| (1.0 - t * t).max(0.0).powf(1.5) * (1.0 + 0.5 * t), Exterior::zero())?;
    let level = lambda_o(&bump, &one, &unit, &LevelInputs::new(p, s, config.level_m, a_tilde, radius))?;
    let dominates = [level.gradient_term, level.inhomogeneity_term, level.tail_term]
        .iter()
        .all(|t| level.lambda_o >= t.powf(1.0 / p) * (1.0 - 1e-12));
    rows.push(("lambda_o".into(), level.lambda_o, None, Label::Value, true));
    rows.push(("lambda_o_dominates_summands".into(), f64::from(u8::from(dominates)), None, Label::Assert, dominates));
    let b = b_factor(1, p, radius, 0.5 * radius, radius)?;
    rows.push(("b_factor".into(), b, None, Label::Assert, b >= 1.0));

    let inner = Ball::new(0.2 * radius, 0.3 * radius)?;
    {
        let rep = tail_decomposition(&bump, &inner, &unit, p, s)?;
        rows.push(("decomposition_first".into(), rep.decomposition.first, Some(rep.bound_i), Label::Assert, rep.first_term_bounded()));
        rows.push(("decomposition_recombined".into(), rep.tail_value, Some(rep.recombined_bound), Label::Assert, rep.recombination_holds()));
        rows.push(("decomposition_second".into(), rep.decomposition.second, Some(rep.majorant_ii), Label::Diagnostic, true));
        rows.push(("decomposition_third".into(), rep.decomposition.third, Some(rep.majorant_iii), Label::Diagnostic, true));
        let chain_ball = Ball::new(0.0, 0.125 * radius)?;
        let chain = dyadic_tail_chain(&bump, &chain_ball, 3, p, s)?;
        let total = chain.summands.iter().sum::<f64>() + chain.remaining;
        rows.push(("dyadic_chain".into(), chain.lhs, Some(total), Label::Diagnostic, true));
    }

    let mut table = Table::new("tails", &["n", "p", "s", "R", "M", "quantity", "value", "reference", "rel_error", "label", "status"]);
    for (name, value, reference, label, holds) in rows {
        let status = rec.status(label, &name, holds);
        table.push(vec![
            ps.n.to_string(),
            num(p),
            num(s),
            num(radius),
            num(config.level_m),
            name,
            num(value),
            opt(reference),
            opt(reference.map(|r| rel(value, r))),
            label.name().into(),
            status,
        ]);
    }
    rec.write(&table)
}

fn run_check(config: &ExperimentConfig, rec: &mut Recorder) -> Result<(), LabError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let samples = config.samples;
    let mut suites: Vec<SuiteOutcome> = vec![
        checks::exponent_identities(&mut rng, config.exponent_samples),
        checks::superlevel_sweep(&mut rng, samples),
        checks::minkowski_sweep(&mut rng, samples),
        checks::interpolation_sweep(&mut rng, samples),
        checks::tail_term_sweep(&mut rng, samples),
        checks::cover_property(&mut rng, 10_000),
        checks::cover_overlap(),
    ];
    suites.extend(checks::gagliardo_fixtures());
    suites.extend(checks::tail_fixtures(&[(2.0, 0.75), (1.5, 0.8), (3.0, 0.9)]));
    suites.extend(checks::fit_fixtures(&mut rng));
    suites.extend(checks::second_difference_fixtures());

    let mut table = Table::new("check", &["seed", "suite", "samples", "failures", "worst", "tolerance", "label", "status"]);
    for suite in &suites {
        rec.log(json!({ "event": "suite", "outcome": suite }))?;
        let status = rec.status(suite.label, &suite.suite, suite.passed());
        table.push(vec![
            config.seed.to_string(),
            suite.suite.clone(),
            suite.samples.to_string(),
            suite.failures.to_string(),
            num(suite.worst),
            num(suite.tolerance),
            suite.label.name().into(),
            status,
        ]);
    }
    rec.write(&table)
}

//! Batch front end: load a problem file, run one command and render a report.
//!
//! Exit codes: 0 success, 2 parse error, 3 validation error, 4 a computation
//! did not converge or failed numerically, 5 an identity failed on a
//! converged run.  A failed identity takes precedence over non-convergence.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::brake_orbit::analyze_brake;
use crate::error::Error;
use crate::hermitian_forms::IdentityCheck;
use crate::index_theory::{
    graph_triple_identities, hormander_index, triple_identity_checks, triple_index_terms, triple_index_via_transversal,
    common_transversal,
};
use crate::problem::{self, Problem, ProblemError};
use crate::random::{random_lagrangian, random_lagrangian_meeting, random_symplectic};
use crate::sturm_liouville::{
    analyze, conjugate_points_dirichlet, fundamental_solution, lambda_s_conjugate_points, maslov_of_solution,
    subinterval_check, BoundaryCondition,
};
use crate::symplectic_core::SymplecticSpace;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;
pub const EXIT_IDENTITY: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Morse index with the full index report.
    Morse,
    /// Maslov index of the solution path with its crossings.
    Maslov,
    /// Triple or Hörmander index of the frames in the `triple` section.
    Triple,
    /// Conjugate points for Dirichlet and, if given, separated conditions.
    Conjugate,
    /// Monodromy factorization, spectrum and stability bounds of a brake problem.
    Brake,
    /// Every identity check that applies to the problem.
    Verify,
}

/// Command line of the `lagindex` tool.
#[derive(Debug, Clone, Parser)]
#[command(name = "lagindex", version, about = "Morse, Maslov and triple indices of Sturm-Liouville systems")]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Problem file in TOML.
    #[arg(long)]
    pub input: PathBuf,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Finite-element mesh size, overriding the file.
    #[arg(long)]
    pub mesh: Option<usize>,
    /// Integration steps, overriding the file.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Relative singular-value cutoff for numerical rank.
    #[arg(long)]
    pub tol_rank: Option<f64>,
    /// Relative width of the Morse kernel band.
    #[arg(long)]
    pub tol_zero: Option<f64>,
    /// Emit the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Seed for the randomized parts of `verify`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Progress notes on standard error; repeat for more.
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

impl RunConfig {
    pub fn new(command: Command, input: impl Into<PathBuf>) -> Self {
        Self {
            command,
            input: input.into(),
            output: None,
            mesh: None,
            steps: None,
            tol_rank: None,
            tol_zero: None,
            json: false,
            seed: 0,
            verbose: 0,
        }
    }
}

/// Exit status and rendered report.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub code: i32,
    pub report: String,
}

/// Convergence and identity bookkeeping shared by all commands.
#[derive(Debug, Default, Serialize)]
struct Verdict {
    converged: bool,
    checked: usize,
    failures: Vec<String>,
    not_converged: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Self { converged: true, ..Default::default() }
    }

    fn record(&mut self, context: &str, checks: &[IdentityCheck], converged: bool) {
        if !converged {
            self.converged = false;
            self.not_converged.push(context.into());
            return;
        }
        for c in checks {
            self.checked += 1;
            if !c.holds {
                self.failures.push(format!("{context}: {} ({} vs {})", c.name, c.lhs, c.rhs));
            }
        }
    }

    fn code(&self) -> i32 {
        if !self.failures.is_empty() {
            EXIT_IDENTITY
        } else if !self.converged {
            EXIT_CONVERGENCE
        } else {
            EXIT_OK
        }
    }
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Legendre { .. }
        | Error::NotBrake(_)
        | Error::NotLagrangian(_)
        | Error::NotHermitian(_)
        | Error::NotSymplectic(_)
        | Error::Dimension(_)
        | Error::Invalid(_)
        | Error::DegenerateHamiltonian(_) => EXIT_VALIDATION,
        _ => EXIT_CONVERGENCE,
    }
}

fn note(cfg: &RunConfig, level: u8, msg: &str) {
    if cfg.verbose >= level {
        eprintln!("lagindex: {msg}");
    }
}

/// Parses, validates and runs one command.  Never panics on bad input.
pub fn run(cfg: &RunConfig) -> RunOutcome {
    let text = match std::fs::read_to_string(&cfg.input) {
        Ok(t) => t,
        Err(e) => return finish(cfg, Value::Null, Err((EXIT_PARSE, format!("cannot read input: {e}")))),
    };
    let problem = match load_with_overrides(&text, cfg) {
        Ok(p) => p,
        Err(ProblemError::Parse(m)) => return finish(cfg, Value::Null, Err((EXIT_PARSE, format!("parse error: {m}")))),
        Err(e @ ProblemError::Validation { .. }) => return finish(cfg, Value::Null, Err((EXIT_VALIDATION, e.to_string()))),
    };
    let config = resolved_config(cfg, &problem);
    note(cfg, 1, &format!("running {:?} on {}", cfg.command, cfg.input.display()));
    let mut verdict = Verdict::new();
    let result = match cfg.command {
        Command::Morse => run_morse(&problem, &mut verdict),
        Command::Maslov => run_maslov(&problem, &mut verdict),
        Command::Triple => run_triple(&problem, &mut verdict),
        Command::Conjugate => run_conjugate(&problem, &mut verdict),
        Command::Brake => run_brake(&problem, &mut verdict),
        Command::Verify => run_verify(&problem, cfg, &mut verdict),
    };
    match result {
        Ok(value) => {
            let code = verdict.code();
            finish(cfg, config, Ok((value, verdict, code)))
        }
        Err(RunError::Problem(e)) => finish(cfg, config, Err((EXIT_VALIDATION, e.to_string()))),
        Err(RunError::Numeric(e)) => finish(cfg, config, Err((error_code(&e), e.to_string()))),
    }
}

/// Parses `argv`, runs, writes the report and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    let out = run(&cfg);
    match &cfg.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &out.report) {
                eprintln!("lagindex: cannot write {}: {e}", path.display());
                return EXIT_VALIDATION;
            }
        }
        None => print!("{}", out.report),
    }
    out.code
}

enum RunError {
    Problem(ProblemError),
    Numeric(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        Self::Numeric(e)
    }
}

impl From<ProblemError> for RunError {
    fn from(e: ProblemError) -> Self {
        Self::Problem(e)
    }
}

type RunResult = std::result::Result<Value, RunError>;

fn load_with_overrides(text: &str, cfg: &RunConfig) -> Result<Problem, ProblemError> {
    let mut spec = problem::parse(text)?;
    if let Some(m) = cfg.mesh {
        spec.discretization.mesh = m;
    }
    if let Some(m) = cfg.steps {
        spec.discretization.steps = m;
    }
    if let Some(t) = cfg.tol_rank {
        spec.tolerances.rank = t;
    }
    if let Some(t) = cfg.tol_zero {
        spec.tolerances.zero_band = t;
    }
    spec.build()
}

fn resolved_config(cfg: &RunConfig, p: &Problem) -> Value {
    json!({
        "input": cfg.input.display().to_string(),
        "seed": cfg.seed,
        "mesh": p.discretization.mesh,
        "steps": p.discretization.steps,
        "tolerances": p.tolerances,
        "problem": p.spec,
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn boundary(p: &Problem) -> Result<&BoundaryCondition, RunError> {
    p.boundary.as_ref().ok_or_else(|| {
        RunError::Problem(ProblemError::Validation {
            path: "boundary".into(),
            message: "section is required for this command".into(),
        })
    })
}

fn run_morse(p: &Problem, v: &mut Verdict) -> RunResult {
    let bc = boundary(p)?;
    let report = analyze(&p.path, bc, p.discretization, &p.tolerances)?;
    v.record("index_report", &report.identity_checks, report.converged);
    Ok(to_value(&report))
}

fn run_maslov(p: &Problem, v: &mut Verdict) -> RunResult {
    let bc = boundary(p)?;
    let tol = &p.tolerances;
    let fs = fundamental_solution(&p.path, p.discretization.steps, tol)?;
    let maslov = maslov_of_solution(&fs, bc, tol)?;
    v.record("maslov", &[], !maslov.degenerate);
    Ok(json!({
        "boundary": bc.kind.label(),
        "maslov": maslov,
        "steps": fs.steps(),
        "symplectic_residual": fs.residual,
        "convergence_estimate": fs.convergence_estimate,
    }))
}

fn run_conjugate(p: &Problem, v: &mut Verdict) -> RunResult {
    let tol = &p.tolerances;
    let fs = fundamental_solution(&p.path, p.discretization.steps, tol)?;
    let dirichlet = conjugate_points_dirichlet(&fs, tol)?;
    let separated = match p.boundary.as_ref().and_then(|b| b.separated_parts()) {
        Some((s, e)) => Some(lambda_s_conjugate_points(&fs, &s, &e, tol)?),
        None => None,
    };
    v.record("conjugate", &[], true);
    Ok(json!({
        "dirichlet": dirichlet,
        "separated": separated,
        "steps": fs.steps(),
        "symplectic_residual": fs.residual,
    }))
}

fn run_triple(p: &Problem, v: &mut Verdict) -> RunResult {
    let tol = &p.tolerances;
    let frames = p.spec.triple_frames()?;
    let (a, b, k) = (&frames[0], &frames[1], &frames[2]);
    let terms = triple_index_terms(a, b, k, tol)?;
    let delta = common_transversal(&[a, b, k])?;
    let oracle = triple_index_via_transversal(a, b, k, &delta, tol)?;
    let mut checks = triple_identity_checks(a, b, k, tol)?;
    let hormander = match frames.get(3) {
        Some(l4) => {
            let h = hormander_index(a, b, k, l4, tol)?;
            checks.push(IdentityCheck::equal("hormander_agreement", h.value, h.alternative));
            Some(h)
        }
        None => None,
    };
    v.record("triple", &checks, true);
    Ok(json!({
        "triple": terms,
        "transversal_value": oracle,
        "hormander": hormander,
        "identity_checks": checks,
    }))
}

fn run_brake(p: &Problem, v: &mut Verdict) -> RunResult {
    let report = analyze_brake(&p.path, p.discretization, &p.tolerances)?;
    v.record("brake", &brake_checks(&report), report.converged);
    Ok(to_value(&report))
}

/// Verdicts of a brake report as identity checks, residual thresholds included.
fn brake_checks(r: &crate::brake_orbit::BrakeReport) -> Vec<IdentityCheck> {
    let flag = |name: &str, ok: bool| IdentityCheck::equal(name, ok as i64, 1);
    let mut out: Vec<IdentityCheck> = r.bounds.iter().chain(&r.splitting).cloned().collect();
    out.push(flag("real_spectrum_when_indices_agree", r.real_spectrum.holds));
    out.push(flag("minimizer_positivity", r.positivity.holds));
    out.push(flag("factorization_residual", r.factorization_residual < 1e-8));
    out.push(flag("block_relations", r.block_relations.iter().all(|b| b.residual < 1e-8)));
    out.push(flag("inverse_symmetric_spectrum", r.spectrum.inverse_symmetric));
    out
}

fn run_verify(p: &Problem, cfg: &RunConfig, v: &mut Verdict) -> RunResult {
    let tol = &p.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = serde_json::Map::new();
    if let Some(bc) = &p.boundary {
        note(cfg, 1, "index report");
        let report = analyze(&p.path, bc, p.discretization, tol)?;
        v.record("index_report", &report.identity_checks, report.converged);
        out.insert("index_report".into(), to_value(&report));
        let mut splits = vec![];
        let len = p.path.length();
        for j in 0..p.spec.verify.splits {
            let mut ends = [rng.gen_range(0.05..0.95) * len, rng.gen_range(0.05..0.95) * len];
            ends.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if ends[1] - ends[0] < 0.05 * len {
                ends[1] = (ends[0] + 0.05 * len).min(len);
            }
            note(cfg, 2, &format!("subinterval split {j}"));
            let s = subinterval_check(&p.path, bc, ends[0], ends[1], p.discretization, tol)?;
            v.record(&format!("subinterval[{j}]"), std::slice::from_ref(&s.check), s.converged);
            splits.push(s);
        }
        out.insert("subintervals".into(), to_value(&splits));
    }
    if p.spec.triple.is_some() {
        note(cfg, 1, "triple section");
        let mut sub = Verdict::new();
        out.insert("triple".into(), run_triple(p, &mut sub)?);
        v.checked += sub.checked;
        v.failures.extend(sub.failures);
    }
    note(cfg, 1, "random triple battery");
    out.insert("random_triples".into(), triple_battery(p, &mut rng, v));
    if p.spec.brake {
        note(cfg, 1, "brake analysis");
        let report = analyze_brake(&p.path, p.discretization, tol)?;
        v.record("brake", &brake_checks(&report), report.converged);
        out.insert("brake".into(), to_value(&report));
    }
    Ok(Value::Object(out))
}

/// Random Lagrangian triples and quadruples in `C^{2n}` with prescribed
/// intersection dimensions, and graph identities for a random symplectic map.
fn triple_battery(p: &Problem, rng: &mut ChaCha8Rng, v: &mut Verdict) -> Value {
    let tol = &p.tolerances;
    let n = p.path.n();
    let space = SymplecticSpace::standard(n);
    let (mut checked, mut failed, mut skipped) = (0usize, 0usize, 0usize);
    for j in 0..p.spec.verify.random_triples {
        let a = random_lagrangian(rng, space);
        let k1 = rng.gen_range(0..=n);
        let b = random_lagrangian_meeting(rng, &a, k1);
        let k2 = rng.gen_range(0..=n);
        let k = random_lagrangian_meeting(rng, &b, k2);
        let l4 = random_lagrangian(rng, space);
        let m = random_symplectic(rng, n, 0.8);
        let graph = [&a, &b, &k, &l4];
        let checks = triple_identity_checks(&a, &b, &k, tol).and_then(|mut c| {
            let h = hormander_index(&a, &b, &k, &l4, tol)?;
            c.push(IdentityCheck::equal("hormander_agreement", h.value, h.alternative));
            c.extend(graph_triple_identities(&m, graph, tol)?);
            Ok(c)
        });
        match checks {
            Ok(c) => {
                checked += c.len();
                failed += c.iter().filter(|x| !x.holds).count();
                v.record(&format!("random_triple[{j}]"), &c, true);
            }
            Err(_) => skipped += 1,
        }
    }
    if skipped > 0 {
        v.record("random_triples", &[], false);
    }
    json!({ "count": p.spec.verify.random_triples, "checked": checked, "failed": failed, "skipped": skipped })
}

fn finish(cfg: &RunConfig, config: Value, body: Result<(Value, Verdict, i32), (i32, String)>) -> RunOutcome {
    let (code, report) = match body {
        Ok((result, verdict, code)) => (
            code,
            json!({
                "tool": "lagindex",
                "version": env!("CARGO_PKG_VERSION"),
                "command": cfg.command,
                "config": config,
                "result": result,
                "summary": { "exit_code": code, "verdict": verdict },
            }),
        ),
        Err((code, message)) => (
            code,
            json!({
                "tool": "lagindex",
                "version": env!("CARGO_PKG_VERSION"),
                "command": cfg.command,
                "config": config,
                "error": message,
                "summary": { "exit_code": code },
            }),
        ),
    };
    if code != EXIT_OK {
        note(cfg, 0, &format!("exit {code}"));
    }
    let report = if cfg.json {
        let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
        s.push('\n');
        s
    } else {
        render_text(&report)
    };
    RunOutcome { code, report }
}

/// Indented `key: value` text.  Integers print exactly, floats in `%.6e`.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    render_into(&mut out, v, 0);
    out
}

fn scalar(v: &Value) -> Option<String> {
    Some(match v {
        Value::Null => "none".into(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.to_string(),
            (_, Some(u)) => u.to_string(),
            _ => format!("{:.6e}", n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => s.clone(),
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let items: Vec<String> = a.iter().filter_map(scalar).collect();
            format!("[{}]", items.join(", "))
        }
        Value::Array(a) if a.iter().all(|x| x.as_array().is_some_and(|r| r.iter().all(|y| !y.is_object() && !y.is_array()))) => {
            let rows: Vec<String> = a.iter().filter_map(scalar).collect();
            format!("[{}]", rows.join(", "))
        }
        _ => return None,
    })
}

fn render_into(out: &mut String, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_into(out, x, depth + 1);
                    }
                }
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}- [{i}] {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}- [{i}]\n"));
                        render_into(out, x, depth + 1);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_rendering_formats_numbers() {
        let v = json!({"a": 2, "b": 0.5, "c": {"d": [1, 2]}, "e": [{"f": -1}]});
        assert_eq!(render_text(&v), "a: 2\nb: 5.000000e-1\nc:\n  d: [1, 2]\ne:\n  - [0]\n    f: -1\n");
    }

    #[test]
    fn identity_failure_takes_precedence() {
        let mut v = Verdict::new();
        v.record("x", &[], false);
        assert_eq!(v.code(), EXIT_CONVERGENCE);
        v.record("y", &[IdentityCheck::equal("z", 1, 2)], true);
        assert_eq!(v.code(), EXIT_IDENTITY);
    }

    #[test]
    fn missing_input_is_a_parse_error() {
        let out = run(&RunConfig::new(Command::Morse, "/nonexistent/problem.toml"));
        assert_eq!(out.code, EXIT_PARSE);
    }
}

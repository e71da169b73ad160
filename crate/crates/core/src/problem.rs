//! TOML problem files.
//!
//! ```toml
//! n = 1
//! T = "pi"
//!
//! [coefficients]
//! P = { constant = [[1.0]] }
//! R = { constant = [[-1.0]] }
//!
//! [boundary]
//! kind = "separated"
//! params = { start = [[0.0], [1.0]], end = [[1.0], [1.0]] }
//! ```
//!
//! Matrices are row-major lists; complex entries are `[re, im]` pairs.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::linalg::{CMatrix, C64};
use crate::sturm_liouville::{self, BoundaryCondition, BoundaryKind, CoefficientPath, Discretization, MatrixFunction};
use crate::symplectic_core::{LagrangianFrame, SymplecticSpace};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemError {
    Parse(String),
    Validation { path: String, message: String },
}

impl std::fmt::Display for ProblemError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Parse(m) => write!(f, "parse error: {m}"),
            Self::Validation { path, message } => write!(f, "invalid field `{path}`: {message}"),
        }
    }
}

impl std::error::Error for ProblemError {}

fn invalid(path: &str, message: impl std::fmt::Display) -> ProblemError {
    ProblemError::Validation { path: path.into(), message: message.to_string() }
}

/// A matrix entry: a real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(&self) -> C64 {
        match *self {
            Self::Real(r) => C64::new(r, 0.0),
            Self::Complex([re, im]) => C64::new(re, im),
        }
    }
}

pub type MatrixSpec = Vec<Vec<Entry>>;

fn complex_matrix(m: &MatrixSpec, path: &str) -> Result<CMatrix, ProblemError> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 {
        return Err(invalid(path, "matrix is empty"));
    }
    if m.iter().any(|r| r.len() != cols) {
        return Err(invalid(path, "rows have different lengths"));
    }
    let out = CMatrix::from_fn(rows, cols, |i, j| m[i][j].value());
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(invalid(path, "entries must be finite"));
    }
    Ok(out)
}

fn real_matrix(m: &MatrixSpec, path: &str) -> Result<DMatrix<f64>, ProblemError> {
    let c = complex_matrix(m, path)?;
    if c.iter().any(|z| z.im != 0.0) {
        return Err(invalid(path, "coefficient matrices must be real"));
    }
    Ok(c.map(|z| z.re))
}

fn shaped(m: &MatrixSpec, rows: usize, cols: usize, path: &str) -> Result<CMatrix, ProblemError> {
    let c = complex_matrix(m, path)?;
    if c.shape() != (rows, cols) {
        return Err(invalid(path, format!("expected a {rows}x{cols} matrix, found {}x{}", c.nrows(), c.ncols())));
    }
    Ok(c)
}

/// A time given as a number or as an expression such as `"pi"`, `"2pi"`, `"3*pi/2"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeSpec {
    Number(f64),
    Expr(String),
}

impl TimeSpec {
    pub fn value(&self, path: &str) -> Result<f64, ProblemError> {
        let v = match self {
            Self::Number(x) => *x,
            Self::Expr(s) => parse_time(s).ok_or_else(|| invalid(path, format!("cannot read `{s}` as a time")))?,
        };
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(path, "must be positive"));
        }
        Ok(v)
    }
}

pub fn parse_time(s: &str) -> Option<f64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.to_string(), b.parse::<f64>().ok()?),
        None => (s.clone(), 1.0),
    };
    let value = match num.strip_suffix("pi") {
        Some(coef) => {
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            let k = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().ok()? };
            k * std::f64::consts::PI
        }
        None => num.parse::<f64>().ok()?,
    };
    if den == 0.0 {
        return None;
    }
    Some(value / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSpec {
    Constant(MatrixSpec),
    Fourier {
        #[serde(default)]
        constant: Option<MatrixSpec>,
        #[serde(default)]
        cos: Vec<MatrixSpec>,
        #[serde(default)]
        sin: Vec<MatrixSpec>,
        #[serde(default)]
        period: Option<TimeSpec>,
    },
    Grid {
        values: Vec<MatrixSpec>,
        #[serde(default)]
        period: Option<TimeSpec>,
    },
}

impl CoefficientSpec {
    fn build(&self, n: usize, t_len: f64, path: &str) -> Result<MatrixFunction, ProblemError> {
        let check = |m: &MatrixSpec, p: &str| -> Result<DMatrix<f64>, ProblemError> {
            let r = real_matrix(m, p)?;
            if r.shape() != (n, n) {
                return Err(invalid(p, format!("expected a {n}x{n} matrix")));
            }
            Ok(r)
        };
        match self {
            Self::Constant(m) => Ok(MatrixFunction::Constant(check(m, &format!("{path}.constant"))?)),
            Self::Fourier { constant, cos, sin, period } => {
                let c0 = match constant {
                    Some(m) => check(m, &format!("{path}.fourier.constant"))?,
                    None => DMatrix::zeros(n, n),
                };
                let cos = cos
                    .iter()
                    .enumerate()
                    .map(|(k, m)| check(m, &format!("{path}.fourier.cos[{k}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                let sin = sin
                    .iter()
                    .enumerate()
                    .map(|(k, m)| check(m, &format!("{path}.fourier.sin[{k}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                let period = match period {
                    Some(p) => p.value(&format!("{path}.fourier.period"))?,
                    None => t_len,
                };
                MatrixFunction::fourier(c0, cos, sin, period).map_err(|e| invalid(&format!("{path}.fourier"), e))
            }
            Self::Grid { values, period } => {
                let vals = values
                    .iter()
                    .enumerate()
                    .map(|(k, m)| check(m, &format!("{path}.grid.values[{k}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                let period = match period {
                    Some(p) => p.value(&format!("{path}.grid.period"))?,
                    None => t_len,
                };
                MatrixFunction::grid(vals, period).map_err(|e| invalid(&format!("{path}.grid"), e))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsSpec {
    #[serde(rename = "P")]
    pub p: CoefficientSpec,
    #[serde(rename = "Q", default)]
    pub q: Option<CoefficientSpec>,
    #[serde(rename = "R", default)]
    pub r: Option<CoefficientSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    Dirichlet,
    Neumann,
    Periodic,
    VSubspace { v: MatrixSpec },
    Separated { start: MatrixSpec, end: MatrixSpec },
    GraphSeparated { a_start: MatrixSpec, a_end: MatrixSpec },
    Frame { frame: MatrixSpec },
}

impl BoundarySpec {
    pub fn build(&self, n: usize, tol: &Tolerances) -> Result<BoundaryCondition, ProblemError> {
        let p = "boundary.params";
        let std = SymplecticSpace::standard(n);
        let lag = |m: &MatrixSpec, field: &str| -> Result<LagrangianFrame, ProblemError> {
            let path = format!("{p}.{field}");
            LagrangianFrame::new(std, shaped(m, 2 * n, n, &path)?, tol).map_err(|e| invalid(&path, e))
        };
        let kind = match self {
            Self::Dirichlet => BoundaryKind::Dirichlet,
            Self::Neumann => BoundaryKind::Neumann,
            Self::Periodic => BoundaryKind::Periodic,
            Self::VSubspace { v } => {
                let m = complex_matrix(v, &format!("{p}.v"))?;
                if m.nrows() != 2 * n {
                    return Err(invalid(&format!("{p}.v"), format!("V must have {} rows", 2 * n)));
                }
                BoundaryKind::VSubspace(m)
            }
            Self::Separated { start, end } => BoundaryKind::Separated(lag(start, "start")?, lag(end, "end")?),
            Self::GraphSeparated { a_start, a_end } => BoundaryKind::GraphSeparated(
                shaped(a_start, n, n, &format!("{p}.a_start"))?,
                shaped(a_end, n, n, &format!("{p}.a_end"))?,
            ),
            Self::Frame { frame } => {
                let path = format!("{p}.frame");
                let z = shaped(frame, 4 * n, 2 * n, &path)?;
                let raw = LagrangianFrame::new(SymplecticSpace::doubled(n), z, tol).map_err(|e| invalid(&path, e))?;
                return sturm_liouville::canonicalize_boundary(&raw, tol).map_err(|e| invalid(&path, e));
            }
        };
        sturm_liouville::named_boundary(n, kind, tol).map_err(|e| invalid(p, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationSpec {
    #[serde(rename = "N", default = "default_mesh")]
    pub mesh: usize,
    #[serde(rename = "M", default = "default_steps")]
    pub steps: usize,
}

fn default_mesh() -> usize {
    Discretization::default().mesh
}

fn default_steps() -> usize {
    Discretization::default().steps
}

impl Default for DiscretizationSpec {
    fn default() -> Self {
        Self { mesh: default_mesh(), steps: default_steps() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceSpec {
    Standard,
    Doubled,
}

/// Frames for the `triple` command: three give a triple index, four a Hörmander index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleSpec {
    #[serde(default = "default_space")]
    pub space: SpaceSpec,
    pub frames: Vec<MatrixSpec>,
}

fn default_space() -> SpaceSpec {
    SpaceSpec::Standard
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    /// Random subinterval splits checked for the subinterval bound.
    #[serde(default = "default_splits")]
    pub splits: usize,
    /// Random Lagrangian triples checked for the triple-index identities.
    #[serde(default = "default_random_triples")]
    pub random_triples: usize,
}

fn default_splits() -> usize {
    2
}

fn default_random_triples() -> usize {
    20
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self { splits: default_splits(), random_triples: default_random_triples() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: TimeSpec,
    #[serde(default)]
    pub brake: bool,
    pub coefficients: CoefficientsSpec,
    #[serde(default)]
    pub boundary: Option<BoundarySpec>,
    #[serde(default)]
    pub discretization: DiscretizationSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub triple: Option<TripleSpec>,
    #[serde(default)]
    pub verify: VerifySpec,
}

/// A validated problem ready for computation.
#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: ProblemFile,
    pub path: CoefficientPath,
    pub boundary: Option<BoundaryCondition>,
    pub discretization: Discretization,
    pub tolerances: Tolerances,
}

pub fn parse(text: &str) -> Result<ProblemFile, ProblemError> {
    let value: toml::Value = toml::from_str(text).map_err(|e| ProblemError::Parse(e.to_string()))?;
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        invalid(&path, e.into_inner())
    })
}

impl ProblemFile {
    pub fn build(&self) -> Result<Problem, ProblemError> {
        let n = self.n;
        if n == 0 || n > 8 {
            return Err(invalid("n", "must be between 1 and 8"));
        }
        let t_len = self.t.value("T")?;
        let tol = self.tolerances;
        validate_tolerances(&tol)?;
        let c = &self.coefficients;
        let zero = CoefficientSpec::Constant(vec![vec![Entry::Real(0.0); n]; n]);
        let p = c.p.build(n, t_len, "coefficients.P")?;
        let q = c.q.as_ref().unwrap_or(&zero).build(n, t_len, "coefficients.Q")?;
        let r = c.r.as_ref().unwrap_or(&zero).build(n, t_len, "coefficients.R")?;
        let path = CoefficientPath::new(n, t_len, p, q, r).map_err(|e| invalid("coefficients", e))?;
        let boundary = match &self.boundary {
            Some(b) => Some(b.build(n, &tol)?),
            None => None,
        };
        let d = self.discretization;
        if d.mesh < sturm_liouville::MIN_MESH {
            return Err(invalid("discretization.N", format!("must be at least {}", sturm_liouville::MIN_MESH)));
        }
        if d.steps < sturm_liouville::MIN_STEPS {
            return Err(invalid("discretization.M", format!("must be at least {}", sturm_liouville::MIN_STEPS)));
        }
        Ok(Problem {
            spec: self.clone(),
            path,
            boundary,
            discretization: Discretization { mesh: d.mesh, steps: d.steps },
            tolerances: tol,
        })
    }

    /// Frames of the `triple` section.
    pub fn triple_frames(&self) -> Result<Vec<LagrangianFrame>, ProblemError> {
        let spec = self.triple.as_ref().ok_or_else(|| invalid("triple", "section is required for this command"))?;
        let n = self.n;
        let (space, rows, cols) = match spec.space {
            SpaceSpec::Standard => (SymplecticSpace::standard(n), 2 * n, n),
            SpaceSpec::Doubled => (SymplecticSpace::doubled(n), 4 * n, 2 * n),
        };
        if !(3..=4).contains(&spec.frames.len()) {
            return Err(invalid("triple.frames", "give three or four frames"));
        }
        spec.frames
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let path = format!("triple.frames[{k}]");
                LagrangianFrame::new(space, shaped(m, rows, cols, &path)?, &self.tolerances).map_err(|e| invalid(&path, e))
            })
            .collect()
    }
}

fn validate_tolerances(t: &Tolerances) -> Result<(), ProblemError> {
    for (name, v) in [
        ("rank", t.rank),
        ("angle", t.angle),
        ("isotropy", t.isotropy),
        ("symplectic", t.symplectic),
        ("zero_band", t.zero_band),
        ("unstable_band", t.unstable_band),
        ("class_band", t.class_band),
    ] {
        if !(v > 0.0 && v < 1.0) {
            return Err(invalid(&format!("tolerances.{name}"), "must lie in (0, 1)"));
        }
    }
    if t.unstable_band <= t.zero_band {
        return Err(invalid("tolerances.unstable_band", "must exceed zero_band"));
    }
    Ok(())
}

pub fn load(text: &str) -> Result<Problem, ProblemError> {
    parse(text)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
n = 1
T = "pi"

[coefficients]
P = { constant = [[1.0]] }
R = { constant = [[-1.0]] }

[boundary]
kind = "separated"
params = { start = [[0.0], [1.0]], end = [[1.0], [1.0]] }
"#;

    #[test]
    fn times() {
        let pi = std::f64::consts::PI;
        assert_eq!(parse_time("pi"), Some(pi));
        assert_eq!(parse_time("2pi"), Some(2.0 * pi));
        assert_eq!(parse_time("3*pi/2"), Some(1.5 * pi));
        assert_eq!(parse_time("pi/2"), Some(0.5 * pi));
        assert_eq!(parse_time("1.25"), Some(1.25));
        assert_eq!(parse_time("tau"), None);
    }

    #[test]
    fn example_file_builds() {
        let p = load(EXAMPLE).unwrap();
        assert_eq!(p.boundary.unwrap().nu(), 2);
        assert_eq!(p.discretization.mesh, 256);
    }

    #[test]
    fn unit_boundary_without_params() {
        let text = EXAMPLE.replace("kind = \"separated\"\nparams = { start = [[0.0], [1.0]], end = [[1.0], [1.0]] }", "kind = \"dirichlet\"");
        assert_eq!(load(&text).unwrap().boundary.unwrap().nu(), 0);
    }

    #[test]
    fn syntax_errors_are_parse_errors() {
        assert!(matches!(parse("n = = 1"), Err(ProblemError::Parse(_))));
    }

    #[test]
    fn shape_errors_carry_the_field_path() {
        let text = EXAMPLE.replace("R = { constant = [[-1.0]] }", "R = { constant = [[-1.0, 0.0]] }");
        match load(&text) {
            Err(ProblemError::Validation { path, .. }) => assert_eq!(path, "coefficients.R.constant"),
            other => panic!("{other:?}"),
        }
        let text = EXAMPLE.replace("R = { constant = [[-1.0]] }", "R = { fourier = { cos = \"x\" } }");
        match load(&text) {
            Err(ProblemError::Validation { path, .. }) => assert!(path.starts_with("coefficients.R"), "{path}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn legendre_failure_is_a_validation_error() {
        let text = EXAMPLE.replace("P = { constant = [[1.0]] }", "P = { constant = [[-1.0]] }");
        assert!(matches!(load(&text), Err(ProblemError::Validation { .. })));
    }
}

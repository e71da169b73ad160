//! Coefficient paths, the Hamiltonian flow, self-adjoint boundary conditions
//! and the index relations between Morse indices, conjugate points and
//! Maslov indices.
//!
//! The operator is `-(P x' + Q x)' + Q^T x' + R x` on `[0, T]` and the
//! Hamiltonian variables are `z = (y, x)` with `y = P x' + Q x`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian_forms::IdentityCheck;
use crate::index_theory::{self, LagrangianPath, MaslovIndex, SymplecticFlow, TransportedPath, GraphPath};
use crate::linalg::{self, c, frobenius, full_svd, hstack, to_complex, vstack, CMatrix};
use crate::symplectic_core::{
    doubled_basis_change, graph_frame, intersection_dim, j_matrix, LagrangianFrame, SymplecticMatrix,
    SymplecticSpace,
};
use crate::tolerances::Tolerances;

pub const MAX_FOURIER_MODES: usize = 32;
pub const MIN_GRID_SAMPLES: usize = 65;
const CHECK_POINTS: usize = 257;

/// A real matrix-valued function of time.
#[derive(Debug, Clone)]
pub enum MatrixFunction {
    Constant(DMatrix<f64>),
    /// `c0 + sum_k a_k cos(2 pi k t / L) + b_k sin(2 pi k t / L)`.
    Fourier { constant: DMatrix<f64>, cos: Vec<DMatrix<f64>>, sin: Vec<DMatrix<f64>>, period: f64 },
    /// Natural cubic spline through uniform samples on `[0, L]`, extended periodically.
    Grid { period: f64, values: Vec<DMatrix<f64>>, second: Vec<DMatrix<f64>> },
}

impl MatrixFunction {
    pub fn fourier(constant: DMatrix<f64>, cos: Vec<DMatrix<f64>>, sin: Vec<DMatrix<f64>>, period: f64) -> Result<Self> {
        if cos.len() > MAX_FOURIER_MODES || sin.len() > MAX_FOURIER_MODES {
            return Err(Error::Invalid(format!("at most {MAX_FOURIER_MODES} Fourier modes are supported")));
        }
        if !(period > 0.0) {
            return Err(Error::Invalid("Fourier period must be positive".into()));
        }
        let shape = constant.shape();
        if cos.iter().chain(sin.iter()).any(|m| m.shape() != shape) {
            return Err(Error::Dimension("Fourier coefficients differ in shape".into()));
        }
        Ok(Self::Fourier { constant, cos, sin, period })
    }

    pub fn grid(values: Vec<DMatrix<f64>>, period: f64) -> Result<Self> {
        if values.len() < MIN_GRID_SAMPLES {
            return Err(Error::Invalid(format!("grid input needs at least {MIN_GRID_SAMPLES} samples")));
        }
        if !(period > 0.0) {
            return Err(Error::Invalid("grid period must be positive".into()));
        }
        let shape = values[0].shape();
        if values.iter().any(|m| m.shape() != shape) {
            return Err(Error::Dimension("grid samples differ in shape".into()));
        }
        let h = period / (values.len() - 1) as f64;
        let second = natural_spline_second(&values, h);
        Ok(Self::Grid { period, values, second })
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            Self::Constant(m) => m.shape(),
            Self::Fourier { constant, .. } => constant.shape(),
            Self::Grid { values, .. } => values[0].shape(),
        }
    }

    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        match self {
            Self::Constant(m) => m.clone(),
            Self::Fourier { constant, cos, sin, period } => {
                let w = 2.0 * std::f64::consts::PI * t / period;
                let mut out = constant.clone();
                for (k, a) in cos.iter().enumerate() {
                    out += a * ((k + 1) as f64 * w).cos();
                }
                for (k, b) in sin.iter().enumerate() {
                    out += b * ((k + 1) as f64 * w).sin();
                }
                out
            }
            Self::Grid { period, values, second } => {
                let m = values.len() - 1;
                let h = period / m as f64;
                let tt = t.rem_euclid(*period);
                let i = ((tt / h).floor() as usize).min(m - 1);
                let a = (tt - i as f64 * h) / h;
                let b = 1.0 - a;
                let h2 = h * h / 6.0;
                &values[i] * b + &values[i + 1] * a
                    + (&second[i] * (b * b * b - b) + &second[i + 1] * (a * a * a - a)) * h2
            }
        }
    }
}

/// Second derivatives of the natural cubic spline through uniform samples.
fn natural_spline_second(values: &[DMatrix<f64>], h: f64) -> Vec<DMatrix<f64>> {
    let m = values.len() - 1;
    let (r, c) = values[0].shape();
    let mut out = vec![DMatrix::zeros(r, c); m + 1];
    if m < 2 {
        return out;
    }
    // Thomas algorithm for 4 M_i + M_{i-1} + M_{i+1} = 6 (v_{i+1} - 2 v_i + v_{i-1}) / h^2.
    let mut diag = vec![4.0; m - 1];
    let mut rhs: Vec<DMatrix<f64>> =
        (1..m).map(|i| (&values[i + 1] - &values[i] * 2.0 + &values[i - 1]) * (6.0 / (h * h))).collect();
    for i in 1..m - 1 {
        let w = 1.0 / diag[i - 1];
        diag[i] -= w;
        let prev = rhs[i - 1].clone();
        rhs[i] -= prev * w;
    }
    out[m - 1] = &rhs[m - 2] / diag[m - 2];
    for i in (1..m - 1).rev() {
        out[i] = (&rhs[i - 1] - &out[i + 1]) / diag[i - 1];
    }
    out
}

/// `P`, `Q`, `R` on `[0, length]`, read from the underlying functions at `offset + t`.
#[derive(Debug, Clone)]
pub struct CoefficientPath {
    n: usize,
    length: f64,
    offset: f64,
    p: MatrixFunction,
    q: MatrixFunction,
    r: MatrixFunction,
}

impl CoefficientPath {
    pub fn new(n: usize, length: f64, p: MatrixFunction, q: MatrixFunction, r: MatrixFunction) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("dimension must be positive".into()));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Invalid("interval length must be positive".into()));
        }
        for (name, f) in [("P", &p), ("Q", &q), ("R", &r)] {
            if f.shape() != (n, n) {
                return Err(Error::Dimension(format!("{name} must be {n}x{n}")));
            }
        }
        let path = Self { n, length, offset: 0.0, p, q, r };
        path.validate()?;
        Ok(path)
    }

    /// Constant coefficients.
    pub fn constant(p: DMatrix<f64>, q: DMatrix<f64>, r: DMatrix<f64>, length: f64) -> Result<Self> {
        let n = p.nrows();
        Self::new(n, length, MatrixFunction::Constant(p), MatrixFunction::Constant(q), MatrixFunction::Constant(r))
    }

    /// `-x'' + r x = 0` for a scalar multiple of the identity.
    pub fn oscillator(n: usize, r: f64, length: f64) -> Result<Self> {
        Self::constant(DMatrix::identity(n, n), DMatrix::zeros(n, n), DMatrix::identity(n, n) * r, length)
    }

    fn validate(&self) -> Result<()> {
        for k in 0..CHECK_POINTS {
            let t = self.length * k as f64 / (CHECK_POINTS - 1) as f64;
            let p = self.p(t);
            let r = self.r(t);
            let pn = p.norm().max(1.0);
            if (&p - p.transpose()).norm() > 1e-10 * pn {
                return Err(Error::Invalid(format!("P is not symmetric at t = {t}")));
            }
            if (&r - r.transpose()).norm() > 1e-10 * r.norm().max(1.0) {
                return Err(Error::Invalid(format!("R is not symmetric at t = {t}")));
            }
            let min = p.clone().symmetric_eigen().eigenvalues.min();
            if min <= 1e-12 * pn {
                return Err(Error::Legendre { t, min_eigenvalue: min });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn p(&self, t: f64) -> DMatrix<f64> {
        self.p.eval(self.offset + t)
    }

    pub fn q(&self, t: f64) -> DMatrix<f64> {
        self.q.eval(self.offset + t)
    }

    pub fn r(&self, t: f64) -> DMatrix<f64> {
        self.r.eval(self.offset + t)
    }

    pub fn functions(&self) -> [&MatrixFunction; 3] {
        [&self.p, &self.q, &self.r]
    }

    /// The same coefficients on the subinterval `[a, b]`, re-based to start at 0.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        if !(0.0 <= a && a < b && b <= self.length + 1e-12) {
            return Err(Error::Invalid(format!("[{a}, {b}] is not a subinterval of [0, {}]", self.length)));
        }
        Ok(Self { offset: self.offset + a, length: b - a, ..self.clone() })
    }

    /// `B = [P^{-1}, -P^{-1} Q; -Q^T P^{-1}, Q^T P^{-1} Q - R]`.
    pub fn hamiltonian(&self, t: f64) -> Result<DMatrix<f64>> {
        let n = self.n;
        let p = self.p(t);
        let q = self.q(t);
        let pinv = p
            .try_inverse()
            .ok_or_else(|| Error::Legendre { t, min_eigenvalue: 0.0 })?;
        let pq = &pinv * &q;
        let mut b = DMatrix::zeros(2 * n, 2 * n);
        b.view_mut((0, 0), (n, n)).copy_from(&pinv);
        b.view_mut((0, n), (n, n)).copy_from(&(-&pq));
        b.view_mut((n, 0), (n, n)).copy_from(&(-pq.transpose()));
        b.view_mut((n, n), (n, n)).copy_from(&(q.transpose() * &pq - self.r(t)));
        Ok((&b + b.transpose()) * 0.5)
    }

    /// Scale of the index form on this interval, used for relative eigenvalue bands.
    pub fn operator_scale(&self) -> f64 {
        let w = std::f64::consts::PI / self.length;
        (0..CHECK_POINTS)
            .map(|k| {
                let t = self.length * k as f64 / (CHECK_POINTS - 1) as f64;
                self.p(t).norm() * w * w + self.q(t).norm() * w + self.r(t).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Fundamental solution `gamma' = J B gamma`, `gamma(0) = I`, on a uniform grid.
#[derive(Debug, Clone)]
pub struct FundamentalSolution {
    path: CoefficientPath,
    steps: usize,
    samples: Vec<DMatrix<f64>>,
    /// Largest relative symplecticity residual over the grid.
    pub residual: f64,
    /// Step-halving estimate of the error of `gamma(T)`.
    pub convergence_estimate: f64,
}

fn rk4_step(path: &CoefficientPath, j: &DMatrix<f64>, t: f64, h: f64, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let f = |s: f64, x: &DMatrix<f64>| -> Result<DMatrix<f64>> { Ok(j * path.hamiltonian(s)? * x) };
    let k1 = f(t, g)?;
    let k2 = f(t + 0.5 * h, &(g + &k1 * (0.5 * h)))?;
    let k3 = f(t + 0.5 * h, &(g + &k2 * (0.5 * h)))?;
    let k4 = f(t + h, &(g + &k3 * h))?;
    Ok(g + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0))
}

fn integrate(path: &CoefficientPath, steps: usize) -> Result<Vec<DMatrix<f64>>> {
    let n = path.n();
    let j = j_matrix(n);
    let h = path.length() / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut g = DMatrix::identity(2 * n, 2 * n);
    out.push(g.clone());
    for i in 0..steps {
        g = rk4_step(path, &j, i as f64 * h, h, &g)?;
        out.push(g.clone());
    }
    Ok(out)
}

pub const MIN_STEPS: usize = 64;
const MAX_STEP_DOUBLINGS: usize = 3;

pub fn fundamental_solution(path: &CoefficientPath, steps: usize, tol: &Tolerances) -> Result<FundamentalSolution> {
    if steps < MIN_STEPS {
        return Err(Error::Invalid(format!("at least {MIN_STEPS} integration steps are required")));
    }
    let mut m = steps;
    for attempt in 0..=MAX_STEP_DOUBLINGS {
        let samples = integrate(path, m)?;
        let residual = samples.iter().map(crate::symplectic_core::symplectic_residual).fold(0.0, f64::max);
        if residual <= tol.symplectic {
            let half = integrate(path, m / 2)?;
            let convergence_estimate = (&samples[m] - &half[m / 2]).norm() / 15.0;
            return Ok(FundamentalSolution { path: path.clone(), steps: m, samples, residual, convergence_estimate });
        }
        if attempt == MAX_STEP_DOUBLINGS {
            return Err(Error::Integration(format!("symplectic residual {residual:e} with {m} steps")));
        }
        m *= 2;
    }
    unreachable!()
}

impl FundamentalSolution {
    pub fn path(&self) -> &CoefficientPath {
        &self.path
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step(&self) -> f64 {
        self.path.length() / self.steps as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..=self.steps).map(|i| i as f64 * self.step()).collect()
    }

    pub fn grid_matrices(&self) -> &[DMatrix<f64>] {
        &self.samples
    }

    pub fn at_end(&self) -> &DMatrix<f64> {
        &self.samples[self.steps]
    }

    pub fn monodromy(&self, tol: &Tolerances) -> Result<SymplecticMatrix> {
        let looser = Tolerances { symplectic: tol.symplectic.max(self.residual * 2.0), ..*tol };
        SymplecticMatrix::new(self.at_end().clone(), &looser)
    }

    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        let h = self.step();
        let t = t.clamp(0.0, self.path.length());
        let i = ((t / h).floor() as usize).min(self.steps);
        let dt = t - i as f64 * h;
        if dt <= 1e-14 * self.path.length() || i == self.steps {
            return self.samples[i].clone();
        }
        rk4_step(&self.path, &j_matrix(self.path.n()), i as f64 * h, dt, &self.samples[i])
            .unwrap_or_else(|_| self.samples[i].clone())
    }
}

const PATH_SEGMENTS: usize = 128;

impl SymplecticFlow for FundamentalSolution {
    fn n(&self) -> usize {
        self.path.n()
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, self.path.length())
    }

    fn samples(&self) -> Vec<f64> {
        let stride = (self.steps / PATH_SEGMENTS).max(1);
        let h = self.step();
        let mut s: Vec<f64> = (0..=self.steps).step_by(stride).map(|i| i as f64 * h).collect();
        if (self.steps % stride) != 0 {
            s.push(self.path.length());
        }
        s
    }

    fn matrix(&self, t: f64) -> DMatrix<f64> {
        self.eval(t)
    }

    fn derivative(&self, t: f64) -> DMatrix<f64> {
        let b = self.path.hamiltonian(t).unwrap_or_else(|_| DMatrix::zeros(2 * self.n(), 2 * self.n()));
        j_matrix(self.n()) * b * self.eval(t)
    }
}

/// How a boundary condition was specified.
#[derive(Debug, Clone)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
    Periodic,
    /// `Lambda_V` from a subspace `V` of the `(x(0), x(T))` space.
    VSubspace(CMatrix),
    /// `Lambda_s (+) Lambda_e` from Lagrangians of `C^{2n}`.
    Separated(LagrangianFrame, LagrangianFrame),
    /// `y(0) = A_s x(0)`, `y(T) = A_e x(T)`.
    GraphSeparated(CMatrix, CMatrix),
    Frame,
}

impl BoundaryKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Dirichlet => "dirichlet",
            Self::Neumann => "neumann",
            Self::Periodic => "periodic",
            Self::VSubspace(_) => "v_subspace",
            Self::Separated(..) => "separated",
            Self::GraphSeparated(..) => "graph_separated",
            Self::Frame => "frame",
        }
    }
}

/// A self-adjoint boundary condition `(z(0), z(T)) in Lambda_0` together with
/// its canonical form.  In the coordinates `p = (-y(0), y(T))`,
/// `q = (x(0), x(T))` the condition reads `q in V` and `p - A q in V^perp`.
#[derive(Debug, Clone)]
pub struct BoundaryCondition {
    pub kind: BoundaryKind,
    pub raw: LagrangianFrame,
    /// `dim(Lambda_0 ∩ Lambda_D)`.
    pub k: usize,
    /// Orthonormal basis of `V(Lambda_0)` in `(x(0), x(T))` coordinates.
    pub v: CMatrix,
    /// Hermitian form on `V` in the basis `v`.
    pub a: CMatrix,
    /// Relative distance between the raw and rebuilt frames.
    pub rebuild_residual: f64,
}

impl BoundaryCondition {
    pub fn n(&self) -> usize {
        self.raw.space().base_dim()
    }

    pub fn nu(&self) -> usize {
        self.v.ncols()
    }

    /// Frame rebuilt from `(V, A)`.
    pub fn canonical_frame(&self) -> CMatrix {
        rebuild(&self.v, &self.a)
    }

    pub fn separated_parts(&self) -> Option<(LagrangianFrame, LagrangianFrame)> {
        let n = self.n();
        let std = SymplecticSpace::standard(n);
        match &self.kind {
            BoundaryKind::Separated(s, e) => Some((s.clone(), e.clone())),
            BoundaryKind::GraphSeparated(a_s, a_e) => {
                let tol = Tolerances::default();
                Some((
                    LagrangianFrame::new(std, vstack(&[a_s, &linalg::eye(n)]), &tol).ok()?,
                    LagrangianFrame::new(std, vstack(&[a_e, &linalg::eye(n)]), &tol).ok()?,
                ))
            }
            BoundaryKind::Dirichlet => Some((LagrangianFrame::dirichlet(std), LagrangianFrame::dirichlet(std))),
            BoundaryKind::Neumann => Some((LagrangianFrame::neumann(std), LagrangianFrame::neumann(std))),
            _ => None,
        }
    }
}

fn from_s_coords(n: usize, w: &CMatrix) -> CMatrix {
    to_complex(&doubled_basis_change(n)) * w
}

fn rebuild(v: &CMatrix, a: &CMatrix) -> CMatrix {
    let m = v.nrows();
    let n = m / 2;
    let nu = v.ncols();
    let perp = orthogonal_complement(v);
    let mut w = CMatrix::zeros(2 * m, m);
    w.view_mut((0, 0), (m, m - nu)).copy_from(&perp);
    w.view_mut((0, m - nu), (m, nu)).copy_from(&(v * a));
    w.view_mut((m, m - nu), (m, nu)).copy_from(v);
    from_s_coords(n, &w)
}

fn orthogonal_complement(v: &CMatrix) -> CMatrix {
    let m = v.nrows();
    if v.ncols() == 0 {
        return linalg::eye(m);
    }
    linalg::null_space(&v.adjoint(), 1e-10)
}

/// Boundary condition `q in V`, `p - A q in V^perp` from orthonormal `v`
/// and Hermitian `a` on `V`.
pub fn boundary_from_canonical(v: &CMatrix, a: &CMatrix, tol: &Tolerances) -> Result<BoundaryCondition> {
    let m = v.nrows();
    if m % 2 != 0 || m == 0 || v.ncols() > m || a.nrows() != v.ncols() || a.ncols() != v.ncols() {
        return Err(Error::Dimension("V must sit in C^{2n} and A must be square on V".into()));
    }
    let raw = LagrangianFrame::new(SymplecticSpace::doubled(m / 2), rebuild(v, a), tol)?;
    canonicalize_boundary(&raw, tol)
}

pub fn canonicalize_boundary(raw: &LagrangianFrame, tol: &Tolerances) -> Result<BoundaryCondition> {
    canonicalize_with_kind(raw, BoundaryKind::Frame, tol)
}

fn canonicalize_with_kind(raw: &LagrangianFrame, kind: BoundaryKind, tol: &Tolerances) -> Result<BoundaryCondition> {
    let space = raw.space();
    if space.kind() != crate::symplectic_core::FormKind::Doubled {
        return Err(Error::Dimension("boundary conditions live in the doubled space".into()));
    }
    let n = space.base_dim();
    let m = 2 * n;
    let w = to_complex(&doubled_basis_change(n).transpose()) * raw.basis();
    let p = w.rows(0, m).into_owned();
    let q = w.rows(m, m).into_owned();
    let svd = full_svd(&q);
    let threshold = tol.rank.max(1e-10);
    let nu = svd.sigma.iter().filter(|&&s| s > threshold).count();
    let v = svd.u.columns(0, nu).into_owned();
    let mut winv = CMatrix::zeros(m, nu);
    for j in 0..nu {
        let col = svd.v.column(j) / c(svd.sigma[j]);
        winv.set_column(j, &col);
    }
    let a_raw = v.adjoint() * &p * winv;
    let herm = if nu == 0 { 0.0 } else { frobenius(&(&a_raw - a_raw.adjoint())) / frobenius(&a_raw).max(1.0) };
    if herm > 1e-6 {
        return Err(Error::NotHermitian(herm));
    }
    let a = linalg::symmetrize(&a_raw);
    let k = intersection_dim(raw, &LagrangianFrame::dirichlet(space), tol)?;
    if k != m - nu {
        return Err(Error::DegenerateIntersection(format!(
            "dim(L0 ∩ L_D) = {k} but the trace space has dimension {nu}"
        )));
    }
    let rebuilt = rebuild(&v, &a);
    let both = hstack(&[raw.basis(), &rebuilt]);
    let rank = linalg::rank(&both, tol.rank.max(1e-9));
    if rank != m {
        return Err(Error::Numerical("canonical boundary frame does not reproduce the condition".into()));
    }
    let rq = rebuilt.clone().qr().q();
    let proj = raw.basis() - &rq * (rq.adjoint() * raw.basis());
    Ok(BoundaryCondition { kind, raw: raw.clone(), k, v, a, rebuild_residual: frobenius(&proj) })
}

fn hermitian_input(a: &CMatrix, n: usize, name: &str) -> Result<()> {
    if a.shape() != (n, n) {
        return Err(Error::Dimension(format!("{name} must be {n}x{n}")));
    }
    let r = linalg::hermitian_residual(a);
    if r > 1e-10 {
        return Err(Error::NotHermitian(r));
    }
    Ok(())
}

/// Boundary condition of the given kind for the `n`-dimensional problem.
pub fn named_boundary(n: usize, kind: BoundaryKind, tol: &Tolerances) -> Result<BoundaryCondition> {
    let doubled = SymplecticSpace::doubled(n);
    let raw = match &kind {
        BoundaryKind::Dirichlet => LagrangianFrame::dirichlet(doubled),
        BoundaryKind::Neumann => LagrangianFrame::neumann(doubled),
        BoundaryKind::Periodic => LagrangianFrame::periodic(n),
        BoundaryKind::VSubspace(v) => {
            if v.nrows() != 2 * n {
                return Err(Error::Dimension(format!("V must be a subspace of C^{}", 2 * n)));
            }
            let basis = linalg::column_space(v, tol.rank);
            LagrangianFrame::new(doubled, rebuild(&basis, &CMatrix::zeros(basis.ncols(), basis.ncols())), tol)?
        }
        BoundaryKind::Separated(s, e) => {
            for f in [s, e] {
                if f.space() != SymplecticSpace::standard(n) {
                    return Err(Error::Dimension(format!("separated parts must be Lagrangians of C^{}", 2 * n)));
                }
            }
            LagrangianFrame::direct_sum(&s.reinterpret(SymplecticSpace::negated(n))?, e)?
        }
        BoundaryKind::GraphSeparated(a_s, a_e) => {
            hermitian_input(a_s, n, "A_s")?;
            hermitian_input(a_e, n, "A_e")?;
            let std = SymplecticSpace::standard(n);
            let s = LagrangianFrame::new(std, vstack(&[a_s, &linalg::eye(n)]), tol)?;
            let e = LagrangianFrame::new(std, vstack(&[a_e, &linalg::eye(n)]), tol)?;
            LagrangianFrame::direct_sum(&s.reinterpret(SymplecticSpace::negated(n))?, &e)?
        }
        BoundaryKind::Frame => return Err(Error::Invalid("raw frames go through canonicalize_boundary".into())),
    };
    canonicalize_with_kind(&raw, kind, tol)
}

/// Result of the finite-element Morse count.
#[derive(Debug, Clone, Serialize)]
pub struct MorseIndex {
    pub negative: usize,
    pub zero: usize,
    /// Coarse mesh of the pair that produced the counts.
    pub mesh: usize,
    /// Counts agree between the mesh pair and the near-zero band is clean.
    pub stable: bool,
    /// True when the first mesh pair was not stable and a finer pair was tried.
    pub escalated: bool,
    /// Extrapolated eigenvalues found in the window around zero.
    pub near_zero: Vec<f64>,
    pub scale: f64,
}

/// Block arrow structure of `K - sigma M` on continuous piecewise-linear elements.
struct Assembly {
    n: usize,
    nodes: usize,
    h: f64,
    diag: Vec<CMatrix>,
    /// `K(i, i+1)`.
    off: Vec<CMatrix>,
    v0: CMatrix,
    vt: CMatrix,
    a: CMatrix,
}

const GAUSS: [(f64, f64); 3] = [
    (0.112_701_665_379_258_3, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

impl Assembly {
    fn new(path: &CoefficientPath, bc: &BoundaryCondition, nodes: usize) -> Self {
        let n = path.n();
        let h = path.length() / nodes as f64;
        let mut diag = vec![CMatrix::zeros(n, n); nodes + 1];
        let mut off = Vec::with_capacity(nodes);
        for e in 0..nodes {
            let t0 = e as f64 * h;
            // Element blocks k[a][b] for local shape functions 1 - s and s.
            let mut k = [[DMatrix::<f64>::zeros(n, n), DMatrix::zeros(n, n)], [DMatrix::zeros(n, n), DMatrix::zeros(n, n)]];
            for (s, w) in GAUSS {
                let p = path.p(t0 + s * h);
                let q = path.q(t0 + s * h);
                let r = path.r(t0 + s * h);
                let phi = [1.0 - s, s];
                let dphi = [-1.0 / h, 1.0 / h];
                for a in 0..2 {
                    for b in 0..2 {
                        k[a][b] += (&p * (dphi[a] * dphi[b]) + &q * (dphi[a] * phi[b]) + q.transpose() * (phi[a] * dphi[b])
                            + &r * (phi[a] * phi[b]))
                            * (w * h);
                    }
                }
            }
            diag[e] += to_complex(&k[0][0]);
            diag[e + 1] += to_complex(&k[1][1]);
            off.push(to_complex(&k[0][1]));
        }
        let v0 = bc.v.rows(0, n).into_owned();
        let vt = bc.v.rows(n, n).into_owned();
        Self { n, nodes, h, diag, off, v0, vt, a: bc.a.clone() }
    }

    fn mass_diag(&self, i: usize) -> f64 {
        if i == 0 || i == self.nodes {
            self.h / 3.0
        } else {
            2.0 * self.h / 3.0
        }
    }

    /// Number of eigenvalues of the pencil below `sigma`, or `None` at a singular pivot.
    fn count_below_exact(&self, sigma: f64) -> Option<usize> {
        let n = self.n;
        let id = linalg::eye(n);
        let moff = &id * c(sigma * self.h / 6.0);
        let last = self.nodes - 1;
        let mut hcc = self.v0.adjoint() * (&self.diag[0] - &id * c(sigma * self.mass_diag(0))) * &self.v0
            + self.vt.adjoint() * (&self.diag[self.nodes] - &id * c(sigma * self.mass_diag(self.nodes))) * &self.vt
            - &self.a;
        let mut d = &self.diag[1] - &id * c(sigma * self.mass_diag(1));
        let mut g = (self.off[0].adjoint() - &moff) * &self.v0;
        let mut negative = 0;
        for k in 1..=last {
            if k == last {
                g += (&self.off[last] - &moff) * &self.vt;
            }
            let (eigs, _) = linalg::hermitian_eigen(&d);
            let big = eigs.iter().fold(0.0f64, |m, e| m.max(e.abs()));
            if eigs.iter().any(|e| e.abs() <= 1e-13 * big.max(f64::MIN_POSITIVE)) {
                return None;
            }
            negative += eigs.iter().filter(|&&e| e < 0.0).count();
            let dinv = d.clone().try_inverse()?;
            hcc -= g.adjoint() * &dinv * &g;
            if k < last {
                let l = &self.off[k] - &moff;
                let lt = l.adjoint();
                d = &self.diag[k + 1] - &id * c(sigma * self.mass_diag(k + 1)) - &lt * &dinv * &l;
                g = -(&lt * &dinv * &g);
            }
        }
        if hcc.nrows() > 0 {
            let (eigs, _) = linalg::hermitian_eigen(&hcc);
            let big = eigs.iter().fold(0.0f64, |m, e| m.max(e.abs()));
            if eigs.iter().any(|e| e.abs() <= 1e-13 * big.max(f64::MIN_POSITIVE)) {
                return None;
            }
            negative += eigs.iter().filter(|&&e| e < 0.0).count();
        }
        Some(negative)
    }

    fn count_below(&self, sigma: f64, scale: f64) -> usize {
        let mut shift = 1e-12 * scale.max(1e-300);
        let mut s = sigma;
        loop {
            if let Some(v) = self.count_below_exact(s) {
                return v;
            }
            s = sigma + shift;
            shift *= 4.0;
        }
    }

    /// The `k`-th eigenvalue (from 0), given `count(lo) <= k < count(hi)`.
    fn kth(&self, k: usize, mut lo: f64, mut hi: f64, scale: f64, eps: f64) -> f64 {
        while hi - lo > eps {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid, scale) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

const WINDOW: f64 = 1e-2;
pub const MIN_MESH: usize = 16;

struct PairResult {
    negative: usize,
    zero: usize,
    stable: bool,
    near_zero: Vec<f64>,
}

fn mesh_pair(path: &CoefficientPath, bc: &BoundaryCondition, coarse_n: usize, scale: f64, tol: &Tolerances) -> PairResult {
    let coarse = Assembly::new(path, bc, coarse_n);
    let fine = Assembly::new(path, bc, 2 * coarse_n);
    let w = WINDOW * scale;
    let band = tol.zero_band * scale;
    let flagged_edge = tol.unstable_band * scale;
    let eps = 1e-3 * band;
    let lo = fine.count_below(-w, scale);
    let hi = fine.count_below(w, scale);
    let mut near_zero = vec![];
    for k in lo..hi {
        let lf = fine.kth(k, -w, w, scale, eps);
        let mut lower = lf - w;
        while coarse.count_below(lower, scale) > k {
            lower -= w;
        }
        let mut upper = w;
        while coarse.count_below(upper, scale) <= k {
            upper = upper.abs() * 2.0 + w;
        }
        let lc = coarse.kth(k, lower, upper, scale, eps);
        near_zero.push((4.0 * lf - lc) / 3.0);
    }
    let negative = lo + near_zero.iter().filter(|&&l| l < -band).count();
    let zero = near_zero.iter().filter(|&&l| l.abs() <= band).count();
    let flagged = near_zero.iter().filter(|&&l| l.abs() > band && l.abs() <= flagged_edge).count();
    let stable = flagged == 0
        && coarse.count_below(-band, scale) == negative
        && fine.count_below(-band, scale) == negative;
    PairResult { negative, zero, stable, near_zero }
}

/// Morse index `m^-` and nullity `m^0` of the index form
/// `int <P xi', eta'> + <Q xi, eta'> + <Q^T xi', eta> + <R xi, eta> - <A q_xi, q_eta>`
/// on trial functions whose traces `(xi(0), xi(T))` lie in `V`.
pub fn morse_index_discretized(path: &CoefficientPath, bc: &BoundaryCondition, mesh: usize, tol: &Tolerances) -> Result<MorseIndex> {
    if mesh < MIN_MESH {
        return Err(Error::Invalid(format!("mesh must have at least {MIN_MESH} elements")));
    }
    if bc.n() != path.n() {
        return Err(Error::Dimension("boundary condition and coefficients differ in dimension".into()));
    }
    let a_norm = if bc.nu() == 0 { 0.0 } else { frobenius(&bc.a) };
    let scale = path.operator_scale() + a_norm / path.length();
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let first = mesh_pair(path, bc, mesh, scale, tol);
    if first.stable {
        return Ok(MorseIndex {
            negative: first.negative,
            zero: first.zero,
            mesh,
            stable: true,
            escalated: false,
            near_zero: first.near_zero,
            scale,
        });
    }
    let second = mesh_pair(path, bc, 2 * mesh, scale, tol);
    Ok(MorseIndex {
        negative: second.negative,
        zero: second.zero,
        mesh: 2 * mesh,
        stable: second.stable,
        escalated: true,
        near_zero: second.near_zero,
        scale,
    })
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct ConjugatePoint {
    pub t: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugatePoints {
    /// Crossings strictly inside `(0, T)`.
    pub points: Vec<ConjugatePoint>,
    pub total: usize,
    /// `dim(gamma(T) L ∩ L_D)`, reported apart from the sum.
    pub end_degeneracy: usize,
}

fn interior_crossings(path: &dyn LagrangianPath, tol: &Tolerances) -> Result<ConjugatePoints> {
    let n = path.space().half_dim();
    let d = LagrangianFrame::dirichlet(SymplecticSpace::standard(n));
    let (_, crossings) = index_theory::maslov_index_crossings(path, &d, tol)?;
    let mut points = vec![];
    let mut end_degeneracy = 0;
    for cr in crossings {
        match cr.position {
            index_theory::CrossingPosition::Interior => {
                if cr.inertia.negative > 0 {
                    return Err(Error::DegenerateHamiltonian(format!("indefinite crossing form at t = {}", cr.t)));
                }
                points.push(ConjugatePoint { t: cr.t, multiplicity: cr.dim });
            }
            index_theory::CrossingPosition::End => end_degeneracy = cr.dim,
            index_theory::CrossingPosition::Start => {}
        }
    }
    let total = points.iter().map(|p| p.multiplicity).sum();
    Ok(ConjugatePoints { points, total, end_degeneracy })
}

/// Times in `(0, T)` where `gamma(t) L_D` meets `L_D`, with multiplicities.
pub fn conjugate_points_dirichlet(fs: &FundamentalSolution, tol: &Tolerances) -> Result<ConjugatePoints> {
    let d = LagrangianFrame::dirichlet(SymplecticSpace::standard(fs.n()));
    interior_crossings(&TransportedPath { flow: fs, reference: d }, tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparatedCount {
    pub conjugate: ConjugatePoints,
    /// `i(gamma(T) L_s, L_e, L_D)`.
    pub correction: usize,
    pub morse: usize,
}

/// `L_s`-conjugate points and the triple-index correction at the end point.
pub fn lambda_s_conjugate_points(
    fs: &FundamentalSolution,
    start: &LagrangianFrame,
    end: &LagrangianFrame,
    tol: &Tolerances,
) -> Result<SeparatedCount> {
    let n = fs.n();
    let std = SymplecticSpace::standard(n);
    let start = start.reinterpret(std)?;
    let conjugate = interior_crossings(&TransportedPath { flow: fs, reference: start.clone() }, tol)?;
    let mono = fs.monodromy(tol)?;
    let g_start = crate::symplectic_core::apply(&mono, &start, &lenient(tol))?;
    let correction = index_theory::triple_index(&g_start, end, &LagrangianFrame::dirichlet(std), tol)?;
    Ok(SeparatedCount { morse: conjugate.total + correction, conjugate, correction })
}

fn lenient(tol: &Tolerances) -> Tolerances {
    Tolerances { isotropy: tol.isotropy.max(1e-6), ..*tol }
}

/// `i(Gr(gamma(T)), L0, L_D)` in the doubled space.
pub fn triple_correction(fs: &FundamentalSolution, bc: &BoundaryCondition, tol: &Tolerances) -> Result<usize> {
    let mono = fs.monodromy(tol)?;
    let gr = graph_frame(&mono, &lenient(tol))?.graph;
    let d = LagrangianFrame::dirichlet(SymplecticSpace::doubled(fs.n()));
    index_theory::triple_index(&gr, &bc.raw, &d, tol)
}

/// `m^-(L0) = m^-(L_D) + i(Gr(gamma(T)), L0, L_D)`.
pub fn morse_from_dirichlet(fs: &FundamentalSolution, bc: &BoundaryCondition, dirichlet_morse: usize, tol: &Tolerances) -> Result<usize> {
    Ok(dirichlet_morse + triple_correction(fs, bc, tol)?)
}

/// `dim(Gr(gamma(T)) ∩ L0)`: the solutions satisfying the boundary condition.
pub fn solution_kernel_dim(fs: &FundamentalSolution, bc: &BoundaryCondition, tol: &Tolerances) -> Result<usize> {
    let mono = fs.monodromy(tol)?;
    let gr = graph_frame(&mono, &lenient(tol))?.graph;
    intersection_dim(&gr, &bc.raw, &lenient(tol))
}

/// Maslov index of `t -> Gr(gamma(t))` against `L0`.
pub fn maslov_of_solution(fs: &FundamentalSolution, bc: &BoundaryCondition, tol: &Tolerances) -> Result<MaslovIndex> {
    index_theory::maslov_index(&GraphPath { flow: fs }, &bc.raw, tol)
}

/// `n - i(Gr(I), L0, L_D)`: the difference between Maslov and Morse indices.
pub fn morse_maslov_difference(bc: &BoundaryCondition, tol: &Tolerances) -> Result<i64> {
    let n = bc.n();
    let d = LagrangianFrame::dirichlet(SymplecticSpace::doubled(n));
    let t = index_theory::triple_index(&LagrangianFrame::periodic(n), &bc.raw, &d, tol)?;
    Ok(n as i64 - t as i64)
}

/// `m^-(L_D) <= m^-(L0) <= m^-(L_D) + nu(L0)`.
pub fn index_inequalities_check(morse: usize, dirichlet_morse: usize, nu: usize) -> [IdentityCheck; 2] {
    [
        IdentityCheck::at_most("dirichlet_lower_bound", dirichlet_morse as i64, morse as i64),
        IdentityCheck::at_most("trace_dimension_upper_bound", morse as i64, (dirichlet_morse + nu) as i64),
    ]
}

/// Mesh and step settings shared by the analyses.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Discretization {
    pub mesh: usize,
    pub steps: usize,
}

impl Default for Discretization {
    fn default() -> Self {
        Self { mesh: 256, steps: 2048 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SubintervalCheck {
    pub split: (f64, f64),
    pub check: IdentityCheck,
    pub converged: bool,
}

/// `m_[a,b](L0) >= m_[c,d](L0) + m_[a,c](L_D) + m_[d,b](L_D) - nu(L0)` with `[a, b] = [0, T]`.
pub fn subinterval_check(
    path: &CoefficientPath,
    bc: &BoundaryCondition,
    c: f64,
    d: f64,
    disc: Discretization,
    tol: &Tolerances,
) -> Result<SubintervalCheck> {
    let n = path.n();
    let dir = named_boundary(n, BoundaryKind::Dirichlet, tol)?;
    let full = morse_index_discretized(path, bc, disc.mesh, tol)?;
    let mid = morse_index_discretized(&path.restrict(c, d)?, bc, disc.mesh, tol)?;
    let mut converged = full.stable && mid.stable;
    let mut side = 0;
    for (a, b) in [(0.0, c), (d, path.length())] {
        if b - a > 1e-12 {
            let m = morse_index_discretized(&path.restrict(a, b)?, &dir, disc.mesh, tol)?;
            converged &= m.stable;
            side += m.negative;
        }
    }
    let rhs = (mid.negative + side) as i64 - bc.nu() as i64;
    Ok(SubintervalCheck {
        split: (c, d),
        check: IdentityCheck::at_most("subinterval_lower_bound", rhs, full.negative as i64),
        converged,
    })
}

/// Every index computed for one problem together with the identity verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct IndexReport {
    pub n: usize,
    pub length: f64,
    pub boundary: String,
    pub nu: usize,
    pub k: usize,
    pub morse: MorseIndex,
    pub dirichlet_morse: MorseIndex,
    pub maslov: MaslovIndex,
    pub triple_correction: usize,
    pub difference: i64,
    pub conjugate_points: ConjugatePoints,
    pub separated: Option<SeparatedCount>,
    pub solution_kernel: usize,
    pub steps: usize,
    pub symplectic_residual: f64,
    pub convergence_estimate: f64,
    pub boundary_rebuild_residual: f64,
    pub converged: bool,
    pub identity_checks: Vec<IdentityCheck>,
}

impl IndexReport {
    /// True when every identity holds, or when the run did not converge.
    pub fn identities_hold(&self) -> bool {
        !self.converged || self.identity_checks.iter().all(|c| c.holds)
    }
}

pub fn analyze(path: &CoefficientPath, bc: &BoundaryCondition, disc: Discretization, tol: &Tolerances) -> Result<IndexReport> {
    let n = path.n();
    let fs = fundamental_solution(path, disc.steps, tol)?;
    let dir = named_boundary(n, BoundaryKind::Dirichlet, tol)?;
    let morse = morse_index_discretized(path, bc, disc.mesh, tol)?;
    let dirichlet_morse = morse_index_discretized(path, &dir, disc.mesh, tol)?;
    let conjugate_points = conjugate_points_dirichlet(&fs, tol)?;
    let triple = triple_correction(&fs, bc, tol)?;
    let maslov = maslov_of_solution(&fs, bc, tol)?;
    let difference = morse_maslov_difference(bc, tol)?;
    let solution_kernel = solution_kernel_dim(&fs, bc, tol)?;
    let separated = match bc.separated_parts() {
        Some((s, e)) => Some(lambda_s_conjugate_points(&fs, &s, &e, tol)?),
        None => None,
    };
    let m = morse.negative as i64;
    let md = dirichlet_morse.negative as i64;
    let mut checks = vec![
        IdentityCheck::equal("index_difference_is_triple_index", m - md, triple as i64),
        IdentityCheck::equal("dirichlet_index_is_conjugate_count", md, conjugate_points.total as i64),
        IdentityCheck::equal("maslov_minus_morse", maslov.index - m, difference),
        IdentityCheck::at_most("maslov_minus_morse_lower", -(n as i64), maslov.index - m),
        IdentityCheck::at_most("maslov_minus_morse_upper", maslov.index - m, n as i64),
        IdentityCheck::equal("nullity_is_solution_kernel", morse.zero as i64, solution_kernel as i64),
    ];
    checks.extend(index_inequalities_check(morse.negative, dirichlet_morse.negative, bc.nu()));
    if let Some(sep) = &separated {
        checks.push(IdentityCheck::equal("separated_conjugate_count", sep.morse as i64, m));
    }
    Ok(IndexReport {
        n,
        length: path.length(),
        boundary: bc.kind.label().into(),
        nu: bc.nu(),
        k: bc.k,
        converged: morse.stable && dirichlet_morse.stable && !maslov.degenerate,
        morse,
        dirichlet_morse,
        maslov,
        triple_correction: triple,
        difference,
        conjugate_points,
        separated,
        solution_kernel,
        steps: fs.steps(),
        symplectic_residual: fs.residual,
        convergence_estimate: fs.convergence_estimate,
        boundary_rebuild_residual: bc.rebuild_residual,
        identity_checks: checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn line(y: f64, x: f64) -> LagrangianFrame {
        LagrangianFrame::new(SymplecticSpace::standard(1), CMatrix::from_row_slice(2, 1, &[c(y), c(x)]), &tol()).unwrap()
    }

    fn example() -> (CoefficientPath, BoundaryCondition) {
        let path = CoefficientPath::oscillator(1, -1.0, PI).unwrap();
        let bc = named_boundary(1, BoundaryKind::Separated(line(0.0, 1.0), line(1.0, 1.0)), &tol()).unwrap();
        (path, bc)
    }

    #[test]
    fn hamiltonian_of_oscillator_is_identity() {
        let path = CoefficientPath::oscillator(1, -1.0, PI).unwrap();
        assert!((path.hamiltonian(0.3).unwrap() - DMatrix::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn fundamental_solution_is_rotation() {
        let path = CoefficientPath::oscillator(1, -1.0, PI).unwrap();
        let fs = fundamental_solution(&path, 2048, &tol()).unwrap();
        for t in [0.0, 0.7, 1.9, PI] {
            let g = fs.eval(t);
            let rot = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
            assert!((g - rot).norm() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn spline_reproduces_cubic_interior() {
        let vals: Vec<DMatrix<f64>> =
            (0..=64).map(|i| DMatrix::from_element(1, 1, (i as f64 / 64.0 * 2.0 * PI).sin())).collect();
        let f = MatrixFunction::grid(vals, 2.0 * PI).unwrap();
        assert!((f.eval(1.234)[(0, 0)] - 1.234f64.sin()).abs() < 1e-5);
    }

    #[test]
    fn canonical_forms_of_standard_conditions() {
        for n in 1..=2 {
            let d = named_boundary(n, BoundaryKind::Dirichlet, &tol()).unwrap();
            assert_eq!((d.k, d.nu()), (2 * n, 0));
            let nm = named_boundary(n, BoundaryKind::Neumann, &tol()).unwrap();
            assert_eq!((nm.k, nm.nu()), (0, 2 * n));
            assert!(frobenius(&nm.a) < 1e-12);
            let p = named_boundary(n, BoundaryKind::Periodic, &tol()).unwrap();
            assert_eq!(p.nu(), n);
        }
    }

    #[test]
    fn separated_example_has_expected_form() {
        let (_, bc) = example();
        assert_eq!(bc.nu(), 2);
        let (eigs, _) = linalg::hermitian_eigen(&bc.a);
        assert!(eigs[0].abs() < 1e-12 && (eigs[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn morse_index_of_the_separated_example() {
        let (path, bc) = example();
        let m = morse_index_discretized(&path, &bc, 128, &tol()).unwrap();
        assert_eq!((m.negative, m.zero, m.stable), (2, 0, true));
    }

    #[test]
    fn dirichlet_oscillator_counts() {
        let dir = named_boundary(1, BoundaryKind::Dirichlet, &tol()).unwrap();
        let m = morse_index_discretized(&CoefficientPath::oscillator(1, -1.0, PI).unwrap(), &dir, 64, &tol()).unwrap();
        assert_eq!((m.negative, m.zero, m.stable), (0, 1, true));
        let m = morse_index_discretized(&CoefficientPath::oscillator(1, -1.0, 2.0 * PI).unwrap(), &dir, 64, &tol()).unwrap();
        assert_eq!((m.negative, m.zero), (1, 1));
    }

    #[test]
    fn conjugate_points_of_oscillator() {
        let path = CoefficientPath::oscillator(1, -1.0, 2.0 * PI).unwrap();
        let fs = fundamental_solution(&path, 1024, &tol()).unwrap();
        let cp = conjugate_points_dirichlet(&fs, &tol()).unwrap();
        assert_eq!(cp.total, 1);
        assert!((cp.points[0].t - PI).abs() < 1e-8);
        assert_eq!(cp.end_degeneracy, 1);
    }

    #[test]
    fn separated_example_report() {
        let (path, bc) = example();
        let r = analyze(&path, &bc, Discretization { mesh: 128, steps: 1024 }, &tol()).unwrap();
        assert_eq!(r.morse.negative, 2);
        assert_eq!(r.maslov.index, 1);
        assert_eq!(r.difference, -1);
        assert_eq!(r.separated.as_ref().unwrap().correction, 1);
        assert!(r.identity_checks.iter().all(|c| c.holds), "{:?}", r.identity_checks);
    }

    #[test]
    fn differences_for_standard_conditions() {
        for n in 1..=2 {
            let d = |k| morse_maslov_difference(&named_boundary(n, k, &tol()).unwrap(), &tol()).unwrap();
            assert_eq!(d(BoundaryKind::Dirichlet), n as i64);
            assert_eq!(d(BoundaryKind::Neumann), 0);
            assert_eq!(d(BoundaryKind::Periodic), n as i64);
        }
    }
}

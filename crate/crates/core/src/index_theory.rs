//! The Q-form, triple and Hörmander indices, crossing forms and Maslov
//! indices of Lagrangian paths.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian_forms::IdentityCheck;
use crate::linalg::{self, frobenius, hstack, to_complex, CMatrix, Inertia, Subspace};
use crate::symplectic_core::{
    self, eigen_angles, graph_frame, intersection_dim, j_matrix, LagrangianFrame, SymplecticMatrix,
    SymplecticSpace,
};
use crate::tolerances::Tolerances;

/// Hermitian form on a subspace of an ambient space.  `gram[i][j]` is the
/// form evaluated on `(basis_j, basis_i)`.
#[derive(Debug, Clone)]
pub struct HermitianFormOnSubspace {
    pub basis: CMatrix,
    pub gram: CMatrix,
    pub scale: f64,
}

impl HermitianFormOnSubspace {
    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigen(&self.gram).0
    }

    pub fn inertia(&self, tol: &Tolerances) -> Inertia {
        Inertia::from_eigenvalues(&self.eigenvalues(), tol.rank * self.scale.max(f64::MIN_POSITIVE))
    }
}

/// `Q(alpha, beta; delta)` on `alpha ∩ (beta + delta)` together with the
/// expected kernel dimension `dim(alpha ∩ beta + alpha ∩ delta)`.
#[derive(Debug, Clone)]
pub struct QForm {
    pub form: HermitianFormOnSubspace,
    pub kernel_dim: usize,
    pub hermitian_residual: f64,
}

/// Splits vectors of `beta + delta` as `y + z` with `y in beta`, `z in delta`.
fn decompose(beta: &CMatrix, delta: &CMatrix, x: &CMatrix, tol: &Tolerances) -> (CMatrix, CMatrix) {
    let both = hstack(&[beta, delta]);
    let coeff = linalg::pinv_solve(&both, x, tol.rank);
    let y = beta * coeff.rows(0, beta.ncols());
    let z = delta * coeff.rows(beta.ncols(), delta.ncols());
    (y, z)
}

/// Q-form for isotropic subspaces given by orthonormal bases.
pub fn q_form_subspaces(
    space: SymplecticSpace,
    alpha: &Subspace,
    beta: &Subspace,
    delta: &Subspace,
    tol: &Tolerances,
) -> Result<QForm> {
    for (name, s) in [("alpha", alpha), ("beta", beta), ("delta", delta)] {
        if s.ambient() != space.dim() {
            return Err(Error::Dimension(format!("{name} has the wrong ambient dimension")));
        }
        let res = frobenius(&space.omega_gram(s.basis(), s.basis()));
        if res > tol.isotropy.max(1e-6) {
            return Err(Error::NotLagrangian(res));
        }
    }
    let sum = beta.sum(delta, tol.rank);
    let carrier = alpha.intersection(&sum, tol.rank);
    let (y, z) = decompose(beta.basis(), delta.basis(), carrier.basis(), tol);
    let gram = space.omega_gram(&y, &z);
    let scale = (frobenius(&y) * frobenius(&z)).max(1.0);
    let hermitian_residual = if gram.nrows() == 0 { 0.0 } else { frobenius(&(&gram - gram.adjoint())) / scale };
    if hermitian_residual > 1e-6 {
        return Err(Error::NotHermitian(hermitian_residual));
    }
    let kernel_dim = alpha
        .intersection(beta, tol.rank)
        .sum(&alpha.intersection(delta, tol.rank), tol.rank)
        .dim();
    Ok(QForm {
        form: HermitianFormOnSubspace { basis: carrier.basis().clone(), gram: linalg::symmetrize(&gram), scale },
        kernel_dim,
        hermitian_residual,
    })
}

pub fn q_form(alpha: &LagrangianFrame, beta: &LagrangianFrame, delta: &LagrangianFrame, tol: &Tolerances) -> Result<QForm> {
    if alpha.space() != beta.space() || beta.space() != delta.space() {
        return Err(Error::Dimension("Q-form arguments live in different spaces".into()));
    }
    q_form_subspaces(alpha.space(), &alpha.subspace(), &beta.subspace(), &delta.subspace(), tol)
}

/// `Q(x1, x2) = omega(y1, z2)` for `x_j = y_j + z_j` in `beta + delta`.
pub fn q_pairing(
    space: SymplecticSpace,
    beta: &LagrangianFrame,
    delta: &LagrangianFrame,
    x1: &CMatrix,
    x2: &CMatrix,
    tol: &Tolerances,
) -> linalg::C64 {
    let (y1, _) = decompose(beta.basis(), delta.basis(), x1, tol);
    let (_, z2) = decompose(beta.basis(), delta.basis(), x2, tol);
    space.omega(&y1, &z2)
}

/// Triple index and the terms it is assembled from.
#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
pub struct TripleIndex {
    pub value: usize,
    pub q_positive: usize,
    pub dim_alpha_kappa: usize,
    pub dim_all_three: usize,
    /// `dim alpha - dim(alpha ∩ beta + beta ∩ kappa)`.
    pub upper_bound: usize,
}

/// `i(alpha, beta, kappa) = m^+(Q(alpha, beta; kappa)) + dim(alpha ∩ kappa) - dim(alpha ∩ beta ∩ kappa)`.
pub fn triple_index_terms(
    alpha: &LagrangianFrame,
    beta: &LagrangianFrame,
    kappa: &LagrangianFrame,
    tol: &Tolerances,
) -> Result<TripleIndex> {
    let q = q_form(alpha, beta, kappa, tol)?;
    let inertia = q.form.inertia(tol);
    if inertia.zero != q.kernel_dim {
        return Err(Error::DegenerateIntersection(format!(
            "Q-form has {} near-zero eigenvalues but its kernel has dimension {}",
            inertia.zero, q.kernel_dim
        )));
    }
    let dim_alpha_kappa = intersection_dim(alpha, kappa, tol)?;
    let (a, b, k) = (alpha.subspace(), beta.subspace(), kappa.subspace());
    let ab = a.intersection(&b, tol.rank);
    let dim_all_three = ab.intersection(&k, tol.rank).dim();
    let bk = b.intersection(&k, tol.rank);
    let upper_bound = alpha.space().half_dim() - ab.sum(&bk, tol.rank).dim();
    let value = (inertia.positive + dim_alpha_kappa)
        .checked_sub(dim_all_three)
        .ok_or_else(|| Error::Numerical("negative triple index".into()))?;
    Ok(TripleIndex { value, q_positive: inertia.positive, dim_alpha_kappa, dim_all_three, upper_bound })
}

pub fn triple_index(alpha: &LagrangianFrame, beta: &LagrangianFrame, kappa: &LagrangianFrame, tol: &Tolerances) -> Result<usize> {
    triple_index_terms(alpha, beta, kappa, tol).map(|t| t.value)
}

/// `i(alpha, beta, kappa)` through an auxiliary Lagrangian `delta` transversal to all three:
/// `m^-(Q(alpha, delta; beta)) + m^-(Q(beta, delta; kappa)) - m^-(Q(alpha, delta; kappa))`.
pub fn triple_index_via_transversal(
    alpha: &LagrangianFrame,
    beta: &LagrangianFrame,
    kappa: &LagrangianFrame,
    delta: &LagrangianFrame,
    tol: &Tolerances,
) -> Result<usize> {
    for f in [alpha, beta, kappa] {
        if intersection_dim(delta, f, tol)? != 0 {
            return Err(Error::Invalid("auxiliary Lagrangian is not transversal".into()));
        }
    }
    let neg = |a: &LagrangianFrame, b: &LagrangianFrame| -> Result<i64> {
        Ok(q_form(a, delta, b, tol)?.form.inertia(tol).negative as i64)
    };
    let v = neg(alpha, beta)? + neg(beta, kappa)? - neg(alpha, kappa)?;
    usize::try_from(v).map_err(|_| Error::Numerical("negative triple index".into()))
}

/// A Lagrangian transversal to every frame: `f^{-1}(e^{i theta} I)` with
/// `theta` as far as possible from all eigenphases of `f(frame)`.
pub fn common_transversal(frames: &[&LagrangianFrame]) -> Result<LagrangianFrame> {
    let space = frames
        .first()
        .ok_or_else(|| Error::Invalid("no frames given".into()))?
        .space();
    let mut phases = vec![];
    for f in frames {
        if f.space() != space {
            return Err(Error::Dimension("frames live in different spaces".into()));
        }
        phases.extend(eigen_angles(&f.unitary()?)?);
    }
    phases.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut best = (0.0, phases[0] + std::f64::consts::PI);
    for (j, &p) in phases.iter().enumerate() {
        let next = if j + 1 < phases.len() { phases[j + 1] } else { phases[0] + two_pi };
        if next - p > best.0 {
            best = (next - p, 0.5 * (p + next));
        }
    }
    let m = space.half_dim();
    let u = linalg::eye(m) * num_complex::Complex::from_polar(1.0, best.1);
    LagrangianFrame::from_unitary(space, &u)
}

/// Inertia of `Q(a, b; d)`, `Q(b, d; a)` and `Q(d, a; b)`.
pub fn cyclic_q_inertia(
    a: &LagrangianFrame,
    b: &LagrangianFrame,
    d: &LagrangianFrame,
    tol: &Tolerances,
) -> Result<[Inertia; 3]> {
    let i = |x, y, z| q_form(x, y, z, tol).map(|q| q.form.inertia(tol));
    Ok([i(a, b, d)?, i(b, d, a)?, i(d, a, b)?])
}

/// Bounds, special values, the transversal definition and the cyclic
/// inertia identity for one triple.
pub fn triple_identity_checks(
    a: &LagrangianFrame,
    b: &LagrangianFrame,
    k: &LagrangianFrame,
    tol: &Tolerances,
) -> Result<Vec<IdentityCheck>> {
    let terms = triple_index_terms(a, b, k, tol)?;
    let v = terms.value as i64;
    let t = |x, y, z| triple_index(x, y, z, tol).map(|v| v as i64);
    let dim = a.space().half_dim() as i64;
    let ab = intersection_dim(a, b, tol)? as i64;
    let delta = common_transversal(&[a, b, k])?;
    let oracle = triple_index_via_transversal(a, b, k, &delta, tol)? as i64;
    let [q1, q2, q3] = cyclic_q_inertia(a, b, k, tol)?;
    Ok(vec![
        IdentityCheck::at_most("triple_nonnegative", 0, v),
        IdentityCheck::at_most("triple_upper_bound", v, terms.upper_bound as i64),
        IdentityCheck::equal("triple_repeated_first", t(a, a, b)?, 0),
        IdentityCheck::equal("triple_repeated_last", t(b, a, a)?, 0),
        IdentityCheck::equal("triple_repeated_outer", t(a, b, a)?, dim - ab),
        IdentityCheck::equal("triple_transversal_definition", v, oracle),
        IdentityCheck::equal("cyclic_positive_first", q1.positive as i64, q2.positive as i64),
        IdentityCheck::equal("cyclic_positive_second", q2.positive as i64, q3.positive as i64),
        IdentityCheck::equal("cyclic_negative_first", q1.negative as i64, q2.negative as i64),
        IdentityCheck::equal("cyclic_negative_second", q2.negative as i64, q3.negative as i64),
    ])
}

/// Hörmander index from both triple-index expressions.
#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
pub struct HormanderIndex {
    /// `i(l1, l2, k2) - i(l1, l2, k1)`
    pub value: i64,
    /// `i(l1, k1, k2) - i(l2, k1, k2)`
    pub alternative: i64,
}

impl HormanderIndex {
    pub fn consistent(&self) -> bool {
        self.value == self.alternative
    }
}

pub fn hormander_index(
    l1: &LagrangianFrame,
    l2: &LagrangianFrame,
    k1: &LagrangianFrame,
    k2: &LagrangianFrame,
    tol: &Tolerances,
) -> Result<HormanderIndex> {
    let t = |a, b, c| triple_index(a, b, c, tol).map(|v| v as i64);
    Ok(HormanderIndex { value: t(l1, l2, k2)? - t(l1, l2, k1)?, alternative: t(l1, k1, k2)? - t(l2, k1, k2)? })
}

/// Checks of the graph triple-index identities for `M` and four Lagrangians of `C^{2n}`.
pub fn graph_triple_identities(
    m: &SymplecticMatrix,
    l: [&LagrangianFrame; 4],
    tol: &Tolerances,
) -> Result<Vec<IdentityCheck>> {
    let n = m.n();
    let std = SymplecticSpace::standard(n);
    let neg = SymplecticSpace::negated(n);
    let [l1, l2, l3, l4] = l;
    for f in l {
        if f.space() != std {
            return Err(Error::Dimension("graph identities need frames of the standard C^{2n}".into()));
        }
    }
    let gr = graph_frame(m, tol)?.graph;
    let ds = |a: &LagrangianFrame, b: &LagrangianFrame| -> Result<LagrangianFrame> {
        LagrangianFrame::direct_sum(&a.reinterpret(neg)?, b)
    };
    let t = |a: &LagrangianFrame, b: &LagrangianFrame, c: &LagrangianFrame| triple_index(a, b, c, tol).map(|v| v as i64);
    let minv = m.inverse();
    let ml1 = symplectic_core::apply(m, l1, tol)?;
    let ml3 = symplectic_core::apply(m, l3, tol)?;
    let minv_l2 = symplectic_core::apply(&minv, &l2.reinterpret(neg)?, tol)?;
    let minv_l4 = symplectic_core::apply(&minv, &l4.reinterpret(neg)?, tol)?;
    let (l1n, l3n) = (l1.reinterpret(neg)?, l3.reinterpret(neg)?);
    let s12 = ds(l1, l2)?;
    let general = t(&gr, &s12, &ds(l3, l4)?)?;
    Ok(vec![
        IdentityCheck::equal("graph_shared_start", t(&gr, &s12, &ds(l1, l3)?)?, t(&ml1, l2, l3)?),
        IdentityCheck::equal("graph_shared_end", t(&gr, &s12, &ds(l3, l2)?)?, t(&minv_l2, &l1n, &l3n)?),
        IdentityCheck::equal("graph_general_forward", general, t(&ml1, l2, l4)? + t(&minv_l4, &l1n, &l3n)?),
        IdentityCheck::equal("graph_general_backward", general, t(&ml3, l2, l4)? + t(&minv_l2, &l1n, &l3n)?),
    ])
}

/// A continuously differentiable family of symplectic matrices `gamma(t)`.
pub trait SymplecticFlow {
    fn n(&self) -> usize;
    fn domain(&self) -> (f64, f64);
    fn samples(&self) -> Vec<f64>;
    fn matrix(&self, t: f64) -> DMatrix<f64>;
    fn derivative(&self, t: f64) -> DMatrix<f64>;
}

/// A sampled Lagrangian path with raw (not necessarily orthonormal) frames
/// and their time derivatives.
pub trait LagrangianPath {
    fn space(&self) -> SymplecticSpace;
    fn domain(&self) -> (f64, f64);
    fn samples(&self) -> Vec<f64>;
    fn frame(&self, t: f64) -> CMatrix;
    fn velocity(&self, t: f64) -> CMatrix;
}

type FrameFn = Box<dyn Fn(f64) -> CMatrix + Send + Sync>;

/// Path given by closures.
pub struct FramePath {
    pub space: SymplecticSpace,
    pub domain: (f64, f64),
    pub samples: Vec<f64>,
    pub frame: FrameFn,
    pub velocity: FrameFn,
}

impl LagrangianPath for FramePath {
    fn space(&self) -> SymplecticSpace {
        self.space
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn samples(&self) -> Vec<f64> {
        self.samples.clone()
    }
    fn frame(&self, t: f64) -> CMatrix {
        (self.frame)(t)
    }
    fn velocity(&self, t: f64) -> CMatrix {
        (self.velocity)(t)
    }
}

/// `t -> gamma(t) W` for a fixed Lagrangian `W` of `C^{2n}`.
pub struct TransportedPath<'a, F: SymplecticFlow + ?Sized> {
    pub flow: &'a F,
    pub reference: LagrangianFrame,
}

impl<'a, F: SymplecticFlow + ?Sized> LagrangianPath for TransportedPath<'a, F> {
    fn space(&self) -> SymplecticSpace {
        self.reference.space()
    }
    fn domain(&self) -> (f64, f64) {
        self.flow.domain()
    }
    fn samples(&self) -> Vec<f64> {
        self.flow.samples()
    }
    fn frame(&self, t: f64) -> CMatrix {
        to_complex(&self.flow.matrix(t)) * self.reference.basis()
    }
    fn velocity(&self, t: f64) -> CMatrix {
        to_complex(&self.flow.derivative(t)) * self.reference.basis()
    }
}

/// `t -> Gr(gamma(t))` in the doubled space.
pub struct GraphPath<'a, F: SymplecticFlow + ?Sized> {
    pub flow: &'a F,
}

impl<'a, F: SymplecticFlow + ?Sized> LagrangianPath for GraphPath<'a, F> {
    fn space(&self) -> SymplecticSpace {
        SymplecticSpace::doubled(self.flow.n())
    }
    fn domain(&self) -> (f64, f64) {
        self.flow.domain()
    }
    fn samples(&self) -> Vec<f64> {
        self.flow.samples()
    }
    fn frame(&self, t: f64) -> CMatrix {
        let n = self.flow.n();
        linalg::vstack(&[&linalg::eye(2 * n), &to_complex(&self.flow.matrix(t))])
    }
    fn velocity(&self, t: f64) -> CMatrix {
        let n = self.flow.n();
        linalg::vstack(&[&CMatrix::zeros(2 * n, 2 * n), &to_complex(&self.flow.derivative(t))])
    }
}

fn path_tolerances(tol: &Tolerances) -> Tolerances {
    Tolerances { isotropy: tol.isotropy.max(1e-6), ..*tol }
}

/// Crossing form at `t0` on `Lambda(t0) ∩ reference`, using the `dim`
/// smallest singular directions, or the numerical kernel when `dim` is `None`.
fn crossing_form_with_dim(
    path: &dyn LagrangianPath,
    reference: &LagrangianFrame,
    t0: f64,
    dim: Option<usize>,
    tol: &Tolerances,
) -> Result<HermitianFormOnSubspace> {
    let space = path.space();
    let z = path.frame(t0);
    let zdot = path.velocity(t0);
    let m = space.half_dim();
    let stacked = hstack(&[&z, &(-reference.basis())]);
    let k = match dim {
        Some(k) => k,
        None => stacked.ncols() - linalg::rank(&stacked, tol.rank),
    };
    if k == 0 {
        return Err(Error::NoCrossing(t0));
    }
    let (null, _) = linalg::smallest_right_singular(&stacked, k);
    let coeff = null.rows(0, m).into_owned().qr().q();
    let pair = zdot.adjoint() * to_complex(&space.form_matrix()) * &z;
    let gram = linalg::symmetrize(&(coeff.adjoint() * pair * &coeff));
    let scale = frobenius(&zdot) * frobenius(&z);
    Ok(HermitianFormOnSubspace { basis: &z * coeff, gram, scale })
}

/// Crossing form of a Lagrangian path against `reference` at `t0`.  For
/// `gamma(t) W` it equals `<-gamma^T J gamma' v, v>` on `gamma(t0)^{-1}(Lambda(t0) ∩ reference)`.
pub fn crossing_form(
    path: &dyn LagrangianPath,
    reference: &LagrangianFrame,
    t0: f64,
    tol: &Tolerances,
) -> Result<HermitianFormOnSubspace> {
    if path.space() != reference.space() {
        return Err(Error::Dimension("path and reference live in different spaces".into()));
    }
    crossing_form_with_dim(path, reference, t0, None, tol)
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
pub enum CrossingPosition {
    Start,
    Interior,
    End,
}

#[derive(Debug, Clone, Serialize)]
pub struct Crossing {
    pub t: f64,
    pub dim: usize,
    pub position: CrossingPosition,
    pub inertia: Inertia,
    pub contribution: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MaslovIndex {
    pub index: i64,
    pub crossings: Vec<Crossing>,
    /// Count from the eigenphase winding algorithm.
    pub winding: i64,
    /// True when a non-regular crossing forced the perturbed count.
    pub degenerate: bool,
    /// Phase shift used by the perturbed count.
    pub perturbation: f64,
}

struct Probe<'a> {
    path: &'a dyn LagrangianPath,
    base_adjoint: CMatrix,
    tol: Tolerances,
}

struct Sample {
    t: f64,
    u: CMatrix,
    phases: Vec<f64>,
}

impl<'a> Probe<'a> {
    fn new(path: &'a dyn LagrangianPath, reference: &LagrangianFrame, tol: &Tolerances) -> Result<Self> {
        if path.space() != reference.space() {
            return Err(Error::Dimension("path and reference live in different spaces".into()));
        }
        Ok(Self { path, base_adjoint: reference.unitary()?.adjoint(), tol: path_tolerances(tol) })
    }

    fn sample(&self, t: f64) -> Result<Sample> {
        let f = LagrangianFrame::new(self.path.space(), self.path.frame(t), &self.tol)?;
        let u = &self.base_adjoint * f.unitary()?;
        let phases = eigen_angles(&u)?;
        Ok(Sample { t, u, phases })
    }

    fn grid(&self) -> Result<Vec<f64>> {
        let (a, b) = self.path.domain();
        let mut s: Vec<f64> = self.path.samples().into_iter().filter(|&t| t >= a && t <= b).collect();
        s.sort_by(|x, y| x.partial_cmp(y).unwrap());
        s.dedup();
        if s.first() != Some(&a) {
            s.insert(0, a);
        }
        if s.last() != Some(&b) {
            s.push(b);
        }
        if s.len() < 2 || b <= a {
            return Err(Error::Invalid("path needs a non-degenerate sample grid".into()));
        }
        Ok(s)
    }
}

fn wrap(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut y = x % two_pi;
    if y > std::f64::consts::PI {
        y -= two_pi;
    } else if y <= -std::f64::consts::PI {
        y += two_pi;
    }
    y
}

/// Cyclic matching of sorted phases, minimizing the largest displacement.
fn match_phases(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for s in 0..n {
        let d: Vec<f64> = (0..n).map(|j| wrap(b[(j + s) % n] - a[j])).collect();
        let cost = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if best.as_ref().map_or(true, |(c, _)| cost < *c) {
            best = Some((cost, d));
        }
    }
    best.map(|(_, d)| d).unwrap_or_default()
}

const MAX_STEP_PHASE: f64 = 0.3;
const COINCIDENT: f64 = 1e-8;

/// Whether the matching between two samples is unambiguous for the phases near zero.
fn resolved(a: &[f64], disp: &[f64]) -> bool {
    let n = a.len();
    let m = disp.iter().fold(0.0f64, |x, d| x.max(d.abs()));
    if m > MAX_STEP_PHASE {
        return false;
    }
    if n == 1 {
        return true;
    }
    for j in 0..n {
        if a[j].abs() > 3.0 * m + 1e-12 {
            continue;
        }
        for k in [(j + n - 1) % n, (j + 1) % n] {
            let gap = wrap(a[k] - a[j]).abs();
            if gap > COINCIDENT && gap <= 4.0 * m {
                return false;
            }
        }
    }
    true
}

struct CrossingEvent {
    t: f64,
    dim: Option<usize>,
}

/// Locates the zero of one tracked phase between `lo` and `hi`.
fn localize(probe: &Probe, mut lo: (f64, f64), mut hi: (f64, f64)) -> Result<f64> {
    for _ in 0..probe.tol.bisection_depth {
        let tm = 0.5 * (lo.0 + hi.0);
        let s = probe.sample(tm)?;
        let guess = 0.5 * (lo.1 + hi.1);
        let p = s
            .phases
            .iter()
            .map(|&p| guess + wrap(p - guess))
            .min_by(|x, y| (x - guess).abs().partial_cmp(&(y - guess).abs()).unwrap())
            .unwrap();
        if p == 0.0 {
            return Ok(tm);
        }
        if (p > 0.0) == (lo.1 > 0.0) {
            lo = (tm, p);
        } else {
            hi = (tm, p);
        }
    }
    Ok(0.5 * (lo.0 + hi.0))
}

fn scan_interval(
    probe: &Probe,
    a: &Sample,
    b: &Sample,
    depth: usize,
    t_scale: f64,
    events: &mut Vec<CrossingEvent>,
) -> Result<()> {
    let disp = match_phases(&a.phases, &b.phases);
    if !resolved(&a.phases, &disp) {
        if depth >= probe.tol.refinement_depth {
            return Err(Error::TrackingAmbiguity(0.5 * (a.t + b.t)));
        }
        let mid = probe.sample(0.5 * (a.t + b.t))?;
        let k = mid.phases.iter().filter(|p| p.abs() < probe.tol.angle).count();
        if k > 0 {
            events.push(CrossingEvent { t: mid.t, dim: Some(k) });
        }
        scan_interval(probe, a, &mid, depth + 1, t_scale, events)?;
        return scan_interval(probe, &mid, b, depth + 1, t_scale, events);
    }
    let ang = probe.tol.angle;
    let mut times = vec![];
    for (j, &pa) in a.phases.iter().enumerate() {
        let pb = pa + disp[j];
        if pa.abs() > ang && pb.abs() > ang && pa * pb < 0.0 && pa.abs() < 1.0 {
            times.push(localize(probe, (a.t, pa), (b.t, pb))?);
        }
    }
    times.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let group_eps = 1e-9 * t_scale + (b.t - a.t) * 2f64.powi(-(probe.tol.bisection_depth as i32) + 2);
    let mut i = 0;
    while i < times.len() {
        let mut j = i + 1;
        while j < times.len() && times[j] - times[j - 1] <= group_eps {
            j += 1;
        }
        let t = times[i..j].iter().sum::<f64>() / (j - i) as f64;
        events.push(CrossingEvent { t, dim: Some(j - i) });
        i = j;
    }
    Ok(())
}

fn endpoint_kernel(s: &Sample, tol: &Tolerances) -> usize {
    s.phases.iter().filter(|p| p.abs() < tol.angle).count()
}

/// Maslov index by summing crossing-form signatures, with `m^+` at the start
/// and `-m^-` at the end.
pub fn maslov_index_crossings(path: &dyn LagrangianPath, reference: &LagrangianFrame, tol: &Tolerances) -> Result<(i64, Vec<Crossing>)> {
    let probe = Probe::new(path, reference, tol)?;
    let grid = probe.grid()?;
    let (t0, t1) = (grid[0], *grid.last().unwrap());
    let samples: Vec<Sample> = grid.iter().map(|&t| probe.sample(t)).collect::<Result<_>>()?;
    let mut events = vec![];
    for s in &samples[1..samples.len() - 1] {
        let k = endpoint_kernel(s, tol);
        if k > 0 {
            events.push(CrossingEvent { t: s.t, dim: Some(k) });
        }
    }
    for w in samples.windows(2) {
        scan_interval(&probe, &w[0], &w[1], 0, t1 - t0, &mut events)?;
    }
    events.sort_by(|x, y| x.t.partial_cmp(&y.t).unwrap());
    let mut crossings = vec![];
    let mut index = 0i64;
    let mut record = |t: f64, dim: usize, position: CrossingPosition| -> Result<()> {
        let form = crossing_form_with_dim(path, reference, t, Some(dim), tol)?;
        let inertia = form.inertia(tol);
        if inertia.zero > 0 {
            return Err(Error::NonRegularCrossing(t));
        }
        let contribution = match position {
            CrossingPosition::Start => inertia.positive as i64,
            CrossingPosition::Interior => inertia.signature(),
            CrossingPosition::End => -(inertia.negative as i64),
        };
        index += contribution;
        crossings.push(Crossing { t, dim, position, inertia, contribution });
        Ok(())
    };
    let k0 = endpoint_kernel(&samples[0], tol);
    if k0 > 0 {
        record(t0, k0, CrossingPosition::Start)?;
    }
    for e in &events {
        record(e.t, e.dim.unwrap_or(1), CrossingPosition::Interior)?;
    }
    let k1 = endpoint_kernel(samples.last().unwrap(), tol);
    if k1 > 0 {
        record(t1, k1, CrossingPosition::End)?;
    }
    Ok((index, crossings))
}

fn det_phase_step(probe: &Probe, a: &Sample, b: &Sample, depth: usize) -> Result<f64> {
    let da = a.u.determinant();
    let db = b.u.determinant();
    let step = (db / da).arg();
    if step.abs() <= std::f64::consts::FRAC_PI_2 {
        return Ok(step);
    }
    if depth >= probe.tol.refinement_depth {
        return Err(Error::TrackingAmbiguity(0.5 * (a.t + b.t)));
    }
    let mid = probe.sample(0.5 * (a.t + b.t))?;
    Ok(det_phase_step(probe, a, &mid, depth + 1)? + det_phase_step(probe, &mid, b, depth + 1)?)
}

fn reduced_phase_sum(s: &Sample, tol: &Tolerances) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    s.phases
        .iter()
        .map(|&p| if p.abs() < tol.angle || (two_pi - p.abs()) < tol.angle { 0.0 } else { p.rem_euclid(two_pi) })
        .sum()
}

fn perturbation_of(samples: [&Sample; 2], tol: &Tolerances) -> f64 {
    let smallest = samples
        .iter()
        .flat_map(|s| s.phases.iter())
        .map(|p| p.abs())
        .filter(|&p| p >= tol.angle)
        .fold(std::f64::consts::PI, f64::min);
    0.5 * smallest
}

/// Maslov index from the winding of the eigenphases of `f(L0)^{-1} f(Lambda(t))`,
/// counted after the small rotation `e^{i s0}` that moves endpoint phases off 1.
pub fn maslov_index_winding(path: &dyn LagrangianPath, reference: &LagrangianFrame, tol: &Tolerances) -> Result<(i64, f64)> {
    let probe = Probe::new(path, reference, tol)?;
    let grid = probe.grid()?;
    let samples: Vec<Sample> = grid.iter().map(|&t| probe.sample(t)).collect::<Result<_>>()?;
    let mut total = 0.0;
    for w in samples.windows(2) {
        total += det_phase_step(&probe, &w[0], &w[1], 0)?;
    }
    let first = &samples[0];
    let last = samples.last().unwrap();
    let raw = (-total - reduced_phase_sum(first, tol) + reduced_phase_sum(last, tol)) / (2.0 * std::f64::consts::PI);
    let index = raw.round();
    if (raw - index).abs() > 1e-3 {
        return Err(Error::Numerical(format!("winding count {raw} is not close to an integer")));
    }
    Ok((index as i64, perturbation_of([first, last], tol)))
}

/// Maslov index by crossings, falling back to the perturbed winding count
/// when a crossing is not regular.
pub fn maslov_index(path: &dyn LagrangianPath, reference: &LagrangianFrame, tol: &Tolerances) -> Result<MaslovIndex> {
    let (winding, perturbation) = maslov_index_winding(path, reference, tol)?;
    match maslov_index_crossings(path, reference, tol) {
        Ok((index, crossings)) => Ok(MaslovIndex { index, crossings, winding, degenerate: false, perturbation }),
        Err(Error::NonRegularCrossing(_)) => {
            Ok(MaslovIndex { index: winding, crossings: vec![], winding, degenerate: true, perturbation })
        }
        Err(e) => Err(e),
    }
}

/// `mu(L0, V; [a, b]) = i(V(a), L, L0) - i(V(b), L, L0)` for a path `V`
/// transversal to `L` at every sample.
pub fn maslov_via_triple(
    path: &dyn LagrangianPath,
    reference: &LagrangianFrame,
    transversal: &LagrangianFrame,
    tol: &Tolerances,
) -> Result<i64> {
    let probe = Probe::new(path, reference, tol)?;
    let grid = probe.grid()?;
    let ptol = path_tolerances(tol);
    let frame = |t: f64| LagrangianFrame::new(path.space(), path.frame(t), &ptol);
    for &t in &grid {
        if intersection_dim(&frame(t)?, transversal, tol)? != 0 {
            return Err(Error::Invalid(format!("path meets the transversal Lagrangian at t = {t}")));
        }
    }
    let va = frame(grid[0])?;
    let vb = frame(*grid.last().unwrap())?;
    Ok(triple_index(&va, transversal, reference, tol)? as i64 - triple_index(&vb, transversal, reference, tol)? as i64)
}

/// Constant-coefficient flow `exp(t J B)` with symmetric `B`, used for checks.
#[derive(Debug, Clone)]
pub struct ConstantFlow {
    pub generator: DMatrix<f64>,
    pub span: (f64, f64),
    pub steps: usize,
}

impl ConstantFlow {
    pub fn new(b: DMatrix<f64>, span: (f64, f64), steps: usize) -> Self {
        let n = b.nrows() / 2;
        Self { generator: j_matrix(n) * b, span, steps }
    }
}

impl SymplecticFlow for ConstantFlow {
    fn n(&self) -> usize {
        self.generator.nrows() / 2
    }
    fn domain(&self) -> (f64, f64) {
        self.span
    }
    fn samples(&self) -> Vec<f64> {
        let (a, b) = self.span;
        (0..=self.steps).map(|k| a + (b - a) * k as f64 / self.steps as f64).collect()
    }
    fn matrix(&self, t: f64) -> DMatrix<f64> {
        (&self.generator * t).exp()
    }
    fn derivative(&self, t: f64) -> DMatrix<f64> {
        &self.generator * self.matrix(t)
    }
}

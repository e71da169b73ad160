//! Brake-symmetric systems: monodromy from the half period, block
//! relations, spectral classes and the stability bounds.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian_forms::IdentityCheck;
use crate::index_theory::q_pairing;
use crate::linalg::{self, c, to_complex, vstack, CMatrix, C64};
use crate::sturm_liouville::{
    fundamental_solution, morse_index_discretized, named_boundary, BoundaryKind, CoefficientPath, Discretization,
    MorseIndex,
};
use crate::symplectic_core::{j_matrix, LagrangianFrame, SymplecticSpace};
use crate::tolerances::Tolerances;

const PARITY_POINTS: usize = 257;

/// `N = diag(-I, I)`.
pub fn reflection(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::identity(2 * n, 2 * n);
    for i in 0..n {
        m[(i, i)] = -1.0;
    }
    m
}

/// Coefficients certified even (`P`, `R`) and odd (`Q`) in time and `T`-periodic.
#[derive(Debug, Clone)]
pub struct BrakeProblem {
    pub path: CoefficientPath,
    pub parity_residual: f64,
    pub periodicity_residual: f64,
}

pub fn verify_brake(path: &CoefficientPath, tol: &Tolerances) -> Result<BrakeProblem> {
    if path.offset() != 0.0 {
        return Err(Error::NotBrake("coefficients must start at t = 0".into()));
    }
    let t_len = path.length();
    let mut parity: (f64, f64) = (0.0, 0.0);
    let mut periodic = 0.0f64;
    for k in 0..PARITY_POINTS {
        let t = t_len * k as f64 / (PARITY_POINTS - 1) as f64;
        let scale = path.p(t).norm().max(path.q(t).norm()).max(path.r(t).norm()).max(1.0);
        let r = ((path.p(-t) - path.p(t)).norm())
            .max((path.q(-t) + path.q(t)).norm())
            .max((path.r(-t) - path.r(t)).norm())
            / scale;
        if r > parity.0 {
            parity = (r, t);
        }
        let p = ((path.p(t + t_len) - path.p(t)).norm())
            .max((path.q(t + t_len) - path.q(t)).norm())
            .max((path.r(t + t_len) - path.r(t)).norm())
            / scale;
        periodic = periodic.max(p);
    }
    let limit = tol.rank.max(1e-10);
    if parity.0 > limit {
        return Err(Error::NotBrake(format!("parity residual {:e} at t = {}", parity.0, parity.1)));
    }
    if periodic > limit {
        return Err(Error::NotBrake(format!("coefficients are not T-periodic (residual {periodic:e})")));
    }
    Ok(BrakeProblem { path: path.clone(), parity_residual: parity.0, periodicity_residual: periodic })
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockRelation {
    pub name: String,
    pub residual: f64,
}

/// Monodromy assembled from the half period and checked against direct integration.
#[derive(Debug, Clone)]
pub struct MonodromyAnalysis {
    pub n: usize,
    pub gamma_half: DMatrix<f64>,
    /// `N gamma(T/2)^{-1} N gamma(T/2)`.
    pub gamma_full: DMatrix<f64>,
    pub direct: DMatrix<f64>,
    pub factorization_residual: f64,
    pub involution_residual: f64,
    pub d_blocks: [DMatrix<f64>; 4],
    pub e_blocks: [DMatrix<f64>; 4],
    pub block_relations: Vec<BlockRelation>,
    pub decomposition: Vec<BlockRelation>,
}

impl MonodromyAnalysis {
    pub fn max_block_residual(&self) -> f64 {
        self.block_relations.iter().chain(&self.decomposition).map(|b| b.residual).fold(0.0, f64::max)
    }
}

fn blocks(m: &DMatrix<f64>) -> [DMatrix<f64>; 4] {
    let n = m.nrows() / 2;
    [
        m.view((0, 0), (n, n)).into_owned(),
        m.view((0, n), (n, n)).into_owned(),
        m.view((n, 0), (n, n)).into_owned(),
        m.view((n, n), (n, n)).into_owned(),
    ]
}

fn rel(name: &str, a: DMatrix<f64>, scale: f64) -> BlockRelation {
    BlockRelation { name: name.into(), residual: a.norm() / scale }
}

const FACTORIZATION_LIMIT: f64 = 1e-6;

pub fn monodromy_from_half(bp: &BrakeProblem, steps: usize, tol: &Tolerances) -> Result<MonodromyAnalysis> {
    let path = &bp.path;
    let n = path.n();
    let half = fundamental_solution(&path.restrict(0.0, 0.5 * path.length())?, steps, tol)?;
    let e = half.at_end().clone();
    let j = j_matrix(n);
    let e_inv = -(&j * e.transpose() * &j);
    let nm = reflection(n);
    let gamma_full = &nm * &e_inv * &nm * &e;
    let direct = fundamental_solution(path, 2 * steps, tol)?.at_end().clone();
    let scale = gamma_full.norm().max(1.0);
    let factorization_residual = (&gamma_full - &direct).norm() / scale;
    if factorization_residual > FACTORIZATION_LIMIT {
        return Err(Error::Integration(format!(
            "half-period factorization differs from direct integration by {factorization_residual:e}"
        )));
    }
    let ng = &nm * &gamma_full;
    let involution_residual = (&ng * &ng - DMatrix::identity(2 * n, 2 * n)).norm() / scale.powi(2);
    let d = blocks(&gamma_full);
    let eb = blocks(&e);
    let [d1, d2, d3, d4] = d.clone();
    let [e1, e2, e3, e4] = eb.clone();
    let s2 = scale * scale;
    let id = DMatrix::<f64>::identity(n, n);
    let block_relations = vec![
        rel("d4_is_d1_transpose", &d4 - d1.transpose(), scale),
        rel("d2_symmetric", &d2 - d2.transpose(), scale),
        rel("d3_symmetric", &d3 - d3.transpose(), scale),
        rel("d1t_d3_is_d3_d1", d1.transpose() * &d3 - &d3 * &d1, s2),
        rel("d2_d1t_is_d1_d2", &d2 * d1.transpose() - &d1 * &d2, s2),
        rel("d1_squared_minus_d2_d3", &d1 * &d1 - &d2 * &d3 - &id, s2),
    ];
    let es = e.norm().max(1.0).powi(2);
    let decomposition = vec![
        rel("d1_from_half", &d1 - (e4.transpose() * &e1 + e2.transpose() * &e3), es),
        rel("d2_from_half", &d2 - (e4.transpose() * &e2 + e2.transpose() * &e4), es),
        rel("d3_from_half", &d3 - (e3.transpose() * &e1 + e1.transpose() * &e3), es),
        rel("d4_from_half", &d4 - (e3.transpose() * &e2 + e1.transpose() * &e4), es),
    ];
    Ok(MonodromyAnalysis {
        n,
        gamma_half: e,
        gamma_full,
        direct,
        factorization_residual,
        involution_residual,
        d_blocks: d,
        e_blocks: eb,
        block_relations,
        decomposition,
    })
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SpectralClass {
    PlusOne,
    MinusOne,
    RealPositive,
    RealNegative,
    UnitCircleUpper,
    UnitCircleLower,
    UpperOffCircle,
    LowerOffCircle,
}

impl SpectralClass {
    /// Membership in the open upper half plane.
    pub fn upper(&self) -> bool {
        matches!(self, Self::UnitCircleUpper | Self::UpperOffCircle)
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Self::PlusOne | Self::MinusOne | Self::RealPositive | Self::RealNegative)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralEntry {
    /// `[re, im]`.
    pub value: [f64; 2],
    pub algebraic: usize,
    pub geometric: usize,
    pub class: SpectralClass,
    /// Within the class band of `|lambda| = 1` or `Im lambda = 0`.
    pub boundary: bool,
    /// `algebraic - geometric`; a positive value suggests a Jordan block.
    pub jordan_defect: usize,
}

impl SpectralEntry {
    pub fn lambda(&self) -> C64 {
        C64::new(self.value[0], self.value[1])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub entries: Vec<SpectralEntry>,
    /// Every cluster has a partner cluster at `1/lambda` of the same size.
    pub inverse_symmetric: bool,
    /// Largest residual of the four eigenvector block relations.
    pub eigen_relation_residual: f64,
    /// Largest `|Q(z1, z2)|` over pairs that must be orthogonal, relative to `|z1||z2|`.
    pub q_orthogonality_residual: f64,
    pub largest_imaginary_part: f64,
}

impl Spectrum {
    pub fn upper_geometric(&self) -> usize {
        self.entries.iter().filter(|e| e.class.upper()).map(|e| e.geometric).sum()
    }

    pub fn upper_or_unit_real_geometric(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.class.upper() || matches!(e.class, SpectralClass::PlusOne | SpectralClass::MinusOne))
            .map(|e| e.geometric)
            .sum()
    }
}

fn classify(l: C64, band: f64, real_tol: f64) -> (SpectralClass, bool) {
    let im = l.im;
    let boundary = (im.abs() > real_tol && im.abs() <= band) || ((l.norm() - 1.0).abs() <= band && im.abs() > real_tol);
    if im.abs() <= real_tol {
        let class = if (l.re - 1.0).abs() <= band {
            SpectralClass::PlusOne
        } else if (l.re + 1.0).abs() <= band {
            SpectralClass::MinusOne
        } else if l.re > 0.0 {
            SpectralClass::RealPositive
        } else {
            SpectralClass::RealNegative
        };
        return (class, im != 0.0 && im.abs() > 0.1 * real_tol);
    }
    let on_circle = (l.norm() - 1.0).abs() <= band;
    let class = match (im > 0.0, on_circle) {
        (true, true) => SpectralClass::UnitCircleUpper,
        (false, true) => SpectralClass::UnitCircleLower,
        (true, false) => SpectralClass::UpperOffCircle,
        (false, false) => SpectralClass::LowerOffCircle,
    };
    (class, boundary)
}

/// Orthonormal eigenvectors spanning the numerical kernel of `m - lambda I`.
fn eigenvectors(m: &CMatrix, l: C64, count: usize, tol: f64) -> (CMatrix, usize) {
    let k = m.nrows();
    let shifted = m - CMatrix::identity(k, k) * l;
    let (vecs, sig) = linalg::smallest_right_singular(&shifted, count);
    let scale = linalg::frobenius(m).max(1.0);
    let geometric = sig.iter().filter(|&&s| s <= tol * scale).count().max(1).min(count);
    let from = vecs.ncols() - geometric;
    (vecs.columns(from, geometric).into_owned(), geometric)
}

pub fn classify_spectrum(ma: &MonodromyAnalysis, tol: &Tolerances) -> Result<Spectrum> {
    let n = ma.n;
    let g = to_complex(&ma.gamma_full);
    let scale = ma.gamma_full.norm().max(1.0);
    let band = tol.class_band * scale;
    let real_tol = 1e-10 * scale;
    let mut eigs = linalg::eigenvalues(&g).ok_or_else(|| Error::Numerical("monodromy eigenvalues".into()))?;
    // Real spectra are exactly symmetric; clear rounding noise so conjugate pairs classify consistently.
    for e in eigs.iter_mut() {
        if e.im.abs() <= real_tol {
            e.im = 0.0;
        }
    }
    eigs.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    // Relative to the eigenvalues themselves: large and small partners of a
    // hyperbolic pair are computed with comparable relative accuracy.
    let cluster_rel = 1e3 * tol.class_band;
    let close = |a: C64, b: C64| (a - b).norm() <= cluster_rel * a.norm().max(b.norm());
    let mut clusters: Vec<Vec<C64>> = vec![];
    for e in eigs {
        match clusters.iter_mut().find(|cl| cl.iter().any(|&x| close(x, e))) {
            Some(cl) => cl.push(e),
            None => clusters.push(vec![e]),
        }
    }
    let rank_tol = tol.rank.max(1e-7);
    let mut entries = vec![];
    let mut lifts: Vec<(C64, CMatrix)> = vec![];
    let mut eigen_relation_residual = 0.0f64;
    let [d1, d2, d3, d4] = ma.d_blocks.clone().map(|b| to_complex(&b));
    for cl in &clusters {
        let mean = cl.iter().sum::<C64>() / c(cl.len() as f64);
        let (vecs, geometric) = eigenvectors(&g, mean, cl.len(), rank_tol);
        let (class, boundary) = classify(mean, band, real_tol);
        entries.push(SpectralEntry {
            value: [mean.re, mean.im],
            algebraic: cl.len(),
            geometric,
            class,
            boundary,
            jordan_defect: cl.len() - geometric,
        });
        let half = (mean + mean.inv()) * 0.5;
        let diff = (mean - mean.inv()) * 0.5;
        for j in 0..vecs.ncols() {
            let u = vecs.column(j).into_owned();
            let x = u.rows(0, n).into_owned();
            let y = u.rows(n, n).into_owned();
            let r = [
                (&d1 * &x - &x * half).norm(),
                (&d2 * &y - &x * diff).norm(),
                (&d3 * &x - &y * diff).norm(),
                (&d4 * &y - &y * half).norm(),
            ];
            eigen_relation_residual = r.iter().fold(eigen_relation_residual, |m, v| m.max(*v / scale));
            lifts.push((mean, CMatrix::from_column_slice(2 * n, 1, u.as_slice())));
        }
    }
    let sizes: Vec<(C64, usize)> = entries.iter().map(|e| (e.lambda(), e.algebraic)).collect();
    let inverse_symmetric = sizes.iter().all(|&(l, k)| {
        let inv = l.inv();
        sizes.iter().any(|&(m, j)| close(m, inv) && j == k)
    });
    let q_orthogonality_residual = q_orthogonality(&g, &lifts, band, tol);
    let largest_imaginary_part = entries.iter().map(|e| e.value[1].abs()).fold(0.0, f64::max);
    Ok(Spectrum { entries, inverse_symmetric, eigen_relation_residual, q_orthogonality_residual, largest_imaginary_part })
}

fn q_orthogonality(g: &CMatrix, lifts: &[(C64, CMatrix)], band: f64, tol: &Tolerances) -> f64 {
    let n = g.nrows() / 2;
    let space = SymplecticSpace::doubled(n);
    let nd = LagrangianFrame::neumann(space);
    let dd = LagrangianFrame::dirichlet(space);
    let graph = |u: &CMatrix| vstack(&[u, &(g * u)]);
    let mut worst = 0.0f64;
    for (l1, u1) in lifts {
        for (l2, u2) in lifts {
            let conj_equal = (l1 - l2.conj()).norm() <= band;
            let unimodular = (l1 * l2.conj() - c(1.0)).norm() <= band;
            if conj_equal && !unimodular {
                continue;
            }
            let (z1, z2) = (graph(u1), graph(u2));
            let q = q_pairing(space, &nd, &dd, &z1, &z2, tol).norm();
            worst = worst.max(q / (linalg::frobenius(&z1) * linalg::frobenius(&z2)).max(1e-300));
        }
    }
    worst
}

/// Morse indices needed by the stability bounds.
#[derive(Debug, Clone, Serialize)]
pub struct BrakeMorseData {
    pub neumann: MorseIndex,
    pub dirichlet: MorseIndex,
    pub periodic: MorseIndex,
    /// On `[0, T/2]`: Neumann, Dirichlet, Neumann then Dirichlet, Dirichlet then Neumann.
    pub half: [MorseIndex; 4],
}

impl BrakeMorseData {
    pub fn converged(&self) -> bool {
        self.neumann.stable && self.dirichlet.stable && self.periodic.stable && self.half.iter().all(|m| m.stable)
    }

    /// `k = m^-(L_P)`.
    pub fn k(&self) -> usize {
        self.periodic.negative
    }
}

pub fn brake_morse_data(bp: &BrakeProblem, mesh: usize, tol: &Tolerances) -> Result<BrakeMorseData> {
    let path = &bp.path;
    let n = path.n();
    let std = SymplecticSpace::standard(n);
    let nb = |k| named_boundary(n, k, tol);
    let half_path = path.restrict(0.0, 0.5 * path.length())?;
    let m = |p: &CoefficientPath, k| morse_index_discretized(p, &nb(k)?, mesh, tol);
    let nh = LagrangianFrame::neumann(std);
    let dh = LagrangianFrame::dirichlet(std);
    Ok(BrakeMorseData {
        neumann: m(path, BoundaryKind::Neumann)?,
        dirichlet: m(path, BoundaryKind::Dirichlet)?,
        periodic: m(path, BoundaryKind::Periodic)?,
        half: [
            m(&half_path, BoundaryKind::Neumann)?,
            m(&half_path, BoundaryKind::Dirichlet)?,
            m(&half_path, BoundaryKind::Separated(nh.clone(), dh.clone()))?,
            m(&half_path, BoundaryKind::Separated(dh, nh))?,
        ],
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RealSpectrumVerdict {
    pub premise: bool,
    pub holds: bool,
    pub largest_imaginary_part: f64,
}

/// The three geometric-multiplicity bounds and the real-spectrum consequence.
pub fn stability_bounds(spectrum: &Spectrum, morse: &BrakeMorseData) -> (Vec<IdentityCheck>, RealSpectrumVerdict) {
    let mn = morse.neumann.negative as i64;
    let m0 = morse.neumann.zero as i64;
    let md = morse.dirichlet.negative as i64;
    let k = morse.k() as i64;
    let upper = spectrum.upper_geometric() as i64;
    let checks = vec![
        IdentityCheck::at_most("upper_and_unit_real_multiplicity", spectrum.upper_or_unit_real_geometric() as i64, mn + m0 - md),
        IdentityCheck::at_most("upper_multiplicity", upper, mn - md),
        IdentityCheck::at_most("upper_multiplicity_periodic", upper, 2 * k),
    ];
    let premise = mn == md;
    let nonreal = spectrum.entries.iter().any(|e| !e.class.is_real() && e.value[1].abs() >= 1e-6);
    (
        checks,
        RealSpectrumVerdict { premise, holds: !premise || !nonreal, largest_imaginary_part: spectrum.largest_imaginary_part },
    )
}

/// The splitting of the periodic, Neumann and Dirichlet indices over the half period.
pub fn morse_decomposition_check(morse: &BrakeMorseData) -> Vec<IdentityCheck> {
    let [hn, hd, hnd, hdn] = morse.half.clone().map(|m| m.negative as i64);
    let k = morse.k() as i64;
    let mn = morse.neumann.negative as i64;
    let md = morse.dirichlet.negative as i64;
    vec![
        IdentityCheck::equal("periodic_from_half", k, hn + hd),
        IdentityCheck::equal("neumann_from_half", mn, hn + hnd),
        IdentityCheck::equal("dirichlet_from_half", md, hd + hdn),
        IdentityCheck::at_most("neumann_minus_dirichlet", mn - md, 2 * k),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityVerdict {
    pub applicable: bool,
    pub reason: String,
    pub real_positive: bool,
    pub d3_positive_semidefinite: bool,
    pub d1_eigenvalues_nonnegative: bool,
    pub d3_d1_positive_semidefinite: bool,
    pub holds: bool,
}

/// For `k = 0`: all eigenvalues real and positive, with the intermediate block facts.
pub fn minimizer_positivity_check(ma: &MonodromyAnalysis, spectrum: &Spectrum, k: usize) -> PositivityVerdict {
    if k > 0 {
        return PositivityVerdict {
            applicable: false,
            reason: format!("periodic Morse index is {k}, not 0"),
            real_positive: false,
            d3_positive_semidefinite: false,
            d1_eigenvalues_nonnegative: false,
            d3_d1_positive_semidefinite: false,
            holds: true,
        };
    }
    let [d1, _, d3, _] = &ma.d_blocks;
    let scale = ma.gamma_full.norm().max(1.0);
    let eps = 1e-8 * scale;
    let min_sym = |m: &DMatrix<f64>| ((m + m.transpose()) * 0.5).symmetric_eigen().eigenvalues.min();
    let real_positive = spectrum.entries.iter().all(|e| e.class.is_real() && e.value[0] > 0.0);
    let d3_psd = min_sym(d3) >= -eps;
    let d1_nonneg = d1
        .complex_eigenvalues()
        .iter()
        .all(|l| l.im.abs() <= 1e-6 * scale && l.re >= -eps);
    let d3d1_psd = min_sym(&(d3 * d1)) >= -eps * scale;
    PositivityVerdict {
        applicable: true,
        reason: "periodic Morse index is 0".into(),
        real_positive,
        d3_positive_semidefinite: d3_psd,
        d1_eigenvalues_nonnegative: d1_nonneg,
        d3_d1_positive_semidefinite: d3d1_psd,
        holds: real_positive,
    }
}

/// Everything computed for one brake problem.
#[derive(Debug, Clone, Serialize)]
pub struct BrakeReport {
    pub parity_residual: f64,
    pub factorization_residual: f64,
    pub involution_residual: f64,
    pub block_relations: Vec<BlockRelation>,
    pub decomposition: Vec<BlockRelation>,
    pub spectrum: Spectrum,
    pub morse: BrakeMorseData,
    pub bounds: Vec<IdentityCheck>,
    pub real_spectrum: RealSpectrumVerdict,
    pub splitting: Vec<IdentityCheck>,
    pub positivity: PositivityVerdict,
    pub converged: bool,
}

impl BrakeReport {
    pub fn verdicts_hold(&self) -> bool {
        let ok = self.bounds.iter().chain(&self.splitting).all(|c| c.holds)
            && self.real_spectrum.holds
            && self.positivity.holds;
        !self.converged || ok
    }
}

pub fn analyze_brake(path: &CoefficientPath, disc: Discretization, tol: &Tolerances) -> Result<BrakeReport> {
    let bp = verify_brake(path, tol)?;
    let ma = monodromy_from_half(&bp, disc.steps, tol)?;
    let spectrum = classify_spectrum(&ma, tol)?;
    let morse = brake_morse_data(&bp, disc.mesh, tol)?;
    let (bounds, real_spectrum) = stability_bounds(&spectrum, &morse);
    let splitting = morse_decomposition_check(&morse);
    let positivity = minimizer_positivity_check(&ma, &spectrum, morse.k());
    Ok(BrakeReport {
        parity_residual: bp.parity_residual,
        factorization_residual: ma.factorization_residual,
        involution_residual: ma.involution_residual,
        block_relations: ma.block_relations.clone(),
        decomposition: ma.decomposition.clone(),
        converged: morse.converged(),
        spectrum,
        morse,
        bounds,
        real_spectrum,
        splitting,
        positivity,
    })
}

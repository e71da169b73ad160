//! Complex symplectic spaces, Lagrangian frames and their unitary
//! representation.
//!
//! Coordinates on `C^{2m}` are `z = (y, x)` and the form is
//! `omega(u, v) = <J u, v>` with `J = [0 -I; I 0]`.  The doubled space
//! `C^{4n}` carries `-omega (+) omega` in the coordinates `(y0, x0, yT, xT)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, eye, frobenius, hstack, to_complex, vstack, CMatrix, C64, I};
use crate::tolerances::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FormKind {
    /// `(C^{2m}, omega)`
    Standard,
    /// `(C^{2m}, -omega)`
    Negated,
    /// `(C^{4n}, -omega (+) omega)`
    Doubled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SymplecticSpace {
    half_dim: usize,
    kind: FormKind,
}

/// `J = [0 -I; I 0]` of size `2m`.
pub fn j_matrix(m: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        j[(i, m + i)] = -1.0;
        j[(m + i, i)] = 1.0;
    }
    j
}

/// Basis change `S` with `S^T (-J (+) J) S = J_{2n}`.  New coordinates are
/// `(-y0, yT, x0, xT)` and old coordinates are `S * new`.
pub fn doubled_basis_change(n: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(4 * n, 4 * n);
    for i in 0..n {
        s[(i, i)] = -1.0;
        s[(n + i, 2 * n + i)] = 1.0;
        s[(2 * n + i, n + i)] = 1.0;
        s[(3 * n + i, 3 * n + i)] = 1.0;
    }
    s
}

impl SymplecticSpace {
    pub fn standard(m: usize) -> Self {
        Self { half_dim: m, kind: FormKind::Standard }
    }

    pub fn negated(m: usize) -> Self {
        Self { half_dim: m, kind: FormKind::Negated }
    }

    /// Doubled space over `C^{2n}`, of total dimension `4n`.
    pub fn doubled(n: usize) -> Self {
        Self { half_dim: 2 * n, kind: FormKind::Doubled }
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn dim(&self) -> usize {
        2 * self.half_dim
    }

    /// `n` of the underlying `C^{2n}` for doubled spaces.
    pub fn base_dim(&self) -> usize {
        match self.kind {
            FormKind::Doubled => self.half_dim / 2,
            _ => self.half_dim,
        }
    }

    pub fn form_matrix(&self) -> DMatrix<f64> {
        match self.kind {
            FormKind::Standard => j_matrix(self.half_dim),
            FormKind::Negated => -j_matrix(self.half_dim),
            FormKind::Doubled => {
                let n = self.half_dim / 2;
                let mut f = DMatrix::zeros(4 * n, 4 * n);
                f.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&(-j_matrix(n)));
                f.view_mut((2 * n, 2 * n), (2 * n, 2 * n)).copy_from(&j_matrix(n));
                f
            }
        }
    }

    /// Orthogonal `D` with `D^T Omega D = J`, mapping Darboux coordinates to ours.
    pub fn darboux(&self) -> DMatrix<f64> {
        let m = self.half_dim;
        match self.kind {
            FormKind::Standard => DMatrix::identity(2 * m, 2 * m),
            FormKind::Negated => {
                let mut d = DMatrix::identity(2 * m, 2 * m);
                for i in m..2 * m {
                    d[(i, i)] = -1.0;
                }
                d
            }
            FormKind::Doubled => doubled_basis_change(m / 2),
        }
    }

    pub fn negate(&self) -> Result<Self> {
        match self.kind {
            FormKind::Standard => Ok(Self::negated(self.half_dim)),
            FormKind::Negated => Ok(Self::standard(self.half_dim)),
            FormKind::Doubled => Err(Error::Invalid("negation of a doubled space".into())),
        }
    }

    /// `omega(x, y) = y^* Omega x` for column vectors.
    pub fn omega(&self, x: &CMatrix, y: &CMatrix) -> C64 {
        (y.adjoint() * to_complex(&self.form_matrix()) * x)[(0, 0)]
    }

    /// Gram matrix `G[i][j] = omega(a_j, b_i)`.
    pub fn omega_gram(&self, a: &CMatrix, b: &CMatrix) -> CMatrix {
        b.adjoint() * to_complex(&self.form_matrix()) * a
    }
}

/// Orthonormal `2m x m` basis of a Lagrangian subspace.
#[derive(Debug, Clone)]
pub struct LagrangianFrame {
    space: SymplecticSpace,
    basis: CMatrix,
}

/// Result of a Lagrangian test on a raw frame.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LagrangianCheck {
    pub is_lagrangian: bool,
    pub isotropy_residual: f64,
    pub relative_sigma_min: f64,
}

pub fn is_lagrangian(space: SymplecticSpace, z: &CMatrix, tol: &Tolerances) -> LagrangianCheck {
    match LagrangianFrame::new(space, z.clone(), tol) {
        Ok(f) => LagrangianCheck {
            is_lagrangian: true,
            isotropy_residual: f.isotropy_residual(),
            relative_sigma_min: relative_sigma_min(z),
        },
        Err(_) => {
            let q = orthonormalize(z);
            LagrangianCheck {
                is_lagrangian: false,
                isotropy_residual: frobenius(&space.omega_gram(&q, &q)),
                relative_sigma_min: relative_sigma_min(z),
            }
        }
    }
}

fn relative_sigma_min(z: &CMatrix) -> f64 {
    let s = linalg::full_svd(z).sigma;
    match (s.first(), s.get(z.ncols().saturating_sub(1))) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

fn orthonormalize(z: &CMatrix) -> CMatrix {
    z.clone().qr().q()
}

impl LagrangianFrame {
    pub fn new(space: SymplecticSpace, z: CMatrix, tol: &Tolerances) -> Result<Self> {
        let m = space.half_dim();
        if z.nrows() != 2 * m || z.ncols() != m {
            return Err(Error::Dimension(format!(
                "Lagrangian frame must be {}x{}, got {}x{}",
                2 * m,
                m,
                z.nrows(),
                z.ncols()
            )));
        }
        let rel = relative_sigma_min(&z);
        if rel <= tol.rank {
            return Err(Error::RankDeficient(rel));
        }
        let q = orthonormalize(&z);
        let res = frobenius(&space.omega_gram(&q, &q));
        if res > tol.isotropy {
            return Err(Error::NotLagrangian(res));
        }
        Ok(Self { space, basis: q })
    }

    pub fn from_real(space: SymplecticSpace, z: &DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        Self::new(space, to_complex(z), tol)
    }

    /// `Lambda_D`: the Dirichlet Lagrangian `{x = 0}` of the space.
    pub fn dirichlet(space: SymplecticSpace) -> Self {
        let m = space.half_dim();
        let z = match space.kind() {
            FormKind::Doubled => {
                let n = m / 2;
                let mut z = CMatrix::zeros(4 * n, 2 * n);
                for i in 0..n {
                    z[(i, i)] = c(1.0);
                    z[(2 * n + i, n + i)] = c(1.0);
                }
                z
            }
            _ => vstack(&[&eye(m), &CMatrix::zeros(m, m)]),
        };
        Self { space, basis: z }
    }

    /// `Lambda_N`: the Neumann Lagrangian `{y = 0}` of the space.
    pub fn neumann(space: SymplecticSpace) -> Self {
        let m = space.half_dim();
        let z = match space.kind() {
            FormKind::Doubled => {
                let n = m / 2;
                let mut z = CMatrix::zeros(4 * n, 2 * n);
                for i in 0..n {
                    z[(n + i, i)] = c(1.0);
                    z[(3 * n + i, n + i)] = c(1.0);
                }
                z
            }
            _ => vstack(&[&CMatrix::zeros(m, m), &eye(m)]),
        };
        Self { space, basis: z }
    }

    /// `Gr(I_{2n})` in the doubled space.
    pub fn periodic(n: usize) -> Self {
        let s = (0.5f64).sqrt();
        let z = vstack(&[&eye(2 * n), &eye(2 * n)]).map(|v| v * s);
        Self { space: SymplecticSpace::doubled(n), basis: z }
    }

    /// `a (+) b` in the doubled space; `a` lives in `(C^{2n}, -omega)`.
    pub fn direct_sum(a: &LagrangianFrame, b: &LagrangianFrame) -> Result<Self> {
        let n = a.space.half_dim();
        if a.space.kind() == FormKind::Doubled
            || b.space.kind() == FormKind::Doubled
            || b.space.half_dim() != n
        {
            return Err(Error::Dimension("direct sum needs two frames in C^{2n}".into()));
        }
        let mut z = CMatrix::zeros(4 * n, 2 * n);
        z.view_mut((0, 0), (2 * n, n)).copy_from(&a.basis);
        z.view_mut((2 * n, n), (2 * n, n)).copy_from(&b.basis);
        Ok(Self { space: SymplecticSpace::doubled(n), basis: z })
    }

    /// Inverse of the unitary representation: the Lagrangian `L` with `f(L) = u`.
    pub fn from_unitary(space: SymplecticSpace, u: &CMatrix) -> Result<Self> {
        let m = space.half_dim();
        if u.shape() != (m, m) {
            return Err(Error::Dimension("unitary size does not match the space".into()));
        }
        let id = eye(m);
        let x = (&id + u).map(|z| z * 0.5);
        let y = (u - &id).map(|z| z * I * 0.5);
        let w = vstack(&[&x, &y]);
        let z = to_complex(&space.darboux()) * w;
        Ok(Self { space, basis: orthonormalize(&z) })
    }

    pub fn space(&self) -> SymplecticSpace {
        self.space
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn subspace(&self) -> linalg::Subspace {
        linalg::Subspace::from_orthonormal(self.basis.clone())
    }

    pub fn isotropy_residual(&self) -> f64 {
        frobenius(&self.space.omega_gram(&self.basis, &self.basis))
    }

    /// The same subspace regarded in another space of equal dimension.
    pub fn reinterpret(&self, space: SymplecticSpace) -> Result<Self> {
        if space.dim() != self.space.dim() {
            return Err(Error::Dimension("reinterpretation changes the dimension".into()));
        }
        let f = Self { space, basis: self.basis.clone() };
        if f.isotropy_residual() > 1e-6 {
            return Err(Error::NotLagrangian(f.isotropy_residual()));
        }
        Ok(f)
    }

    /// Unitary representation `f(Z) = (X - iY)(X + iY)^{-1}` in Darboux coordinates.
    pub fn unitary(&self) -> Result<CMatrix> {
        let m = self.space.half_dim();
        let w = to_complex(&self.space.darboux().transpose()) * &self.basis;
        let x = w.rows(0, m).into_owned();
        let y = w.rows(m, m).into_owned();
        let a = &x - y.map(|z| z * I);
        let b = &x + y.map(|z| z * I);
        let binv = b
            .try_inverse()
            .ok_or_else(|| Error::Numerical("X + iY is singular".into()))?;
        Ok(a * binv)
    }
}

/// Eigen-angles in `(-pi, pi]` of a unitary matrix, ascending.
pub fn eigen_angles(u: &CMatrix) -> Result<Vec<f64>> {
    let ev = linalg::eigenvalues(u).ok_or_else(|| Error::Numerical("unitary eigenvalues".into()))?;
    let mut a: Vec<f64> = ev.iter().map(|z| z.arg()).collect();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(a)
}

fn check_same_space(a: &LagrangianFrame, b: &LagrangianFrame) -> Result<()> {
    if a.space != b.space {
        return Err(Error::Dimension(format!(
            "frames live in different spaces: {:?} and {:?}",
            a.space, b.space
        )));
    }
    Ok(())
}

/// `dim(L1 ∩ L2)` from the eigenvalue 1 of `f(L2)^{-1} f(L1)`, cross-checked
/// against the nullity of `[Z1 | Z2]`.
pub fn intersection_dim(a: &LagrangianFrame, b: &LagrangianFrame, tol: &Tolerances) -> Result<usize> {
    check_same_space(a, b)?;
    let u = b.unitary()?.adjoint() * a.unitary()?;
    let by_angle = eigen_angles(&u)?.iter().filter(|t| t.abs() < tol.angle).count();
    let stacked = hstack(&[a.basis(), b.basis()]);
    let by_svd = stacked.ncols() - linalg::rank(&stacked, tol.rank);
    if by_angle != by_svd {
        return Err(Error::DegenerateIntersection(format!(
            "eigen-angle count {by_angle} differs from singular-value count {by_svd}"
        )));
    }
    Ok(by_angle)
}

pub fn intersection(a: &LagrangianFrame, b: &LagrangianFrame, tol: &Tolerances) -> Result<linalg::Subspace> {
    check_same_space(a, b)?;
    Ok(a.subspace().intersection(&b.subspace(), tol.rank))
}

/// Real symplectic matrix, `M^T J M = J`.
#[derive(Debug, Clone)]
pub struct SymplecticMatrix {
    m: DMatrix<f64>,
}

pub fn symplectic_residual(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows() / 2;
    let j = j_matrix(n);
    let scale = m.norm().powi(2).max(1.0);
    (m.transpose() * &j * m - &j).norm() / scale
}

impl SymplecticMatrix {
    pub fn new(m: DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() % 2 != 0 {
            return Err(Error::Dimension("symplectic matrix must be square of even size".into()));
        }
        let r = symplectic_residual(&m);
        if r > tol.symplectic {
            return Err(Error::NotSymplectic(r));
        }
        Ok(Self { m })
    }

    pub fn identity(n: usize) -> Self {
        Self { m: DMatrix::identity(2 * n, 2 * n) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn n(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn residual(&self) -> f64 {
        symplectic_residual(&self.m)
    }

    /// `M^{-1} = -J M^T J`.
    pub fn inverse(&self) -> Self {
        let j = j_matrix(self.n());
        Self { m: -(&j * self.m.transpose() * &j) }
    }

    pub fn compose(&self, other: &SymplecticMatrix) -> Self {
        Self { m: &self.m * &other.m }
    }

    /// Blocks `(D1, D2, D3, D4)` of `[D1 D2; D3 D4]`.
    pub fn blocks(&self) -> [DMatrix<f64>; 4] {
        let n = self.n();
        [
            self.m.view((0, 0), (n, n)).into_owned(),
            self.m.view((0, n), (n, n)).into_owned(),
            self.m.view((n, 0), (n, n)).into_owned(),
            self.m.view((n, n), (n, n)).into_owned(),
        ]
    }
}

/// `M L` for a Lagrangian `L` of `C^{2n}` (either sign of the form).
pub fn apply(m: &SymplecticMatrix, frame: &LagrangianFrame, tol: &Tolerances) -> Result<LagrangianFrame> {
    if frame.space().kind() == FormKind::Doubled || frame.space().half_dim() != m.n() {
        return Err(Error::Dimension("symplectic matrix and frame sizes differ".into()));
    }
    LagrangianFrame::new(frame.space(), to_complex(m.matrix()) * frame.basis(), tol)
}

/// Frames of `Gr(M) = {(z, Mz)}` in the doubled space.
#[derive(Debug, Clone)]
pub struct GraphFrames {
    /// Frame in the coordinates `(y0, x0, yT, xT)`.
    pub graph: LagrangianFrame,
    /// `S^T [I; M] = [-I 0; D1 D2; 0 I; D3 D4]`, a Lagrangian frame for `J_{2n}`.
    pub conjugated: CMatrix,
}

pub fn graph_frame(m: &SymplecticMatrix, tol: &Tolerances) -> Result<GraphFrames> {
    let n = m.n();
    let raw = vstack(&[&eye(2 * n), &to_complex(m.matrix())]);
    let conjugated = to_complex(&doubled_basis_change(n).transpose()) * &raw;
    let graph = LagrangianFrame::new(SymplecticSpace::doubled(n), raw, tol)?;
    Ok(GraphFrames { graph, conjugated })
}

/// The five standard Lagrangians attached to `C^{2n}`.
#[derive(Debug, Clone)]
pub struct StandardLagrangians {
    pub dirichlet_half: LagrangianFrame,
    pub neumann_half: LagrangianFrame,
    pub dirichlet: LagrangianFrame,
    pub neumann: LagrangianFrame,
    pub periodic: LagrangianFrame,
}

pub fn standard_lagrangians(n: usize) -> StandardLagrangians {
    StandardLagrangians {
        dirichlet_half: LagrangianFrame::dirichlet(SymplecticSpace::standard(n)),
        neumann_half: LagrangianFrame::neumann(SymplecticSpace::standard(n)),
        dirichlet: LagrangianFrame::dirichlet(SymplecticSpace::doubled(n)),
        neumann: LagrangianFrame::neumann(SymplecticSpace::doubled(n)),
        periodic: LagrangianFrame::periodic(n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn basis_change_is_symplectic_for_doubled_form() {
        for n in 1..4 {
            let s = doubled_basis_change(n);
            let f = SymplecticSpace::doubled(n).form_matrix();
            assert!((s.transpose() * f * &s - j_matrix(2 * n)).norm() < 1e-14);
        }
    }

    #[test]
    fn darboux_maps_to_standard_form() {
        for space in [SymplecticSpace::standard(3), SymplecticSpace::negated(2), SymplecticSpace::doubled(2)] {
            let d = space.darboux();
            let j = j_matrix(space.half_dim());
            assert!((d.transpose() * space.form_matrix() * &d - j).norm() < 1e-14);
        }
    }

    #[test]
    fn standard_frames_are_lagrangian() {
        let tol = Tolerances::default();
        let s = standard_lagrangians(2);
        for f in [&s.dirichlet_half, &s.neumann_half, &s.dirichlet, &s.neumann, &s.periodic] {
            assert!(f.isotropy_residual() < 1e-14);
            assert!(is_lagrangian(f.space(), f.basis(), &tol).is_lagrangian);
        }
        assert_eq!(intersection_dim(&s.dirichlet, &s.neumann, &tol).unwrap(), 0);
        assert_eq!(intersection_dim(&s.dirichlet, &s.periodic, &tol).unwrap(), 2);
        assert_eq!(intersection_dim(&s.neumann, &s.periodic, &tol).unwrap(), 2);
    }

    #[test]
    fn unitary_of_dirichlet_is_identity() {
        let d = LagrangianFrame::dirichlet(SymplecticSpace::standard(2));
        assert!(frobenius(&(d.unitary().unwrap() - eye(2))) < 1e-14);
        let nn = LagrangianFrame::neumann(SymplecticSpace::standard(2));
        assert!(frobenius(&(nn.unitary().unwrap() + eye(2))) < 1e-14);
    }

    #[test]
    fn non_lagrangian_frames_are_rejected() {
        let tol = Tolerances::default();
        let z = CMatrix::from_row_slice(2, 1, &[c(1.0), c(1.0)]);
        let z2 = vstack(&[&z, &z]);
        let mut w = CMatrix::zeros(4, 2);
        w[(0, 0)] = c(1.0);
        w[(2, 1)] = c(1.0);
        w[(1, 1)] = c(1.0);
        assert!(matches!(
            LagrangianFrame::new(SymplecticSpace::standard(2), w, &tol),
            Err(Error::NotLagrangian(_))
        ));
        assert!(matches!(
            LagrangianFrame::new(SymplecticSpace::standard(2), hstack(&[&z2, &z2]), &tol),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn from_unitary_inverts_unitary_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for space in [SymplecticSpace::standard(3), SymplecticSpace::negated(2), SymplecticSpace::doubled(2)] {
            let u = random::random_unitary(&mut rng, space.half_dim());
            let f = LagrangianFrame::from_unitary(space, &u).unwrap();
            assert!(f.isotropy_residual() < 1e-12);
            assert!(frobenius(&(f.unitary().unwrap() - &u)) < 1e-10);
        }
    }

    #[test]
    fn graph_frame_conjugated_blocks() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random::random_symplectic(&mut rng, 2, 0.5);
        let g = graph_frame(&m, &tol).unwrap();
        let [d1, d2, d3, d4] = m.blocks();
        let n = 2;
        let expect = {
            let mut e = DMatrix::<f64>::zeros(4 * n, 2 * n);
            e.view_mut((0, 0), (n, n)).copy_from(&(-DMatrix::<f64>::identity(n, n)));
            e.view_mut((n, 0), (n, n)).copy_from(&d1);
            e.view_mut((n, n), (n, n)).copy_from(&d2);
            e.view_mut((2 * n, n), (n, n)).copy_from(&DMatrix::<f64>::identity(n, n));
            e.view_mut((3 * n, 0), (n, n)).copy_from(&d3);
            e.view_mut((3 * n, n), (n, n)).copy_from(&d4);
            e
        };
        assert!(frobenius(&(&g.conjugated - to_complex(&expect))) < 1e-12);
        let jf = to_complex(&j_matrix(2 * n));
        assert!(frobenius(&(g.conjugated.adjoint() * jf * &g.conjugated)) < 1e-10);
    }

    #[test]
    fn symplectic_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random::random_symplectic(&mut rng, 3, 0.7);
        let p = m.compose(&m.inverse());
        assert!((p.matrix() - DMatrix::<f64>::identity(6, 6)).norm() < 1e-10);
    }
}

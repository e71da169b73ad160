//! Dense complex linear-algebra helpers.  Matrices are nalgebra types; the
//! complex decompositions go through faer.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::Serialize;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = Complex { re: 0.0, im: 1.0 };

pub fn c(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(c)
}

pub fn eye(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn hstack(blocks: &[&CMatrix]) -> CMatrix {
    let rows = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

pub fn vstack(blocks: &[&CMatrix]) -> CMatrix {
    let cols = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack column mismatch");
        out.view_mut((at, 0), (b.nrows(), cols)).copy_from(*b);
        at += b.nrows();
    }
    out
}

pub fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Singular values in descending order with the matching full set of right
/// singular vectors (columns of an `ncols x ncols` unitary).
pub struct FullSvd {
    pub sigma: Vec<f64>,
    pub u: CMatrix,
    pub v: CMatrix,
}

pub fn full_svd(m: &CMatrix) -> FullSvd {
    let (r, k) = m.shape();
    if k == 0 {
        return FullSvd { sigma: vec![], u: CMatrix::zeros(r, 0), v: CMatrix::zeros(0, 0) };
    }
    if r == 0 {
        return FullSvd { sigma: vec![0.0; k], u: CMatrix::zeros(0, k), v: eye(k) };
    }
    let svd = to_faer(m).svd().expect("svd converges");
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let p = r.min(k);
    let mut sigma: Vec<f64> = (0..p).map(|i| s[i].re).collect();
    sigma.resize(k, 0.0);
    FullSvd {
        sigma,
        u: CMatrix::from_fn(r, p, |i, j| u[(i, j)]),
        v: CMatrix::from_fn(k, k, |i, j| v[(i, j)]),
    }
}

fn to_faer(m: &CMatrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn threshold(sigma: &[f64], tol: f64) -> f64 {
    tol * sigma.first().copied().unwrap_or(0.0)
}

pub fn rank(m: &CMatrix, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let s = full_svd(m);
    let th = threshold(&s.sigma, tol);
    s.sigma.iter().filter(|&&x| x > th && x > 0.0).count()
}

/// Orthonormal basis of the column space.
pub fn column_space(m: &CMatrix, tol: f64) -> CMatrix {
    if m.ncols() == 0 {
        return CMatrix::zeros(m.nrows(), 0);
    }
    let s = full_svd(m);
    let th = threshold(&s.sigma, tol);
    let r = s.sigma.iter().take(m.nrows().min(m.ncols())).filter(|&&x| x > th && x > 0.0).count();
    s.u.columns(0, r).into_owned()
}

/// Orthonormal basis of the kernel.
pub fn null_space(m: &CMatrix, tol: f64) -> CMatrix {
    let k = m.ncols();
    if k == 0 {
        return CMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return eye(k);
    }
    let s = full_svd(m);
    let th = threshold(&s.sigma, tol);
    let r = s.sigma.iter().filter(|&&x| x > th && x > 0.0).count();
    s.v.columns(r, k - r).into_owned()
}

/// The `count` right singular vectors belonging to the smallest singular values.
pub fn smallest_right_singular(m: &CMatrix, count: usize) -> (CMatrix, Vec<f64>) {
    let k = m.ncols();
    let s = full_svd(m);
    let from = k - count.min(k);
    (s.v.columns(from, k - from).into_owned(), s.sigma[from..].to_vec())
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn pinv_solve(a: &CMatrix, b: &CMatrix, tol: f64) -> CMatrix {
    let s = full_svd(a);
    let th = threshold(&s.sigma, tol).max(f64::MIN_POSITIVE);
    let r = s.sigma.iter().take(s.u.ncols()).filter(|&&x| x > th).count();
    let mut coeff = s.u.columns(0, r).adjoint() * b;
    for (i, mut row) in coeff.row_iter_mut().enumerate() {
        row /= c(s.sigma[i]);
    }
    s.v.columns(0, r) * coeff
}

pub fn hermitian_residual(m: &CMatrix) -> f64 {
    let scale = frobenius(m).max(f64::MIN_POSITIVE);
    frobenius(&(m - m.adjoint())) / scale
}

pub fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (vec![], CMatrix::zeros(0, 0));
    }
    let eig = to_faer(&symmetrize(m)).self_adjoint_eigen(faer::Side::Lower).expect("Hermitian eigensolver converges");
    let (s, u) = (eig.S().column_vector(), eig.U());
    let vals = (0..n).map(|i| s[i].re).collect();
    (vals, CMatrix::from_fn(n, n, |i, j| u[(i, j)]))
}

/// General complex eigenvalues.
pub fn eigenvalues(m: &CMatrix) -> Option<Vec<C64>> {
    if m.nrows() == 0 {
        return Some(vec![]);
    }
    to_faer(m).eigenvalues().ok()
}

/// Inertia of a Hermitian form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Inertia {
    pub positive: usize,
    pub zero: usize,
    pub negative: usize,
}

impl Inertia {
    pub fn from_eigenvalues(eigs: &[f64], zero_tol: f64) -> Self {
        let mut out = Inertia::default();
        for &e in eigs {
            if e.abs() <= zero_tol {
                out.zero += 1;
            } else if e > 0.0 {
                out.positive += 1;
            } else {
                out.negative += 1;
            }
        }
        out
    }

    pub fn signature(&self) -> i64 {
        self.positive as i64 - self.negative as i64
    }

    pub fn dim(&self) -> usize {
        self.positive + self.zero + self.negative
    }
}

/// A linear subspace stored as an orthonormal column basis.
#[derive(Debug, Clone)]
pub struct Subspace {
    basis: CMatrix,
}

impl Subspace {
    pub fn span(columns: &CMatrix, tol: f64) -> Self {
        Self { basis: column_space(columns, tol) }
    }

    pub fn from_orthonormal(basis: CMatrix) -> Self {
        Self { basis }
    }

    pub fn zero(ambient: usize) -> Self {
        Self { basis: CMatrix::zeros(ambient, 0) }
    }

    pub fn full(ambient: usize) -> Self {
        Self { basis: eye(ambient) }
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient(&self) -> usize {
        self.basis.nrows()
    }

    pub fn sum(&self, other: &Subspace, tol: f64) -> Subspace {
        Subspace::span(&hstack(&[&self.basis, &other.basis]), tol)
    }

    pub fn intersection(&self, other: &Subspace, tol: f64) -> Subspace {
        if self.dim() == 0 || other.dim() == 0 {
            return Subspace::zero(self.ambient());
        }
        let stacked = hstack(&[&self.basis, &(-&other.basis)]);
        let ker = null_space(&stacked, tol);
        if ker.ncols() == 0 {
            return Subspace::zero(self.ambient());
        }
        let coeff = ker.rows(0, self.dim()).into_owned();
        Subspace::span(&(&self.basis * coeff), tol)
    }

    pub fn orthogonal_complement(&self, tol: f64) -> Subspace {
        if self.dim() == 0 {
            return Subspace::full(self.ambient());
        }
        Subspace::from_orthonormal(null_space(&self.basis.adjoint(), tol))
    }

    pub fn contains(&self, other: &Subspace, tol: f64) -> bool {
        self.sum(other, tol).dim() == self.dim()
    }

    pub fn same_as(&self, other: &Subspace, tol: f64) -> bool {
        self.dim() == other.dim() && self.contains(other, tol)
    }

    /// Image under a linear map.
    pub fn image(&self, map: &CMatrix, tol: f64) -> Subspace {
        Subspace::span(&(map * &self.basis), tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(rows: usize, cols: usize, v: &[f64]) -> CMatrix {
        CMatrix::from_row_slice(rows, cols, &v.iter().map(|&x| c(x)).collect::<Vec<_>>())
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = cm(1, 3, &[1.0, 1.0, 0.0]);
        let k = null_space(&m, 1e-10);
        assert_eq!(k.ncols(), 2);
        assert!(frobenius(&(&m * &k)) < 1e-12);
    }

    #[test]
    fn subspace_intersection_and_sum() {
        let a = Subspace::span(&cm(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]), 1e-10);
        let b = Subspace::span(&cm(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]), 1e-10);
        assert_eq!(a.intersection(&b, 1e-10).dim(), 1);
        assert_eq!(a.sum(&b, 1e-10).dim(), 3);
        assert_eq!(a.orthogonal_complement(1e-10).dim(), 1);
    }

    #[test]
    fn inertia_counts() {
        let i = Inertia::from_eigenvalues(&[-2.0, 0.0, 1e-12, 3.0], 1e-9);
        assert_eq!((i.positive, i.zero, i.negative), (1, 2, 1));
        assert_eq!(i.signature(), 0);
    }

    #[test]
    fn pinv_gives_min_norm_solution() {
        let a = cm(1, 2, &[1.0, 1.0]);
        let b = cm(1, 1, &[2.0]);
        let x = pinv_solve(&a, &b, 1e-12);
        assert!((x[(0, 0)].re - 1.0).abs() < 1e-12 && (x[(1, 0)].re - 1.0).abs() < 1e-12);
    }
}

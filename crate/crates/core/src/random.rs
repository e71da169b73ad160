//! Seeded generators for unitaries, Lagrangians, symplectic matrices,
//! Hermitian forms and whole Sturm-Liouville problems.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, c, CMatrix};
use crate::sturm_liouville::{boundary_from_canonical, BoundaryCondition, CoefficientPath, MatrixFunction};
use crate::symplectic_core::{j_matrix, LagrangianFrame, SymplecticMatrix, SymplecticSpace};
use crate::tolerances::Tolerances;

pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_gaussian<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| Complex::new(gaussian(rng), gaussian(rng)))
}

pub fn real_gaussian<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, m: usize) -> CMatrix {
    let g = complex_gaussian(rng, m, m);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
        for i in 0..m {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Lagrangian with a Haar-random unitary representation.
pub fn random_lagrangian<R: Rng>(rng: &mut R, space: SymplecticSpace) -> LagrangianFrame {
    let u = random_unitary(rng, space.half_dim());
    LagrangianFrame::from_unitary(space, &u).expect("unitary of matching size")
}

/// Lagrangian meeting `base` in exactly `k` dimensions.
pub fn random_lagrangian_meeting<R: Rng>(rng: &mut R, base: &LagrangianFrame, k: usize) -> LagrangianFrame {
    let m = base.space().half_dim();
    let v = random_unitary(rng, m);
    let mut d = CMatrix::identity(m, m);
    for j in k..m {
        let theta = rng.gen_range(0.4..(2.0 * std::f64::consts::PI - 0.4));
        d[(j, j)] = Complex::from_polar(1.0, theta);
    }
    let w = &v * d * v.adjoint();
    let u = base.unitary().expect("unitary") * w;
    LagrangianFrame::from_unitary(base.space(), &u).expect("unitary of matching size")
}

/// Real Lagrangian: the image of the Dirichlet plane under a random real symplectic map.
pub fn random_real_lagrangian<R: Rng>(rng: &mut R, space: SymplecticSpace) -> LagrangianFrame {
    let m = space.half_dim();
    let s = random_symplectic(rng, m, 0.8);
    let darboux = space.darboux();
    let d = LagrangianFrame::dirichlet(SymplecticSpace::standard(m));
    let z = linalg::to_complex(&(darboux * s.matrix())) * d.basis();
    LagrangianFrame::new(space, z, &Default::default()).expect("real symplectic image")
}

fn random_symmetric<R: Rng>(rng: &mut R, n: usize, scale: f64) -> DMatrix<f64> {
    let a = real_gaussian(rng, n, n) * scale;
    (&a + a.transpose()) * 0.5
}

/// Product of a linear, a shear and a lower shear generator of `Sp(2n)`.
pub fn random_symplectic<R: Rng>(rng: &mut R, n: usize, scale: f64) -> SymplecticMatrix {
    let mut a = DMatrix::<f64>::identity(n, n) + real_gaussian(rng, n, n) * (scale * 0.5);
    while a.determinant().abs() < 0.2 {
        a = DMatrix::<f64>::identity(n, n) + real_gaussian(rng, n, n) * (scale * 0.5);
    }
    let a_inv_t = a.clone().try_inverse().expect("invertible").transpose();
    let mut lin = DMatrix::<f64>::zeros(2 * n, 2 * n);
    lin.view_mut((0, 0), (n, n)).copy_from(&a);
    lin.view_mut((n, n), (n, n)).copy_from(&a_inv_t);
    let mut up = DMatrix::<f64>::identity(2 * n, 2 * n);
    up.view_mut((0, n), (n, n)).copy_from(&random_symmetric(rng, n, scale));
    let mut low = DMatrix::<f64>::identity(2 * n, 2 * n);
    low.view_mut((n, 0), (n, n)).copy_from(&random_symmetric(rng, n, scale));
    let m = lin * up * low;
    debug_assert!((m.transpose() * j_matrix(n) * &m - j_matrix(n)).norm() < 1e-8);
    SymplecticMatrix::new(m, &Default::default()).expect("generator product is symplectic")
}

/// Hermitian `size x size` matrix of the given rank.
pub fn random_hermitian<R: Rng>(rng: &mut R, size: usize, rank: usize) -> CMatrix {
    let u = random_unitary(rng, size);
    let mut d = CMatrix::zeros(size, size);
    for j in 0..rank.min(size) {
        let mut v = gaussian(rng);
        if v.abs() < 0.2 {
            v = 0.2f64.copysign(v);
        }
        d[(j, j)] = c(v);
    }
    &u * d * u.adjoint()
}

fn uniform_symmetric<R: Rng>(rng: &mut R, n: usize, bound: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-bound..=bound);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

fn uniform<R: Rng>(rng: &mut R, n: usize, bound: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.gen_range(-bound..=bound))
}

/// Random coefficients on `[0, T]`, `T` in `[1, 4]`, with Fourier
/// coefficients bounded by 1 and `P` within 0.1 per entry of the identity.
///
/// With `brake` set, `P` and `R` are even and `Q` odd about `t = 0`, and all
/// three are `T`-periodic.
pub fn random_coefficient_path<R: Rng>(rng: &mut R, n: usize, brake: bool) -> CoefficientPath {
    let length = rng.gen_range(1.0..4.0);
    let modes = rng.gen_range(0..=2usize);
    let p_cos = (0..modes).map(|_| uniform_symmetric(rng, n, 0.1)).collect();
    let p_sin = if brake { vec![] } else { (0..modes).map(|_| uniform_symmetric(rng, n, 0.1)).collect() };
    let p = MatrixFunction::fourier(DMatrix::identity(n, n) + uniform_symmetric(rng, n, 0.1), p_cos, p_sin, length);
    let q = if brake {
        MatrixFunction::fourier(DMatrix::zeros(n, n), vec![], vec![uniform(rng, n, 1.0)], length)
    } else {
        MatrixFunction::fourier(uniform(rng, n, 1.0), vec![uniform(rng, n, 1.0)], vec![], length)
    };
    let r_sin = if brake { vec![] } else { vec![uniform_symmetric(rng, n, 1.0)] };
    let r = MatrixFunction::fourier(uniform_symmetric(rng, n, 1.0), vec![uniform_symmetric(rng, n, 1.0)], r_sin, length);
    let (p, q, r) = (p.expect("small mode count"), q.expect("small mode count"), r.expect("small mode count"));
    CoefficientPath::new(n, length, p, q, r).expect("P stays positive definite")
}

/// Self-adjoint boundary condition with `dim V` uniform in `0..=2n`, `V`
/// Haar-random and `A` Hermitian with entries of unit size.
pub fn random_boundary<R: Rng>(rng: &mut R, n: usize) -> BoundaryCondition {
    let m = 2 * n;
    let nu = rng.gen_range(0..=m);
    let v = random_unitary(rng, m).columns(0, nu).into_owned();
    let g = complex_gaussian(rng, nu, nu);
    let a = (&g + g.adjoint()) * c(0.5);
    boundary_from_canonical(&v, &a, &Tolerances::default()).expect("canonical data is Lagrangian")
}

/// Pair of Lagrangians of `C^{2n}` for separated conditions.  Each part is
/// Dirichlet, Neumann or real-random with equal probability.
pub fn random_separated_pair<R: Rng>(rng: &mut R, n: usize) -> (LagrangianFrame, LagrangianFrame) {
    let std = SymplecticSpace::standard(n);
    let pick = |rng: &mut R| match rng.gen_range(0..3) {
        0 => LagrangianFrame::dirichlet(std),
        1 => LagrangianFrame::neumann(std),
        _ => random_real_lagrangian(rng, std),
    };
    let s = pick(rng);
    let e = pick(rng);
    (s, e)
}

/// Brake coefficients with `R >= I` and small `Q`, so the periodic Morse
/// index vanishes.
pub fn random_convex_brake_path<R: Rng>(rng: &mut R, n: usize) -> CoefficientPath {
    let length = rng.gen_range(1.0..4.0);
    let p = MatrixFunction::fourier(DMatrix::identity(n, n) + uniform_symmetric(rng, n, 0.1), vec![uniform_symmetric(rng, n, 0.1)], vec![], length);
    let q = MatrixFunction::fourier(DMatrix::zeros(n, n), vec![], vec![uniform(rng, n, 0.2)], length);
    let r0 = DMatrix::identity(n, n) * 2.0 + uniform_symmetric(rng, n, 0.3);
    let r = MatrixFunction::fourier(r0, vec![uniform_symmetric(rng, n, 0.3)], vec![], length);
    let (p, q, r) = (p.expect("small mode count"), q.expect("small mode count"), r.expect("small mode count"));
    CoefficientPath::new(n, length, p, q, r).expect("P stays positive definite")
}

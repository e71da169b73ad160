//! Index computations against oracles that share no code with the library:
//! closed-form spectra and a finite-difference Sylvester count.

use std::f64::consts::PI;

use lagindex::brake_orbit::{analyze_brake, brake_morse_data, verify_brake};
use lagindex::sturm_liouville::{
    conjugate_points_dirichlet, fundamental_solution, morse_index_discretized, named_boundary, BoundaryKind,
    CoefficientPath, Discretization, MatrixFunction,
};
use lagindex::Tolerances;
use nalgebra::DMatrix;

fn tol() -> Tolerances {
    Tolerances::default()
}

/// Negative eigenvalues of `-x'' + r x` with constant `r`, from the closed-form spectrum.
fn closed_form_count(kind: &str, r: f64, len: f64) -> usize {
    let mut count = 0;
    for k in 0..200usize {
        let kf = k as f64;
        let (lambda, mult) = match kind {
            "dirichlet" if k > 0 => ((kf * PI / len).powi(2) + r, 1),
            "neumann" => ((kf * PI / len).powi(2) + r, 1),
            "periodic" => ((2.0 * kf * PI / len).powi(2) + r, if k == 0 { 1 } else { 2 }),
            _ => continue,
        };
        if lambda < 0.0 {
            count += mult;
        }
    }
    count
}

/// Negative pivots of the Dirichlet finite-difference matrix of `-x'' + r(t) x`,
/// which by Sylvester's law is its negative eigenvalue count.
fn finite_difference_count(r: impl Fn(f64) -> f64, len: f64, points: usize) -> usize {
    let h = len / (points + 1) as f64;
    let off = -1.0 / (h * h);
    let mut negative = 0;
    let mut prev = f64::INFINITY;
    for i in 1..=points {
        let diag = 2.0 / (h * h) + r(i as f64 * h);
        let pivot = if prev.is_infinite() { diag } else { diag - off * off / prev };
        if pivot < 0.0 {
            negative += 1;
        }
        prev = pivot;
    }
    negative
}

#[test]
fn constant_oscillators_match_closed_form() {
    for kind in ["dirichlet", "neumann", "periodic"] {
        for (r, len) in [(-1.0, 2.5), (-4.3, 3.0), (-0.2, 1.0), (0.7, 2.0), (-9.5, 2.2)] {
            let path = CoefficientPath::oscillator(1, r, len).unwrap();
            let bk = match kind {
                "dirichlet" => BoundaryKind::Dirichlet,
                "neumann" => BoundaryKind::Neumann,
                _ => BoundaryKind::Periodic,
            };
            let bc = named_boundary(1, bk, &tol()).unwrap();
            let m = morse_index_discretized(&path, &bc, 256, &tol()).unwrap();
            assert!(m.stable, "{kind} r={r} len={len}");
            assert_eq!(m.negative, closed_form_count(kind, r, len), "{kind} r={r} len={len}");
        }
    }
}

#[test]
fn decoupled_system_counts_add() {
    let (len, r1, r2) = (2.7, -3.0, -11.0);
    let r = DMatrix::from_row_slice(2, 2, &[r1, 0.0, 0.0, r2]);
    let path = CoefficientPath::constant(DMatrix::identity(2, 2), DMatrix::zeros(2, 2), r, len).unwrap();
    let bc = named_boundary(2, BoundaryKind::Dirichlet, &tol()).unwrap();
    let m = morse_index_discretized(&path, &bc, 256, &tol()).unwrap();
    assert_eq!(m.negative, closed_form_count("dirichlet", r1, len) + closed_form_count("dirichlet", r2, len));
}

#[test]
fn variable_potential_matches_finite_differences() {
    for (r0, a, len) in [(-3.0, 1.5, 3.0), (-6.0, 4.0, 2.0), (-1.2, 0.8, 4.0)] {
        let r = |t: f64| r0 + a * (2.0 * PI * t / len).cos();
        let fd = finite_difference_count(r, len, 4000);
        assert_eq!(fd, finite_difference_count(r, len, 8000), "oracle itself unresolved");
        let path = CoefficientPath::new(
            1,
            len,
            MatrixFunction::Constant(DMatrix::identity(1, 1)),
            MatrixFunction::Constant(DMatrix::zeros(1, 1)),
            MatrixFunction::fourier(DMatrix::from_element(1, 1, r0), vec![DMatrix::from_element(1, 1, a)], vec![], len)
                .unwrap(),
        )
        .unwrap();
        let bc = named_boundary(1, BoundaryKind::Dirichlet, &tol()).unwrap();
        let m = morse_index_discretized(&path, &bc, 256, &tol()).unwrap();
        assert_eq!(m.negative, fd, "r0={r0} a={a}");
    }
}

#[test]
fn conjugate_points_of_oscillator_sit_at_multiples() {
    let omega: f64 = 1.7;
    let len = 3.0 * PI / omega + 0.4;
    let path = CoefficientPath::oscillator(1, -omega * omega, len).unwrap();
    let fs = fundamental_solution(&path, 4096, &tol()).unwrap();
    let cp = conjugate_points_dirichlet(&fs, &tol()).unwrap();
    assert_eq!(cp.total, 3);
    for (p, k) in cp.points.iter().zip(1..) {
        assert!((p.t - k as f64 * PI / omega).abs() < 1e-6, "{} vs {}", p.t, k as f64 * PI / omega);
    }
}

#[test]
fn brake_oscillator_indices_by_hand() {
    // -x'' - x on [0, 2 pi]: Neumann spectrum k^2/4 - 1, Dirichlet k >= 1 of the
    // same, periodic k^2 - 1.  On [0, pi] the mixed conditions give (k + 1/2)^2 - 1.
    let path = CoefficientPath::oscillator(1, -1.0, 2.0 * PI).unwrap();
    let bp = verify_brake(&path, &tol()).unwrap();
    let m = brake_morse_data(&bp, 256, &tol()).unwrap();
    assert_eq!((m.neumann.negative, m.neumann.zero), (2, 1));
    assert_eq!((m.dirichlet.negative, m.dirichlet.zero), (1, 1));
    assert_eq!((m.periodic.negative, m.periodic.zero), (1, 2));
    let half: Vec<usize> = m.half.iter().map(|h| h.negative).collect();
    assert_eq!(half, vec![1, 0, 1, 1]);
}

#[test]
fn hyperbolic_brake_system_has_trivial_indices() {
    let path = CoefficientPath::oscillator(1, 1.0, 1.0).unwrap();
    let r = analyze_brake(&path, Discretization::default(), &tol()).unwrap();
    assert_eq!(r.morse.k(), 0);
    assert_eq!(r.morse.neumann.negative + r.morse.dirichlet.negative, 0);
    assert!(r.verdicts_hold());
    // cosh(1) on the diagonal of the monodromy.
    let mut re: Vec<f64> = r.spectrum.entries.iter().map(|e| e.value[0]).collect();
    re.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!((re[0] * re[1] - 1.0).abs() < 1e-10);
    assert!(((re[0] + re[1]) / 2.0 - 1f64.cosh()).abs() < 1e-8);
}

//! Finite-dimensional Hermitian forms: Q-orthogonals, restrictions and the
//! relative Morse index.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, frobenius, CMatrix, Inertia, Subspace};
use crate::tolerances::Tolerances;

/// Hermitian form `H(u, v) = v^* G u` on `C^N`.  `scale` is the magnitude
/// against which eigenvalues are compared; restrictions inherit it.
#[derive(Debug, Clone)]
pub struct FiniteHermitianForm {
    gram: CMatrix,
    scale: f64,
}

impl FiniteHermitianForm {
    pub fn new(gram: CMatrix, tol: &Tolerances) -> Result<Self> {
        if gram.nrows() != gram.ncols() {
            return Err(Error::Dimension("Gram matrix must be square".into()));
        }
        let res = linalg::hermitian_residual(&gram);
        if res > tol.rank {
            return Err(Error::NotHermitian(res));
        }
        let scale = gram.iter().map(|z| z.norm()).fold(0.0, f64::max) * gram.nrows().max(1) as f64;
        Ok(Self { gram: linalg::symmetrize(&gram), scale })
    }

    pub fn with_scale(gram: CMatrix, scale: f64) -> Self {
        Self { gram: linalg::symmetrize(&gram), scale }
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn evaluate(&self, u: &CMatrix, v: &CMatrix) -> linalg::C64 {
        (v.adjoint() * &self.gram * u)[(0, 0)]
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigen(&self.gram).0
    }

    pub fn zero_tolerance(&self, tol: &Tolerances) -> f64 {
        tol.rank * self.scale
    }

    pub fn inertia(&self, tol: &Tolerances) -> Inertia {
        Inertia::from_eigenvalues(&self.eigenvalues(), self.zero_tolerance(tol))
    }

    pub fn morse_index(&self, tol: &Tolerances) -> usize {
        self.inertia(tol).negative
    }

    /// Restriction to a subspace given by an orthonormal basis.
    pub fn restrict(&self, v: &Subspace) -> FiniteHermitianForm {
        let b = v.basis();
        Self { gram: linalg::symmetrize(&(b.adjoint() * &self.gram * b)), scale: self.scale }
    }

    pub fn kernel(&self, tol: &Tolerances) -> Subspace {
        let (vals, vecs) = linalg::hermitian_eigen(&self.gram);
        let zt = self.zero_tolerance(tol);
        let cols: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].abs() <= zt).collect();
        let mut k = CMatrix::zeros(self.dim(), cols.len());
        for (j, &i) in cols.iter().enumerate() {
            k.set_column(j, &vecs.column(i));
        }
        Subspace::from_orthonormal(k)
    }

    /// True when `H(x, y) = 0` for all `x, y` in `v`.
    pub fn is_isotropic(&self, v: &Subspace, tol: &Tolerances) -> bool {
        frobenius(self.restrict(v).gram()) <= self.zero_tolerance(tol).max(1e-300) * 10.0
    }
}

/// `V^Q = {x : Q(x, v) = 0 for all v in V}`.
pub fn q_orthogonal(q: &FiniteHermitianForm, v: &Subspace, tol: &Tolerances) -> Subspace {
    if v.dim() == 0 {
        return Subspace::full(q.dim());
    }
    let constraints = v.basis().adjoint() * q.gram();
    let scale = frobenius(&constraints);
    if scale <= q.zero_tolerance(tol) {
        return Subspace::full(q.dim());
    }
    Subspace::from_orthonormal(linalg::null_space(&constraints, tol.rank))
}

/// Terms of the relative Morse index `I(Q|_V, Q)`.
#[derive(Debug, Clone, Serialize)]
pub struct RelativeMorseIndex {
    pub value: i64,
    pub dim_v_cap_vq: usize,
    pub dim_v_cap_ker: usize,
    pub morse_on_vq: usize,
    /// `m^-(Q) - m^-(Q|_V)`, which the value must equal.
    pub morse_difference: i64,
    /// Whether `V^{QQ} = V + ker Q` holds numerically.
    pub double_orthogonal_holds: bool,
}

pub fn relative_morse_index(q: &FiniteHermitianForm, v: &Subspace, tol: &Tolerances) -> Result<RelativeMorseIndex> {
    if v.ambient() != q.dim() {
        return Err(Error::Dimension("subspace and form live in different spaces".into()));
    }
    let vq = q_orthogonal(q, v, tol);
    let ker = q.kernel(tol);
    let vqq = q_orthogonal(q, &vq, tol);
    let v_plus_ker = v.sum(&ker, tol.rank);
    let dim_v_cap_vq = v.intersection(&vq, tol.rank).dim();
    let dim_v_cap_ker = v.intersection(&ker, tol.rank).dim();
    let morse_on_vq = q.restrict(&vq).morse_index(tol);
    let value = dim_v_cap_vq as i64 - dim_v_cap_ker as i64 + morse_on_vq as i64;
    let morse_difference = q.morse_index(tol) as i64 - q.restrict(v).morse_index(tol) as i64;
    Ok(RelativeMorseIndex {
        value,
        dim_v_cap_vq,
        dim_v_cap_ker,
        morse_on_vq,
        morse_difference,
        double_orthogonal_holds: vqq.same_as(&v_plus_ker, tol.rank),
    })
}

/// Both sides of an integer identity.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: i64,
    pub rhs: i64,
    pub holds: bool,
}

impl IdentityCheck {
    pub fn equal(name: &str, lhs: i64, rhs: i64) -> Self {
        Self { name: name.into(), lhs, rhs, holds: lhs == rhs }
    }

    pub fn at_most(name: &str, lhs: i64, rhs: i64) -> Self {
        Self { name: name.into(), lhs, rhs, holds: lhs <= rhs }
    }
}

/// `ind(H) = ind(H|W) + ind(H|W^perp) + dim(W ∩ W^perp) - dim(W ∩ ker H)`,
/// with `W^perp` the Q-orthogonal of `W`.
pub fn index_decomposition_check(q: &FiniteHermitianForm, w: &Subspace, tol: &Tolerances) -> IdentityCheck {
    let wq = q_orthogonal(q, w, tol);
    let ker = q.kernel(tol);
    let rhs = q.restrict(w).morse_index(tol) as i64 + q.restrict(&wq).morse_index(tol) as i64
        + w.intersection(&wq, tol.rank).dim() as i64
        - w.intersection(&ker, tol.rank).dim() as i64;
    IdentityCheck::equal("index_decomposition", q.morse_index(tol) as i64, rhs)
}

/// Additivity of the Morse index over a Q-orthogonal sum `X = U + W`.
pub fn orthogonal_additivity_check(
    q: &FiniteHermitianForm,
    u: &Subspace,
    w: &Subspace,
    tol: &Tolerances,
) -> Result<IdentityCheck> {
    let cross = w.basis().adjoint() * q.gram() * u.basis();
    if frobenius(&cross) > q.zero_tolerance(tol) * 10.0 {
        return Err(Error::Invalid("subspaces are not Q-orthogonal".into()));
    }
    if u.sum(w, tol.rank).dim() != q.dim() {
        return Err(Error::Invalid("subspaces do not span the whole space".into()));
    }
    Ok(IdentityCheck::equal(
        "orthogonal_additivity",
        q.morse_index(tol) as i64,
        q.restrict(u).morse_index(tol) as i64 + q.restrict(w).morse_index(tol) as i64,
    ))
}

/// `dim V^Q / ker Q = dim X / V^{QQ}` and `dim X / W^Q = dim (W + ker Q) / ker Q`.
pub fn orthogonal_dimension_checks(q: &FiniteHermitianForm, v: &Subspace, tol: &Tolerances) -> [IdentityCheck; 2] {
    let ker = q.kernel(tol);
    let vq = q_orthogonal(q, v, tol);
    let vqq = q_orthogonal(q, &vq, tol);
    let x = q.dim() as i64;
    let first = IdentityCheck::equal(
        "orthogonal_quotient_dimension",
        vq.dim() as i64 - ker.dim() as i64,
        x - vqq.dim() as i64,
    );
    let second = IdentityCheck::equal(
        "orthogonal_codimension",
        x - vq.dim() as i64,
        v.sum(&ker, tol.rank).dim() as i64 - ker.dim() as i64,
    );
    [first, second]
}

/// Bounds on an isotropic subspace `X`: `dim X <= m^+ + dim ker`, and
/// `dim X <= m^+ + dim ker_2` when `X` meets `ker_1` trivially.
pub fn isotropic_bound_check(
    q: &FiniteHermitianForm,
    x: &Subspace,
    ker_1: Option<&Subspace>,
    tol: &Tolerances,
) -> Result<Vec<IdentityCheck>> {
    if !q.is_isotropic(x, tol) {
        return Err(Error::Invalid("subspace is not isotropic for the form".into()));
    }
    let inertia = q.inertia(tol);
    let mut out = vec![IdentityCheck::at_most(
        "isotropic_bound",
        x.dim() as i64,
        (inertia.positive + inertia.zero) as i64,
    )];
    if let Some(k1) = ker_1 {
        if x.intersection(k1, tol.rank).dim() == 0 {
            let ker = q.kernel(tol);
            let k2 = k1.orthogonal_complement(tol.rank).intersection(&ker, tol.rank);
            out.push(IdentityCheck::at_most(
                "isotropic_bound_split_kernel",
                x.dim() as i64,
                (inertia.positive + k2.dim()) as i64,
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::random;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> FiniteHermitianForm {
        let mut g = CMatrix::zeros(v.len(), v.len());
        for (i, &x) in v.iter().enumerate() {
            g[(i, i)] = c(x);
        }
        FiniteHermitianForm::new(g, &Tolerances::default()).unwrap()
    }

    fn coord(n: usize, idx: &[usize]) -> Subspace {
        let mut b = CMatrix::zeros(n, idx.len());
        for (j, &i) in idx.iter().enumerate() {
            b[(i, j)] = c(1.0);
        }
        Subspace::from_orthonormal(b)
    }

    #[test]
    fn relative_index_on_diagonal_form() {
        let tol = Tolerances::default();
        let q = diag(&[-1.0, -2.0, 3.0, 0.0]);
        let v = coord(4, &[0, 2]);
        let r = relative_morse_index(&q, &v, &tol).unwrap();
        assert_eq!(r.value, 1);
        assert_eq!(r.morse_difference, 1);
        assert!(r.double_orthogonal_holds);
    }

    #[test]
    fn relative_index_with_isotropic_vector() {
        let tol = Tolerances::default();
        let mut g = CMatrix::zeros(2, 2);
        g[(0, 1)] = c(1.0);
        g[(1, 0)] = c(1.0);
        let q = FiniteHermitianForm::new(g, &tol).unwrap();
        let v = coord(2, &[0]);
        let r = relative_morse_index(&q, &v, &tol).unwrap();
        assert_eq!(r.dim_v_cap_vq, 1);
        assert_eq!(r.value, 1);
        assert_eq!(r.morse_difference, 1);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut g = CMatrix::zeros(2, 2);
        g[(0, 1)] = c(1.0);
        assert!(matches!(FiniteHermitianForm::new(g, &Tolerances::default()), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn random_forms_satisfy_identities() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let n = rng.gen_range(1..=8);
            let rank = rng.gen_range(0..=n);
            let q = FiniteHermitianForm::new(random::random_hermitian(&mut rng, n, rank), &tol).unwrap();
            let k = rng.gen_range(0..=n);
            let v = Subspace::span(&random::complex_gaussian(&mut rng, n, k), tol.rank);
            let r = relative_morse_index(&q, &v, &tol).unwrap();
            assert_eq!(r.value, r.morse_difference);
            assert!(index_decomposition_check(&q, &v, &tol).holds);
            for chk in orthogonal_dimension_checks(&q, &v, &tol) {
                assert!(chk.holds, "{chk:?}");
            }
        }
    }
}

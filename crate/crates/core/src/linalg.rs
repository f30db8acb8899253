//! Thin helpers over `nalgebra` for small dense complex matrices.

use alloc::vec::Vec;

use nalgebra::{Cholesky, Complex, DMatrix, DVector, SymmetricEigen};
#[allow(unused_imports)] // needed for float math without std
use num_traits::Float;

use crate::error::{FpError, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Condition numbers above this are treated as singular.
pub const MAX_CONDITION: f64 = 1e14;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// `(M + Mᴴ)/2`
pub fn hermitianize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// `‖M − Mᴴ‖_F ≤ rel_tol·‖M‖_F`
pub fn is_hermitian(m: &CMatrix, rel_tol: f64) -> bool {
    m.is_square() && (m - m.adjoint()).norm() <= rel_tol * m.norm().max(f64::MIN_POSITIVE)
}

/// Eigenvalues (ascending) and matching eigenvectors of the Hermitian part.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitianize(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

/// `λ_max/λ_min` of a Hermitian matrix, `+∞` unless positive definite.
pub fn condition_number(m: &CMatrix) -> f64 {
    let (vals, _) = hermitian_eigen(m);
    match (vals.first(), vals.last()) {
        (Some(&lo), Some(&hi)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// `B⁻¹·R` for Hermitian positive definite `B`.
pub fn solve_hpd(b: &CMatrix, rhs: &CMatrix) -> Result<CMatrix> {
    let cond = condition_number(b);
    if !(cond <= MAX_CONDITION) {
        return Err(FpError::IllConditioned(cond));
    }
    let chol = Cholesky::new(hermitianize(b)).ok_or(FpError::IllConditioned(cond))?;
    Ok(chol.solve(rhs))
}

/// Cholesky solve without the eigenvalue-based conditioning check, for hot
/// loops where the matrix is PD by construction.
pub fn solve_hpd_fast(b: &CMatrix, rhs: &CVector) -> Option<CVector> {
    Cholesky::new(b.clone()).map(|chol| chol.solve(rhs))
}

/// `I_L ⊗ G`
pub fn kron_identity(l: usize, g: &CMatrix) -> CMatrix {
    let (r, cc) = g.shape();
    let mut out = CMatrix::zeros(l * r, l * cc);
    for k in 0..l {
        out.view_mut((k * r, k * cc), (r, cc)).copy_from(g);
    }
    out
}

/// Real trace of a (Hermitian) matrix.
pub fn trace_re(m: &CMatrix) -> f64 {
    m.trace().re
}

/// `Σ ln(1 + λ_i)` over the eigenvalues of the Hermitian part; `None` unless
/// every `λ_i > −1`.
pub fn logdet_identity_plus(m: &CMatrix) -> Option<f64> {
    let (vals, _) = hermitian_eigen(m);
    let mut total = 0.0;
    for v in vals {
        if !(v > -1.0) {
            return None;
        }
        total += v.ln_1p();
    }
    Some(total)
}

/// Inverse of a Hermitian PD matrix.
pub fn inverse_hpd(m: &CMatrix) -> Result<CMatrix> {
    solve_hpd(m, &CMatrix::identity(m.nrows(), m.nrows()))
}

//! Matrix-ratio extension of the unified quadratic transform.
//!
//! A matrix ratio is `√Aᴴ B⁻¹ √A` with `A = √A√Aᴴ ⪰ 0` and `B ≻ 0`. The
//! max-side surrogate `Q⁺ = √AᴴY + Yᴴ√A − YᴴBY` is dominated by the ratio in
//! the PSD order and meets it at `Y = B⁻¹√A`; the min side mirrors it with
//! `A` and `B` swapped and is evaluated through `(Q⁻)⁻¹`.

use alloc::boxed::Box;
use alloc::vec::Vec;

#[allow(unused_imports)] // needed for float math without std
use num_traits::Float;

use crate::error::{FpError, Result};
use crate::linalg::{
    c, hermitian_eigen, hermitianize, inverse_hpd, is_hermitian, logdet_identity_plus, solve_hpd, trace_re,
    CMatrix, CVector,
};
use crate::scalar::Side;

/// Hermitian matrix tagged as positive (semi)definite at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianPD(CMatrix);

impl HermitianPD {
    /// Strictly positive definite, for denominators.
    pub fn definite(m: CMatrix) -> Result<Self> {
        Self::checked(m, true)
    }

    /// Positive semidefinite, for numerators.
    pub fn semidefinite(m: CMatrix) -> Result<Self> {
        Self::checked(m, false)
    }

    fn checked(m: CMatrix, strict: bool) -> Result<Self> {
        if !is_hermitian(&m, 1e-12) {
            return Err(FpError::invalid("matrix is not Hermitian"));
        }
        let m = hermitianize(&m);
        let (vals, _) = hermitian_eigen(&m);
        let lo = vals.first().copied().unwrap_or(0.0);
        let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let ok = if strict { lo > 0.0 } else { lo >= -1e-9 * scale };
        if !ok {
            return Err(FpError::NotPsd(lo));
        }
        Ok(HermitianPD(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }
}

/// `d×ℓ` factor `F` with `F·Fᴴ` equal to the source matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SqrtFactor(CMatrix);

impl SqrtFactor {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.ncols() > m.nrows() || m.ncols() == 0 {
            return Err(FpError::invalid("square-root factor must be d×ℓ with 1 ≤ ℓ ≤ d"));
        }
        Ok(SqrtFactor(m))
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    /// `F·Fᴴ`
    pub fn square(&self) -> CMatrix {
        &self.0 * self.0.adjoint()
    }
}

/// Auxiliary matrices, one per term on each side.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixAuxState {
    pub y: Vec<CMatrix>,
    pub y_tilde: Vec<CMatrix>,
}

fn conform(factor: &SqrtFactor, square: &HermitianPD) -> Result<()> {
    if factor.rows() != square.dim() {
        return Err(FpError::invalid("square-root factor and matrix do not conform"));
    }
    Ok(())
}

/// `√Aᴴ B⁻¹ √A`
pub fn matrix_ratio(a_sqrt: &SqrtFactor, b: &HermitianPD) -> Result<CMatrix> {
    conform(a_sqrt, b)?;
    let x = solve_hpd(b.as_matrix(), a_sqrt.as_matrix())?;
    Ok(hermitianize(&(a_sqrt.as_matrix().adjoint() * x)))
}

fn quadratic_form(factor: &CMatrix, square: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
    if y.shape() != factor.shape() {
        return Err(FpError::invalid("auxiliary matrix shape does not match the square-root factor"));
    }
    let cross = factor.adjoint() * y;
    Ok(hermitianize(&(&cross + cross.adjoint() - y.adjoint() * square * y)))
}

/// `Q⁺ = √AᴴY + Yᴴ√A − YᴴBY`
pub fn q_plus(a_sqrt: &SqrtFactor, b: &HermitianPD, y: &CMatrix) -> Result<CMatrix> {
    conform(a_sqrt, b)?;
    quadratic_form(a_sqrt.as_matrix(), b.as_matrix(), y)
}

/// `Q⁻ = √BᴴỸ + Ỹᴴ√B − ỸᴴAỸ`
pub fn q_minus(b_sqrt: &SqrtFactor, a: &HermitianPD, y_tilde: &CMatrix) -> Result<CMatrix> {
    conform(b_sqrt, a)?;
    quadratic_form(b_sqrt.as_matrix(), a.as_matrix(), y_tilde)
}

/// `B⁻¹√A`
pub fn opt_y_matrix(a_sqrt: &SqrtFactor, b: &HermitianPD) -> Result<CMatrix> {
    conform(a_sqrt, b)?;
    solve_hpd(b.as_matrix(), a_sqrt.as_matrix())
}

/// `A⁻¹√B`
pub fn opt_y_tilde_matrix(b_sqrt: &SqrtFactor, a: &HermitianPD) -> Result<CMatrix> {
    conform(b_sqrt, a)?;
    solve_hpd(a.as_matrix(), b_sqrt.as_matrix())
}

/// `d×ℓ` square root of a Hermitian PSD matrix from its eigendecomposition.
///
/// Eigenvalues down to `−1e-9·‖M‖` are clamped to zero; the factor keeps the
/// `ℓ` largest eigenpairs, so `ℓ` must be at least the rank.
pub fn psd_sqrt(m: &CMatrix, ell: usize) -> Result<SqrtFactor> {
    let d = m.nrows();
    if !m.is_square() || ell == 0 || ell > d {
        return Err(FpError::invalid("psd_sqrt needs a square matrix and 1 ≤ ℓ ≤ d"));
    }
    let (vals, vecs) = hermitian_eigen(m);
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if let Some(&lo) = vals.first() {
        if lo < -1e-9 * scale {
            return Err(FpError::NotPsd(lo));
        }
    }
    for &v in &vals[..d - ell] {
        if v > 1e-9 * scale.max(f64::MIN_POSITIVE) {
            return Err(FpError::invalid("ℓ is smaller than the rank of the matrix"));
        }
    }
    let mut f = CMatrix::zeros(d, ell);
    for k in 0..ell {
        let idx = d - ell + k;
        let s = vals[idx].max(0.0).sqrt();
        for r in 0..d {
            f[(r, k)] = vecs[(r, idx)] * c(s, 0.0);
        }
    }
    SqrtFactor::new(f)
}

/// Matrix outer function `g(X)`; the max side uses `w·g`, the min side `−w·g`.
///
/// Both kinds satisfy `g((√AᴴB⁻¹√A)⁻¹) = g(√BᴴA⁻¹√B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixOuter {
    /// `w·tr(X)`
    Trace(f64),
    /// `w·ln det(I + X)`
    LogDetIdentityPlus(f64),
}

impl MatrixOuter {
    pub fn evaluate(&self, m: &CMatrix) -> Option<f64> {
        match *self {
            MatrixOuter::Trace(w) => Some(w * trace_re(m)),
            MatrixOuter::LogDetIdentityPlus(w) => logdet_identity_plus(m).map(|v| w * v),
        }
    }

    fn signed(&self, side: Side, m: &CMatrix) -> Option<f64> {
        let v = self.evaluate(m)?;
        Some(match side {
            Side::Max => v,
            Side::Min => -v,
        })
    }
}

/// Whether `g((√AᴴB⁻¹√A)⁻¹)` and `g(√BᴴA⁻¹√B)` agree to relative `1e-9`.
pub fn cyclic_check(kind: MatrixOuter, a_sqrt: &SqrtFactor, b_sqrt: &SqrtFactor) -> Result<bool> {
    let a = HermitianPD::definite(a_sqrt.square())?;
    let b = HermitianPD::definite(b_sqrt.square())?;
    let lhs_inner = inverse_hpd(&matrix_ratio(a_sqrt, &b)?)?;
    let rhs_inner = matrix_ratio(b_sqrt, &a)?;
    let lhs = kind.evaluate(&lhs_inner).ok_or(FpError::Domain { index: 0 })?;
    let rhs = kind.evaluate(&rhs_inner).ok_or(FpError::Domain { index: 0 })?;
    Ok((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(rhs.abs()).max(1e-300))
}

type MatrixFn = Box<dyn Fn(&[f64]) -> CMatrix + Send + Sync>;

/// One matrix ratio `√A(x)ᴴ B(x)⁻¹ √A(x)` with its outer function.
///
/// Min-side terms need `√A` to be square and of full rank (`ℓ = d`).
pub struct MatrixRatioTerm {
    sqrt_numerator: MatrixFn,
    denominator: MatrixFn,
    outer: MatrixOuter,
    side: Side,
}

impl MatrixRatioTerm {
    pub fn new(
        side: Side,
        outer: MatrixOuter,
        sqrt_numerator: impl Fn(&[f64]) -> CMatrix + Send + Sync + 'static,
        denominator: impl Fn(&[f64]) -> CMatrix + Send + Sync + 'static,
    ) -> Self {
        MatrixRatioTerm { sqrt_numerator: Box::new(sqrt_numerator), denominator: Box::new(denominator), outer, side }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    fn parts(&self, x: &[f64]) -> Result<(SqrtFactor, HermitianPD)> {
        let a_sqrt = SqrtFactor::new((self.sqrt_numerator)(x))?;
        let b = HermitianPD::definite((self.denominator)(x))?;
        conform(&a_sqrt, &b)?;
        Ok((a_sqrt, b))
    }

    fn min_parts(&self, x: &[f64]) -> Result<(SqrtFactor, HermitianPD)> {
        let (a_sqrt, b) = self.parts(x)?;
        let a = HermitianPD::definite(a_sqrt.square())?;
        let b_sqrt = psd_sqrt(b.as_matrix(), b.dim())?;
        Ok((b_sqrt, a))
    }
}

/// `Σ_max f⁺(√AᴴB⁻¹√A) + Σ_min f⁻(√AᴴB⁻¹√A)`
pub fn matrix_objective(terms: &[MatrixRatioTerm], x: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for (index, term) in terms.iter().enumerate() {
        let (a_sqrt, b) = term.parts(x)?;
        let r = matrix_ratio(&a_sqrt, &b)?;
        total += term.outer.signed(term.side, &r).ok_or(FpError::Domain { index })?;
    }
    Ok(total)
}

/// Optimal auxiliaries at `anchor`.
pub fn matrix_aux_at(terms: &[MatrixRatioTerm], anchor: &[f64]) -> Result<MatrixAuxState> {
    let mut y = Vec::new();
    let mut y_tilde = Vec::new();
    for term in terms {
        match term.side {
            Side::Max => {
                let (a_sqrt, b) = term.parts(anchor)?;
                y.push(opt_y_matrix(&a_sqrt, &b)?);
            }
            Side::Min => {
                let (b_sqrt, a) = term.min_parts(anchor)?;
                y_tilde.push(opt_y_tilde_matrix(&b_sqrt, &a)?);
            }
        }
    }
    Ok(MatrixAuxState { y, y_tilde })
}

/// Surrogate for fixed auxiliaries; `−∞` when some `Q⁻` is not positive
/// definite (min eigenvalue ≤ `1e-12·tr`) or `f⁺(Q⁺)` is undefined.
pub fn matrix_surrogate_with(terms: &[MatrixRatioTerm], aux: &MatrixAuxState, x: &[f64]) -> Result<f64> {
    let (mut iy, mut it) = (0, 0);
    let mut total = 0.0;
    for term in terms {
        match term.side {
            Side::Max => {
                let (a_sqrt, b) = term.parts(x)?;
                let q = q_plus(&a_sqrt, &b, &aux.y[iy])?;
                iy += 1;
                match term.outer.signed(Side::Max, &q) {
                    Some(v) => total += v,
                    None => return Ok(f64::NEG_INFINITY),
                }
            }
            Side::Min => {
                let (b_sqrt, a) = term.min_parts(x)?;
                let q = q_minus(&b_sqrt, &a, &aux.y_tilde[it])?;
                it += 1;
                let (vals, _) = hermitian_eigen(&q);
                let tr = trace_re(&q);
                if !(vals[0] > 1e-12 * tr) || !(tr > 0.0) {
                    return Ok(f64::NEG_INFINITY);
                }
                let q_inv = inverse_hpd(&q)?;
                match term.outer.signed(Side::Min, &q_inv) {
                    Some(v) => total += v,
                    None => return Ok(f64::NEG_INFINITY),
                }
            }
        }
    }
    Ok(total)
}

/// `g(x | anchor)`: bounded above by [`matrix_objective`], tight at the anchor.
pub fn matrix_mixed_surrogate(terms: &[MatrixRatioTerm], x: &[f64], anchor: &[f64]) -> Result<f64> {
    let aux = matrix_aux_at(terms, anchor)?;
    matrix_surrogate_with(terms, &aux, x)
}

/// Vector of real parts, handy for scalar reductions.
pub fn scalar_of(m: &CMatrix) -> f64 {
    m[(0, 0)].re
}

/// Column vector as a `d×1` factor.
pub fn column_factor(v: &CVector) -> SqrtFactor {
    SqrtFactor(CMatrix::from_column_slice(v.len(), 1, v.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn real(v: f64) -> CMatrix {
        CMatrix::from_element(1, 1, c(v, 0.0))
    }

    fn diag(vs: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(vs.len(), vs.iter().map(|&v| c(v, 0.0))))
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, cc: usize) -> CMatrix {
        CMatrix::from_fn(r, cc, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn random_pd(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
        let g = random_matrix(rng, d, d);
        hermitianize(&(&g * g.adjoint() + CMatrix::identity(d, d) * c(0.1, 0.0)))
    }

    #[test]
    fn matrix_ratio_examples() {
        let r = matrix_ratio(&SqrtFactor::new(real(2.0)).unwrap(), &HermitianPD::definite(real(2.0)).unwrap()).unwrap();
        assert!((scalar_of(&r) - 2.0).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_matrix(&mut rng, 3, 2);
        let r = matrix_ratio(&SqrtFactor::new(f.clone()).unwrap(), &HermitianPD::definite(CMatrix::identity(3, 3)).unwrap()).unwrap();
        assert!((r - f.adjoint() * &f).norm() < 1e-12);

        let b = random_pd(&mut rng, 2);
        let r = matrix_ratio(&SqrtFactor::new(CMatrix::identity(2, 2)).unwrap(), &HermitianPD::definite(b.clone()).unwrap()).unwrap();
        assert!((r - inverse_hpd(&b).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn ill_conditioned_denominator_is_rejected() {
        let b = HermitianPD::definite(diag(&[1.0, 1e-16])).unwrap();
        let err = matrix_ratio(&SqrtFactor::new(CMatrix::identity(2, 2)).unwrap(), &b).unwrap_err();
        assert!(matches!(err, FpError::IllConditioned(_)));
    }

    #[test]
    fn q_plus_examples() {
        let a = SqrtFactor::new(real(2.0)).unwrap();
        let b = HermitianPD::definite(real(2.0)).unwrap();
        assert!((scalar_of(&q_plus(&a, &b, &real(1.0)).unwrap()) - 2.0).abs() < 1e-15);
        assert_eq!(q_plus(&a, &b, &real(0.0)).unwrap(), real(0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = SqrtFactor::new(random_matrix(&mut rng, 3, 2)).unwrap();
        let b = HermitianPD::definite(random_pd(&mut rng, 3)).unwrap();
        let y = opt_y_matrix(&a, &b).unwrap();
        let q = q_plus(&a, &b, &y).unwrap();
        let r = matrix_ratio(&a, &b).unwrap();
        assert!((q - &r).norm() <= 1e-10 * r.norm());
        assert!(q_plus(&a, &b, &CMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn q_minus_examples() {
        let b = SqrtFactor::new(real(1.0)).unwrap();
        let a = HermitianPD::definite(real(1.0)).unwrap();
        assert!((scalar_of(&q_minus(&b, &a, &real(1.0)).unwrap()) - 1.0).abs() < 1e-15);
        assert_eq!(q_minus(&b, &a, &real(0.0)).unwrap(), real(0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = SqrtFactor::new(random_matrix(&mut rng, 2, 2)).unwrap();
        let a = HermitianPD::definite(random_pd(&mut rng, 2)).unwrap();
        let yt = opt_y_tilde_matrix(&b, &a).unwrap();
        let q = q_minus(&b, &a, &yt).unwrap();
        let r = matrix_ratio(&b, &a).unwrap();
        assert!((q - &r).norm() <= 1e-10 * r.norm());
    }

    #[test]
    fn opt_y_examples() {
        let y = opt_y_matrix(&SqrtFactor::new(real(2.0)).unwrap(), &HermitianPD::definite(real(2.0)).unwrap()).unwrap();
        assert!((scalar_of(&y) - 1.0).abs() < 1e-15);
        let f = CMatrix::from_row_slice(2, 1, &[c(1.0, 2.0), c(-0.5, 0.0)]);
        let y = opt_y_matrix(&SqrtFactor::new(f.clone()).unwrap(), &HermitianPD::definite(CMatrix::identity(2, 2)).unwrap()).unwrap();
        assert!((y - f).norm() < 1e-15);
        let y = opt_y_matrix(&SqrtFactor::new(CMatrix::identity(2, 2)).unwrap(), &HermitianPD::definite(diag(&[1.0, 2.0])).unwrap()).unwrap();
        assert!((y - diag(&[1.0, 0.5])).norm() < 1e-15);

        let yt = opt_y_tilde_matrix(&SqrtFactor::new(real(2.0)).unwrap(), &HermitianPD::definite(real(4.0)).unwrap()).unwrap();
        assert!((scalar_of(&yt) - 0.5).abs() < 1e-15);
        let yt = opt_y_tilde_matrix(&SqrtFactor::new(CMatrix::identity(2, 2)).unwrap(), &HermitianPD::definite(diag(&[2.0, 4.0])).unwrap()).unwrap();
        assert!((yt - diag(&[0.5, 0.25])).norm() < 1e-15);
    }

    #[test]
    fn psd_sqrt_examples() {
        let f = psd_sqrt(&(CMatrix::identity(1, 1) * c(4.0, 0.0)), 1).unwrap();
        assert!((scalar_of(f.as_matrix()) - 2.0).abs() < 1e-15);
        let f = psd_sqrt(&CMatrix::zeros(2, 2), 2).unwrap();
        assert!(f.as_matrix().norm() == 0.0);
        let f = psd_sqrt(&diag(&[9.0, 1.0]), 2).unwrap();
        assert!((f.square() - diag(&[9.0, 1.0])).norm() < 1e-12);
        let mut sv: std::vec::Vec<f64> = f.as_matrix().column_iter().map(|col| col.norm()).collect();
        sv.sort_by(f64::total_cmp);
        assert!((sv[0] - 1.0).abs() < 1e-12 && (sv[1] - 3.0).abs() < 1e-12);
        assert!(matches!(psd_sqrt(&diag(&[1.0, -1.0]), 2), Err(FpError::NotPsd(_))));
    }

    #[test]
    fn rank_one_sqrt_with_small_ell() {
        let v = CVector::from_vec(std::vec![c(1.0, 1.0), c(0.0, 2.0), c(-1.0, 0.5)]);
        let m = &v * v.adjoint();
        let f = psd_sqrt(&m, 1).unwrap();
        assert!((f.square() - &m).norm() <= 1e-10 * m.norm());
        assert!(psd_sqrt(&(CMatrix::identity(2, 2)), 1).is_err());
    }

    #[test]
    fn cyclic_examples() {
        let a = SqrtFactor::new(real(2f64.sqrt())).unwrap();
        let b = SqrtFactor::new(real(8f64.sqrt())).unwrap();
        assert!(cyclic_check(MatrixOuter::Trace(1.0), &a, &b).unwrap());
        let lhs = 1.0 / scalar_of(&matrix_ratio(&a, &HermitianPD::definite(real(8.0)).unwrap()).unwrap());
        assert!((lhs - 4.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for kind in [MatrixOuter::Trace(1.0), MatrixOuter::LogDetIdentityPlus(1.0)] {
            let a = psd_sqrt(&random_pd(&mut rng, 2), 2).unwrap();
            let b = psd_sqrt(&random_pd(&mut rng, 2), 2).unwrap();
            assert!(cyclic_check(kind, &a, &b).unwrap());
        }
    }

    fn x_dependent_terms() -> std::vec::Vec<MatrixRatioTerm> {
        // √A(x) = [[1+x0, x1],[0, 1]], B(x) = diag(1+x1², 2) + x0·E, with E Hermitian off-diagonal.
        let sqrt_a = |x: &[f64]| CMatrix::from_row_slice(2, 2, &[c(1.0 + x[0], 0.0), c(x[1], 0.5), c(0.0, 0.0), c(1.0, 0.0)]);
        let den = |x: &[f64]| {
            CMatrix::from_row_slice(2, 2, &[c(1.0 + x[1] * x[1], 0.0), c(0.3 * x[0], 0.1), c(0.3 * x[0], -0.1), c(2.0, 0.0)])
        };
        std::vec![
            MatrixRatioTerm::new(Side::Max, MatrixOuter::LogDetIdentityPlus(1.0), sqrt_a, den),
            MatrixRatioTerm::new(Side::Min, MatrixOuter::Trace(0.5), sqrt_a, den),
            MatrixRatioTerm::new(Side::Min, MatrixOuter::LogDetIdentityPlus(1.0), den_sqrt, sqrt_b_num),
        ]
    }

    fn den_sqrt(x: &[f64]) -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 0.0), c(x[0], x[1]), c(1.5, 0.0)])
    }

    fn sqrt_b_num(x: &[f64]) -> CMatrix {
        diag(&[1.0 + x[0] * x[0], 1.0 + x[1]])
    }

    #[test]
    fn matrix_surrogate_tight_at_anchor() {
        let terms = x_dependent_terms();
        let x = [0.3, -0.4];
        let f = matrix_objective(&terms, &x).unwrap();
        let g = matrix_mixed_surrogate(&terms, &x, &x).unwrap();
        assert!((f - g).abs() <= 1e-9 * (1.0 + f.abs()), "{f} {g}");
    }

    #[test]
    fn single_min_term_bound_from_other_anchor() {
        let terms = &x_dependent_terms()[1..2];
        let x = [0.2, 0.1];
        let f = matrix_objective(terms, &x).unwrap();
        let g = matrix_mixed_surrogate(terms, &x, &[0.6, -0.3]).unwrap();
        assert!(g <= f + 1e-12, "{g} > {f}");
    }

    #[test]
    fn scalar_terms_agree_with_scalar_module() {
        // A(x)=x0², B(x)=1+x1 (max, identity) and A=2+x0, B=1+x1² (min, −r).
        let terms = std::vec![
            MatrixRatioTerm::new(Side::Max, MatrixOuter::Trace(1.0), |x: &[f64]| real(x[0]), |x: &[f64]| real(1.0 + x[1])),
            MatrixRatioTerm::new(Side::Min, MatrixOuter::Trace(1.0), |x: &[f64]| real((2.0 + x[0]).sqrt()), |x: &[f64]| real(1.0 + x[1] * x[1])),
        ];
        let sp = scalar::MixedFpProblem::new(
            2,
            std::vec![
                scalar::RatioTerm::new(Side::Max, crate::OuterFunction::Identity(1.0), |x, g| {
                    g[0] = 2.0 * x[0];
                    g[1] = 0.0;
                    x[0] * x[0]
                }, |x, g| {
                    g[0] = 0.0;
                    g[1] = 1.0;
                    1.0 + x[1]
                })
                .unwrap(),
                scalar::RatioTerm::new(Side::Min, crate::OuterFunction::NegIdentity(1.0), |x, g| {
                    g[0] = 1.0;
                    g[1] = 0.0;
                    2.0 + x[0]
                }, |x, g| {
                    g[0] = 0.0;
                    g[1] = 2.0 * x[1];
                    1.0 + x[1] * x[1]
                })
                .unwrap(),
            ],
            crate::solver::BoxSet::uniform(2, 0.0, 2.0).unwrap(),
        )
        .unwrap();
        for (x, anchor) in [([0.5, 0.5], [1.0, 0.2]), ([1.5, 0.1], [1.5, 0.1]), ([0.2, 1.8], [0.9, 1.1])] {
            let fm = matrix_objective(&terms, &x).unwrap();
            let fs = scalar::mixed_objective(&sp, &x).unwrap();
            assert!((fm - fs).abs() <= 1e-12, "{fm} {fs}");
            let gm = matrix_mixed_surrogate(&terms, &x, &anchor).unwrap();
            let gs = scalar::mixed_surrogate(&sp, &x, &anchor).unwrap();
            assert!((gm - gs).abs() <= 1e-12 * (1.0 + gs.abs()) || (gm == gs), "{gm} {gs}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn psd_order_bound_and_tightness(seed in 0u64..10_000, d in 1usize..=3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ell = rng.gen_range(1..=d);
            let a = SqrtFactor::new(random_matrix(&mut rng, d, ell)).unwrap();
            let b = HermitianPD::definite(random_pd(&mut rng, d)).unwrap();
            let y = random_matrix(&mut rng, d, ell);
            let r = matrix_ratio(&a, &b).unwrap();
            let q = q_plus(&a, &b, &y).unwrap();
            let gap = hermitian_eigen(&(&r - q)).0[0];
            prop_assert!(gap >= -1e-10 * (1.0 + r.norm()));
            let qt = q_plus(&a, &b, &opt_y_matrix(&a, &b).unwrap()).unwrap();
            prop_assert!((qt - &r).norm() <= 1e-10 * r.norm().max(1e-300));
        }

        #[test]
        fn surrogate_bounded_by_objective(x0 in -0.5..0.5f64, x1 in -0.5..0.5f64, a0 in -0.5..0.5f64, a1 in -0.5..0.5f64) {
            let terms = x_dependent_terms();
            let f = matrix_objective(&terms, &[x0, x1]).unwrap();
            let g = matrix_mixed_surrogate(&terms, &[x0, x1], &[a0, a1]).unwrap();
            prop_assert!(g <= f + 1e-9 * (1.0 + f.abs()));
        }
    }
}

//! Matrix quadratic transform: PSD-order bound, tightness, the cyclic
//! property and the scalar special case.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use fracprog_core::linalg::{c, min_eigenvalue, CMatrix};
use fracprog_core::matrix::{
    cyclic_check, matrix_ratio, opt_y_matrix, opt_y_tilde_matrix, psd_sqrt, q_minus, q_plus, scalar_of, HermitianPD, MatrixOuter,
    SqrtFactor,
};
use fracprog_core::scalar::{opt_y, quad_surrogate};

use super::{close, ensure, rng, CheckFn, Outcome};

pub(crate) const CHECKS: &[(&str, CheckFn)] = &[
    ("psd_order_bound", psd_order_bound),
    ("transform_tightness", transform_tightness),
    ("cyclic_property", cyclic_property),
    ("scalar_reduction", scalar_reduction),
];

fn e(err: fracprog_core::FpError) -> String {
    err.to_string()
}

pub(crate) fn random_complex(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(r.gen_range(-1.0..=1.0), r.gen_range(-1.0..=1.0)))
}

/// `GGᴴ + δI` with `δ ∈ [0.05, 1]`.
pub(crate) fn random_pd(r: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let g = random_complex(r, d, d);
    let delta = r.gen_range(0.05..=1.0);
    &g * g.adjoint() + CMatrix::identity(d, d) * c(delta, 0.0)
}

fn psd_order_bound() -> Outcome {
    let mut r = rng(21);
    for _ in 0..300 {
        let d = r.gen_range(1..=3);
        let ell = r.gen_range(1..=d);
        let a_sqrt = SqrtFactor::new(random_complex(&mut r, d, ell)).map_err(e)?;
        let b = HermitianPD::definite(random_pd(&mut r, d)).map_err(e)?;
        let y = random_complex(&mut r, d, ell) * c(r.gen_range(0.1..=3.0), 0.0);
        let ratio = matrix_ratio(&a_sqrt, &b).map_err(e)?;
        let diff = &ratio - q_plus(&a_sqrt, &b, &y).map_err(e)?;
        let lo = min_eigenvalue(&diff);
        ensure(lo >= -1e-10 * (1.0 + ratio.norm()), || {
            format!("d={d} ℓ={ell}: ratio − Q⁺ has eigenvalue {lo:e}; √A={:?} B={:?} Y={y:?}", a_sqrt.as_matrix(), b.as_matrix())
        })?;

        // min side: (√Bᴴ A⁻¹ √B) ⪰ Q⁻ for every Ỹ
        let a = HermitianPD::definite(random_pd(&mut r, d)).map_err(e)?;
        let b_sqrt = psd_sqrt(b.as_matrix(), d).map_err(e)?;
        let yt = random_complex(&mut r, d, d);
        let inner = matrix_ratio(&b_sqrt, &a).map_err(e)?;
        let lo = min_eigenvalue(&(&inner - q_minus(&b_sqrt, &a, &yt).map_err(e)?));
        ensure(lo >= -1e-10 * (1.0 + inner.norm()), || format!("d={d}: √BᴴA⁻¹√B − Q⁻ has eigenvalue {lo:e}"))?;
    }
    Ok(())
}

fn transform_tightness() -> Outcome {
    let mut r = rng(22);
    for _ in 0..300 {
        let d = r.gen_range(1..=3);
        let ell = r.gen_range(1..=d);
        let a_sqrt = SqrtFactor::new(random_complex(&mut r, d, ell)).map_err(e)?;
        let b = HermitianPD::definite(random_pd(&mut r, d)).map_err(e)?;
        let ratio = matrix_ratio(&a_sqrt, &b).map_err(e)?;
        let q = q_plus(&a_sqrt, &b, &opt_y_matrix(&a_sqrt, &b).map_err(e)?).map_err(e)?;
        let err = (&q - &ratio).norm();
        ensure(err <= 1e-10 * ratio.norm().max(1e-300), || format!("d={d} ℓ={ell}: ‖Q⁺(Y*) − ratio‖ = {err:e}"))?;

        let a = HermitianPD::definite(random_pd(&mut r, d)).map_err(e)?;
        let b_sqrt = psd_sqrt(b.as_matrix(), d).map_err(e)?;
        let inner = matrix_ratio(&b_sqrt, &a).map_err(e)?;
        let q = q_minus(&b_sqrt, &a, &opt_y_tilde_matrix(&b_sqrt, &a).map_err(e)?).map_err(e)?;
        let err = (&q - &inner).norm();
        ensure(err <= 1e-10 * inner.norm(), || format!("d={d}: ‖Q⁻(Ỹ*) − √BᴴA⁻¹√B‖ = {err:e}"))?;
    }
    Ok(())
}

fn cyclic_property() -> Outcome {
    let mut r = rng(23);
    for i in 0..200 {
        let d = r.gen_range(1..=4);
        let a = random_pd(&mut r, d);
        let b = random_pd(&mut r, d);
        let a_sqrt = psd_sqrt(&a, d).map_err(e)?;
        let b_sqrt = psd_sqrt(&b, d).map_err(e)?;
        for kind in [MatrixOuter::Trace(1.0), MatrixOuter::LogDetIdentityPlus(1.0)] {
            let ok = cyclic_check(kind, &a_sqrt, &b_sqrt).map_err(e)?;
            ensure(ok, || format!("pair {i} (d={d}), {kind:?}: A={a:?} B={b:?}"))?;
        }
    }
    Ok(())
}

fn one(v: f64) -> CMatrix {
    CMatrix::from_element(1, 1, c(v, 0.0))
}

fn scalar_reduction() -> Outcome {
    let mut r = rng(24);
    for _ in 0..1000 {
        let a: f64 = r.gen_range(1e-3..=10.0);
        let b: f64 = r.gen_range(1e-3..=10.0);
        let y = r.gen_range(0.0..=3.0);
        let a_sqrt = SqrtFactor::new(one(a.sqrt())).map_err(e)?;
        let bm = HermitianPD::definite(one(b)).map_err(e)?;
        let cx = || format!("A={a:e} B={b:e} y={y:e}");

        let ratio = scalar_of(&matrix_ratio(&a_sqrt, &bm).map_err(e)?);
        ensure(close(ratio, a / b, 1e-12), || format!("{}: ratio {ratio:e} vs {:e}", cx(), a / b))?;
        let qp = scalar_of(&q_plus(&a_sqrt, &bm, &one(y)).map_err(e)?);
        let qs = quad_surrogate(a, b, y).map_err(e)?;
        ensure(close(qp, qs, 1e-12), || format!("{}: Q⁺ {qp:e} vs scalar {qs:e}", cx()))?;
        let ym = scalar_of(&opt_y_matrix(&a_sqrt, &bm).map_err(e)?);
        let ys = opt_y(a, b).map_err(e)?;
        ensure(close(ym, ys, 1e-12), || format!("{}: Y* {ym:e} vs y* {ys:e}", cx()))?;

        let b_sqrt = SqrtFactor::new(one(b.sqrt())).map_err(e)?;
        let am = HermitianPD::definite(one(a)).map_err(e)?;
        let qm = scalar_of(&q_minus(&b_sqrt, &am, &one(y)).map_err(e)?);
        let qms = 2.0 * y * b.sqrt() - y * y * a;
        ensure(close(qm, qms, 1e-12), || format!("{}: Q⁻ {qm:e} vs 2ỹ√B − ỹ²A = {qms:e}", cx()))?;
        let ytm = scalar_of(&opt_y_tilde_matrix(&b_sqrt, &am).map_err(e)?);
        ensure(close(ytm, b.sqrt() / a, 1e-12), || format!("{}: Ỹ* {ytm:e} vs √B/A {:e}", cx(), b.sqrt() / a))?;
        let sq = psd_sqrt(&one(a), 1).map_err(e)?;
        let back = scalar_of(&sq.square());
        ensure(close(back, a, 1e-12), || format!("{}: psd_sqrt squares back to {back:e}", cx()))?;
    }
    Ok(())
}

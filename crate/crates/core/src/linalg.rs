//! Dense complex linear-algebra helpers shared by the polynomial, oracle and
//! reconstruction code. Thin wrappers over nalgebra.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, TqError};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// All eigenvalues of a general complex square matrix, read off the complex
/// Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(TqError::Eigensolver("matrix is not square".into()));
    }
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![m[(0, 0)]]),
        _ => {}
    }
    let t = schur_form(m)?;

    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let sub = if i + 1 < n { t[(i + 1, i)].norm() } else { 0.0 };
        let scale = t[(i, i)].norm() + if i + 1 < n { t[(i + 1, i + 1)].norm() } else { 0.0 };
        if sub > 1e-14 * scale.max(1e-300) {
            // unreduced 2x2 block left behind by the QR sweep
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let half_trace = (a + d) * 0.5;
            let half_diff = (a - d) * 0.5;
            let root = (half_diff * half_diff + b * c).sqrt();
            out.push(half_trace + root);
            out.push(half_trace - root);
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    Ok(out)
}

/// Upper-triangular factor of the complex Schur form. Exactly defective
/// inputs (nilpotent blocks) can stall the shifted QR sweep; those are
/// retried after a fixed unitary similarity, which leaves the spectrum alone
/// but breaks the exact structure.
fn schur_form(m: &CMatrix) -> Result<CMatrix> {
    let n = m.nrows();
    let max_iter = 200 * n;
    if let Some(s) = Schur::try_new(m.clone(), f64::EPSILON, max_iter) {
        return Ok(s.unpack().1);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5c4u64);
    let z = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let u = orthonormalize(z);
    let rotated = u.adjoint() * m * &u;
    Schur::try_new(rotated, f64::EPSILON, max_iter)
        .map(|s| s.unpack().1)
        .ok_or_else(|| TqError::Eigensolver("Schur iteration did not converge".into()))
}

/// Orthonormal basis (columns) for the span of the columns of `x`.
pub fn orthonormalize(x: CMatrix) -> CMatrix {
    x.qr().q()
}

/// Orthonormal basis of the invariant subspace belonging to the `k`
/// eigenvalues clustered at `lambda`, by block inverse iteration.
pub fn eigenspace<R: Rng + ?Sized>(
    m: &CMatrix,
    lambda: Complex64,
    k: usize,
    rng: &mut R,
) -> Result<CMatrix> {
    let n = m.nrows();
    let offset = Complex64::new(0.6, 0.8) * (1e-11 * (1.0 + lambda.norm()));
    let mut shifted = m.clone();
    for i in 0..n {
        shifted[(i, i)] -= lambda + offset;
    }
    let lu = shifted.lu();
    let mut x = CMatrix::from_fn(n, k, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    for _ in 0..3 {
        x = lu
            .solve(&x)
            .ok_or_else(|| TqError::Eigensolver("shifted matrix is exactly singular".into()))?;
        x = orthonormalize(x);
    }
    Ok(x)
}

/// Solution of a square linear system together with the 2-norm condition
/// number of the matrix.
pub fn solve_with_condition(a: &CMatrix, b: &CVector) -> Result<(CVector, f64)> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !cond.is_finite() || cond > 1e15 {
        return Err(TqError::SingularSystem(cond));
    }
    let x = a
        .clone()
        .lu()
        .solve(b)
        .ok_or(TqError::SingularSystem(cond))?;
    Ok((x, cond))
}

/// Minimum-norm least-squares solution, discarding singular values below
/// `rcond * sigma_max`.
pub fn lstsq_truncated(a: &CMatrix, b: &CVector, rcond: f64) -> CVector {
    let svd = a.clone().svd(true, true);
    let eps = rcond * svd.singular_values.max();
    svd.solve(b, eps)
        .unwrap_or_else(|_| CVector::zeros(a.ncols()))
}

/// Inner product <a|b> with the conjugate on the left.
pub fn dot(a: &CVector, b: &CVector) -> Complex64 {
    a.dotc(b)
}

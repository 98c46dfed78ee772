//! Residuals of the algebraic identities behind the functional relations:
//! Yang-Baxter, initial condition, unitarity, crossing, commutativity of the
//! transfer matrices, the operator product identity at u = theta_j, its
//! homogeneous derivative analogue, and the Hamiltonian as a logarithmic
//! derivative.
//!
//! All residuals are relative (normalized by the natural scale of each side).

use num_complex::Complex64;

use crate::lattice::{
    embed_two_site, hamiltonian, pauli, permutation4, transfer, ChainSpec, OperatorMatrix,
    TransferFamily, ETA,
};
use crate::linalg::CMatrix;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A candidate R-matrix, `u -> R(u)` on C^2 (x) C^2.
pub type RMatrixFn<'a> = &'a dyn Fn(Complex64) -> CMatrix;

/// Scalar on the right of R_12(u) R_21(-u) = rho(u) Id for R = u + eta P.
pub fn unitarity_scalar(u: Complex64) -> Complex64 {
    -(u + ETA) * (u - ETA)
}

/// Partial transpose in the first tensor factor of a two-site operator.
pub fn partial_transpose_first(m: &CMatrix) -> CMatrix {
    CMatrix::from_fn(4, 4, |r, c| {
        let (r1, r2, c1, c2) = (r >> 1, r & 1, c >> 1, c & 1);
        m[(2 * c1 + r2, 2 * r1 + c2)]
    })
}

pub fn ybe_residual(r: RMatrixFn, u: Complex64, v: Complex64) -> f64 {
    let r12 = embed_two_site(&r(u - v), 0, 1, 3);
    let r13 = embed_two_site(&r(u), 0, 2, 3);
    let r23 = embed_two_site(&r(v), 1, 2, 3);
    let lhs = &r12 * &r13 * &r23;
    let rhs = &r23 * &r13 * &r12;
    (&lhs - &rhs).norm() / (1.0 + lhs.norm())
}

pub fn initial_condition_residual(r: RMatrixFn) -> f64 {
    let p = permutation4();
    (r(Complex64::new(0.0, 0.0)) - &p).norm() / p.norm()
}

pub fn unitarity_residual(r: RMatrixFn, u: Complex64) -> f64 {
    let p = permutation4();
    let r21 = &p * r(-u) * &p;
    let prod = r(u) * r21;
    let rho = unitarity_scalar(u);
    let expect = CMatrix::identity(4, 4) * rho;
    (&prod - &expect).norm() / (1.0 + expect.norm())
}

/// R_12(u) = -sigma^y_1 R_12^{t_1}(-u-1) sigma^y_1.
pub fn crossing_residual(r: RMatrixFn, u: Complex64) -> f64 {
    let [_, sy, _] = pauli();
    let sy1 = sy.kronecker(&CMatrix::identity(2, 2));
    let crossed = -(&sy1 * partial_transpose_first(&r(-u - ETA)) * &sy1);
    let direct = r(u);
    (&direct - &crossed).norm() / (1.0 + direct.norm())
}

/// ||[t(u), t(v)]|| / (||t(u)|| ||t(v)||).
pub fn commutator_residual(spec: &ChainSpec, u: Complex64, v: Complex64) -> f64 {
    let tu = transfer(spec, u);
    let tv = transfer(spec, v);
    tu.commutator(&tv).norm() / (tu.norm() * tv.norm())
}

/// t(theta_j) t(theta_j - 1) against a(theta_j) d(theta_j - 1) Id.
pub fn operator_identity_residual(spec: &ChainSpec, j: usize) -> f64 {
    let theta = spec.theta()[j];
    let t1 = transfer(spec, theta);
    let t2 = transfer(spec, theta - ETA);
    let scalar = spec.a_poly().eval(theta) * spec.d_poly().eval(theta - ETA);
    let prod = t1.mul(&t2);
    let scale = t1.norm() * t2.norm() + scalar.norm() * (spec.dim() as f64).sqrt();
    prod.distance_to_scalar(scalar) / scale
}

/// For a homogeneous chain: the Taylor coefficients at u = 0 of
/// t(u) t(u-1) - a(u) d(u-1) Id for orders l = 0..N-1, each relative to the
/// size of the terms that build it.
pub fn homogeneous_derivative_residuals(spec: &ChainSpec) -> Vec<f64> {
    let family = TransferFamily::new(spec);
    derivative_residuals_from_family(spec, &family)
}

pub(crate) fn derivative_residuals_from_family(spec: &ChainSpec, family: &TransferFamily) -> Vec<f64> {
    let n = spec.n();
    let shifted = family.shifted(-ONE);
    let scalar = &spec.a_poly() * &spec.d_poly().shift(-ONE);
    let root_dim = (spec.dim() as f64).sqrt();
    (0..n)
        .map(|l| {
            let mut acc = OperatorMatrix::zeros(spec.dim());
            let mut scale = 1.0 + scalar.coeff(l).norm() * root_dim;
            for i in 0..=l {
                let (ci, sj) = (&family.coeffs()[i], &shifted.coeffs()[l - i]);
                acc = &acc + &ci.mul(sj);
                scale += ci.norm() * sj.norm();
            }
            acc.distance_to_scalar(scalar.coeff(l)) / scale
        })
        .collect()
}

/// d/du ln t(u) at u = 0 minus N/2, against the Pauli-built Hamiltonian.
pub fn hamiltonian_log_derivative_residual(spec: &ChainSpec) -> f64 {
    let family = TransferFamily::new(spec);
    let t0 = family.coeffs()[0].matrix().clone();
    let t1 = family.coeffs()[1].matrix();
    let inv = t0.try_inverse().expect("t(0) is the invertible shift operator");
    let mut log_deriv = t1 * inv;
    for i in 0..spec.dim() {
        log_deriv[(i, i)] -= Complex64::new(spec.n() as f64 / 2.0, 0.0);
    }
    let h = hamiltonian(spec);
    (&log_deriv - h.matrix()).norm() / h.norm()
}

/// An R-matrix with a small off-diagonal corruption, used as a negative
/// control for the identity suite.
pub fn faulty_r_matrix(u: Complex64) -> CMatrix {
    let mut r = crate::lattice::r_matrix(u);
    r[(0, 3)] += Complex64::new(0.01, 0.0);
    r
}

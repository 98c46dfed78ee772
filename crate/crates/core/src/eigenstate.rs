//! Bethe states prod_j B_φ(μ_j)|0> built from the rotated monodromy matrix,
//! and their certification as transfer-matrix eigenvectors.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, TqError};
use crate::lattice::{hamiltonian, rotated_monodromy, transfer, ChainSpec, RotationConvention};
use crate::linalg::{self, CMatrix, CVector};
use crate::poly::{random_in_disk, ComplexPoly};

pub use crate::lattice::reference_state;

const CERTIFY_SEED: u64 = 0x6365_7274;
const CERTIFY_POINTS: usize = 5;

/// Applies B_φ(μ_1), then B_φ(μ_2), ... to the reference state.
pub fn build_state(spec: &ChainSpec, mu: &[Complex64], convention: RotationConvention) -> Result<CVector> {
    let mut psi = reference_state(spec.n());
    for &m in mu {
        let blocks = rotated_monodromy(spec, m, convention);
        psi = blocks.block(0, 1).apply(&psi);
    }
    let norm = psi.norm();
    if norm.is_nan() || norm < 1e-12 {
        return Err(TqError::NullState(norm));
    }
    Ok(psi)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    /// max over sample points of ||t(u)ψ - Λ(u)ψ|| / (||ψ|| ||t(u)||)
    pub residual: f64,
    /// <ψ|H|ψ>/<ψ|ψ>, for homogeneous chains.
    pub rayleigh_energy: Option<Complex64>,
}

pub fn certify_eigenstate(psi: &CVector, lambda: &ComplexPoly, spec: &ChainSpec) -> Certificate {
    certify_with_rng(psi, lambda, spec, &mut ChaCha8Rng::seed_from_u64(CERTIFY_SEED))
}

pub fn certify_with_rng<R: Rng + ?Sized>(
    psi: &CVector,
    lambda: &ComplexPoly,
    spec: &ChainSpec,
    rng: &mut R,
) -> Certificate {
    let pn = psi.norm();
    let residual = (0..CERTIFY_POINTS)
        .map(|_| {
            let u = random_in_disk(rng, 2.0);
            let t = transfer(spec, u);
            let diff = t.apply(psi) - psi * lambda.eval(u);
            diff.norm() / (pn * t.norm())
        })
        .fold(0.0, f64::max);
    let rayleigh_energy = spec.is_homogeneous().then(|| {
        let h = hamiltonian(spec);
        linalg::dot(psi, &h.apply(psi)) / linalg::dot(psi, psi)
    });
    Certificate {
        residual,
        rayleigh_energy,
    }
}

/// Norm of the component of ψ outside the column span of `basis`
/// (orthonormal columns), relative to ||ψ||.
pub fn outside_fraction(psi: &CVector, basis: &CMatrix) -> f64 {
    let proj = basis * (basis.adjoint() * psi);
    (psi - proj).norm() / psi.norm()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConventionReport {
    pub convention: RotationConvention,
    /// Err text when the state vanished.
    pub outcome: std::result::Result<Certificate, String>,
    pub norm: f64,
}

impl ConventionReport {
    pub fn certifies(&self, tol: f64) -> bool {
        matches!(&self.outcome, Ok(c) if c.residual < tol)
    }
}

/// Builds and certifies the state under every rotation convention.
pub fn survey_conventions(spec: &ChainSpec, mu: &[Complex64], lambda: &ComplexPoly) -> Vec<ConventionReport> {
    RotationConvention::ALL
        .iter()
        .map(|&convention| match build_state(spec, mu, convention) {
            Ok(psi) => ConventionReport {
                convention,
                norm: psi.norm(),
                outcome: Ok(certify_eigenstate(&psi, lambda, spec)),
            },
            Err(e) => ConventionReport {
                convention,
                norm: 0.0,
                outcome: Err(e.to_string()),
            },
        })
        .collect()
}

/// The first convention (verbatim first) whose state certifies at `tol`.
pub fn certifying_convention(reports: &[ConventionReport], tol: f64) -> Option<RotationConvention> {
    reports.iter().find(|r| r.certifies(tol)).map(|r| r.convention)
}

//! Explicit operators of the periodic XXX spin-1/2 chain: R-matrix,
//! monodromy blocks, transfer matrix, rotated monodromy and Hamiltonian.
//!
//! Basis convention: site `j` (0-based) is bit `n - 1 - j` of a basis index,
//! so site 0 is the leftmost Kronecker factor. Spin up is bit value 0, and
//! the all-up reference state is basis vector 0.

use std::ops::{Add, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, TqError};
use crate::linalg::{CMatrix, CVector};
use crate::poly::ComplexPoly;

/// Largest supported chain length (dense 4096-dimensional operators).
pub const MAX_SITES: usize = 12;

/// Crossing parameter; the chain is studied at eta = 1 throughout.
pub const ETA: f64 = 1.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Model parameters: chain length, inhomogeneities and the T-Q parameter phi.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSpec {
    n: usize,
    theta: Vec<Complex64>,
    phi: Complex64,
}

impl ChainSpec {
    pub fn new(theta: Vec<Complex64>, phi: Complex64) -> Result<Self> {
        let n = theta.len();
        if n < 2 {
            return Err(TqError::InvalidChain(format!("need at least 2 sites, got {n}")));
        }
        if n > MAX_SITES {
            return Err(TqError::InvalidChain(format!(
                "N exceeds configured cap ({n} > {MAX_SITES})"
            )));
        }
        if theta.iter().any(|t| !t.re.is_finite() || !t.im.is_finite()) || !phi.is_finite() {
            return Err(TqError::InvalidChain("non-finite parameter".into()));
        }
        Ok(ChainSpec { n, theta, phi })
    }

    pub fn homogeneous(n: usize, phi: Complex64) -> Result<Self> {
        Self::new(vec![ZERO; n], phi)
    }

    pub fn with_phi(&self, phi: Complex64) -> Self {
        ChainSpec { phi, ..self.clone() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn theta(&self) -> &[Complex64] {
        &self.theta
    }

    pub fn phi(&self) -> Complex64 {
        self.phi
    }

    pub fn eta(&self) -> f64 {
        ETA
    }

    pub fn is_homogeneous(&self) -> bool {
        self.theta.iter().all(|t| *t == ZERO)
    }

    /// a(u) = prod_j (u - theta_j + 1), the A-eigenvalue on the reference state.
    pub fn a_poly(&self) -> ComplexPoly {
        let roots: Vec<_> = self.theta.iter().map(|t| t - ETA).collect();
        ComplexPoly::from_roots(&roots)
    }

    /// d(u) = prod_j (u - theta_j), the D-eigenvalue on the reference state.
    pub fn d_poly(&self) -> ComplexPoly {
        ComplexPoly::from_roots(&self.theta)
    }

    /// Pairwise-distinct inhomogeneities with theta_j != theta_l - 1, as
    /// needed by point-based Q reconstruction.
    pub fn check_generic(&self, tol: f64) -> Result<()> {
        for (j, tj) in self.theta.iter().enumerate() {
            for (l, tl) in self.theta.iter().enumerate() {
                if j != l && (tj - tl).norm() <= tol {
                    return Err(TqError::InvalidChain(format!(
                        "theta_{} and theta_{} coincide",
                        j + 1,
                        l + 1
                    )));
                }
                if (tj - (tl - ETA)).norm() <= tol {
                    return Err(TqError::InvalidChain(format!(
                        "theta_{} = theta_{} - 1",
                        j + 1,
                        l + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Dense operator on the 2^N-dimensional chain Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix(CMatrix);

impl OperatorMatrix {
    pub fn from_matrix(m: CMatrix) -> Self {
        assert!(m.is_square() && m.nrows().is_power_of_two(), "operator must be 2^N square");
        OperatorMatrix(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_matrix(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_matrix(CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        OperatorMatrix(&self.0 * s)
    }

    pub fn mul(&self, rhs: &OperatorMatrix) -> Self {
        OperatorMatrix(&self.0 * &rhs.0)
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.0 * v
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn commutator(&self, rhs: &OperatorMatrix) -> Self {
        OperatorMatrix(&self.0 * &rhs.0 - &rhs.0 * &self.0)
    }

    /// Distance to `s * Id` in Frobenius norm.
    pub fn distance_to_scalar(&self, s: Complex64) -> f64 {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] -= s;
        }
        m.norm()
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 - &rhs.0)
    }
}

/// The four auxiliary-space blocks of a monodromy matrix at fixed u.
#[derive(Clone, Debug)]
pub struct MonodromyBlocks {
    pub a: OperatorMatrix,
    pub b: OperatorMatrix,
    pub c: OperatorMatrix,
    pub d: OperatorMatrix,
}

impl MonodromyBlocks {
    fn from_array(blocks: [[OperatorMatrix; 2]; 2]) -> Self {
        let [[a, b], [c, d]] = blocks;
        MonodromyBlocks { a, b, c, d }
    }

    pub fn block(&self, row: usize, col: usize) -> &OperatorMatrix {
        match (row, col) {
            (0, 0) => &self.a,
            (0, 1) => &self.b,
            (1, 0) => &self.c,
            (1, 1) => &self.d,
            _ => panic!("auxiliary index out of range"),
        }
    }

    /// Auxiliary-space trace A + D.
    pub fn trace(&self) -> OperatorMatrix {
        &self.a + &self.d
    }

    /// Blocks of `left * T * right` for 2x2 scalar matrices acting on the
    /// auxiliary space.
    #[allow(clippy::needless_range_loop)]
    pub fn conjugate(&self, left: &[[Complex64; 2]; 2], right: &[[Complex64; 2]; 2]) -> Self {
        let dim = self.a.dim();
        let entry = |i: usize, j: usize| {
            let mut acc = CMatrix::zeros(dim, dim);
            for a in 0..2 {
                for b in 0..2 {
                    let w = left[i][a] * right[b][j];
                    if w != ZERO {
                        acc += self.block(a, b).matrix() * w;
                    }
                }
            }
            OperatorMatrix(acc)
        };
        MonodromyBlocks {
            a: entry(0, 0),
            b: entry(0, 1),
            c: entry(1, 0),
            d: entry(1, 1),
        }
    }
}

fn bit_of(index: usize, site: usize, n: usize) -> usize {
    (index >> (n - 1 - site)) & 1
}

fn with_bit(index: usize, site: usize, n: usize, value: usize) -> usize {
    let mask = 1 << (n - 1 - site);
    if value == 0 {
        index & !mask
    } else {
        index | mask
    }
}

/// The 4x4 permutation operator on C^2 (x) C^2.
pub fn permutation4() -> CMatrix {
    let mut p = CMatrix::zeros(4, 4);
    for s1 in 0..2 {
        for s2 in 0..2 {
            p[(2 * s2 + s1, 2 * s1 + s2)] = ONE;
        }
    }
    p
}

/// R(u) = u + eta P on C^2 (x) C^2.
pub fn r_matrix(u: Complex64) -> CMatrix {
    CMatrix::identity(4, 4) * u + permutation4() * Complex64::new(ETA, 0.0)
}

/// Embeds a two-site operator acting on sites `(i, j)` (first tensor factor
/// on `i`) into the `n`-site space.
pub fn embed_two_site(op: &CMatrix, i: usize, j: usize, n: usize) -> CMatrix {
    assert!(i != j && i < n && j < n);
    let dim = 1 << n;
    let mut out = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let pc = 2 * bit_of(col, i, n) + bit_of(col, j, n);
        for pr in 0..4 {
            let w = op[(pr, pc)];
            if w == ZERO {
                continue;
            }
            let row = with_bit(with_bit(col, i, n, pr >> 1), j, n, pr & 1);
            out[(row, col)] += w;
        }
    }
    out
}

/// Embeds a single-site operator on site `j` of an `n`-site chain.
pub fn embed_one_site(op: &CMatrix, j: usize, n: usize) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for site in 0..n {
        out = if site == j {
            out.kronecker(op)
        } else {
            out.kronecker(&CMatrix::identity(2, 2))
        };
    }
    out
}

/// Monodromy T_0(u) = R_0N(u - theta_N) ... R_01(u - theta_1), accumulated
/// site by site with the auxiliary space kept as a 2x2 array of operators.
pub fn monodromy(spec: &ChainSpec, u: Complex64) -> MonodromyBlocks {
    let n = spec.n();
    let dim = spec.dim();
    let mut t: [[OperatorMatrix; 2]; 2] = [
        [OperatorMatrix::identity(dim), OperatorMatrix::zeros(dim)],
        [OperatorMatrix::zeros(dim), OperatorMatrix::identity(dim)],
    ];
    for (site, theta) in spec.theta().iter().enumerate() {
        let x = u - theta;
        // R_0j entry (a, c) is x delta_ac + E_ca on site j; for a fixed row
        // index r only c = bit_j(r) contributes.
        let next = std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let mut out = t[a][b].0.clone() * x;
                let sources = [t[0][b].0.as_slice(), t[1][b].0.as_slice()];
                let dst = out.as_mut_slice();
                for col in 0..dim {
                    let base = col * dim;
                    for r in 0..dim {
                        let c = bit_of(r, site, n);
                        let src = with_bit(r, site, n, a);
                        dst[base + r] += sources[c][base + src];
                    }
                }
                OperatorMatrix(out)
            })
        });
        t = next;
    }
    MonodromyBlocks::from_array(t)
}

/// Transfer matrix t(u) = A(u) + D(u).
pub fn transfer(spec: &ChainSpec, u: Complex64) -> OperatorMatrix {
    monodromy(spec, u).trace()
}

/// How the auxiliary-space rotation is applied in [`rotated_monodromy`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RotationConvention {
    /// M T M, the same rotation on both sides.
    Verbatim,
    /// M T M^-1.
    InverseRight,
    /// M^-1 T M.
    InverseLeft,
}

impl RotationConvention {
    pub const ALL: [RotationConvention; 3] = [
        RotationConvention::Verbatim,
        RotationConvention::InverseRight,
        RotationConvention::InverseLeft,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RotationConvention::Verbatim => "verbatim",
            RotationConvention::InverseRight => "inverse-right",
            RotationConvention::InverseLeft => "inverse-left",
        }
    }
}

/// [[cos phi/2, -sin phi/2], [sin phi/2, cos phi/2]] and its inverse, for
/// complex phi.
pub fn rotation_pair(phi: Complex64) -> ([[Complex64; 2]; 2], [[Complex64; 2]; 2]) {
    let half = phi * 0.5;
    let (c, s) = (half.cos(), half.sin());
    ([[c, -s], [s, c]], [[c, s], [-s, c]])
}

/// Blocks of the rotated monodromy matrix under the chosen convention.
pub fn rotated_monodromy(
    spec: &ChainSpec,
    u: Complex64,
    convention: RotationConvention,
) -> MonodromyBlocks {
    let plain = monodromy(spec, u);
    let (m, m_inv) = rotation_pair(spec.phi());
    match convention {
        RotationConvention::Verbatim => plain.conjugate(&m, &m),
        RotationConvention::InverseRight => plain.conjugate(&m, &m_inv),
        RotationConvention::InverseLeft => plain.conjugate(&m_inv, &m),
    }
}

/// Frobenius distance between A_phi + D_phi and t(u); diagnostic only.
pub fn rotation_trace_residual(spec: &ChainSpec, u: Complex64, convention: RotationConvention) -> f64 {
    let rotated = rotated_monodromy(spec, u, convention).trace();
    (&rotated - &transfer(spec, u)).norm()
}

pub fn pauli() -> [CMatrix; 3] {
    let sx = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let sy = CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]);
    let sz = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
    [sx, sy, sz]
}

/// H = 1/2 sum_j sigma_j . sigma_{j+1} with periodic boundary, assembled from
/// Pauli tensor products.
pub fn hamiltonian(spec: &ChainSpec) -> OperatorMatrix {
    let n = spec.n();
    let dim = spec.dim();
    let paulis = pauli();
    let site_ops: Vec<Vec<CMatrix>> = paulis
        .iter()
        .map(|s| (0..n).map(|j| embed_one_site(s, j, n)).collect())
        .collect();
    let mut h = CMatrix::zeros(dim, dim);
    for j in 0..n {
        let k = (j + 1) % n;
        for ops in &site_ops {
            h += &ops[j] * &ops[k];
        }
    }
    OperatorMatrix(h * Complex64::new(0.5, 0.0))
}

/// The transfer-matrix family as a degree-N operator polynomial, fitted once
/// from N+1 samples on a circle.
#[derive(Clone, Debug)]
pub struct TransferFamily {
    coeffs: Vec<OperatorMatrix>,
}

impl TransferFamily {
    pub fn new(spec: &ChainSpec) -> Self {
        let n = spec.n();
        let radius = node_radius(spec.theta());
        let nodes = crate::poly::circle_nodes(n + 1, radius);
        let samples: Vec<OperatorMatrix> = nodes.iter().map(|&u| transfer(spec, u)).collect();
        let vander = DMatrix::from_fn(n + 1, n + 1, |i, k| (nodes[i] / radius).powu(k as u32));
        let inv = vander
            .try_inverse()
            .expect("circle-node Vandermonde matrix is invertible");
        let dim = spec.dim();
        let coeffs = (0..=n)
            .map(|k| {
                let mut acc = CMatrix::zeros(dim, dim);
                for (i, s) in samples.iter().enumerate() {
                    acc += s.matrix() * inv[(k, i)];
                }
                OperatorMatrix(acc * Complex64::new(radius.powi(-(k as i32)), 0.0))
            })
            .collect();
        TransferFamily { coeffs }
    }

    pub fn coeffs(&self) -> &[OperatorMatrix] {
        &self.coeffs
    }

    pub fn eval(&self, u: Complex64) -> OperatorMatrix {
        let dim = self.coeffs[0].dim();
        let mut acc = CMatrix::zeros(dim, dim);
        for c in self.coeffs.iter().rev() {
            acc = acc * u + c.matrix();
        }
        OperatorMatrix(acc)
    }

    /// Coefficients of u -> t(u + s).
    pub fn shifted(&self, s: Complex64) -> TransferFamily {
        let deg = self.coeffs.len() - 1;
        let dim = self.coeffs[0].dim();
        let coeffs = (0..=deg)
            .map(|k| {
                let mut acc = CMatrix::zeros(dim, dim);
                for n in k..=deg {
                    let w = s.powu((n - k) as u32) * binomial(n, k);
                    acc += self.coeffs[n].matrix() * w;
                }
                OperatorMatrix(acc)
            })
            .collect();
        TransferFamily { coeffs }
    }
}

/// Interpolation radius max(1, 2 max|theta|).
pub fn node_radius(theta: &[Complex64]) -> f64 {
    let max_theta = theta.iter().map(|t| t.norm()).fold(0.0, f64::max);
    (2.0 * max_theta).max(1.0)
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All-spin-up reference state of an `n`-site chain.
pub fn reference_state(n: usize) -> CVector {
    let mut v = CVector::zeros(1 << n);
    v[0] = ONE;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn basis(n: usize, bits: &[usize]) -> CVector {
        let idx = bits.iter().fold(0, |acc, b| (acc << 1) | b);
        let mut v = CVector::zeros(1 << n);
        v[idx] = ONE;
        v
    }

    #[test]
    fn r_matrix_at_zero_is_permutation() {
        assert_eq!(r_matrix(ZERO), permutation4());
    }

    #[test]
    fn unitarity_scalar_is_one_minus_u_squared() {
        let u = c(0.5, 0.0);
        let p = permutation4();
        let r21 = &p * r_matrix(-u) * &p;
        let prod = r_matrix(u) * r21;
        let expect = CMatrix::identity(4, 4) * (ONE - u * u);
        assert!((prod - expect).norm() < 1e-14);
    }

    #[test]
    fn transfer_at_origin_is_cyclic_shift_for_two_sites() {
        // brute force: t(0) = tr_0 R_02(0) R_01(0) = tr_0 P_02 P_01 = P_12
        let spec = ChainSpec::homogeneous(2, ZERO).unwrap();
        let t0 = transfer(&spec, ZERO);
        let out = t0.apply(&basis(2, &[0, 1]));
        assert!((out - basis(2, &[1, 0])).norm() < 1e-14);
        assert!((t0.matrix() - permutation4()).norm() < 1e-14);
    }

    #[test]
    fn monodromy_blocks_match_explicit_kronecker_product() {
        // T_0(u) as a 2^(N+1) matrix with the auxiliary space as site 0
        let theta = vec![c(0.2, -0.1), c(-0.3, 0.25)];
        let spec = ChainSpec::new(theta.clone(), ZERO).unwrap();
        let u = c(0.37, 0.8);
        let mut full = CMatrix::identity(8, 8);
        for (j, t) in theta.iter().enumerate() {
            full = embed_two_site(&r_matrix(u - t), 0, j + 1, 3) * full;
        }
        let blocks = monodromy(&spec, u);
        for a in 0..2 {
            for b in 0..2 {
                let sub = full.view((a * 4, b * 4), (4, 4));
                assert!((sub - blocks.block(a, b).matrix()).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn c_annihilates_and_a_d_act_diagonally_on_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2, 3] {
            let theta: Vec<_> = (0..n).map(|_| c(rng.random::<f64>() - 0.5, 0.3 * rng.random::<f64>())).collect();
            let spec = ChainSpec::new(theta, ZERO).unwrap();
            let u = c(rng.random::<f64>(), rng.random::<f64>());
            let m = monodromy(&spec, u);
            let vac = reference_state(n);
            assert!(m.c.apply(&vac).norm() < 1e-12);
            let av = m.a.apply(&vac) - &vac * spec.a_poly().eval(u);
            let dv = m.d.apply(&vac) - &vac * spec.d_poly().eval(u);
            assert!(av.norm() < 1e-10 && dv.norm() < 1e-10);
        }
    }

    #[test]
    fn transfer_asymptotics() {
        let spec = ChainSpec::new(vec![c(0.1, 0.0), c(-0.2, 0.1), c(0.3, -0.3)], ZERO).unwrap();
        let u = c(1e6, 0.0);
        let t = transfer(&spec, u).scale(ONE / u.powu(3));
        let dev = t.distance_to_scalar(c(2.0, 0.0)) / (2.0 * (8f64).sqrt());
        assert!(dev < 1e-4, "deviation {dev}");
    }

    #[test]
    fn trace_matches_eigenvalue_sum() {
        let spec = ChainSpec::homogeneous(2, ZERO).unwrap();
        let t = transfer(&spec, ONE);
        let eig: Complex64 = linalg::eigenvalues(t.matrix()).unwrap().iter().sum();
        assert!((eig - t.trace()).norm() < 1e-12);
    }

    #[test]
    fn identity_rotation_leaves_blocks_unchanged() {
        let spec = ChainSpec::new(vec![c(0.1, 0.0), c(-0.4, 0.2)], ZERO).unwrap();
        let u = c(0.3, -0.7);
        let plain = monodromy(&spec, u);
        for conv in RotationConvention::ALL {
            let rot = rotated_monodromy(&spec, u, conv);
            for a in 0..2 {
                for b in 0..2 {
                    assert!((rot.block(a, b) - plain.block(a, b)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn rotation_by_pi_on_two_sites() {
        // cos(pi/2) = 0, sin(pi/2) = 1, so M = [[0,-1],[1,0]]
        let spec = ChainSpec::new(vec![c(0.15, 0.0), c(-0.35, 0.0)], c(std::f64::consts::PI, 0.0)).unwrap();
        let u = c(0.4, 0.2);
        let plain = monodromy(&spec, u);
        let verbatim = rotated_monodromy(&spec, u, RotationConvention::Verbatim);
        // row 0 of M is (0,-1), column 1 of M is (-1,0): B_phi = (-1)(-1) C
        assert!((&verbatim.b - &plain.c).norm() < 1e-12);
        let inv_right = rotated_monodromy(&spec, u, RotationConvention::InverseRight);
        // column 1 of M^-1 is (1,0): B_phi = -C
        assert!((&inv_right.b + &plain.c).norm() < 1e-12);
    }

    #[test]
    fn complex_phi_trigonometry() {
        let phi = c(0.0, -0.69315);
        assert!((phi.cos() - c(1.25003, 0.0)).norm() < 1e-4);
        assert!((phi.sin() - c(0.0, -0.75003)).norm() < 1e-4);
    }

    #[test]
    fn hamiltonian_small_spectra() {
        let eig = |n: usize| {
            let h = hamiltonian(&ChainSpec::homogeneous(n, ZERO).unwrap());
            let herm = h.matrix().clone();
            let mut vals: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
            vals.sort_by(f64::total_cmp);
            vals
        };
        let close = |got: &[f64], want: &[f64]| {
            got.len() == want.len() && got.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-10)
        };
        assert!(close(&eig(2), &[-3.0, 1.0, 1.0, 1.0]));
        let e3 = eig(3);
        assert!(close(&e3, &[-1.5, -1.5, -1.5, -1.5, 1.5, 1.5, 1.5, 1.5]));
        let mut want4 = vec![-4.0];
        want4.extend([-2.0; 3]);
        want4.extend([0.0; 7]);
        want4.extend([2.0; 5]);
        assert!(close(&eig(4), &want4));
    }

    #[test]
    fn transfer_family_reproduces_direct_evaluation() {
        let spec = ChainSpec::new(vec![c(0.2, 0.1), c(-0.3, 0.0), c(0.45, -0.2)], ZERO).unwrap();
        let fam = TransferFamily::new(&spec);
        for u in [c(0.1, 0.9), c(-1.7, 0.3), c(2.5, -2.0)] {
            let direct = transfer(&spec, u);
            assert!((&fam.eval(u) - &direct).norm() < 1e-10 * (1.0 + direct.norm()));
        }
        let shifted = fam.shifted(-ONE);
        let u = c(0.3, 0.4);
        assert!((&shifted.eval(u) - &fam.eval(u - 1.0)).norm() < 1e-10);
    }

    #[test]
    fn chain_spec_validation() {
        assert!(ChainSpec::homogeneous(1, ZERO).is_err());
        assert!(matches!(
            ChainSpec::homogeneous(13, ZERO),
            Err(TqError::InvalidChain(msg)) if msg.contains("cap")
        ));
        let spec = ChainSpec::new(vec![c(0.5, 0.0), c(-0.5, 0.0)], ZERO).unwrap();
        assert!(spec.check_generic(1e-12).is_err());
        let ok = ChainSpec::new(vec![c(0.5, 0.0), c(-0.2, 0.0)], ZERO).unwrap();
        assert!(ok.check_generic(1e-12).is_ok());
    }
}

//! Exact diagonalization of the transfer-matrix family.
//!
//! This is the reference every other route is checked against, so it uses
//! nothing from the T-Q side: eigenvalues of t(u*) at a random probe point are
//! grouped into eigenspaces, and each branch Λ(u) is fitted from expectation
//! values of t(u) on its eigenspace. The twist φ is never read here.

use std::cmp::Ordering;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Result, TqError};
use crate::lattice::{hamiltonian, node_radius, transfer, ChainSpec, OperatorMatrix, ETA};
use crate::linalg::{self, CMatrix};
use crate::poly::{circle_nodes, ComplexPoly};
use crate::tq::energy_from_lambda;

const DEFAULT_SEED: u64 = 0x6f72_6163_6c65;
const MAX_PROBES: usize = 5;
const GROUP_TOL: f64 = 1e-7;
const CROSS_TOL: f64 = 1e-8;

/// One eigenvalue branch of the transfer matrix.
#[derive(Clone, Debug)]
pub struct SpectrumRecord {
    pub lambda: ComplexPoly,
    /// Λ'(0)/Λ(0) - N/2; NaN when Λ(0) = 0.
    pub energy: Complex64,
    pub degeneracy: usize,
    /// Orthonormal basis of the eigenspace, one vector per column.
    pub eigenvectors: CMatrix,
    /// Λ(0); the translation eigenvalue on a homogeneous chain.
    pub momentum_marker: Complex64,
}

/// Diagonalizes with the default probe seed.
pub fn diagonalize(spec: &ChainSpec) -> Result<Vec<SpectrumRecord>> {
    diagonalize_seeded(spec, DEFAULT_SEED)
}

pub fn diagonalize_seeded(spec: &ChainSpec, seed: u64) -> Result<Vec<SpectrumRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = circle_nodes(spec.n() + 1, node_radius(spec.theta()));
    let samples: Vec<OperatorMatrix> = nodes.iter().map(|&u| transfer(spec, u)).collect();
    for _ in 0..MAX_PROBES {
        let probe = probe_point(spec, &mut rng);
        let check = probe_point(spec, &mut rng);
        if let Some(records) = attempt(spec, probe, check, &nodes, &samples, rng.random())? {
            return Ok(records);
        }
    }
    Err(TqError::AccidentalDegeneracy(MAX_PROBES))
}

/// Uniform in the annulus 0.5 <= |u| <= 1.5, at least 0.1 from every θ_j
/// and θ_j - 1.
fn probe_point<R: Rng + ?Sized>(spec: &ChainSpec, rng: &mut R) -> Complex64 {
    loop {
        let r = (0.25 + 2.0 * rng.random::<f64>()).sqrt();
        let u = Complex64::from_polar(r, std::f64::consts::TAU * rng.random::<f64>());
        let clear = spec
            .theta()
            .iter()
            .all(|&t| (u - t).norm() >= 0.1 && (u - t + ETA).norm() >= 0.1);
        if clear {
            return u;
        }
    }
}

/// Eigenvalue clusters of `m` as (center, multiplicity).
fn group_eigenvalues(values: &[Complex64]) -> Vec<(Complex64, usize)> {
    let mut groups: Vec<(Complex64, usize)> = Vec::new();
    for &v in values {
        match groups
            .iter_mut()
            .find(|(c, _)| (*c - v).norm() < GROUP_TOL * (1.0 + v.norm()))
        {
            Some(g) => {
                g.0 = (g.0 * g.1 as f64 + v) / (g.1 + 1) as f64;
                g.1 += 1;
            }
            None => groups.push((v, 1)),
        }
    }
    groups
}

/// Largest relative column residual ||t v - Λ v|| / ||t||.
pub fn eigen_residual(t: &OperatorMatrix, basis: &CMatrix, lambda: Complex64) -> f64 {
    let tv = t.matrix() * basis;
    let diff = tv - basis * lambda;
    let worst = diff
        .column_iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    worst / t.norm()
}

fn attempt(
    spec: &ChainSpec,
    probe: Complex64,
    check: Complex64,
    nodes: &[Complex64],
    samples: &[OperatorMatrix],
    seed: u64,
) -> Result<Option<Vec<SpectrumRecord>>> {
    let t_probe = transfer(spec, probe);
    let values = linalg::eigenvalues(t_probe.matrix())?;
    let groups = group_eigenvalues(&values);
    let t_check = transfer(spec, check);
    let n = spec.n();

    let fitted: Vec<Result<Option<SpectrumRecord>>> = groups
        .par_iter()
        .enumerate()
        .map(|(idx, &(center, k))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(idx as u64));
            let basis = linalg::eigenspace(t_probe.matrix(), center, k, &mut rng)?;
            let points: Vec<(Complex64, Complex64)> = nodes
                .iter()
                .zip(samples)
                .map(|(&u, t)| (u, subspace_trace(t, &basis) / k as f64))
                .collect();
            let lambda = ComplexPoly::interpolate(&points, n)?;
            if eigen_residual(&t_check, &basis, lambda.eval(check)) > CROSS_TOL {
                return Ok(None);
            }
            let energy = energy_from_lambda(&lambda, n).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            Ok(Some(SpectrumRecord {
                momentum_marker: lambda.eval(Complex64::new(0.0, 0.0)),
                lambda,
                energy,
                degeneracy: k,
                eigenvectors: basis,
            }))
        })
        .collect();

    let mut records = Vec::with_capacity(fitted.len());
    for r in fitted {
        match r? {
            Some(rec) => records.push(rec),
            None => return Ok(None),
        }
    }
    debug_assert_eq!(records.iter().map(|r| r.degeneracy).sum::<usize>(), spec.dim());
    records.sort_by(record_order);
    Ok(Some(records))
}

fn subspace_trace(t: &OperatorMatrix, basis: &CMatrix) -> Complex64 {
    let tv = t.matrix() * basis;
    basis
        .column_iter()
        .zip(tv.column_iter())
        .map(|(v, w)| v.dotc(&w))
        .sum()
}

fn fuzzy(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= 1e-8 * (1.0 + a.abs()) {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

/// Records ordered by energy, then by Λ(0).
fn record_order(x: &SpectrumRecord, y: &SpectrumRecord) -> Ordering {
    fuzzy(x.energy.re, y.energy.re)
        .then_with(|| fuzzy(x.energy.im, y.energy.im))
        .then_with(|| fuzzy(x.momentum_marker.re, y.momentum_marker.re))
        .then_with(|| fuzzy(x.momentum_marker.im, y.momentum_marker.im))
        .then_with(|| y.degeneracy.cmp(&x.degeneracy))
}

/// (E, d) per record for a homogeneous chain.
pub fn energies(records: &[SpectrumRecord], spec: &ChainSpec) -> Result<Vec<(Complex64, usize)>> {
    if !spec.is_homogeneous() {
        return Err(TqError::InvalidChain(
            "energies need a homogeneous chain (all theta = 0)".into(),
        ));
    }
    records
        .iter()
        .map(|r| energy_from_lambda(&r.lambda, spec.n()).map(|e| (e, r.degeneracy)))
        .collect()
}

/// Eigenvalues of the dense Hamiltonian, sorted ascending by real part; an
/// independent cross-check for [`energies`].
pub fn hamiltonian_spectrum(spec: &ChainSpec) -> Result<Vec<Complex64>> {
    let mut ev = linalg::eigenvalues(hamiltonian(spec).matrix())?;
    ev.sort_by(|a, b| a.re.total_cmp(&b.re));
    Ok(ev)
}

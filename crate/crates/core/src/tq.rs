//! The inhomogeneous T-Q relation
//!
//! ```text
//! Λ(u) Q(u) = e^{iφ} a(u) Q(u-1) + e^{-iφ} d(u) Q(u+1) + 2(1 - cos φ) a(u) d(u)
//! ```
//!
//! with its Bethe equations, energy formula, and the functional relations any
//! transfer-matrix eigenvalue must obey.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Result, TqError};
use crate::lattice::{node_radius, ChainSpec, ETA};
use crate::poly::{circle_nodes, ComplexPoly};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Roots closer than this to each other or to a forbidden point violate the
/// selection rules.
pub const SELECTION_MARGIN: f64 = 1e-8;

/// The three φ-dependent coefficients of the relation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Twist {
    pub plus: Complex64,
    pub minus: Complex64,
    pub inhomogeneous: Complex64,
}

impl Twist {
    pub fn new(phi: Complex64) -> Self {
        Twist {
            plus: (I * phi).exp(),
            minus: (-I * phi).exp(),
            inhomogeneous: 2.0 * (ONE - phi.cos()),
        }
    }

    /// Limit of Λ(u)/u^N as u grows; equal to 2 for every φ.
    pub fn asymptotic_sum(&self) -> Complex64 {
        self.plus + self.minus + self.inhomogeneous
    }
}

/// A candidate set of Bethe roots with the solver's bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct BetheRootSet {
    pub mu: Vec<Complex64>,
    pub converged: bool,
    pub newton_iterations: usize,
    pub defect: f64,
}

impl BetheRootSet {
    /// Stores the roots in canonical order.
    pub fn new(mut mu: Vec<Complex64>, converged: bool, newton_iterations: usize, defect: f64) -> Self {
        canonical_order(&mut mu);
        BetheRootSet {
            mu,
            converged,
            newton_iterations,
            defect,
        }
    }

    pub fn q(&self) -> ComplexPoly {
        ComplexPoly::from_roots(&self.mu)
    }
}

fn fuzzy_cmp(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= 1e-8 {
        Ordering::Equal
    } else {
        a.partial_cmp(&b).unwrap_or(Ordering::Equal)
    }
}

/// Sort by real part, then imaginary part, treating differences below 1e-8
/// as ties. Used for display and set comparison only.
pub fn canonical_order(mu: &mut [Complex64]) {
    mu.sort_by(|a, b| fuzzy_cmp(a.re, b.re).then_with(|| fuzzy_cmp(a.im, b.im)));
}

/// A Bethe root set together with its Q and Λ polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct TQSolution {
    pub roots: BetheRootSet,
    pub q: ComplexPoly,
    pub lambda: ComplexPoly,
    pub phi: Complex64,
    pub bae_residual: f64,
    pub matched_record: Option<usize>,
}

impl TQSolution {
    pub fn new(spec: &ChainSpec, roots: BetheRootSet) -> Result<Self> {
        let q = roots.q();
        let bae_residual = max_norm(&bae_residuals(spec, &roots.mu)?);
        let lambda = lambda_poly_from_tq(spec, &q)?;
        Ok(TQSolution {
            roots,
            q,
            lambda,
            phi: spec.phi(),
            bae_residual,
            matched_record: None,
        })
    }
}

pub fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Checks μ_j ≠ μ_l and μ_j ∉ {θ_l, θ_l - 1} with the given margin.
pub fn check_selection_rules(spec: &ChainSpec, mu: &[Complex64], margin: f64) -> Result<()> {
    for j in 0..mu.len() {
        for l in 0..j {
            if (mu[j] - mu[l]).norm() <= margin {
                return Err(TqError::SelectionRule(format!(
                    "mu[{l}] and mu[{j}] coincide ({})",
                    mu[j]
                )));
            }
        }
        for (l, &theta) in spec.theta().iter().enumerate() {
            if (mu[j] - theta).norm() <= margin {
                return Err(TqError::SelectionRule(format!("mu[{j}] sits at theta[{l}]")));
            }
            if (mu[j] - theta + ETA).norm() <= margin {
                return Err(TqError::SelectionRule(format!("mu[{j}] sits at theta[{l}] - 1")));
            }
        }
    }
    Ok(())
}

/// Λ(u) from the T-Q relation at a point that is not a zero of Q.
pub fn lambda_from_tq(spec: &ChainSpec, q: &ComplexPoly, u: Complex64) -> Result<Complex64> {
    let tw = Twist::new(spec.phi());
    let qu = q.eval(u);
    let scale = q.max_abs_coeff() * u.norm().max(1.0).powi(q.degree() as i32);
    if qu.norm() < 1e-12 * scale {
        return Err(TqError::AtBetheRoot);
    }
    let (a, d) = (spec.a_poly().eval(u), spec.d_poly().eval(u));
    Ok((tw.plus * a * q.eval(u - ETA) + tw.minus * d * q.eval(u + ETA) + tw.inhomogeneous * a * d) / qu)
}

/// The right-hand side of Λ Q = ..., a polynomial of degree 2N.
pub fn tq_numerator(spec: &ChainSpec, q: &ComplexPoly) -> ComplexPoly {
    let tw = Twist::new(spec.phi());
    let (a, d) = (spec.a_poly(), spec.d_poly());
    let t1 = (&a * &q.shift(-ONE * ETA)).scale(tw.plus);
    let t2 = (&d * &q.shift(ONE * ETA)).scale(tw.minus);
    let t3 = (&a * &d).scale(tw.inhomogeneous);
    &(&t1 + &t2) + &t3
}

/// Λ as a polynomial: interpolated from the T-Q relation at N+1 nodes kept
/// away from the Bethe roots, after checking that Q divides the numerator.
pub fn lambda_poly_from_tq(spec: &ChainSpec, q: &ComplexPoly) -> Result<ComplexPoly> {
    let n = spec.n();
    if q.degree() != n {
        return Err(TqError::Degenerate(format!(
            "Q has degree {}, expected {n}",
            q.degree()
        )));
    }
    let numerator = tq_numerator(spec, q);
    let (_, rem) = numerator.div_rem(q)?;
    let rel = rem.max_abs_coeff() / numerator.max_abs_coeff().max(f64::MIN_POSITIVE);
    if rel > 1e-8 {
        return Err(TqError::NotPolynomial(rel));
    }

    let radius = node_radius(spec.theta());
    let roots = q.roots()?;
    let base = circle_nodes(n + 1, radius);
    // rotate the node circle to stay as far as possible from the roots
    let best = (0..16)
        .map(|k| {
            let rot = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / (16.0 * (n + 1) as f64));
            let gap = base
                .iter()
                .flat_map(|&x| roots.iter().map(move |&r| (x * rot - r).norm()))
                .fold(f64::INFINITY, f64::min);
            (rot, gap)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(rot, _)| rot)
        .unwrap_or(ONE);
    let points = base
        .iter()
        .map(|&x| {
            let u = x * best;
            lambda_from_tq(spec, q, u).map(|v| (u, v))
        })
        .collect::<Result<Vec<_>>>()?;
    ComplexPoly::interpolate(&points, n)
}

/// Bethe-equation defects, each divided by 1 + |a(μ_j) d(μ_j)|.
pub fn bae_residuals(spec: &ChainSpec, mu: &[Complex64]) -> Result<Vec<Complex64>> {
    check_selection_rules(spec, mu, SELECTION_MARGIN)?;
    Ok(bae_residuals_unchecked(spec, mu))
}

pub(crate) fn bae_residuals_unchecked(spec: &ChainSpec, mu: &[Complex64]) -> Vec<Complex64> {
    let tw = Twist::new(spec.phi());
    let (ap, dp) = (spec.a_poly(), spec.d_poly());
    let q_at = |u: Complex64| mu.iter().map(|&r| u - r).product::<Complex64>();
    mu.iter()
        .map(|&m| {
            let (a, d) = (ap.eval(m), dp.eval(m));
            let raw = tw.plus * a * q_at(m - ETA) + tw.minus * d * q_at(m + ETA) + tw.inhomogeneous * a * d;
            raw / (1.0 + (a * d).norm())
        })
        .collect()
}

/// E = Λ'(0)/Λ(0) - N/2.
pub fn energy_from_lambda(lambda: &ComplexPoly, n: usize) -> Result<Complex64> {
    let c0 = lambda.coeff(0);
    if c0.norm() <= 1e-14 * lambda.max_abs_coeff() {
        return Err(TqError::VanishingAtOrigin);
    }
    Ok(lambda.coeff(1) / c0 - n as f64 / 2.0)
}

/// Residuals of the three constraints on a transfer-matrix eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalReport {
    /// Worst relative defect of Λ(θ)Λ(θ-1) = a(θ)d(θ-1); at a θ of
    /// multiplicity m, its first m Taylor coefficients.
    pub identity: f64,
    pub degree: usize,
    pub expected_degree: usize,
    /// |leading - 2| / 2
    pub leading: f64,
}

impl FunctionalReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.degree == self.expected_degree && self.identity <= tol && self.leading <= tol
    }
}

/// Distinct inhomogeneities with their multiplicities.
pub fn theta_clusters(theta: &[Complex64]) -> Vec<(Complex64, usize)> {
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    for &t in theta {
        match out.iter_mut().find(|(c, _)| (*c - t).norm() <= 1e-12 * (1.0 + t.norm())) {
            Some(entry) => entry.1 += 1,
            None => out.push((t, 1)),
        }
    }
    out
}

pub fn verify_functional_relations(lambda: &ComplexPoly, spec: &ChainSpec) -> FunctionalReport {
    let ad = &spec.a_poly() * &spec.d_poly().shift(-ONE * ETA);
    let mut identity: f64 = 0.0;
    for (t, m) in theta_clusters(spec.theta()) {
        let l0 = lambda.shift(t);
        let l1 = lambda.shift(t - ETA);
        let rhs = ad.shift(t);
        for l in 0..m {
            let mut lhs = Complex64::new(0.0, 0.0);
            let mut scale = 1.0 + rhs.coeff(l).norm();
            for i in 0..=l {
                lhs += l0.coeff(i) * l1.coeff(l - i);
                scale += l0.coeff(i).norm() * l1.coeff(l - i).norm();
            }
            identity = identity.max((lhs - rhs.coeff(l)).norm() / scale);
        }
    }
    FunctionalReport {
        identity,
        degree: lambda.degree(),
        expected_degree: spec.n(),
        leading: (lambda.leading() - 2.0).norm() / 2.0,
    }
}

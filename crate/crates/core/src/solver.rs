//! Multistart damped Newton for the Bethe equations, deduplication of the
//! resulting root sets, and matching against the exact spectrum.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Result, TqError};
use crate::lattice::{ChainSpec, ETA};
use crate::linalg::{self, CMatrix, CVector};
use crate::oracle::SpectrumRecord;
use crate::poly::ComplexPoly;
use crate::tq::{
    bae_residuals_unchecked, check_selection_rules, lambda_poly_from_tq, max_norm,
    verify_functional_relations, BetheRootSet, Twist,
};

pub const CONVERGED_DEFECT: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 200;
pub const MAX_HALVINGS: usize = 30;
pub const START_MARGIN: f64 = 1e-6;
pub const ITERATE_MARGIN: f64 = 1e-8;
pub const DIVERGENCE: f64 = 1e6;
/// Root sets closer than this, entry by entry after matching, are the same.
pub const DEDUP_TOL: f64 = 1e-6;
/// Solutions whose Λ coefficients agree to this relative accuracy are the
/// same eigenvalue branch. Bethe roots of degenerate multiplets are multiple
/// zeros of the Bethe equations, so Newton pins them down only to about the
/// m-th root of the working precision and copies of one branch scatter well
/// beyond [`DEDUP_TOL`].
pub const LAMBDA_MERGE_TOL: f64 = 1e-3;
/// Accepted solutions must satisfy the eigenvalue functional relations.
pub const ACCEPT_TOL: f64 = 1e-7;
pub const MATCH_TOL: f64 = 1e-6;
const RCOND: f64 = 1e-13;

/// Raw (unweighted) Bethe-equation map F_j(μ) and its Jacobian.
pub fn residual_and_jacobian(spec: &ChainSpec, mu: &[Complex64]) -> (CVector, CMatrix) {
    let n = mu.len();
    let tw = Twist::new(spec.phi());
    let (ap, dp) = (spec.a_poly(), spec.d_poly());
    let (apd, dpd) = (ap.derivative(), dp.derivative());
    let mut f = CVector::zeros(n);
    let mut jac = CMatrix::zeros(n, n);
    // Q(μ_j + s) = s P_j(μ_j + s) with P_j(x) = prod_{k≠j} (x - μ_k)
    let prod_except = |x: Complex64, skip: &[usize]| -> Complex64 {
        mu.iter()
            .enumerate()
            .filter(|(i, _)| !skip.contains(i))
            .map(|(_, &m)| x - m)
            .product()
    };
    for j in 0..n {
        let m = mu[j];
        let (a, d, da, dd) = (ap.eval(m), dp.eval(m), apd.eval(m), dpd.eval(m));
        let (xm, xp) = (m - ETA, m + ETA);
        let q_minus = -ETA * prod_except(xm, &[j]);
        let q_plus = ETA * prod_except(xp, &[j]);
        f[j] = tw.plus * a * q_minus + tw.minus * d * q_plus + tw.inhomogeneous * a * d;

        // d/dμ_j of P_j(μ_j + s) = sum_{i≠j} prod_{k≠i,j} (μ_j + s - μ_k)
        let (mut dpm, mut dpp) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for i in (0..n).filter(|&i| i != j) {
            dpm += prod_except(xm, &[i, j]);
            dpp += prod_except(xp, &[i, j]);
        }
        jac[(j, j)] = tw.plus * (da * q_minus - ETA * a * dpm)
            + tw.minus * (dd * q_plus + ETA * d * dpp)
            + tw.inhomogeneous * (da * d + a * dd);
        for k in (0..n).filter(|&k| k != j) {
            let dqm = ETA * prod_except(xm, &[j, k]);
            let dqp = -ETA * prod_except(xp, &[j, k]);
            jac[(j, k)] = tw.plus * a * dqm + tw.minus * d * dqp;
        }
    }
    (f, jac)
}

fn defect(spec: &ChainSpec, mu: &[Complex64]) -> f64 {
    max_norm(&bae_residuals_unchecked(spec, mu))
}

/// Damped Newton from `mu0`.
///
/// Steps are halved until the defect decreases. Once the defect is below
/// [`CONVERGED_DEFECT`] only steps that at least halve it are taken, so a
/// converged start stays put.
pub fn newton_solve(spec: &ChainSpec, mu0: &[Complex64]) -> Result<BetheRootSet> {
    if mu0.len() != spec.n() {
        return Err(TqError::Degenerate(format!(
            "need {} starting roots, got {}",
            spec.n(),
            mu0.len()
        )));
    }
    check_selection_rules(spec, mu0, START_MARGIN)?;
    let mut mu = mu0.to_vec();
    let mut current = defect(spec, &mu);
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        // row weights are frozen for the step and its line search, so the
        // Newton direction is a descent direction for the merit below
        let weights: Vec<f64> = mu
            .iter()
            .map(|&m| 1.0 / (1.0 + (spec.a_poly().eval(m) * spec.d_poly().eval(m)).norm()))
            .collect();
        let merit = |x: &[Complex64]| -> f64 {
            let (f, _) = residual_and_jacobian(spec, x);
            f.iter().zip(&weights).map(|(z, w)| (z * w).norm_sqr()).sum::<f64>().sqrt()
        };
        let (f, mut jac) = residual_and_jacobian(spec, &mu);
        let mut rhs = -f;
        for (j, &w) in weights.iter().enumerate() {
            rhs[j] *= w;
            jac.row_mut(j).scale_mut(w);
        }
        let step = linalg::lstsq_truncated(&jac, &rhs, RCOND);
        let m0 = rhs.norm();
        let required = if current < CONVERGED_DEFECT { 0.5 * m0 } else { m0 };

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<Complex64> = mu.iter().zip(step.iter()).map(|(&m, &s)| m + s * t).collect();
            if merit(&cand) < required {
                accepted = Some(cand);
                break;
            }
            t *= 0.5;
        }
        let Some(cand) = accepted else { break };
        mu = cand;
        current = defect(spec, &mu);
        iterations += 1;
        check_selection_rules(spec, &mu, ITERATE_MARGIN)?;
        if mu.iter().any(|m| m.norm() > DIVERGENCE) {
            return Err(TqError::Degenerate("Newton iterate diverged".into()));
        }
    }
    if current > DIVERGENCE {
        return Err(TqError::Degenerate("Newton iterate diverged".into()));
    }
    Ok(BetheRootSet::new(mu, current < CONVERGED_DEFECT, iterations, current))
}

/// Whether two root lists agree as multisets, within `tol` per matched pair.
pub fn same_root_set(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter().all(|x| {
        let best = (0..b.len())
            .filter(|&k| !used[k])
            .min_by(|&i, &k| (b[i] - x).norm().total_cmp(&(b[k] - x).norm()));
        match best {
            Some(k) if (b[k] - x).norm() < tol => {
                used[k] = true;
                true
            }
            _ => false,
        }
    })
}

/// Relative max-norm distance between coefficient vectors.
pub fn lambda_distance(x: &ComplexPoly, y: &ComplexPoly) -> f64 {
    (x - y).max_abs_coeff() / y.max_abs_coeff().max(f64::MIN_POSITIVE)
}

/// First `count` points of the Halton sequence in `dim` dimensions.
fn halton(index: usize, dim: usize) -> Vec<f64> {
    const PRIMES: [usize; 24] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    ];
    PRIMES[..dim]
        .iter()
        .map(|&b| {
            let (mut i, mut f, mut r) = (index + 1, 1.0, 0.0);
            while i > 0 {
                f /= b as f64;
                r += f * (i % b) as f64;
                i /= b;
            }
            r
        })
        .collect()
}

/// Low-discrepancy starts in Re ∈ [-(N+1), 1], Im ∈ [-(N+1), N+1], with a
/// seeded random shift of the whole point set.
pub fn quasi_random_starts(n: usize, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..2 * n).map(|_| rng.random()).collect();
    let span = (n + 1) as f64;
    (0..count)
        .map(|i| {
            let h = halton(i, 2 * n);
            (0..n)
                .map(|j| {
                    let x = (h[2 * j] + shift[2 * j]).fract();
                    let y = (h[2 * j + 1] + shift[2 * j + 1]).fract();
                    Complex64::new(-span + x * (span + 1.0), -span + 2.0 * span * y)
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct EnumerateOptions {
    pub budget: usize,
    pub seed: u64,
    /// Extra starts tried before the quasi-random ones, e.g. roots of
    /// reconstructed Q-polynomials.
    pub seeded_starts: Vec<Vec<Complex64>>,
}

/// A distinct accepted solution.
#[derive(Clone, Debug)]
pub struct FoundSolution {
    pub roots: BetheRootSet,
    pub lambda: ComplexPoly,
    pub seeded: bool,
}

#[derive(Clone, Debug, Default)]
pub struct EnumerationStats {
    pub starts: usize,
    pub converged: usize,
    pub aborted: usize,
    /// Converged, but Λ failed the polynomial or functional-relation checks.
    pub rejected: usize,
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub solutions: Vec<FoundSolution>,
    pub stats: EnumerationStats,
}

enum Outcome {
    Accepted(BetheRootSet, ComplexPoly),
    Rejected,
    Unconverged,
    Aborted,
}

fn run_start(spec: &ChainSpec, mu0: &[Complex64]) -> Outcome {
    match newton_solve(spec, mu0) {
        Err(_) => Outcome::Aborted,
        Ok(r) if !r.converged => Outcome::Unconverged,
        Ok(r) => match lambda_poly_from_tq(spec, &r.q()) {
            Ok(lam) if verify_functional_relations(&lam, spec).passes(ACCEPT_TOL) => Outcome::Accepted(r, lam),
            _ => Outcome::Rejected,
        },
    }
}

/// Runs every start in parallel and merges the results in start order, so
/// the outcome does not depend on scheduling.
pub fn enumerate_solutions(spec: &ChainSpec, opts: &EnumerateOptions) -> Enumeration {
    let n = spec.n();
    let mut starts: Vec<(Vec<Complex64>, bool)> = opts
        .seeded_starts
        .iter()
        .filter(|s| s.len() == n)
        .map(|s| (s.clone(), true))
        .collect();
    starts.extend(quasi_random_starts(n, opts.budget, opts.seed).into_iter().map(|s| (s, false)));

    let outcomes: Vec<Outcome> = starts.par_iter().map(|(s, _)| run_start(spec, s)).collect();

    let mut stats = EnumerationStats {
        starts: starts.len(),
        ..Default::default()
    };
    let mut solutions: Vec<FoundSolution> = Vec::new();
    for (outcome, (_, seeded)) in outcomes.into_iter().zip(&starts) {
        match outcome {
            Outcome::Aborted => stats.aborted += 1,
            Outcome::Unconverged => {}
            Outcome::Rejected => {
                stats.converged += 1;
                stats.rejected += 1;
            }
            Outcome::Accepted(roots, lambda) => {
                stats.converged += 1;
                let dup = solutions.iter_mut().find(|s| {
                    same_root_set(&s.roots.mu, &roots.mu, DEDUP_TOL)
                        || lambda_distance(&lambda, &s.lambda) < LAMBDA_MERGE_TOL
                });
                match dup {
                    Some(s) => {
                        if !s.seeded && !seeded && roots.defect < s.roots.defect * 1e-2 {
                            s.roots = roots;
                            s.lambda = lambda;
                        }
                    }
                    None => solutions.push(FoundSolution {
                        roots,
                        lambda,
                        seeded: *seeded,
                    }),
                }
            }
        }
    }
    Enumeration { solutions, stats }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Matching {
    /// (solution index, record index, relative Λ distance)
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_solutions: Vec<usize>,
    pub unmatched_records: Vec<usize>,
}

/// One-to-one assignment of solutions to oracle records by Λ coefficient
/// distance, greedily from the closest pair; pairs above [`MATCH_TOL`] are
/// left unmatched.
pub fn classify(lambdas: &[ComplexPoly], records: &[SpectrumRecord]) -> Matching {
    let mut cand: Vec<(usize, usize, f64)> = Vec::new();
    for (i, lam) in lambdas.iter().enumerate() {
        for (k, rec) in records.iter().enumerate() {
            let d = lambda_distance(lam, &rec.lambda);
            if d < MATCH_TOL {
                cand.push((i, k, d));
            }
        }
    }
    cand.sort_by(|x, y| x.2.total_cmp(&y.2).then(x.0.cmp(&y.0)).then(x.1.cmp(&y.1)));
    let (mut sol_used, mut rec_used) = (vec![false; lambdas.len()], vec![false; records.len()]);
    let mut pairs = Vec::new();
    for (i, k, d) in cand {
        if !sol_used[i] && !rec_used[k] {
            sol_used[i] = true;
            rec_used[k] = true;
            pairs.push((i, k, d));
        }
    }
    pairs.sort_by_key(|p| p.0);
    Matching {
        pairs,
        unmatched_solutions: (0..lambdas.len()).filter(|&i| !sol_used[i]).collect(),
        unmatched_records: (0..records.len()).filter(|&k| !rec_used[k]).collect(),
    }
}

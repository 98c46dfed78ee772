//! Q-polynomial from a known eigenvalue branch.
//!
//! With Q(u) = u^N + sum_n I_n u^n, the relation Q(θ_j)Λ(θ_j) = e^{iφ} a(θ_j)
//! Q(θ_j - 1) is linear in the I_n, one condition per site. Coincident θ's
//! contribute Taylor conditions instead: at a θ of multiplicity m, the first m
//! Taylor coefficients of Q(u)Λ(u) - e^{iφ}a(u)Q(u-1) must vanish. The
//! homogeneous chain is the case of one θ = 0 with multiplicity N.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, TqError};
use crate::lattice::{node_radius, ChainSpec, ETA};
use crate::linalg::{self, CMatrix, CVector};
use crate::poly::{random_in_disk, ComplexPoly};
use crate::tq::{bae_residuals_unchecked, check_selection_rules, max_norm, theta_clusters, BetheRootSet, Twist};

const VERIFY_SEED: u64 = 0x7265_636f;
const VERIFY_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub q: ComplexPoly,
    /// 2-norm condition number of the row-equilibrated linear system.
    pub condition: f64,
    /// Worst relative residual of the full T-Q equation at 2N+1 random points.
    pub verification: f64,
}

/// Point-based reconstruction for pairwise distinct θ with θ_j ≠ θ_l - 1.
pub fn reconstruct_q(lambda: &ComplexPoly, spec: &ChainSpec) -> Result<Reconstruction> {
    spec.check_generic(1e-10)?;
    reconstruct_with_rng(lambda, spec, &mut ChaCha8Rng::seed_from_u64(VERIFY_SEED))
}

/// Derivative-based reconstruction at θ = 0.
pub fn reconstruct_q_homogeneous(lambda: &ComplexPoly, spec: &ChainSpec) -> Result<Reconstruction> {
    if !spec.is_homogeneous() {
        return Err(TqError::InvalidChain(
            "homogeneous reconstruction needs all theta = 0".into(),
        ));
    }
    reconstruct_with_rng(lambda, spec, &mut ChaCha8Rng::seed_from_u64(VERIFY_SEED))
}

/// Dispatches on the θ layout; handles any mix of coincident θ's.
pub fn reconstruct_auto(lambda: &ComplexPoly, spec: &ChainSpec) -> Result<Reconstruction> {
    reconstruct_with_rng(lambda, spec, &mut ChaCha8Rng::seed_from_u64(VERIFY_SEED))
}

pub fn reconstruct_with_rng<R: Rng + ?Sized>(
    lambda: &ComplexPoly,
    spec: &ChainSpec,
    rng: &mut R,
) -> Result<Reconstruction> {
    let n = spec.n();
    let tw = Twist::new(spec.phi());
    let a = spec.a_poly();
    // F_k(u) = u^k Λ(u) - e^{iφ} a(u) (u-1)^k, the contribution of u^k in Q
    let basis: Vec<ComplexPoly> = (0..=n)
        .map(|k| {
            let uk = ComplexPoly::monomial(k);
            &(&uk * lambda) - &(&a * &uk.shift(Complex64::new(-ETA, 0.0))).scale(tw.plus)
        })
        .collect();

    let mut rows: Vec<(Vec<Complex64>, Complex64)> = Vec::with_capacity(n);
    for (t, m) in theta_clusters(spec.theta()) {
        let shifted: Vec<ComplexPoly> = basis.iter().map(|f| f.shift(t)).collect();
        for l in 0..m {
            let row: Vec<Complex64> = shifted[..n].iter().map(|f| f.coeff(l)).collect();
            rows.push((row, -shifted[n].coeff(l)));
        }
    }

    let mut mat = CMatrix::zeros(n, n);
    let mut rhs = CVector::zeros(n);
    for (i, (row, b)) in rows.iter().enumerate() {
        let scale = row.iter().map(|z| z.norm()).fold(b.norm(), f64::max).max(f64::MIN_POSITIVE);
        for (k, &v) in row.iter().enumerate() {
            mat[(i, k)] = v / scale;
        }
        rhs[i] = b / scale;
    }
    let (sol, condition) = linalg::solve_with_condition(&mat, &rhs)?;
    let mut coeffs: Vec<Complex64> = sol.iter().copied().collect();
    coeffs.push(Complex64::new(1.0, 0.0));
    let q = ComplexPoly::new(coeffs);

    let verification = verify_tq_equation(&q, lambda, spec, rng);
    if verification.is_nan() || verification > VERIFY_TOL {
        return Err(TqError::ReconstructionInconsistent(verification));
    }
    Ok(Reconstruction {
        q,
        condition,
        verification,
    })
}

/// Worst relative residual of Q Λ = e^{iφ} a Q⁻ + e^{-iφ} d Q⁺ + 2(1-cos φ) a d
/// at 2N+1 random points; each point is normalized by the sum of the term
/// magnitudes.
pub fn verify_tq_equation<R: Rng + ?Sized>(
    q: &ComplexPoly,
    lambda: &ComplexPoly,
    spec: &ChainSpec,
    rng: &mut R,
) -> f64 {
    let tw = Twist::new(spec.phi());
    let (a, d) = (spec.a_poly(), spec.d_poly());
    let radius = 2.0 * node_radius(spec.theta());
    (0..2 * spec.n() + 1)
        .map(|_| {
            let u = random_in_disk(rng, radius);
            let (au, du) = (a.eval(u), d.eval(u));
            let terms = [
                q.eval(u) * lambda.eval(u),
                tw.plus * au * q.eval(u - ETA),
                tw.minus * du * q.eval(u + ETA),
                tw.inhomogeneous * au * du,
            ];
            let resid = terms[0] - terms[1] - terms[2] - terms[3];
            resid.norm() / terms.iter().map(|z| z.norm()).sum::<f64>().max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

/// The mirror condition Q(θ_j - 1)Λ(θ_j - 1) = e^{-iφ} d(θ_j - 1) Q(θ_j),
/// which the reconstruction never imposes; worst relative residual over j.
pub fn second_point_residual(q: &ComplexPoly, lambda: &ComplexPoly, spec: &ChainSpec) -> f64 {
    let tw = Twist::new(spec.phi());
    let d = spec.d_poly();
    spec.theta()
        .iter()
        .map(|&t| {
            let lhs = q.eval(t - ETA) * lambda.eval(t - ETA);
            let rhs = tw.minus * d.eval(t - ETA) * q.eval(t);
            (lhs - rhs).norm() / (1.0 + lhs.norm() + rhs.norm())
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractedRoots {
    pub roots: BetheRootSet,
    /// Selection-rule violations, empty when the root set is admissible.
    pub violations: Vec<String>,
}

/// Companion-matrix roots of Q, canonically ordered, with the Bethe-equation
/// defect and any selection-rule violations recorded.
pub fn roots_from_q(q: &ComplexPoly, spec: &ChainSpec) -> Result<ExtractedRoots> {
    let mu = q.roots()?;
    let mut violations = Vec::new();
    // report every offending pair, not just the first
    for j in 0..mu.len() {
        if let Err(e) = check_selection_rules(spec, &mu[j..=j], crate::tq::SELECTION_MARGIN) {
            violations.push(e.to_string().replace("mu[0]", &format!("mu[{j}]")));
        }
        for l in 0..j {
            if (mu[j] - mu[l]).norm() <= crate::tq::SELECTION_MARGIN {
                violations.push(format!("selection rule violated: mu[{l}] and mu[{j}] coincide"));
            }
        }
    }
    let defect = max_norm(&bae_residuals_unchecked(spec, &mu));
    Ok(ExtractedRoots {
        roots: BetheRootSet::new(mu, violations.is_empty(), 0, defect),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::diagonalize;
    use crate::tq::lambda_poly_from_tq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close_sets(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        let mut used = vec![false; b.len()];
        a.iter().all(|x| {
            let hit = (0..b.len())
                .filter(|&k| !used[k])
                .min_by(|&i, &j| (b[i] - x).norm().total_cmp(&(b[j] - x).norm()));
            match hit {
                Some(k) if (b[k] - x).norm() < tol => {
                    used[k] = true;
                    true
                }
                _ => false,
            }
        })
    }

    #[test]
    fn generic_three_site_branches_reconstruct() {
        let theta = vec![c(0.11, 0.3), c(-0.27, -0.08), c(0.35, -0.19)];
        let spec = ChainSpec::new(theta, c(0.7, 0.0)).unwrap();
        for rec in diagonalize(&spec).unwrap() {
            let r = reconstruct_q(&rec.lambda, &spec).unwrap();
            assert!(r.verification < 1e-8, "{}", r.verification);
            assert!(second_point_residual(&r.q, &rec.lambda, &spec) < 1e-8);
            let back = lambda_poly_from_tq(&spec, &r.q).unwrap();
            assert!((&back - &rec.lambda).max_abs_coeff() < 1e-6 * rec.lambda.max_abs_coeff());
        }
    }

    #[test]
    fn table_one_quartet_from_oracle() {
        let spec = ChainSpec::homogeneous(3, c(0.0, -0.69315)).unwrap();
        let recs = diagonalize(&spec).unwrap();
        let quartet = recs.iter().find(|r| r.degeneracy == 4).unwrap();
        let r = reconstruct_q_homogeneous(&quartet.lambda, &spec).unwrap();
        let ex = roots_from_q(&r.q, &spec).unwrap();
        assert!(ex.violations.is_empty());
        let want = [c(-2.88462, 0.0), c(-1.55769, 2.56650), c(-1.55769, -2.56650)];
        assert!(close_sets(&ex.roots.mu, &want, 1e-4), "{:?}", ex.roots.mu);
        assert!(ex.roots.defect < 1e-8);
    }

    #[test]
    fn table_two_singlet_from_oracle() {
        let spec = ChainSpec::homogeneous(4, c(0.0, -0.69315)).unwrap();
        let recs = diagonalize(&spec).unwrap();
        let ground = &recs[0];
        assert!((ground.energy - (-4.0)).norm() < 1e-8);
        let r = reconstruct_q_homogeneous(&ground.lambda, &spec).unwrap();
        let ex = roots_from_q(&r.q, &spec).unwrap();
        let want = [c(-3.46085, 2.04638), c(-3.46085, -2.04638), c(-0.53915, 0.28370), c(-0.53915, -0.28370)];
        assert!(close_sets(&ex.roots.mu, &want, 1e-4), "{:?}", ex.roots.mu);
        assert!(ex.violations.is_empty());
    }

    #[test]
    fn two_site_branches_at_real_twist() {
        let spec = ChainSpec::homogeneous(2, c(0.3, 0.0)).unwrap();
        let recs = diagonalize(&spec).unwrap();
        assert_eq!(recs.len(), 2);
        for rec in &recs {
            let r = reconstruct_q_homogeneous(&rec.lambda, &spec).unwrap();
            let ex = roots_from_q(&r.q, &spec).unwrap();
            assert!(ex.roots.defect < 1e-8);
        }
    }

    #[test]
    fn triplet_has_no_degree_two_q_without_twist() {
        // at φ = 0 the top multiplet needs Q = 1; the degree-N system is singular
        let spec = ChainSpec::homogeneous(2, c(0.0, 0.0)).unwrap();
        let recs = diagonalize(&spec).unwrap();
        let triplet = recs.iter().find(|r| r.degeneracy == 3).unwrap();
        assert!(matches!(
            reconstruct_q_homogeneous(&triplet.lambda, &spec),
            Err(TqError::SingularSystem(_))
        ));
        let singlet = recs.iter().find(|r| r.degeneracy == 1).unwrap();
        assert!(reconstruct_q_homogeneous(&singlet.lambda, &spec).is_ok());
    }

    #[test]
    fn homogeneous_q_is_the_small_theta_limit() {
        let phi = c(0.0, -0.69315);
        let dirs = [c(0.8, 0.3), c(-0.5, 0.9), c(0.2, -0.7), c(-0.9, -0.4)];
        for n in 2..=4 {
            let hom = ChainSpec::homogeneous(n, phi).unwrap();
            let limits: Vec<ComplexPoly> = diagonalize(&hom)
                .unwrap()
                .iter()
                .map(|r| reconstruct_q_homogeneous(&r.lambda, &hom).unwrap().q)
                .collect();
            for eps in [1e-1, 3e-2, 1e-2, 3e-3] {
                let spec = ChainSpec::new(dirs[..n].iter().map(|d| d * eps).collect(), phi).unwrap();
                let mut worst = 0.0f64;
                for rec in diagonalize(&spec).unwrap() {
                    let q = reconstruct_q(&rec.lambda, &spec).unwrap().q;
                    let gap = limits.iter().map(|l| (l - &q).max_abs_coeff()).fold(f64::INFINITY, f64::min);
                    worst = worst.max(gap / q.max_abs_coeff());
                }
                assert!(worst < eps, "N={n} eps={eps}: {worst}");
            }
        }
    }

    #[test]
    fn roots_from_q_round_trip_and_violation() {
        let spec = ChainSpec::homogeneous(3, c(0.0, -0.69315)).unwrap();
        let row = [c(-2.97259, -1.15909), c(-2.51751, 1.42184), c(-0.50990, -0.26274)];
        let ex = roots_from_q(&ComplexPoly::from_roots(&row), &spec).unwrap();
        assert!(close_sets(&ex.roots.mu, &row, 1e-6));
        assert!(ex.violations.is_empty());

        let bad = roots_from_q(&ComplexPoly::from_roots(&[c(0.0, 0.0), c(-2.0, 1.0), c(-2.0, -1.0)]), &spec).unwrap();
        assert_eq!(bad.violations.len(), 1);
        assert!(bad.violations[0].contains("theta[0]"));
        assert!(!bad.roots.converged);
    }

    #[test]
    fn generic_reconstruction_rejects_coincident_theta() {
        let spec = ChainSpec::homogeneous(3, c(0.5, 0.0)).unwrap();
        let lam = ComplexPoly::from_real(&[1.0, 3.0, 3.0, 2.0]);
        assert!(matches!(reconstruct_q(&lam, &spec), Err(TqError::InvalidChain(_))));
    }

    #[test]
    fn bogus_lambda_fails_verification() {
        let theta = vec![c(0.11, 0.3), c(-0.27, -0.08), c(0.35, -0.19)];
        let spec = ChainSpec::new(theta, c(0.7, 0.0)).unwrap();
        let lam = ComplexPoly::from_real(&[0.3, 1.0, -0.4, 2.0]);
        assert!(matches!(
            reconstruct_q(&lam, &spec),
            Err(TqError::ReconstructionInconsistent(_)) | Err(TqError::SingularSystem(_))
        ));
    }
}

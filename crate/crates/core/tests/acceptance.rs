//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line for
//! each, and exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use tq_core::eigenstate::survey_conventions;
use tq_core::identities::{
    crossing_residual, homogeneous_derivative_residuals, initial_condition_residual,
    operator_identity_residual, unitarity_residual, ybe_residual,
};
use tq_core::lattice::r_matrix;
use tq_core::oracle::{diagonalize, hamiltonian_spectrum, SpectrumRecord};
use tq_core::reconstruct::{reconstruct_auto, roots_from_q};
use tq_core::solver::{classify, enumerate_solutions, EnumerateOptions, FoundSolution, Matching};
use tq_core::tq::{energy_from_lambda, Twist};
use tq_core::{ChainSpec, ComplexPoly};

#[allow(clippy::approx_constant)]
const TABLE_PHI: Complex64 = Complex64::new(0.0, -0.69315);
const ROOT_TOL: f64 = 1e-4;
const ENERGY_TOL: f64 = 1e-6;
const IDENTITY_TOL: f64 = 1e-9;
const TQ_CHECK_TOL: f64 = 1e-7;
const EIGEN_TOL: f64 = 1e-6;
const RAYLEIGH_TOL: f64 = 1e-4;
const SOLVER_BUDGET: usize = 2000;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn table_1() -> Vec<(Vec<Complex64>, f64, usize)> {
    vec![
        (vec![c(-2.97259, 1.15909), c(-2.51751, -1.42184), c(-0.50990, 0.26274)], -1.5, 2),
        (vec![c(-2.97259, -1.15909), c(-2.51751, 1.42184), c(-0.50990, -0.26274)], -1.5, 2),
        (vec![c(-2.88462, 0.0), c(-1.55769, -2.56650), c(-1.55769, 2.56650)], 1.5, 4),
    ]
}

fn table_2() -> Vec<(Vec<Complex64>, f64, usize)> {
    vec![
        (vec![c(-3.46085, -2.04638), c(-3.46085, 2.04638), c(-0.53915, -0.28370), c(-0.53915, 0.28370)], -4.0, 1),
        (vec![c(-3.49754, 0.0), c(-2.0, 2.49853), c(-2.0, -2.49853), c(-0.50246, 0.0)], -2.0, 3),
        (vec![c(-3.41695, -0.01463), c(-2.20702, 2.20734), c(-1.88461, -2.68745), c(-0.49142, 0.49474)], 0.0, 3),
        (vec![c(-3.41695, 0.01463), c(-2.20702, -2.20734), c(-1.88461, 2.68745), c(-0.49142, -0.49474)], 0.0, 3),
        (vec![c(-3.38446, -2.02080), c(-3.38446, 2.02080), c(-1.11571, 0.0), c(-0.11537, 0.0)], 0.0, 1),
        (vec![c(-3.07558, 1.25638), c(-3.07558, -1.25638), c(-0.92442, 3.56865), c(-0.92442, -3.56865)], 2.0, 5),
    ]
}

/// Worst entrywise distance under the best permutation (brute force).
fn root_set_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    fn go(a: &[Complex64], rest: &mut Vec<Complex64>, worst: f64, best: &mut f64) {
        if worst >= *best {
            return;
        }
        let Some((&x, tail)) = a.split_first() else {
            *best = worst;
            return;
        };
        for i in 0..rest.len() {
            let y = rest.remove(i);
            go(tail, rest, worst.max((x - y).norm()), best);
            rest.insert(i, y);
        }
    }
    let mut best = f64::INFINITY;
    if a.len() == b.len() {
        go(a, &mut b.to_vec(), 0.0, &mut best);
    }
    best
}

fn parse_c(v: &Value) -> Complex64 {
    c(v["re"].as_f64().unwrap(), v["im"].as_f64().unwrap())
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let mut full = vec!["tqlab"];
    full.extend_from_slice(args);
    let exec = tq_core::cli::run(full);
    (exec.code, exec.stdout)
}

/// Table reproduction through the `solve` preset.
fn table_criterion(table: u32, expected: Vec<(Vec<Complex64>, f64, usize)>, budget: Duration) -> Verdict {
    let start = Instant::now();
    let (code, out) = run_cli(&["solve", "--reproduce-table", &table.to_string()]);
    let elapsed = start.elapsed();
    let doc: Value = serde_json::from_str(&out).expect("json report");
    let sols = doc["report"]["solutions"].as_array().unwrap().clone();

    let mut used = vec![false; sols.len()];
    let mut worst_root: f64 = 0.0;
    let mut worst_energy: f64 = 0.0;
    let mut all_rows = true;
    for (roots, energy, d) in &expected {
        let hit = sols.iter().enumerate().filter(|(k, _)| !used[*k]).find_map(|(k, s)| {
            let mu: Vec<Complex64> = s["roots"].as_array().unwrap().iter().map(parse_c).collect();
            let dist = root_set_distance(&mu, roots);
            let e = parse_c(&s["energy"]);
            let deg = s["match"]["degeneracy"].as_u64().map(|x| x as usize);
            (dist < ROOT_TOL && deg == Some(*d) && (e - energy).norm() < ENERGY_TOL).then_some((k, dist, e))
        });
        match hit {
            Some((k, dist, e)) => {
                used[k] = true;
                worst_root = worst_root.max(dist);
                worst_energy = worst_energy.max((e - energy).norm());
            }
            None => all_rows = false,
        }
    }
    let pass = code == 0 && all_rows && sols.len() == expected.len() && elapsed < budget;
    Verdict {
        pass,
        detail: format!(
            "{} solutions (expected {}), rows matched: {all_rows}, worst root dev {worst_root:.1e}, worst energy dev {worst_energy:.1e}, {:.2}s",
            sols.len(),
            expected.len(),
            elapsed.as_secs_f64()
        ),
    }
}

fn criterion_1() -> Verdict {
    table_criterion(1, table_1(), Duration::from_secs(10))
}

fn criterion_2() -> Verdict {
    table_criterion(2, table_2(), Duration::from_secs(60))
}

fn random_theta(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

fn criterion_3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let r = &r_matrix;
    let mut worst = [0.0f64; 5];
    for n in 2..=8 {
        for _ in 0..20 {
            let spec = ChainSpec::new(random_theta(&mut rng, n), c(0.0, 0.0)).unwrap();
            let (u, v) = (spec.theta()[0] + c(0.3, -0.2), spec.theta()[1] - c(0.1, 0.4));
            worst[0] = worst[0].max(ybe_residual(r, u, v));
            worst[1] = worst[1].max(initial_condition_residual(r));
            worst[2] = worst[2].max(unitarity_residual(r, u));
            worst[3] = worst[3].max(crossing_residual(r, v));
            for j in 0..n {
                worst[4] = worst[4].max(operator_identity_residual(&spec, j));
            }
        }
    }
    let mut derivative: f64 = 0.0;
    for n in 2..=6 {
        let spec = ChainSpec::homogeneous(n, c(0.0, 0.0)).unwrap();
        let res = homogeneous_derivative_residuals(&spec);
        assert_eq!(res.len(), n);
        derivative = derivative.max(res.into_iter().fold(0.0, f64::max));
    }
    let pass = worst.iter().all(|&w| w < IDENTITY_TOL) && derivative < IDENTITY_TOL;
    Verdict {
        pass,
        detail: format!(
            "ybe {:.1e}, initial {:.1e}, unitarity {:.1e}, crossing {:.1e}, operator {:.1e}, derivative {derivative:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    }
}

/// Relative defect of Λ Q = e^{iφ} a Q(u-1) + e^{-iφ} d Q(u+1) + 2(1-cos φ) a d,
/// evaluated pointwise from the definitions.
fn tq_defect(spec: &ChainSpec, lambda: &ComplexPoly, q: &ComplexPoly, u: Complex64) -> f64 {
    let phi = spec.phi();
    let i = c(0.0, 1.0);
    let a: Complex64 = spec.theta().iter().map(|t| u - t + 1.0).product();
    let d: Complex64 = spec.theta().iter().map(|t| u - t).product();
    let terms = [
        (i * phi).exp() * a * q.eval(u - 1.0),
        (-i * phi).exp() * d * q.eval(u + 1.0),
        2.0 * (1.0 - phi.cos()) * a * d,
    ];
    let lhs = lambda.eval(u) * q.eval(u);
    let rhs: Complex64 = terms.iter().sum();
    (lhs - rhs).norm() / (lhs.norm() + terms.iter().map(|t| t.norm()).sum::<f64>())
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut configs = 0;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for n in 2..=4 {
        let mut specs: Vec<ChainSpec> = (0..5)
            .map(|_| {
                let phi = c(rng.random_range(0.3..2.8), rng.random_range(-0.5..0.5));
                ChainSpec::new(random_theta(&mut rng, n), phi).unwrap()
            })
            .collect();
        specs.push(ChainSpec::homogeneous(n, TABLE_PHI).unwrap());
        for spec in &specs {
            configs += 1;
            let recs = diagonalize(spec).unwrap();
            let total: usize = recs.iter().map(|r| r.degeneracy).sum();
            if total != 1 << n {
                failures.push(format!("N={n}: degeneracies sum to {total}"));
            }
            for rec in &recs {
                let Ok(rc) = reconstruct_auto(&rec.lambda, spec) else {
                    failures.push(format!("N={n}: branch without Q"));
                    continue;
                };
                if rc.q.degree() != n || (rc.q.leading() - 1.0).norm() > 1e-12 {
                    failures.push(format!("N={n}: Q not monic of degree N"));
                }
                for _ in 0..2 * n + 1 {
                    let u = c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                    worst = worst.max(tq_defect(spec, &rec.lambda, &rc.q, u));
                }
            }
        }
    }
    Verdict {
        pass: failures.is_empty() && worst < TQ_CHECK_TOL,
        detail: format!("{configs} configurations, worst T-Q defect {worst:.1e}, failures {failures:?}"),
    }
}

/// Oracle-seeded multistart plus classification.
fn solve(spec: &ChainSpec, records: &[SpectrumRecord]) -> (Vec<FoundSolution>, Matching) {
    let seeded_starts: Vec<Vec<Complex64>> = records
        .iter()
        .filter_map(|r| {
            let q = reconstruct_auto(&r.lambda, spec).ok()?.q;
            let ex = roots_from_q(&q, spec).ok()?;
            ex.violations.is_empty().then_some(ex.roots.mu)
        })
        .collect();
    let en = enumerate_solutions(
        spec,
        &EnumerateOptions {
            budget: SOLVER_BUDGET,
            seed: 5,
            seeded_starts,
        },
    );
    let lambdas: Vec<ComplexPoly> = en.solutions.iter().map(|s| s.lambda.clone()).collect();
    let matching = classify(&lambdas, records);
    (en.solutions, matching)
}

fn criterion_5() -> Verdict {
    let mut states = 0;
    let mut certified = 0;
    let mut lines = Vec::new();
    for n in 2..=4 {
        let spec = ChainSpec::homogeneous(n, TABLE_PHI).unwrap();
        let recs = diagonalize(&spec).unwrap();
        let (sols, matching) = solve(&spec, &recs);
        for &(i, k, _) in &matching.pairs {
            states += 1;
            let target = recs[k].energy;
            let reports = survey_conventions(&spec, &sols[i].roots.mu, &sols[i].lambda);
            let ok = reports.iter().find(|rep| match &rep.outcome {
                Ok(cert) => {
                    cert.residual < EIGEN_TOL
                        && cert.rayleigh_energy.is_some_and(|e| (e - target).norm() < RAYLEIGH_TOL)
                }
                Err(_) => false,
            });
            let best = reports
                .iter()
                .filter_map(|rep| rep.outcome.as_ref().ok().map(|cert| cert.residual))
                .fold(f64::INFINITY, f64::min);
            match ok {
                Some(rep) => {
                    certified += 1;
                    lines.push(format!("N={n} E={:.1}: {}", target.re, rep.convention.name()));
                }
                None => lines.push(format!("N={n} E={:.1}: none (best residual {best:.2})", target.re)),
            }
        }
    }
    Verdict {
        pass: states > 0 && certified == states,
        detail: format!("{certified}/{states} states certified [{}]", lines.join("; ")),
    }
}

fn expanded_energies(spec: &ChainSpec, sols: &[FoundSolution], matching: &Matching, recs: &[SpectrumRecord]) -> Vec<f64> {
    let mut out = Vec::new();
    for &(i, k, _) in &matching.pairs {
        let e = energy_from_lambda(&sols[i].lambda, spec.n()).unwrap();
        out.extend(std::iter::repeat_n(e.re, recs[k].degeneracy));
    }
    out.sort_by(f64::total_cmp);
    out
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn criterion_6() -> Verdict {
    let mut worst: f64 = 0.0;
    for n in 2..=4 {
        let dense: Vec<f64> = hamiltonian_spectrum(&ChainSpec::homogeneous(n, c(0.0, 0.0)).unwrap())
            .unwrap()
            .iter()
            .map(|e| e.re)
            .collect();
        let per_phi: Vec<Vec<f64>> = [TABLE_PHI, c(0.9, -0.3)]
            .iter()
            .map(|&phi| {
                let spec = ChainSpec::homogeneous(n, phi).unwrap();
                let recs = diagonalize(&spec).unwrap();
                let (sols, matching) = solve(&spec, &recs);
                expanded_energies(&spec, &sols, &matching, &recs)
            })
            .collect();
        worst = worst
            .max(max_dev(&per_phi[0], &per_phi[1]))
            .max(max_dev(&per_phi[0], &dense))
            .max(max_dev(&per_phi[1], &dense));
    }
    Verdict {
        pass: worst < ENERGY_TOL,
        detail: format!("worst energy deviation {worst:.1e}"),
    }
}

fn criterion_7() -> Verdict {
    let inhomogeneous = Twist::new(c(0.0, 0.0)).inhomogeneous;
    let exact_zero = inhomogeneous == c(0.0, 0.0);
    let mut lines = Vec::new();
    let mut complete = true;
    for n in 2..=3 {
        let spec = ChainSpec::homogeneous(n, c(0.0, 0.0)).unwrap();
        let recs = diagonalize(&spec).unwrap();
        let (_, matching) = solve(&spec, &recs);
        complete &= matching.unmatched_records.is_empty();
        let missing: Vec<String> = matching
            .unmatched_records
            .iter()
            .map(|&k| format!("E={:.1} d={}", recs[k].energy.re, recs[k].degeneracy))
            .collect();
        lines.push(format!("N={n}: {}/{} branches, missing {missing:?}", matching.pairs.len(), recs.len()));
    }
    Verdict {
        pass: exact_zero && complete,
        detail: format!("inhomogeneous term exactly 0: {exact_zero}; {}", lines.join("; ")),
    }
}

fn criterion_8() -> Verdict {
    let runs: [&[&str]; 5] = [
        &["solve", "--reproduce-table", "1", "--seed", "11"],
        &["solve", "--reproduce-table", "2", "--seed", "11"],
        &["reconstruct", "--reproduce-table", "2"],
        &["spectrum", "--reproduce-table", "1"],
        &["verify", "--n", "5", "--theta", "random", "--seed", "11"],
    ];
    let mut differing = Vec::new();
    for args in runs {
        let (c1, first) = run_cli(args);
        let (c2, second) = run_cli(args);
        if c1 != c2 || first != second || first.is_empty() {
            differing.push(args.join(" "));
        }
    }
    Verdict {
        pass: differing.is_empty(),
        detail: format!("{} presets compared, differing: {differing:?}", runs.len()),
    }
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("table 1 reproduction", criterion_1),
        ("table 2 reproduction", criterion_2),
        ("algebraic identity suite", criterion_3),
        ("completeness via Q reconstruction", criterion_4),
        ("eigenstate certification", criterion_5),
        ("phi-independence of the spectrum", criterion_6),
        ("phi = 0 reduction", criterion_7),
        ("determinism", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Verdict {
            pass: false,
            detail: "panicked".into(),
        });
        if !verdict.pass {
            failed += 1;
        }
        println!(
            "criterion {} {:<36} {}  ({:.1}s) {}",
            k + 1,
            name,
            if verdict.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            verdict.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

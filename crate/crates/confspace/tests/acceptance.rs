//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Every tolerance is pinned here; run with
//! `cargo test --test acceptance`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use confspace::local_field::{PAdicBall, PAdicNumber};
use confspace::measure::{gaussian_shift_factor, rho_factor, MeasureModel};
use confspace::numerics::mean_stderr;
use confspace::poisson::{convolve_samples, poisson_pmf, superpose, PoissonLaw};
use confspace::report::{sha256_hex, Report, Verdict};
use confspace::space::{Point, PointSpace, Region};
use confspace::suites::{
    consistency_suite, kakutani_suite, metrics_suite, poisson_identity_suite, representation_suite,
    run_suite, spherical_suite, ExperimentSpec, SPEC_SCHEMA,
};
use confspace::transform::{build_ball_permutation, compose, Transformation};

fn spec(suite: &str, seed: u64) -> ExperimentSpec {
    serde_json::from_value(serde_json::json!({
        "schema": SPEC_SCHEMA,
        "suite": suite,
        "seed": seed,
    }))
    .unwrap()
}

fn conclude(criterion: &str, failures: Vec<String>, elapsed: Duration, limit: Duration) {
    let mut failures = failures;
    if elapsed > limit {
        failures.push(format!("runtime {elapsed:?} exceeds {limit:?}"));
    }
    if failures.is_empty() {
        println!("criterion {criterion}: PASS ({elapsed:?})");
    } else {
        println!("criterion {criterion}: FAIL ({elapsed:?})");
        panic!("criterion {criterion} failed: {}", failures.join("; "));
    }
}

fn failing_checks(checks: &[confspace::report::CheckResult], prefix: &str) -> Vec<String> {
    checks
        .iter()
        .filter(|c| c.verdict == Verdict::Fail && c.check.starts_with(prefix))
        .map(|c| format!("{} (estimate {:?})", c.check, c.estimate))
        .collect()
}

#[test]
fn criterion_01_ultrametric_exactness() {
    let start = Instant::now();
    let mut s = spec("metrics", 420);
    s.samples = Some(100_000);
    let out = metrics_suite(&s, 2).unwrap();
    let mut failures = failing_checks(&out.checks, "ultrametric-exact");
    failures.extend(failing_checks(&out.checks, "metric-axioms"));
    failures.extend(failing_checks(&out.checks, "delta-bounded"));
    conclude(
        "1 (strong triangle exact on 1e5 triples)",
        failures,
        start.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_02_assignment_oracle_equivalence() {
    let start = Instant::now();
    let mut failures = Vec::new();
    // max mode on the p-adic space, sum mode on the real box; the suite
    // draws 1000 random configuration pairs with n <= 7 for each
    let mut s = spec("metrics", 421);
    s.samples = Some(1_000);
    let out = metrics_suite(&s, 1).unwrap();
    failures.extend(failing_checks(&out.checks, "assignment-equals-brute-force"));
    let mut s = spec("metrics", 422);
    s.samples = Some(1_000);
    s.space = Some(PointSpace::RealBox {
        dim: 1,
        extent: 10.0,
    });
    let out = metrics_suite(&s, 1).unwrap();
    failures.extend(failing_checks(&out.checks, "assignment-equals-brute-force"));
    conclude(
        "2 (assignment solver equals brute force, both modes)",
        failures,
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_03_poisson_identity() {
    let start = Instant::now();
    let mut s = spec("poisson_identity", 423);
    s.samples = Some(100_000);
    let out = poisson_identity_suite(&s, 2).unwrap();
    let mut failures = failing_checks(&out.checks, "");
    // the exact worked values must be present, not merely passing
    for name in [
        "exact/count-prob-mass2-count3",
        "exact/count-prob-product-e-2",
    ] {
        if !out.checks.iter().any(|c| c.check == name) {
            failures.push(format!("missing exact-value check {name}"));
        }
    }
    conclude(
        "3 (Poisson identity on 3 disjoint regions, 1e5 samples)",
        failures,
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_04_restriction_consistency() {
    let start = Instant::now();
    let mut s = spec("consistency", 424);
    s.samples = Some(100_000);
    let out = consistency_suite(&s, 1).unwrap();
    let failures = failing_checks(&out.checks, "");
    conclude(
        "4 (restriction consistency, chi-square p > 1e-3)",
        failures,
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_05_superposition() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let window = Region::real_interval(0.0, 2.0);
    let a = PoissonLaw::new(MeasureModel::Lebesgue { dim: 1 }, window.clone(), 1.0).unwrap();
    let b = PoissonLaw::new(
        MeasureModel::Uniform {
            lo: vec![0.0],
            hi: vec![2.0],
        },
        window.clone(),
        1.5,
    )
    .unwrap();
    let combined = superpose(&a, &b).unwrap();
    let total_mean = combined.mean_count().unwrap();
    if (total_mean - 3.5).abs() > 1e-12 {
        failures.push(format!("superposed mean {total_mean} != 3.5"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(425);
    let n = 60_000;
    let mut histogram = [0usize; 16];
    let mut counts = Vec::with_capacity(n);
    for _ in 0..n {
        let union =
            convolve_samples(&a.sample(&mut rng).unwrap(), &b.sample(&mut rng).unwrap()).unwrap();
        counts.push(union.card() as f64);
        if union.card() < histogram.len() {
            histogram[union.card()] += 1;
        }
    }
    let (mean, se) = mean_stderr(&counts);
    if (mean - total_mean).abs() > 3.0 * se {
        failures.push(format!("union count mean {mean} vs {total_mean} +- {se}"));
    }
    for (k, &h) in histogram.iter().enumerate() {
        let p = poisson_pmf(total_mean, k);
        if p * (n as f64) < 25.0 {
            continue;
        }
        let freq = h as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        if (freq - p).abs() > 3.0 * sigma {
            failures.push(format!("count {k}: freq {freq} vs pmf {p} (sigma {sigma})"));
        }
    }
    conclude(
        "5 (superposition count law within 3 sigma)",
        failures,
        start.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_06_measure_preservation_exact() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let q3 = |n: i64| PAdicNumber::from_integer(3, n);
    let q5 = |n: i64| PAdicNumber::from_integer(5, n);
    let b3: Vec<PAdicBall> = (0..3).map(|i| PAdicBall::new(vec![q3(i)], -1)).collect();
    let b5: Vec<PAdicBall> = (0..4).map(|i| PAdicBall::new(vec![q5(i)], -1)).collect();
    let swap = build_ball_permutation(vec![b3[0].clone(), b3[1].clone()], vec![1, 0]).unwrap();
    let cycle3 = build_ball_permutation(b3, vec![1, 2, 0]).unwrap();
    let cycle4 = build_ball_permutation(b5, vec![1, 2, 3, 0]).unwrap();
    let composite = compose(&swap, &cycle3);
    let cases: Vec<(u64, Transformation)> =
        vec![(3, swap), (3, cycle3), (3, composite), (5, cycle4)];
    for (prime, psi) in &cases {
        let haar = MeasureModel::Haar {
            prime: *prime,
            dim: 1,
        };
        let window = Region::Ball {
            ball: PAdicBall::new(vec![PAdicNumber::zero(*prime)], 2),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(426 + *prime);
        for _ in 0..10_000 {
            let x = haar.sample(&window, &mut rng).unwrap();
            let rho = rho_factor(&haar, psi, &x).unwrap();
            if rho != 1.0 {
                failures.push(format!("rho = {rho} != 1 exactly at p = {prime}"));
                break;
            }
        }
    }
    conclude(
        "6 (ball permutations Haar-preserving, exact at 1e4 points each)",
        failures,
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_07_gaussian_shift_factor() {
    let start = Instant::now();
    let mut failures = Vec::new();
    // the worked point is exact
    let f = gaussian_shift_factor(&[1.0], &[0.0], &[1.0]);
    if f.value != (-1.0f64).exp() {
        failures.push(format!("worked point {} != exp(-1)", f.value));
    }
    // five (z, lambda) settings: histogram ratios within 5% on the overlap
    // of the central 95% regions
    let settings = [(0.8, 1.0), (0.5, 0.5), (-0.6, 1.0), (1.0, 2.0), (0.3, 0.25)];
    for (idx, (z, lam)) in settings.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(427 + idx as u64);
        let sd = (lam / 2.0f64).sqrt();
        let lo = (-1.96 * sd).max(z - 1.96 * sd);
        let hi = (1.96 * sd).min(z + 1.96 * sd);
        let bins = 8;
        let n = 300_000;
        let mut base_counts = vec![0usize; bins];
        let mut shift_counts = vec![0usize; bins];
        let base = MeasureModel::GaussianProduct { lambdas: vec![lam] };
        let shifted = MeasureModel::Normal {
            mean: vec![z],
            sigma2: vec![lam / 2.0],
        };
        let window = Region::real_interval(-14.0 * sd - z.abs(), 14.0 * sd + z.abs());
        for _ in 0..n {
            if let Point::Real(v) = base.sample(&window, &mut rng).unwrap() {
                let b = ((v[0] - lo) / (hi - lo) * bins as f64).floor();
                if (0.0..bins as f64).contains(&b) {
                    base_counts[b as usize] += 1;
                }
            }
            if let Point::Real(v) = shifted.sample(&window, &mut rng).unwrap() {
                let b = ((v[0] - lo) / (hi - lo) * bins as f64).floor();
                if (0.0..bins as f64).contains(&b) {
                    shift_counts[b as usize] += 1;
                }
            }
        }
        for b in 0..bins {
            let center = lo + (b as f64 + 0.5) * (hi - lo) / bins as f64;
            let expect = gaussian_shift_factor(&[z], &[center], &[lam]).value;
            let got = shift_counts[b] as f64 / base_counts[b] as f64;
            if (got - expect).abs() / expect >= 0.05 {
                failures.push(format!(
                    "setting {idx} bin {b}: ratio {got} vs {expect} off by >= 5%"
                ));
            }
        }
    }
    conclude(
        "7 (Gaussian shift factor vs histogram ratios, 5 settings)",
        failures,
        start.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_08_kakutani_battery() {
    let start = Instant::now();
    let s = spec("kakutani", 428);
    let out = kakutani_suite(&s).unwrap();
    let mut failures = failing_checks(&out.checks, "");
    let fixtures = out
        .checks
        .iter()
        .filter(|c| c.check.starts_with("kakutani/"))
        .count();
    if fixtures < 21 {
        failures.push(format!(
            "expected 20 fixtures plus the undecided row, saw {fixtures}"
        ));
    }
    conclude(
        "8 (Kakutani dichotomy on 20 canned sequences, zero undecided)",
        failures,
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_09_spherical_function() {
    let start = Instant::now();
    let mut s = spec("spherical", 429);
    s.samples = Some(60_000);
    let out = spherical_suite(&s, 2).unwrap();
    let mut failures = failing_checks(&out.checks, "u/");
    let mode_rows = out
        .checks
        .iter()
        .filter(|c| c.check.starts_with("u/quadrature-vs-mc"))
        .count();
    if mode_rows != 5 {
        failures.push(format!("expected 5 transformations, saw {mode_rows}"));
    }
    conclude(
        "9 (spherical function: mode agreement, scaling law, matrix coefficient)",
        failures,
        start.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_10_scaling_inequivalence_evidence() {
    let start = Instant::now();
    let mut s = spec("spherical", 430);
    s.samples = Some(40_000);
    let out = spherical_suite(&s, 2).unwrap();
    let failures = failing_checks(&out.checks, "scaling/");
    conclude(
        "10 (count-law affinity below 1e-6 by mass 40, singular verdict, witness)",
        failures,
        start.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_11_representation_algebra() {
    let start = Instant::now();
    let mut s = spec("representation", 431);
    s.samples = Some(100_000);
    let out = representation_suite(&s, 2).unwrap();
    let failures = failing_checks(&out.checks, "");
    conclude(
        "11 (homomorphism/cocycle exactness and the sign twist)",
        failures,
        start.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_12_deterministic_reports() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for suite in ["metrics", "consistency", "spherical"] {
        let mut s = spec(suite, 432);
        s.samples = Some(3_000);
        s.shards = Some(2);
        let sha = sha256_hex(serde_json::to_string(&s).unwrap().as_bytes());
        let render = |out: confspace::suites::SuiteOutput| {
            let report = Report::new(suite, s.seed, 2, sha.clone(), out.checks);
            let mut bytes = report.to_json();
            for artifact in &out.artifacts {
                bytes.push_str(&artifact.to_csv());
            }
            bytes
        };
        let first = render(run_suite(&s).unwrap());
        let second = render(run_suite(&s).unwrap());
        if first != second {
            failures.push(format!("{suite}: reports differ between identical runs"));
        }
    }
    conclude(
        "12 (byte-identical reports for identical spec, seed, shards)",
        failures,
        start.elapsed(),
        Duration::from_secs(120),
    );
}

// the rng import is exercised only through seeded generators above
#[allow(dead_code)]
fn _rng_used(r: &mut ChaCha8Rng) -> f64 {
    r.gen()
}

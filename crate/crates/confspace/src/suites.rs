//! Batch verification suites behind the CLI: each suite runs a family of
//! checks against a self-contained experiment spec and emits verdict rows
//! plus CSV trajectories. Seeds are mandatory and all estimators shard
//! deterministically, so identical (spec, seed, shard count) inputs
//! reproduce identical report bytes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{cocycle, FiniteConfig};
use crate::error::{Error, Result};
use crate::local_field::{PAdicBall, PAdicNumber};
use crate::measure::{
    canned_kakutani_fixtures, kakutani_dichotomy, rho_factor, Dichotomy, KakutaniOptions,
    MeasureModel,
};
use crate::numerics::mean_stderr;
use crate::poisson::{
    consistency_check, scaling_singularity_evidence, spherical_function, PoissonLaw, SphericalMode,
};
use crate::rep::{
    apply_u, apply_vq, homomorphism_check, spherical_discriminator, unitarity_check,
    DictionaryFunction, RepOperator, SymmetricGroupRep, WDictionary,
};
use crate::report::{csv_num, CheckResult, CsvArtifact};
use crate::space::{
    delta_metric, make_exhaustion, matching_metric, product_metric, Point, PointSpace, Region,
};
use crate::transform::{
    build_ball_permutation, build_flow_step, build_piecewise_affine, Transformation,
};

pub const SPEC_SCHEMA: &str = "confspace-experiment/1";

/// The six suites.
pub const SUITE_NAMES: [&str; 6] = [
    "metrics",
    "poisson_identity",
    "consistency",
    "kakutani",
    "spherical",
    "representation",
];

/// A self-contained, re-runnable experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Must equal `confspace-experiment/1`.
    pub schema: String,
    pub suite: String,
    /// Mandatory: all acceptance checks are statistical.
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shards: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<PointSpace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_measure: Option<MeasureModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Region>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transformations: Option<Vec<Transformation>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder_levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kakutani_cutoff: Option<usize>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.schema != SPEC_SCHEMA {
            return Err(Error::Parse(format!(
                "unsupported schema {:?}, expected {SPEC_SCHEMA:?}",
                self.schema
            )));
        }
        if !SUITE_NAMES.contains(&self.suite.as_str()) {
            let hint = nearest_suite(&self.suite);
            return Err(Error::Parse(format!(
                "unknown suite {:?}; did you mean {hint:?}?",
                self.suite
            )));
        }
        Ok(())
    }
}

/// Closest suite name by edit distance (prefix-aware, so a truncated name
/// still finds its suite), for diagnostics.
pub fn nearest_suite(name: &str) -> &'static str {
    let score = |cand: &str| {
        let full = edit_distance(name, cand);
        let k = (name.len() + 1).min(cand.len());
        let prefix = edit_distance(name, &cand[..k]) + 1;
        full.min(prefix)
    };
    SUITE_NAMES
        .iter()
        .min_by_key(|cand| score(cand))
        .copied()
        .unwrap()
}

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            cur[j + 1] = (prev[j] + cost).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Output of one suite run.
#[derive(Debug)]
pub struct SuiteOutput {
    pub checks: Vec<CheckResult>,
    pub artifacts: Vec<CsvArtifact>,
}

/// Deterministic per-shard generator: shard `i` of a run with base seed
/// `seed` always sees the same stream.
pub fn shard_rng(seed: u64, shard: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(u64::from(shard) + 1))
}

/// Split `total` work items across shards (first shards get the remainder).
fn shard_counts(total: usize, shards: u32) -> Vec<usize> {
    let shards = shards.max(1) as usize;
    let base = total / shards;
    let extra = total % shards;
    (0..shards).map(|i| base + usize::from(i < extra)).collect()
}

/// Run a sampling job across shards, concatenating per-shard values in
/// shard order.
fn sharded_values(
    seed: u64,
    shards: u32,
    total: usize,
    job: &mut dyn FnMut(&mut ChaCha8Rng, usize, &mut Vec<f64>) -> Result<()>,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(total);
    for (i, count) in shard_counts(total, shards).into_iter().enumerate() {
        let mut rng = shard_rng(seed, i as u32);
        job(&mut rng, count, &mut out)?;
    }
    Ok(out)
}

/// Dispatch a validated spec to its suite.
pub fn run_suite(spec: &ExperimentSpec) -> Result<SuiteOutput> {
    spec.validate()?;
    let shards = spec.shards.unwrap_or(1).max(1);
    match spec.suite.as_str() {
        "metrics" => metrics_suite(spec, shards),
        "poisson_identity" => poisson_identity_suite(spec, shards),
        "consistency" => consistency_suite(spec, shards),
        "kakutani" => kakutani_suite(spec),
        "spherical" => spherical_suite(spec, shards),
        "representation" => representation_suite(spec, shards),
        _ => unreachable!("validated above"),
    }
}

fn default_padic_space() -> PointSpace {
    PointSpace::PadicProduct {
        prime: 3,
        dim: 1,
        log_radius: 8,
    }
}

fn reference_measure(space: &PointSpace) -> MeasureModel {
    match space {
        PointSpace::RealBox { dim, .. } => MeasureModel::Lebesgue { dim: *dim },
        PointSpace::PadicProduct { prime, dim, .. } => MeasureModel::Haar {
            prime: *prime,
            dim: *dim,
        },
    }
}

fn sample_tuple(
    measure: &MeasureModel,
    window: &Region,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Point>> {
    let mut out = Vec::with_capacity(n);
    let mut guard = 0;
    while out.len() < n {
        let x = measure.sample(window, rng)?;
        if out.iter().all(|p: &Point| !p.collides_with(&x)) {
            out.push(x);
        } else {
            guard += 1;
            if guard > 1000 {
                return Err(Error::PointCollision);
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------

/// Brute-force permutation minimum over the pairwise base distances: the
/// independent oracle for the assignment solvers.
fn brute_force_matching(space: &PointSpace, a: &[Point], b: &[Point]) -> Result<f64> {
    fn permutations(n: usize) -> Vec<Vec<usize>> {
        fn heap(a: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
            if k <= 1 {
                out.push(a.clone());
                return;
            }
            for i in 0..k {
                heap(a, k - 1, out);
                if k.is_multiple_of(2) {
                    a.swap(i, k - 1);
                } else {
                    a.swap(0, k - 1);
                }
            }
        }
        let mut idx: Vec<usize> = (0..n).collect();
        let mut out = Vec::new();
        heap(&mut idx, n, &mut out);
        out
    }
    let n = a.len();
    let mut cost = vec![vec![0.0f64; n]; n];
    for (i, pa) in a.iter().enumerate() {
        for (j, pb) in b.iter().enumerate() {
            cost[i][j] = space.base_dist(pa, pb)?;
        }
    }
    let max_mode = space.mode() == crate::space::MetricMode::Max;
    let mut best = f64::INFINITY;
    for perm in permutations(n) {
        let value = if max_mode {
            perm.iter()
                .enumerate()
                .map(|(i, &j)| cost[i][j])
                .fold(0.0, f64::max)
        } else {
            perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum()
        };
        best = best.min(value);
    }
    Ok(best)
}

/// Metric axioms, exact ultrametric properties, and assignment-oracle
/// equivalence on the configured space.
pub fn metrics_suite(spec: &ExperimentSpec, shards: u32) -> Result<SuiteOutput> {
    let space = spec.space.clone().unwrap_or_else(default_padic_space);
    let triples = spec.samples.unwrap_or(100_000);
    let measure = reference_measure(&space);
    let window = space.as_region();
    let padic = space.is_padic();
    let mut checks = Vec::new();

    // base-distance strong triangle (exact in the p-adic case)
    let mut base_violations = 0usize;
    let mut delta_violations = 0usize;
    let mut matching_violations = 0usize;
    let mut axiom_violations = 0usize;
    let mut bound_violations = 0usize;
    for (i, count) in shard_counts(triples, shards).into_iter().enumerate() {
        let mut rng = shard_rng(spec.seed, i as u32);
        for _ in 0..count {
            let n = rng.gen_range(2..=3);
            let x = sample_tuple(&measure, &window, n, &mut rng)?;
            let y = sample_tuple(&measure, &window, n, &mut rng)?;
            let z = sample_tuple(&measure, &window, n, &mut rng)?;
            // base distance triangle on first entries
            let (bx, by, bz) = (&x[0], &y[0], &z[0]);
            let dxy = space.base_dist(bx, by)?;
            let dxz = space.base_dist(bx, bz)?;
            let dzy = space.base_dist(bz, by)?;
            let base_ok = if padic {
                dxy <= dxz.max(dzy)
            } else {
                dxy <= dxz + dzy + 1e-12
            };
            base_violations += usize::from(!base_ok);

            let del = |a: &[Point], b: &[Point]| delta_metric(&space, a, b);
            let mat = |a: &[Point], b: &[Point]| matching_metric(&space, a, b);
            let (dd_xy, dd_xz, dd_zy) = (del(&x, &y)?, del(&x, &z)?, del(&z, &y)?);
            let (dm_xy, dm_xz, dm_zy) = (mat(&x, &y)?, mat(&x, &z)?, mat(&z, &y)?);
            if padic {
                delta_violations += usize::from(!(dd_xy <= dd_xz.max(dd_zy)));
                matching_violations += usize::from(!(dm_xy <= dm_xz.max(dm_zy)));
            } else {
                delta_violations += usize::from(!(dd_xy <= dd_xz + dd_zy + 1e-9));
                matching_violations += usize::from(!(dm_xy <= dm_xz + dm_zy + 1e-9));
            }
            bound_violations += usize::from(!(dd_xy <= 1.0));

            // full axiom battery: nonnegativity, symmetry, identity, and
            // the triangle for the product metric as well
            let pm = |a: &[Point], b: &[Point]| product_metric(&space, a, b, space.mode());
            let (pm_xy, pm_xz, pm_zy) = (pm(&x, &y)?, pm(&x, &z)?, pm(&z, &y)?);
            let tri_ok = if padic {
                pm_xy <= pm_xz.max(pm_zy)
            } else {
                pm_xy <= pm_xz + pm_zy + 1e-9
            };
            let sym = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.max(1.0);
            let sym_ok =
                sym(pm_xy, pm(&y, &x)?) && sym(dd_xy, del(&y, &x)?) && sym(dm_xy, mat(&y, &x)?);
            let id_ok = pm(&x, &x)? == 0.0 && del(&x, &x)? == 0.0 && mat(&x, &x)? == 0.0;
            axiom_violations += usize::from(!(tri_ok && sym_ok && id_ok && pm_xy >= 0.0));
        }
    }
    let kind = if padic {
        "ultrametric-exact"
    } else {
        "triangle"
    };
    checks.push(
        CheckResult::of(format!("{kind}/base-distance"), base_violations == 0)
            .with_estimate(base_violations as f64)
            .with_tolerance(0.0),
    );
    checks.push(
        CheckResult::of(format!("{kind}/delta-metric"), delta_violations == 0)
            .with_estimate(delta_violations as f64)
            .with_tolerance(0.0),
    );
    checks.push(
        CheckResult::of(format!("{kind}/matching-metric"), matching_violations == 0)
            .with_estimate(matching_violations as f64)
            .with_tolerance(0.0),
    );
    checks.push(
        CheckResult::of("metric-axioms/symmetry-identity", axiom_violations == 0)
            .with_estimate(axiom_violations as f64),
    );
    checks.push(
        CheckResult::of("delta-bounded-by-one", bound_violations == 0)
            .with_estimate(bound_violations as f64),
    );

    // assignment solver vs brute force, n <= 7
    let mut rng = shard_rng(spec.seed, 777);
    let pairs = 1000;
    let mut solver_mismatches = 0usize;
    for _ in 0..pairs {
        let n = rng.gen_range(1..=7);
        let a = sample_tuple(&measure, &window, n, &mut rng)?;
        let b = sample_tuple(&measure, &window, n, &mut rng)?;
        let fast = matching_metric(&space, &a, &b)?;
        let brute = brute_force_matching(&space, &a, &b)?;
        let ok = if padic {
            fast == brute
        } else {
            (fast - brute).abs() <= 1e-9 * brute.max(1.0)
        };
        solver_mismatches += usize::from(!ok);
    }
    checks.push(
        CheckResult::of("assignment-equals-brute-force", solver_mismatches == 0)
            .with_estimate(solver_mismatches as f64),
    );

    // soft check: comonotone smallness of delta vs matching within a level
    let mut rng = shard_rng(spec.seed, 778);
    let mut agree = 0usize;
    let probes = 400;
    let mut last: Option<(f64, f64)> = None;
    for _ in 0..probes {
        let a = sample_tuple(&measure, &window, 3, &mut rng)?;
        let b = sample_tuple(&measure, &window, 3, &mut rng)?;
        let d = delta_metric(&space, &a, &b)?;
        let m = matching_metric(&space, &a, &b)?;
        if let Some((pd, pm)) = last {
            if (d - pd) * (m - pm) >= 0.0 {
                agree += 1;
            }
        }
        last = Some((d, m));
    }
    checks.push(
        CheckResult::soft("soft/delta-matching-comonotone")
            .with_estimate(agree as f64 / (probes - 1) as f64),
    );

    // exhaustion sanity: nested clopen levels
    let exh = make_exhaustion(&space, 4);
    let mut nested = true;
    for w in exh.levels().windows(2) {
        if !w[1].contains_region(&w[0])? {
            nested = false;
        }
    }
    checks.push(CheckResult::of("exhaustion/nested-levels", nested));
    if padic {
        checks.push(CheckResult::of("exhaustion/clopen", exh.clopen()));
    }

    Ok(SuiteOutput {
        checks,
        artifacts: Vec::new(),
    })
}

// ---------------------------------------------------------------------
// poisson_identity
// ---------------------------------------------------------------------

/// Sampler frequencies of joint count events against the exact product
/// formula over three disjoint regions.
pub fn poisson_identity_suite(spec: &ExperimentSpec, shards: u32) -> Result<SuiteOutput> {
    let base = spec
        .base_measure
        .clone()
        .unwrap_or(MeasureModel::Lebesgue { dim: 1 });
    let window = spec
        .window
        .clone()
        .unwrap_or_else(|| Region::real_interval(0.0, 4.0));
    let intensity = spec
        .lambdas
        .as_ref()
        .and_then(|l| l.first().copied())
        .unwrap_or(1.0);
    let law = PoissonLaw::new(base, window.clone(), intensity)?;
    let samples = spec.samples.unwrap_or(100_000);
    let mut checks = Vec::new();

    // worked exact values (they live inside the default window)
    let b_mass2 = Region::real_interval(0.0, 2.0);
    if window.contains_region(&b_mass2).unwrap_or(false) && intensity == 1.0 {
        let p = law.count_probability(std::slice::from_ref(&b_mass2), &[3])?;
        let expect = 8.0 * (-2.0f64).exp() / 6.0;
        checks.push(
            CheckResult::of("exact/count-prob-mass2-count3", p == expect)
                .with_estimate(p)
                .with_tolerance(0.0),
        );
        let b1 = Region::real_interval(0.0, 1.0);
        let b2 = Region::real_interval(2.0, 3.0);
        let p = law.count_probability(&[b1, b2], &[0, 1])?;
        let expect = (-2.0f64).exp();
        checks.push(
            CheckResult::of("exact/count-prob-product-e-2", (p - expect).abs() < 1e-14)
                .with_estimate(p)
                .with_tolerance(1e-14),
        );
    }

    // tail-completeness of the count law
    let cutoff = law.count_tail_cutoff()?;
    let total: f64 = (0..cutoff)
        .map(|n| law.count_probability(std::slice::from_ref(&window), &[n]))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .sum();
    checks.push(
        CheckResult::of(
            "count-probabilities-sum-to-one",
            (total - 1.0).abs() < 1e-12,
        )
        .with_estimate(total)
        .with_tolerance(1e-12),
    );

    // three disjoint regions inside the window
    let (lo, hi) = crate::measure::bounding_box(&window)?;
    let span = hi[0] - lo[0];
    let regions = [
        Region::real_interval(lo[0], lo[0] + span * 0.25),
        Region::real_interval(lo[0] + span * 0.375, lo[0] + span * 0.625),
        Region::real_interval(lo[0] + span * 0.75, hi[0]),
    ];
    // sharded joint histogram over counts 0..=3 per region
    let max_c = 4usize;
    let mut joint = vec![0usize; max_c * max_c * max_c];
    let mut card_values = Vec::with_capacity(samples);
    for (i, count) in shard_counts(samples, shards).into_iter().enumerate() {
        let mut rng = shard_rng(spec.seed, i as u32);
        for _ in 0..count {
            let gamma = law.sample(&mut rng)?;
            card_values.push(gamma.card() as f64);
            let cs: Vec<usize> = regions
                .iter()
                .map(|r| gamma.count(r))
                .collect::<Result<_>>()?;
            if cs.iter().all(|&c| c < max_c) {
                joint[(cs[0] * max_c + cs[1]) * max_c + cs[2]] += 1;
            }
        }
    }
    let n = samples as f64;
    let mut worst_z = 0.0f64;
    let mut worst_event = String::new();
    for c0 in 0..max_c {
        for c1 in 0..max_c {
            for c2 in 0..max_c {
                let p = law.count_probability(&regions, &[c0, c1, c2])?;
                let expected = p * n;
                if expected < 25.0 {
                    continue;
                }
                let freq = joint[(c0 * max_c + c1) * max_c + c2] as f64 / n;
                let sigma = (p * (1.0 - p) / n).sqrt();
                let z = (freq - p) / sigma;
                if z.abs() > worst_z {
                    worst_z = z.abs();
                    worst_event = format!("counts=({c0},{c1},{c2})");
                }
            }
        }
    }
    checks.push(
        CheckResult::of("joint-count-events-within-3-sigma", worst_z < 3.0)
            .with_estimate(worst_z)
            .with_tolerance(3.0)
            .with_witness(worst_event),
    );

    // sampler mean and variance
    let (mean, se) = mean_stderr(&card_values);
    let expect_mean = law.mean_count()?;
    checks.push(
        CheckResult::of("sampler-count-mean", (mean - expect_mean).abs() < 3.0 * se)
            .with_estimate(mean)
            .with_stderr(se)
            .with_tolerance(3.0 * se),
    );
    let var = card_values
        .iter()
        .map(|c| (c - mean) * (c - mean))
        .sum::<f64>()
        / (n - 1.0);
    let var_se = ((expect_mean + 2.0 * expect_mean * expect_mean) / n).sqrt();
    checks.push(
        CheckResult::of(
            "sampler-count-variance",
            (var - expect_mean).abs() < 3.0 * var_se,
        )
        .with_estimate(var)
        .with_stderr(var_se)
        .with_tolerance(3.0 * var_se),
    );
    Ok(SuiteOutput {
        checks,
        artifacts: Vec::new(),
    })
}

// ---------------------------------------------------------------------
// consistency
// ---------------------------------------------------------------------

pub fn consistency_suite(spec: &ExperimentSpec, _shards: u32) -> Result<SuiteOutput> {
    let base = spec
        .base_measure
        .clone()
        .unwrap_or(MeasureModel::Lebesgue { dim: 1 });
    let window = spec
        .window
        .clone()
        .unwrap_or_else(|| Region::real_interval(-2.0, 2.0));
    let intensity = spec
        .lambdas
        .as_ref()
        .and_then(|l| l.first().copied())
        .unwrap_or(1.0);
    let law = PoissonLaw::new(base, window.clone(), intensity)?;
    let samples = spec.samples.unwrap_or(20_000);

    // inner window: central half of the bounding box
    let inner = if window.is_padic() {
        let hull = crate::measure::bounding_ball(&window)?;
        Region::Ball {
            ball: PAdicBall::new(hull.center().to_vec(), hull.log_radius() - 1),
        }
    } else {
        let (lo, hi) = crate::measure::bounding_box(&window)?;
        let mid = 0.5 * (lo[0] + hi[0]);
        let half = 0.25 * (hi[0] - lo[0]);
        Region::real_interval(mid - half, mid + half)
    };

    let mut rng = shard_rng(spec.seed, 0);
    let report = consistency_check(&law, &inner, samples, &mut rng)?;
    let checks = vec![
        CheckResult::of("restricted-counts-chi-square", report.count_chi2_p > 1e-3)
            .with_estimate(report.count_chi2_p)
            .with_tolerance(1e-3),
        CheckResult::of("pairwise-distance-two-sample", report.distance_p > 1e-3)
            .with_estimate(report.distance_p)
            .with_tolerance(1e-3),
        CheckResult::of(
            "inner-shell-count-independence",
            report.covariance_z.abs() < 3.0,
        )
        .with_estimate(report.covariance_z)
        .with_tolerance(3.0),
        CheckResult::pass("inner-mean").with_estimate(report.inner_mean_observed),
    ];
    Ok(SuiteOutput {
        checks,
        artifacts: Vec::new(),
    })
}

// ---------------------------------------------------------------------
// kakutani
// ---------------------------------------------------------------------

pub fn kakutani_suite(spec: &ExperimentSpec) -> Result<SuiteOutput> {
    let mut checks = Vec::new();
    let mut trajectory = CsvArtifact::new(
        "kakutani_trajectories",
        &["fixture", "k", "affinity", "partial_product"],
    );
    let mut undecided = 0usize;
    for fixture in canned_kakutani_fixtures() {
        let cutoff = spec
            .kakutani_cutoff
            .map_or(fixture.cutoff, |c| c.min(fixture.cutoff));
        let opts = KakutaniOptions {
            cutoff,
            ..KakutaniOptions::default()
        };
        let report = kakutani_dichotomy(fixture.pair.as_ref(), &opts)?;
        for (k, (a, p)) in report
            .affinities
            .iter()
            .zip(&report.partial_products)
            .enumerate()
        {
            // keep the CSV readable: log thinned trajectories
            if k < 50 || (k + 1) % 50 == 0 {
                trajectory.push_row(&[
                    fixture.name.to_string(),
                    (k + 1).to_string(),
                    csv_num(*a),
                    csv_num(*p),
                ]);
            }
        }
        if report.verdict == Dichotomy::Undecided {
            undecided += 1;
        }
        checks.push(
            CheckResult::of(
                format!("kakutani/{}", fixture.name),
                report.verdict == fixture.expected,
            )
            .with_witness(format!(
                "verdict={} expected={}",
                report.verdict, fixture.expected
            )),
        );
    }
    checks.push(
        CheckResult::of("kakutani/zero-undecided", undecided == 0).with_estimate(undecided as f64),
    );
    Ok(SuiteOutput {
        checks,
        artifacts: vec![trajectory],
    })
}

// ---------------------------------------------------------------------
// spherical
// ---------------------------------------------------------------------

fn default_witnesses() -> Vec<Transformation> {
    vec![
        Transformation::identity(),
        build_piecewise_affine(0, vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 3.0]).expect("static"),
        build_piecewise_affine(0, vec![-3.0, -1.0, 0.0], vec![-3.0, -1.8, 0.0]).expect("static"),
        build_flow_step(0, -1.0, 0.2, 2.0, 0.7).expect("static"),
        build_piecewise_affine(0, vec![0.0, 0.5, 1.5, 3.0], vec![0.0, 1.0, 2.0, 3.0])
            .expect("static"),
    ]
}

/// Spherical-function checks and the intensity-scaling singularity
/// pipeline.
pub fn spherical_suite(spec: &ExperimentSpec, shards: u32) -> Result<SuiteOutput> {
    let base = spec
        .base_measure
        .clone()
        .unwrap_or(MeasureModel::Lebesgue { dim: 1 });
    let window = spec
        .window
        .clone()
        .unwrap_or_else(|| Region::real_interval(-4.0, 4.0));
    let lambdas = spec.lambdas.clone().unwrap_or_else(|| vec![1.0, 2.0]);
    if lambdas.len() < 2 {
        return Err(Error::InvalidParameter(
            "spherical suite needs two lambdas".into(),
        ));
    }
    let law = PoissonLaw::new(base.clone(), window.clone(), 1.0)?;
    let witnesses = spec
        .transformations
        .clone()
        .unwrap_or_else(default_witnesses);
    let samples = spec.samples.unwrap_or(60_000);
    let mut checks = Vec::new();
    let mut table = CsvArtifact::new(
        "spherical_values",
        &["psi", "u_quadrature", "u_monte_carlo", "stderr"],
    );

    for (i, psi) in witnesses.iter().enumerate() {
        let mut rng = shard_rng(spec.seed, 1000 + i as u32);
        let quad = spherical_function(&law, psi, SphericalMode::Quadrature, 0, &mut rng)?;
        // sharded Monte-Carlo estimate
        let values = sharded_values(
            spec.seed ^ (i as u64 + 1),
            shards,
            samples,
            &mut |rng, count, out| {
                for _ in 0..count {
                    let gamma = law.sample(rng)?;
                    let mut prod = 1.0;
                    for x in gamma.points() {
                        prod *= rho_factor(law.base(), psi, x)?.sqrt();
                    }
                    out.push(prod);
                }
                Ok(())
            },
        )?;
        let (mc, se) = mean_stderr(&values);
        let tol = (3.0 * se).max(1e-3);
        table.push_row(&[
            format!("psi{i}"),
            csv_num(quad.value),
            csv_num(mc),
            csv_num(se),
        ]);
        checks.push(
            CheckResult::of(
                format!("u/quadrature-vs-mc/psi{i}"),
                (quad.value - mc).abs() < tol,
            )
            .with_estimate((quad.value - mc).abs())
            .with_stderr(se)
            .with_tolerance(tol),
        );

        // scaling law by quadrature
        for lambda in [0.5, 2.0] {
            let scaled = spherical_function(
                &law.with_intensity(lambda),
                psi,
                SphericalMode::Quadrature,
                0,
                &mut rng,
            )?;
            let expect = quad.value.powf(lambda);
            checks.push(
                CheckResult::of(
                    format!("u/scaling-law/psi{i}/lambda-{lambda}"),
                    (scaled.value - expect).abs() < 1e-6,
                )
                .with_estimate((scaled.value - expect).abs())
                .with_tolerance(1e-6),
            );
        }

        // <U(psi) f0, f0> through the representation surface
        let op = RepOperator {
            law: law.clone(),
            psi: psi.clone(),
            q: None,
        };
        let f0 = DictionaryFunction::f0();
        let values = sharded_values(
            spec.seed ^ (0x5eed ^ (i as u64 + 1)),
            shards,
            samples / 2,
            &mut |rng, count, out| {
                for _ in 0..count {
                    let gamma = law.sample(rng)?;
                    out.push(apply_u(&op, &f0, &gamma)? * f0.eval(&gamma)?);
                }
                Ok(())
            },
        )?;
        let (coeff, cse) = mean_stderr(&values);
        let tol = (3.0 * cse).max(1e-3);
        checks.push(
            CheckResult::of(
                format!("u/matrix-coefficient-f0/psi{i}"),
                (coeff - quad.value).abs() < tol,
            )
            .with_estimate(coeff)
            .with_stderr(cse)
            .with_tolerance(tol),
        );
    }

    // intensity-scaling evidence: count-law affinities along a ladder
    let levels = spec.ladder_levels.unwrap_or(40);
    let ladder: Vec<Region> = match &base {
        MeasureModel::Haar { prime, dim } => (0..levels)
            .map(|n| Region::Ball {
                ball: PAdicBall::new(vec![PAdicNumber::zero(*prime); *dim], n as i64),
            })
            .collect(),
        _ => (1..=levels)
            .map(|n| Region::real_interval(0.0, n as f64))
            .collect(),
    };
    let mut rng = shard_rng(spec.seed, 9000);
    let evidence = scaling_singularity_evidence(
        &base,
        lambdas[0],
        lambdas[1],
        &ladder,
        spec.samples.unwrap_or(60_000).min(4_000),
        &mut rng,
    )?;
    let mut traj = CsvArtifact::new(
        "singularity_trajectory",
        &[
            "level",
            "mass",
            "affinity_closed",
            "affinity_measured",
            "llr_mean",
            "llr_var",
            "running_product",
        ],
    );
    let mut crossing_mass = f64::INFINITY;
    for level in &evidence.levels {
        if level.running_product < 1e-6 && level.mass < crossing_mass {
            crossing_mass = level.mass;
        }
        traj.push_row(&[
            level.level.to_string(),
            csv_num(level.mass),
            csv_num(level.affinity_closed),
            csv_num(level.affinity_measured),
            csv_num(level.llr_mean),
            csv_num(level.llr_var),
            csv_num(level.running_product),
        ]);
    }
    checks.push(
        CheckResult::of(
            "scaling/verdict-singular",
            evidence.verdict == Dichotomy::Singular,
        )
        .with_witness(format!("verdict={}", evidence.verdict)),
    );
    checks.push(
        CheckResult::of(
            "scaling/affinity-trend-below-1e-6-by-mass-40",
            crossing_mass <= 40.0,
        )
        .with_estimate(crossing_mass)
        .with_tolerance(40.0),
    );

    // spherical witness separation between the two scaled laws
    let mut rng = shard_rng(spec.seed, 9001);
    let disc = spherical_discriminator(
        &law,
        lambdas[0],
        lambdas[1],
        &witnesses,
        samples / 2,
        &mut rng,
    )?;
    match disc.witness {
        Some(w) => {
            checks.push(
                CheckResult::of(
                    "scaling/witness-separates",
                    disc.separated_beyond_error_bars,
                )
                .with_estimate(disc.entries[w].separation)
                .with_witness(format!("psi{w}")),
            );
        }
        None => {
            checks.push(
                CheckResult::of("scaling/witness-separates", false)
                    .with_witness("no-witness: all candidates are measure-preserving"),
            );
        }
    }

    Ok(SuiteOutput {
        checks,
        artifacts: vec![table, traj],
    })
}

// ---------------------------------------------------------------------
// representation
// ---------------------------------------------------------------------

pub fn representation_suite(spec: &ExperimentSpec, shards: u32) -> Result<SuiteOutput> {
    let mut checks = Vec::new();

    // real side: Lebesgue base with piecewise-affine maps
    let window = spec
        .window
        .clone()
        .unwrap_or_else(|| Region::real_interval(-4.0, 4.0));
    let law = PoissonLaw::new(MeasureModel::Lebesgue { dim: 1 }, window.clone(), 1.0)?;
    let psi = build_piecewise_affine(0, vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 3.0])?;
    let phi = build_piecewise_affine(0, vec![-2.0, -1.0, 1.0], vec![-2.0, 0.0, 1.0])?;
    let dictionary = vec![
        DictionaryFunction::f0(),
        DictionaryFunction::CountIndicator {
            region: Region::real_interval(0.0, 2.0),
            count: 1,
        },
        DictionaryFunction::Count {
            region: Region::real_interval(-1.0, 2.0),
        },
        DictionaryFunction::ExpLinear {
            region: Region::real_interval(0.0, 2.0),
            inside: 0.7,
            outside: 1.0,
        },
    ];
    let mut rng = shard_rng(spec.seed, 0);
    let hom = homomorphism_check(&law, &psi, &phi, &dictionary, 2_000, &mut rng)?;
    checks.push(
        CheckResult::of("real/homomorphism-within-1e-9", hom.max_abs_dev < 1e-9)
            .with_estimate(hom.max_abs_dev)
            .with_tolerance(1e-9),
    );
    checks.push(CheckResult::of(
        "real/cocycle-composition-exact",
        hom.cocycle_exact,
    ));

    let samples = spec.samples.unwrap_or(100_000);
    let mut pooled_z = 0.0f64;
    for (i, count) in shard_counts(samples, shards).into_iter().enumerate() {
        let mut rng = shard_rng(spec.seed, 100 + i as u32);
        let op = RepOperator {
            law: law.clone(),
            psi: psi.clone(),
            q: None,
        };
        let report = unitarity_check(&op, &dictionary, count.max(1), &mut rng)?;
        pooled_z = pooled_z.max(report.max_abs_z / (shards as f64).sqrt());
    }
    checks.push(
        CheckResult::of("real/unitarity-within-3-sigma", pooled_z < 3.5)
            .with_estimate(pooled_z)
            .with_tolerance(3.5),
    );

    // p-adic side: Haar base with ball permutations
    let haar = MeasureModel::Haar { prime: 3, dim: 1 };
    let pwindow = Region::Ball {
        ball: PAdicBall::new(vec![PAdicNumber::zero(3)], 1),
    };
    let plaw = PoissonLaw::new(haar, pwindow.clone(), 1.0)?;
    let balls: Vec<PAdicBall> = (0..3)
        .map(|i| PAdicBall::new(vec![PAdicNumber::from_integer(3, i)], -1))
        .collect();
    let swap = build_ball_permutation(vec![balls[0].clone(), balls[1].clone()], vec![1, 0])?;
    let cycle = build_ball_permutation(balls.clone(), vec![1, 2, 0])?;
    let pdict = vec![
        DictionaryFunction::f0(),
        DictionaryFunction::CountIndicator {
            region: Region::Ball {
                ball: balls[2].clone(),
            },
            count: 1,
        },
    ];
    let mut rng = shard_rng(spec.seed, 200);
    let hom = homomorphism_check(&plaw, &swap, &cycle, &pdict, 1_000, &mut rng)?;
    checks.push(
        CheckResult::of("padic/homomorphism-exact", hom.max_abs_dev == 0.0)
            .with_estimate(hom.max_abs_dev)
            .with_tolerance(0.0),
    );
    checks.push(CheckResult::of(
        "padic/cocycle-composition-exact",
        hom.cocycle_exact,
    ));

    // measure preservation: rho = 1 exactly on sampled points
    let mut rng = shard_rng(spec.seed, 201);
    let mut rho_violations = 0usize;
    for _ in 0..10_000 {
        let x = plaw.base().sample(&pwindow, &mut rng)?;
        for t in [&swap, &cycle] {
            if rho_factor(plaw.base(), t, &x)? != 1.0 {
                rho_violations += 1;
            }
        }
    }
    checks.push(
        CheckResult::of("padic/rho-exactly-one", rho_violations == 0)
            .with_estimate(rho_violations as f64)
            .with_tolerance(0.0),
    );

    // sign twist: exchanging the two occupied balls contributes exactly -1
    let gamma = FiniteConfig::new(vec![
        Point::padic1(PAdicNumber::from_integer(3, 0)),
        Point::padic1(PAdicNumber::from_integer(3, 1)),
    ])?;
    let op = RepOperator {
        law: plaw.clone(),
        psi: swap.clone(),
        q: Some(SymmetricGroupRep::Sign),
    };
    let f = WDictionary {
        scalar: DictionaryFunction::f0(),
        vector: vec![1.0],
    };
    let twisted = apply_vq(&op, &f, &gamma)?;
    checks.push(
        CheckResult::of("padic/sign-twist-exactly-minus-one", twisted == vec![-1.0])
            .with_estimate(twisted[0]),
    );
    let sigma = cocycle(&swap, &gamma)?;
    checks.push(CheckResult::of(
        "padic/swap-cocycle-is-transposition",
        sigma.sign() == -1,
    ));

    // all-isometry discriminator: no witness possible
    let mut rng = shard_rng(spec.seed, 202);
    let disc = spherical_discriminator(
        &plaw,
        1.0,
        2.0,
        &[Transformation::identity(), swap, cycle],
        2_000,
        &mut rng,
    )?;
    checks.push(
        CheckResult::of("padic/no-witness-for-isometries", disc.witness.is_none())
            .with_witness("all candidates measure-preserving"),
    );

    Ok(SuiteOutput {
        checks,
        artifacts: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_with(suite: &str, seed: u64) -> ExperimentSpec {
        ExperimentSpec {
            schema: SPEC_SCHEMA.to_string(),
            suite: suite.to_string(),
            seed,
            samples: None,
            shards: None,
            space: None,
            base_measure: None,
            window: None,
            lambdas: None,
            transformations: None,
            ladder_levels: None,
            kakutani_cutoff: None,
        }
    }

    #[test]
    fn suite_name_hints() {
        assert_eq!(nearest_suite("metric"), "metrics");
        assert_eq!(nearest_suite("speric"), "spherical");
        let mut spec = spec_with("nonsense", 1);
        spec.suite = "poison".into();
        let err = spec.validate().unwrap_err();
        assert!(err.to_string().contains("poisson_identity"), "{err}");
    }

    #[test]
    fn shard_splitting() {
        assert_eq!(shard_counts(10, 3), vec![4, 3, 3]);
        assert_eq!(shard_counts(2, 4), vec![1, 1, 0, 0]);
        // shard rngs differ per shard but are reproducible
        let a: u64 = shard_rng(7, 0).gen();
        let b: u64 = shard_rng(7, 1).gen();
        let a2: u64 = shard_rng(7, 0).gen();
        assert_ne!(a, b);
        assert_eq!(a, a2);
    }

    #[test]
    fn small_metrics_suite_runs() {
        let mut spec = spec_with("metrics", 11);
        spec.samples = Some(500);
        let out = run_suite(&spec).unwrap();
        assert!(out
            .checks
            .iter()
            .all(|c| c.verdict != crate::report::Verdict::Fail));
    }

    #[test]
    fn small_consistency_suite_runs() {
        let mut spec = spec_with("consistency", 12);
        spec.samples = Some(4000);
        let out = run_suite(&spec).unwrap();
        assert!(out
            .checks
            .iter()
            .all(|c| c.verdict != crate::report::Verdict::Fail));
    }
}

//! The Poisson measure on configurations over a finite-mass window: exact
//! count probabilities, samplers, restriction consistency, superposition,
//! the product quasi-invariance factor, the spherical function, and
//! scaling-singularity evidence for intensity-scaled pairs.

use rand::Rng;
use rand_distr::Distribution;
use serde::Serialize;

use crate::config::FiniteConfig;
use crate::error::{Error, Result};
use crate::measure::{rho_factor, Dichotomy, MeasureModel, QUAD_TOL};
use crate::numerics::{adaptive_simpson, chi_square_pvalue, mean_stderr};
use crate::space::{Point, Region};
use crate::transform::Transformation;

/// The Poisson law `P_{K, lambda m}`: counts follow `Poisson(lambda m(K))`
/// and points are i.i.d. from the normalized restriction of the base
/// measure to the window.
#[derive(Debug, Clone, Serialize)]
pub struct PoissonLaw {
    base: MeasureModel,
    window: Region,
    intensity: f64,
}

/// Poisson pmf with small-n factorials exact in f64 and a log-space path
/// for larger counts.
pub fn poisson_pmf(mean: f64, n: usize) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if n <= 20 {
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        mean.powi(n as i32) * (-mean).exp() / fact
    } else {
        use statrs::function::gamma::ln_gamma;
        (n as f64 * mean.ln() - mean - ln_gamma(n as f64 + 1.0)).exp()
    }
}

impl PoissonLaw {
    pub fn new(base: MeasureModel, window: Region, intensity: f64) -> Result<Self> {
        if !(intensity >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "intensity {intensity} must be >= 0"
            )));
        }
        // the window must have finite mass under the base
        let _ = base.mass(&window)?;
        Ok(PoissonLaw {
            base,
            window,
            intensity,
        })
    }

    pub fn base(&self) -> &MeasureModel {
        &self.base
    }

    pub fn window(&self) -> &Region {
        &self.window
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    /// The scaled law `P_{lambda' m}` over the same window.
    pub fn with_intensity(&self, intensity: f64) -> PoissonLaw {
        PoissonLaw {
            base: self.base.clone(),
            window: self.window.clone(),
            intensity,
        }
    }

    /// Expected number of points: `lambda * m(K)`.
    pub fn mean_count(&self) -> Result<f64> {
        Ok(self.intensity * self.base.mass(&self.window)?)
    }

    /// Draw a configuration: Poisson count, then i.i.d. points (colliding
    /// points are redrawn; collisions are null events).
    pub fn sample(&self, rng: &mut impl Rng) -> Result<FiniteConfig> {
        let mean = self.mean_count()?;
        let n = if mean == 0.0 {
            0
        } else {
            rand_distr::Poisson::new(mean)
                .map_err(|_| Error::InvalidParameter(format!("bad Poisson mean {mean}")))?
                .sample(rng) as usize
        };
        self.sample_fixed(n, rng)
    }

    /// Draw exactly `n` i.i.d. points from the window-normalized base: the
    /// fixed-count law on `B^n_K`.
    pub fn sample_fixed(&self, n: usize, rng: &mut impl Rng) -> Result<FiniteConfig> {
        let mut points: Vec<Point> = Vec::with_capacity(n);
        for _ in 0..n {
            let mut attempts = 0;
            loop {
                let x = self.base.sample(&self.window, rng)?;
                if points.iter().all(|p| !p.collides_with(&x)) {
                    points.push(x);
                    break;
                }
                attempts += 1;
                if attempts > 100 {
                    return Err(Error::PointCollision);
                }
            }
        }
        FiniteConfig::new(points)
    }

    /// Exact joint count probability over disjoint regions inside the
    /// window: `prod_i (lambda m(B_i))^{n_i} exp(-lambda m(B_i)) / n_i!`.
    pub fn count_probability(&self, regions: &[Region], counts: &[usize]) -> Result<f64> {
        if regions.len() != counts.len() {
            return Err(Error::LengthMismatch(regions.len(), counts.len()));
        }
        for (i, a) in regions.iter().enumerate() {
            if !self.window.contains_region(a)? {
                return Err(Error::OutsideWindow);
            }
            for b in &regions[..i] {
                if !a.is_disjoint_from(b)? {
                    return Err(Error::RegionOverlap);
                }
            }
        }
        let mut prob = 1.0;
        for (region, &n) in regions.iter().zip(counts) {
            let mass = self.intensity * self.base.mass(region)?;
            prob *= poisson_pmf(mass, n);
        }
        Ok(prob)
    }

    /// Smallest `N` with `P(count > N) < 1e-12`.
    pub fn count_tail_cutoff(&self) -> Result<usize> {
        let mean = self.mean_count()?;
        let mut cum = 0.0;
        let mut n = 0;
        while cum < 1.0 - 1e-12 && n < 100_000 {
            cum += poisson_pmf(mean, n);
            n += 1;
        }
        Ok(n)
    }
}

/// The superposition of two Poisson laws on the same window: the Poisson
/// law of the summed intensity measure.
pub fn superpose(a: &PoissonLaw, b: &PoissonLaw) -> Result<PoissonLaw> {
    if a.window != b.window {
        return Err(Error::WindowMismatch);
    }
    let base = MeasureModel::Sum {
        parts: vec![
            MeasureModel::scaled(a.intensity, a.base.clone()),
            MeasureModel::scaled(b.intensity, b.base.clone()),
        ],
    };
    PoissonLaw::new(base, a.window.clone(), 1.0)
}

/// Sample-level convolution: the union of two independent configurations.
pub fn convolve_samples(a: &FiniteConfig, b: &FiniteConfig) -> Result<FiniteConfig> {
    a.union(b)
}

/// Report of the restriction-consistency check between nested windows.
#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    /// Chi-square p-value of restricted outer counts against the exact
    /// inner count law.
    pub count_chi2_p: f64,
    /// Two-sample p-value comparing mean nearest-neighbour distances of
    /// restricted-outer vs direct-inner configurations.
    pub distance_p: f64,
    /// z-score of the covariance between inner and shell counts (zero for
    /// a Poisson law).
    pub covariance_z: f64,
    pub inner_mean_expected: f64,
    pub inner_mean_observed: f64,
}

fn nearest_neighbour_mean(config: &FiniteConfig) -> Option<f64> {
    let pts = config.points();
    if pts.len() < 2 {
        return None;
    }
    let mut acc = 0.0;
    for (i, a) in pts.iter().enumerate() {
        let mut best = f64::INFINITY;
        for (j, b) in pts.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = match (a, b) {
                (Point::Real(x), Point::Real(y)) => x
                    .iter()
                    .zip(y)
                    .map(|(u, v)| (u - v) * (u - v))
                    .sum::<f64>()
                    .sqrt(),
                (Point::Padic(x), Point::Padic(y)) => {
                    match crate::space::ultra_dist_exp(x, y).ok()? {
                        None => 0.0,
                        Some(e) => (x[0].prime() as f64).powi(e as i32),
                    }
                }
                _ => return None,
            };
            best = best.min(d);
        }
        acc += best;
    }
    Some(acc / pts.len() as f64)
}

fn normal_two_sided_p(z: f64) -> f64 {
    use statrs::function::erf::erfc;
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Compare the restriction of the law to an inner window against the
/// directly constructed inner law: count chi-square, nearest-neighbour
/// distance statistics, and independence of inner and shell counts.
pub fn consistency_check(
    law: &PoissonLaw,
    inner: &Region,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<ConsistencyReport> {
    if samples == 0 {
        return Err(Error::ZeroSamples);
    }
    if !law.window.contains_region(inner)? {
        return Err(Error::OutsideWindow);
    }
    let inner_law = PoissonLaw::new(law.base.clone(), inner.clone(), law.intensity)?;
    let inner_mean = inner_law.mean_count()?;

    let cutoff = 12usize;
    let mut restricted_counts = vec![0usize; cutoff + 2];
    let mut nn_restricted = Vec::new();
    let mut inner_counts_raw = Vec::with_capacity(samples);
    let mut shell_counts_raw = Vec::with_capacity(samples);
    for _ in 0..samples {
        let gamma = law.sample(rng)?;
        let restricted = gamma.restrict(inner)?;
        let k = restricted.card();
        restricted_counts[k.min(cutoff + 1)] += 1;
        if let Some(d) = nearest_neighbour_mean(&restricted) {
            nn_restricted.push(d);
        }
        inner_counts_raw.push(k as f64);
        shell_counts_raw.push((gamma.card() - k) as f64);
    }
    let mut nn_direct = Vec::new();
    for _ in 0..samples {
        let gamma = inner_law.sample(rng)?;
        if let Some(d) = nearest_neighbour_mean(&gamma) {
            nn_direct.push(d);
        }
    }

    // chi-square of restricted counts 0..=12 (tail pooled) against the
    // exact inner Poisson pmf, pooling sparse cells upward
    let mut expected: Vec<f64> = (0..=cutoff).map(|n| poisson_pmf(inner_mean, n)).collect();
    expected.push((1.0 - expected.iter().sum::<f64>()).max(0.0));
    let mut stat = 0.0;
    let mut df = 0.0f64;
    let mut pool_obs = 0.0;
    let mut pool_exp = 0.0;
    for (obs, exp) in restricted_counts.iter().zip(&expected) {
        pool_obs += *obs as f64;
        pool_exp += exp * samples as f64;
        if pool_exp >= 5.0 {
            stat += (pool_obs - pool_exp) * (pool_obs - pool_exp) / pool_exp;
            df += 1.0;
            pool_obs = 0.0;
            pool_exp = 0.0;
        }
    }
    if pool_exp > 0.0 {
        stat += (pool_obs - pool_exp) * (pool_obs - pool_exp) / pool_exp;
        df += 1.0;
    }
    let count_chi2_p = chi_square_pvalue(stat, (df - 1.0).max(1.0));

    // nearest-neighbour mean comparison
    let (m1, s1) = mean_stderr(&nn_restricted);
    let (m2, s2) = mean_stderr(&nn_direct);
    let denom = (s1 * s1 + s2 * s2).sqrt();
    let distance_p = if denom > 0.0 {
        normal_two_sided_p((m1 - m2) / denom)
    } else {
        1.0
    };

    // covariance of inner and shell counts
    let (mi, _) = mean_stderr(&inner_counts_raw);
    let (ms, _) = mean_stderr(&shell_counts_raw);
    let n = samples as f64;
    let cov: f64 = inner_counts_raw
        .iter()
        .zip(&shell_counts_raw)
        .map(|(a, b)| (a - mi) * (b - ms))
        .sum::<f64>()
        / (n - 1.0);
    // var of the sample covariance of independent Poissons ~ var_i var_s / n
    let var_i: f64 = inner_counts_raw
        .iter()
        .map(|a| (a - mi) * (a - mi))
        .sum::<f64>()
        / (n - 1.0);
    let var_s: f64 = shell_counts_raw
        .iter()
        .map(|b| (b - ms) * (b - ms))
        .sum::<f64>()
        / (n - 1.0);
    let cov_se = (var_i * var_s / n).sqrt();
    let covariance_z = if cov_se > 0.0 { cov / cov_se } else { 0.0 };

    Ok(ConsistencyReport {
        count_chi2_p,
        distance_p,
        covariance_z,
        inner_mean_expected: inner_mean,
        inner_mean_observed: mi,
    })
}

/// The product quasi-invariance factor of the Poisson law:
/// `prod_{x in gamma} rho_m(psi, x)`, with the empty product equal to 1.
/// For `psi` supported inside the window this is the Radon-Nikodym
/// derivative of the transformed law.
pub fn rho_poisson(law: &PoissonLaw, psi: &Transformation, gamma: &FiniteConfig) -> Result<f64> {
    if !psi.supported_within(&law.window)? {
        return Err(Error::SupportExceedsWindow);
    }
    let mut prod = 1.0;
    for x in gamma.points() {
        prod *= rho_factor(&law.base, psi, x)?;
    }
    Ok(prod)
}

/// How a spherical-function value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SphericalMode {
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, Serialize)]
pub struct SphericalEstimate {
    pub value: f64,
    pub stderr: f64,
    pub mode: SphericalMode,
}

/// The spherical function `u_m(psi)`.
///
/// Quadrature mode evaluates `exp(lambda int (rho^{1/2} - 1) dm)` over the
/// support of `psi`; Monte-Carlo mode estimates
/// `E[prod_{x in gamma} rho^{1/2}(psi, x)]` over sampled configurations.
pub fn spherical_function(
    law: &PoissonLaw,
    psi: &Transformation,
    mode: SphericalMode,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<SphericalEstimate> {
    if !psi.supported_within(&law.window)? {
        return Err(Error::SupportExceedsWindow);
    }
    match mode {
        SphericalMode::Quadrature => {
            if psi.is_isometry() {
                // rho = 1 identically: the integrand vanishes
                return Ok(SphericalEstimate {
                    value: 1.0,
                    stderr: 0.0,
                    mode,
                });
            }
            let (coord, lo, hi) = psi.real_support_interval().ok_or_else(|| {
                Error::InvalidParameter("quadrature needs a real 1-d support".into())
            })?;
            if coord != 0 {
                return Err(Error::InvalidParameter(
                    "quadrature is implemented for coordinate-0 actions on 1-d bases".into(),
                ));
            }
            let f = |x: f64| {
                let p = Point::real1(x);
                let dens = law.base.density(&p).unwrap_or(0.0);
                if dens == 0.0 {
                    return 0.0;
                }
                let rho = rho_factor(&law.base, psi, &p).unwrap_or(1.0);
                (rho.sqrt() - 1.0) * dens
            };
            let integral = adaptive_simpson(&f, lo, hi, QUAD_TOL);
            Ok(SphericalEstimate {
                value: (law.intensity * integral).exp(),
                stderr: 0.0,
                mode,
            })
        }
        SphericalMode::MonteCarlo => {
            if samples == 0 {
                return Err(Error::ZeroSamples);
            }
            let mut values = Vec::with_capacity(samples);
            for _ in 0..samples {
                let gamma = law.sample(rng)?;
                let mut prod = 1.0;
                for x in gamma.points() {
                    prod *= rho_factor(&law.base, psi, x)?.sqrt();
                }
                values.push(prod);
            }
            let (mean, se) = mean_stderr(&values);
            Ok(SphericalEstimate {
                value: mean,
                stderr: se,
                mode,
            })
        }
    }
}

/// Evidence for the mutual singularity of two intensity-scaled Poisson
/// measures along a window ladder.
#[derive(Debug, Clone, Serialize)]
pub struct LevelEvidence {
    pub level: usize,
    pub mass: f64,
    /// Closed-form count-law affinity `exp(-m(K)(sqrt l1 - sqrt l2)^2 / 2)`.
    pub affinity_closed: f64,
    /// Affinity of the two empirical count histograms.
    pub affinity_measured: f64,
    /// Mean log likelihood ratio under the first law (grows linearly).
    pub llr_mean: f64,
    /// Variance of the log likelihood ratio (grows linearly).
    pub llr_var: f64,
    /// Running product of measured affinities across levels: the
    /// Kakutani-style trajectory driving the verdict.
    pub running_product: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularityEvidence {
    pub lambda1: f64,
    pub lambda2: f64,
    pub levels: Vec<LevelEvidence>,
    pub verdict: Dichotomy,
}

/// Compare `P_{l1 m}` and `P_{l2 m}` on each ladder window: per-level
/// count-law Hellinger affinities (closed form and measured), the sampled
/// log-likelihood-ratio trend, and the running affinity product. The
/// verdict is SINGULAR when the trajectory decays below 1e-6 and keeps
/// falling, mirroring the Kakutani stopping rule.
pub fn scaling_singularity_evidence(
    base: &MeasureModel,
    lambda1: f64,
    lambda2: f64,
    ladder: &[Region],
    samples: usize,
    rng: &mut impl Rng,
) -> Result<SingularityEvidence> {
    if samples == 0 {
        return Err(Error::ZeroSamples);
    }
    let mut levels = Vec::with_capacity(ladder.len());
    let mut running = 1.0;
    let equal = lambda1 == lambda2;
    for (i, window) in ladder.iter().enumerate() {
        let mass = base.mass(window)?;
        let m1 = lambda1 * mass;
        let m2 = lambda2 * mass;
        let affinity_closed = (-(mass / 2.0) * (lambda1.sqrt() - lambda2.sqrt()).powi(2)).exp();

        // empirical count histograms under both laws
        let law1 = PoissonLaw::new(base.clone(), window.clone(), lambda1)?;
        let law2 = PoissonLaw::new(base.clone(), window.clone(), lambda2)?;
        let max_bin = (law2.count_tail_cutoff()?.max(law1.count_tail_cutoff()?)) + 2;
        let mut h1 = vec![0.0f64; max_bin];
        let mut h2 = vec![0.0f64; max_bin];
        let mut llrs = Vec::with_capacity(samples);
        for _ in 0..samples {
            let n1 = law1.sample(rng)?.card();
            let n2 = law2.sample(rng)?.card();
            h1[n1.min(max_bin - 1)] += 1.0;
            h2[n2.min(max_bin - 1)] += 1.0;
            // log likelihood ratio of the two count laws at the sample of
            // the first: n ln(m1/m2) - (m1 - m2)
            llrs.push(n1 as f64 * (m1 / m2).ln() - (m1 - m2));
        }
        let s = samples as f64;
        let affinity_measured: f64 = h1.iter().zip(&h2).map(|(a, b)| (a * b).sqrt() / s).sum();
        let (llr_mean, _) = mean_stderr(&llrs);
        let llr_var = llrs
            .iter()
            .map(|x| (x - llr_mean) * (x - llr_mean))
            .sum::<f64>()
            / (s - 1.0).max(1.0);
        running *= affinity_measured;
        levels.push(LevelEvidence {
            level: i,
            mass,
            affinity_closed,
            affinity_measured,
            llr_mean,
            llr_var,
            running_product: running,
        });
    }
    let verdict = if equal {
        Dichotomy::Equivalent
    } else {
        let falling = levels
            .last()
            .zip(levels.get(levels.len().saturating_sub(2)))
            .map(|(a, b)| a.running_product <= b.running_product)
            .unwrap_or(false);
        if running < 1e-6 && falling {
            Dichotomy::Singular
        } else {
            Dichotomy::Undecided
        }
    };
    Ok(SingularityEvidence {
        lambda1,
        lambda2,
        levels,
        verdict,
    })
}

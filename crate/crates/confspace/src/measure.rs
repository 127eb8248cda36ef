//! Base measures with densities and samplers: Lebesgue/Haar references,
//! Gaussian products with eigenvalue sequences, the p-adic analog of the
//! Gaussian measure, quasi-invariance factors, Hellinger affinities and the
//! Kakutani equivalence/singularity dichotomy.
//!
//! Real integrals use adaptive Simpson quadrature (tolerance 1e-9); p-adic
//! integrals are exact valuation-shell sums, since every density here is
//! radial and the Haar mass of a shell is exact.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::local_field::{PAdicBall, PAdicNumber, DEFAULT_PRECISION};
use crate::numerics::{adaptive_simpson, linear_fit};
use crate::space::{Point, Region};
use crate::transform::Transformation;

/// Quadrature tolerance for real one-dimensional integrals.
pub const QUAD_TOL: f64 = 1e-9;

/// A base measure on a region of the base space: density relative to the
/// reference (Lebesgue or Haar) measure, masses of regions, and a sampler.
/// All models are nonatomic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureModel {
    /// Lebesgue measure on R^dim (sigma-finite; every window has finite
    /// mass).
    Lebesgue { dim: usize },
    /// Uniform probability on a box.
    Uniform { lo: Vec<f64>, hi: Vec<f64> },
    /// Product of normal laws N(mean_i, sigma2_i).
    Normal { mean: Vec<f64>, sigma2: Vec<f64> },
    /// Gaussian product in the eigenvalue convention: coordinate density
    /// `exp(-x^2 / lambda_l) / sqrt(pi lambda_l)` (variance lambda_l / 2).
    GaussianProduct { lambdas: Vec<f64> },
    /// Haar measure on Q_p^dim normalized by unit mass on the unit ball.
    Haar { prime: u64, dim: usize },
    /// Product of p-adic Gaussian analogs: coordinate density
    /// `F_j exp(-|x|^2 s_j)` relative to Haar, with `F_j` normalizing each
    /// coordinate to a probability.
    PAdicGaussianProduct { prime: u64, s: Vec<f64> },
    /// A positive multiple of another measure.
    Scaled {
        factor: f64,
        base: Box<MeasureModel>,
    },
    /// A finite sum of measures on the same space.
    Sum { parts: Vec<MeasureModel> },
}

/// Result of normalizing one p-adic Gaussian coordinate: the constant and
/// the bound on the neglected shell tail.
#[derive(Debug, Clone, Copy)]
pub struct Normalizer {
    pub f: f64,
    pub tail_bound: f64,
}

/// Normalizer `F_j` with `F_j * sum_shells exp(-p^{2k} s) p^k (1 - 1/p) = 1`,
/// shells `|x| = p^k` for `k` in `[-shell_cutoff, shell_cutoff]`.
pub fn padic_gaussian_normalizer(s: f64, prime: u64, shell_cutoff: i64) -> Result<Normalizer> {
    if !(s > 0.0) || shell_cutoff < 1 {
        return Err(Error::InvalidParameter(format!(
            "need s > 0 and a positive cutoff, got {s}"
        )));
    }
    let p = prime as f64;
    let shell_frac = 1.0 - 1.0 / p;
    let mut z = 0.0;
    for k in (-shell_cutoff..=shell_cutoff).rev() {
        let r2 = p.powi(2 * k as i32);
        z += (-r2 * s).exp() * p.powi(k as i32) * shell_frac;
    }
    // shells below -C have total Haar mass p^{-C-1}; shells above +C are
    // crushed by the exponential
    let low_tail = p.powi(-(shell_cutoff + 1) as i32);
    let high_tail =
        (-p.powi(2 * (shell_cutoff + 1) as i32) * s).exp() * p.powi((shell_cutoff + 2) as i32);
    let tail = low_tail + high_tail;
    if !(z > 0.0) || tail > 1e-9 * z {
        return Err(Error::CutoffTooSmall(shell_cutoff));
    }
    Ok(Normalizer {
        f: 1.0 / z,
        tail_bound: tail / z,
    })
}

/// Shell walk for one p-adic Gaussian coordinate, adaptive in depth: the
/// sum of `g(k) * exp(-p^{2k} s) * p^k (1-1/p)` over shells `k <= k_hi`.
fn padic_gauss_shell_sum(prime: u64, s: f64, k_hi: i64, g: &dyn Fn(i64) -> f64) -> f64 {
    let p = prime as f64;
    let shell_frac = 1.0 - 1.0 / p;
    let mut acc = 0.0;
    let mut k = k_hi;
    let mut quiet = 0;
    // the quiet counter only engages once mass has accumulated: for large
    // scales every leading shell is crushed to zero by the exponential
    while quiet < 40 && k > k_hi - 4000 {
        let term = g(k) * (-p.powi(2 * k as i32) * s).exp() * p.powi(k as i32) * shell_frac;
        acc += term;
        if acc > 0.0 {
            if term.abs() <= 1e-17 * acc.abs() {
                quiet += 1;
            } else {
                quiet = 0;
            }
        }
        k -= 1;
    }
    acc
}

/// Internal normalizer choice for a model coordinate: cutoff wide enough
/// for the scale.
fn auto_normalizer(prime: u64, s: f64) -> Result<Normalizer> {
    let p = prime as f64;
    let half_log = (s.ln() / (2.0 * p.ln())).ceil().max(0.0) as i64;
    padic_gaussian_normalizer(s, prime, half_log + 45)
}

impl MeasureModel {
    pub fn scaled(factor: f64, base: MeasureModel) -> MeasureModel {
        MeasureModel::Scaled {
            factor,
            base: Box::new(base),
        }
    }

    pub fn is_padic(&self) -> bool {
        match self {
            MeasureModel::Haar { .. } | MeasureModel::PAdicGaussianProduct { .. } => true,
            MeasureModel::Scaled { base, .. } => base.is_padic(),
            MeasureModel::Sum { parts } => parts.first().is_some_and(|m| m.is_padic()),
            _ => false,
        }
    }

    /// Pointwise density relative to the reference measure (Lebesgue in
    /// the real case, Haar in the p-adic case).
    pub fn density(&self, x: &Point) -> Result<f64> {
        match (self, x) {
            (MeasureModel::Lebesgue { dim }, Point::Real(v)) => {
                ensure_dim(v.len(), *dim)?;
                Ok(1.0)
            }
            (MeasureModel::Uniform { lo, hi }, Point::Real(v)) => {
                ensure_dim(v.len(), lo.len())?;
                let inside = v
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(c, (l, h))| l <= c && c <= h);
                if !inside {
                    return Ok(0.0);
                }
                Ok(lo.iter().zip(hi).map(|(l, h)| 1.0 / (h - l)).product())
            }
            (MeasureModel::Normal { mean, sigma2 }, Point::Real(v)) => {
                ensure_dim(v.len(), mean.len())?;
                let mut d = 1.0;
                for ((x, m), s2) in v.iter().zip(mean).zip(sigma2) {
                    d *= (-(x - m) * (x - m) / (2.0 * s2)).exp()
                        / (2.0 * std::f64::consts::PI * s2).sqrt();
                }
                Ok(d)
            }
            (MeasureModel::GaussianProduct { lambdas }, Point::Real(v)) => {
                ensure_dim(v.len(), lambdas.len())?;
                let mut d = 1.0;
                for (x, l) in v.iter().zip(lambdas) {
                    d *= (-x * x / l).exp() / (std::f64::consts::PI * l).sqrt();
                }
                Ok(d)
            }
            (MeasureModel::Haar { dim, .. }, Point::Padic(v)) => {
                ensure_dim(v.len(), *dim)?;
                Ok(1.0)
            }
            (MeasureModel::PAdicGaussianProduct { prime, s }, Point::Padic(v)) => {
                ensure_dim(v.len(), s.len())?;
                let mut d = 1.0;
                for (x, sj) in v.iter().zip(s) {
                    let f = auto_normalizer(*prime, *sj)?.f;
                    let a = x.abs();
                    d *= f * (-a * a * sj).exp();
                }
                Ok(d)
            }
            (MeasureModel::Scaled { factor, base }, _) => Ok(factor * base.density(x)?),
            (MeasureModel::Sum { parts }, _) => {
                let mut d = 0.0;
                for part in parts {
                    d += part.density(x)?;
                }
                Ok(d)
            }
            _ => Err(Error::SpaceMismatch(self.kind_name(), x_kind(x))),
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            MeasureModel::Lebesgue { .. }
            | MeasureModel::Uniform { .. }
            | MeasureModel::Normal { .. }
            | MeasureModel::GaussianProduct { .. } => "real",
            MeasureModel::Haar { .. } | MeasureModel::PAdicGaussianProduct { .. } => "p-adic",
            MeasureModel::Scaled { base, .. } => base.kind_name(),
            MeasureModel::Sum { parts } => parts.first().map_or("empty", |m| m.kind_name()),
        }
    }

    /// Mass of a region. Unions must be disjoint; differences nested.
    pub fn mass(&self, region: &Region) -> Result<f64> {
        match region {
            Region::Union { parts } => {
                for (i, a) in parts.iter().enumerate() {
                    for b in &parts[..i] {
                        if !a.is_disjoint_from(b)? {
                            return Err(Error::RegionOverlap);
                        }
                    }
                }
                let mut m = 0.0;
                for part in parts {
                    m += self.mass(part)?;
                }
                Ok(m)
            }
            Region::Difference { outer, inner } => Ok(self.mass(outer)? - self.mass(inner)?),
            Region::RealBox { lo, hi } => self.real_box_mass(lo, hi),
            Region::Ball { ball } => self.padic_ball_mass(ball),
        }
    }

    fn real_box_mass(&self, lo: &[f64], hi: &[f64]) -> Result<f64> {
        match self {
            MeasureModel::Lebesgue { dim } => {
                ensure_dim(lo.len(), *dim)?;
                Ok(lo.iter().zip(hi).map(|(l, h)| (h - l).max(0.0)).product())
            }
            MeasureModel::Uniform { lo: slo, hi: shi } => {
                ensure_dim(lo.len(), slo.len())?;
                let mut frac = 1.0;
                for ((l, h), (sl, sh)) in lo.iter().zip(hi).zip(slo.iter().zip(shi)) {
                    let overlap = (h.min(*sh) - l.max(*sl)).max(0.0);
                    frac *= overlap / (sh - sl);
                }
                Ok(frac)
            }
            MeasureModel::Normal { mean, sigma2 } => {
                ensure_dim(lo.len(), mean.len())?;
                let mut m = 1.0;
                for ((l, h), (mu, s2)) in lo.iter().zip(hi).zip(mean.iter().zip(sigma2)) {
                    let scale = (2.0 * s2).sqrt();
                    m *= 0.5 * (erf((h - mu) / scale) - erf((l - mu) / scale));
                }
                Ok(m)
            }
            MeasureModel::GaussianProduct { lambdas } => {
                ensure_dim(lo.len(), lambdas.len())?;
                let mut m = 1.0;
                for ((l, h), lam) in lo.iter().zip(hi).zip(lambdas) {
                    let scale = lam.sqrt();
                    m *= 0.5 * (erf(h / scale) - erf(l / scale));
                }
                Ok(m)
            }
            MeasureModel::Scaled { factor, base } => Ok(factor * base.real_box_mass(lo, hi)?),
            MeasureModel::Sum { parts } => {
                let mut m = 0.0;
                for part in parts {
                    m += part.real_box_mass(lo, hi)?;
                }
                Ok(m)
            }
            _ => Err(Error::SpaceMismatch(self.kind_name(), "real")),
        }
    }

    fn padic_ball_mass(&self, ball: &PAdicBall) -> Result<f64> {
        match self {
            MeasureModel::Haar { prime, dim } => {
                ensure_dim(ball.dim(), *dim)?;
                ensure_prime(ball.prime(), *prime)?;
                Ok(ball.haar_volume())
            }
            MeasureModel::PAdicGaussianProduct { prime, s } => {
                ensure_dim(ball.dim(), s.len())?;
                ensure_prime(ball.prime(), *prime)?;
                if !ball.center().iter().all(|c| c.is_zero()) {
                    return Err(Error::InvalidParameter(
                        "p-adic Gaussian masses are implemented for balls centered at 0".into(),
                    ));
                }
                let mut m = 1.0;
                for sj in s {
                    let f = auto_normalizer(*prime, *sj)?.f;
                    m *= f * padic_gauss_shell_sum(*prime, *sj, ball.log_radius(), &|_| 1.0);
                }
                Ok(m)
            }
            MeasureModel::Scaled { factor, base } => Ok(factor * base.padic_ball_mass(ball)?),
            MeasureModel::Sum { parts } => {
                let mut m = 0.0;
                for part in parts {
                    m += part.padic_ball_mass(ball)?;
                }
                Ok(m)
            }
            _ => Err(Error::SpaceMismatch(self.kind_name(), "p-adic")),
        }
    }

    /// Draw one point from the normalized restriction of the measure to
    /// `region`.
    pub fn sample(&self, region: &Region, rng: &mut impl Rng) -> Result<Point> {
        match self {
            MeasureModel::Scaled { base, .. } => return base.sample(region, rng),
            MeasureModel::Sum { parts } => {
                let masses: Vec<f64> = parts
                    .iter()
                    .map(|p| p.mass(region))
                    .collect::<Result<_>>()?;
                let total: f64 = masses.iter().sum();
                if !(total > 0.0) {
                    return Err(Error::InvalidParameter(
                        "sampling from a null region".into(),
                    ));
                }
                let mut u = rng.gen_range(0.0..total);
                for (part, m) in parts.iter().zip(&masses) {
                    if u < *m {
                        return part.sample(region, rng);
                    }
                    u -= m;
                }
                return parts.last().unwrap().sample(region, rng);
            }
            _ => {}
        }
        if self.is_padic() {
            let hull = bounding_ball(region)?;
            for _ in 0..100_000 {
                let x = self.sample_in_ball(&hull, rng)?;
                if region.contains(&x)? {
                    return Ok(x);
                }
            }
        } else {
            let (lo, hi) = bounding_box(region)?;
            for _ in 0..100_000 {
                let x = self.sample_in_box(&lo, &hi, rng)?;
                if region.contains(&x)? {
                    return Ok(x);
                }
            }
        }
        Err(Error::InvalidParameter(
            "rejection sampling failed; region mass too small".into(),
        ))
    }

    fn sample_in_box(&self, lo: &[f64], hi: &[f64], rng: &mut impl Rng) -> Result<Point> {
        match self {
            MeasureModel::Lebesgue { .. } => Ok(Point::Real(
                lo.iter()
                    .zip(hi)
                    .map(|(l, h)| rng.gen_range(*l..*h))
                    .collect(),
            )),
            MeasureModel::Uniform { lo: slo, hi: shi } => {
                let coords = slo
                    .iter()
                    .zip(shi)
                    .zip(lo.iter().zip(hi))
                    .map(|((sl, sh), (l, h))| {
                        let a = sl.max(*l);
                        let b = sh.min(*h);
                        if a >= b {
                            return Err(Error::InvalidParameter("empty support overlap".into()));
                        }
                        Ok(rng.gen_range(a..b))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Ok(Point::Real(coords))
            }
            MeasureModel::Normal { mean, sigma2 } => {
                use rand_distr::{Distribution, Normal};
                let coords = mean
                    .iter()
                    .zip(sigma2)
                    .map(|(m, s2)| Normal::new(*m, s2.sqrt()).unwrap().sample(rng))
                    .collect();
                Ok(Point::Real(coords))
            }
            MeasureModel::GaussianProduct { lambdas } => {
                use rand_distr::{Distribution, Normal};
                let coords = lambdas
                    .iter()
                    .map(|l| Normal::new(0.0, (l / 2.0).sqrt()).unwrap().sample(rng))
                    .collect();
                Ok(Point::Real(coords))
            }
            _ => Err(Error::SpaceMismatch(self.kind_name(), "real")),
        }
    }

    fn sample_in_ball(&self, ball: &PAdicBall, rng: &mut impl Rng) -> Result<Point> {
        match self {
            MeasureModel::Haar { prime, .. } => {
                ensure_prime(ball.prime(), *prime)?;
                let mut coords = Vec::with_capacity(ball.dim());
                for c in ball.center() {
                    let offset = sample_uniform_ball_coord(*prime, ball.log_radius(), rng);
                    coords.push(c.add(&offset)?);
                }
                Ok(Point::Padic(coords))
            }
            MeasureModel::PAdicGaussianProduct { prime, s } => {
                ensure_prime(ball.prime(), *prime)?;
                ensure_dim(ball.dim(), s.len())?;
                let mut coords = Vec::with_capacity(s.len());
                for sj in s {
                    coords.push(sample_padic_gauss_coord(
                        *prime,
                        *sj,
                        ball.log_radius(),
                        rng,
                    )?);
                }
                Ok(Point::Padic(coords))
            }
            _ => Err(Error::SpaceMismatch(self.kind_name(), "p-adic")),
        }
    }
}

fn ensure_dim(got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::LengthMismatch(got, want));
    }
    Ok(())
}

fn ensure_prime(got: u64, want: u64) -> Result<()> {
    if got != want {
        return Err(Error::PrimeMismatch(got, want));
    }
    Ok(())
}

fn x_kind(x: &Point) -> &'static str {
    match x {
        Point::Real(_) => "real",
        Point::Padic(_) => "p-adic",
    }
}

/// Smallest axis box containing a real region.
pub fn bounding_box(region: &Region) -> Result<(Vec<f64>, Vec<f64>)> {
    match region {
        Region::RealBox { lo, hi } => Ok((lo.clone(), hi.clone())),
        Region::Union { parts } => {
            let mut acc: Option<(Vec<f64>, Vec<f64>)> = None;
            for part in parts {
                let (lo, hi) = bounding_box(part)?;
                acc = Some(match acc {
                    None => (lo, hi),
                    Some((alo, ahi)) => (
                        alo.iter().zip(&lo).map(|(a, b)| a.min(*b)).collect(),
                        ahi.iter().zip(&hi).map(|(a, b)| a.max(*b)).collect(),
                    ),
                });
            }
            acc.ok_or_else(|| Error::InvalidParameter("empty union".into()))
        }
        Region::Difference { outer, .. } => bounding_box(outer),
        Region::Ball { .. } => Err(Error::SpaceMismatch("real", "p-adic")),
    }
}

/// Smallest ball containing a p-adic region (ultrametric hull).
pub fn bounding_ball(region: &Region) -> Result<PAdicBall> {
    match region {
        Region::Ball { ball } => Ok(ball.clone()),
        Region::Union { parts } => {
            let mut acc: Option<PAdicBall> = None;
            for part in parts {
                let b = bounding_ball(part)?;
                acc = Some(match acc {
                    None => b,
                    Some(a) => hull_of(&a, &b)?,
                });
            }
            acc.ok_or_else(|| Error::InvalidParameter("empty union".into()))
        }
        Region::Difference { outer, .. } => bounding_ball(outer),
        Region::RealBox { .. } => Err(Error::SpaceMismatch("p-adic", "real")),
    }
}

fn hull_of(a: &PAdicBall, b: &PAdicBall) -> Result<PAdicBall> {
    let mut r = a.log_radius().max(b.log_radius());
    if let Some(e) = crate::space::ultra_dist_exp(a.center(), b.center())? {
        r = r.max(e);
    }
    Ok(PAdicBall::new(a.center().to_vec(), r))
}

/// Uniform draw from the 1-d ball `B(0, p^log_radius)` under Haar measure:
/// geometric valuation offset, then uniform digits.
fn sample_uniform_ball_coord(prime: u64, log_radius: i64, rng: &mut impl Rng) -> PAdicNumber {
    let mut t: i64 = 0;
    while t < 120 && rng.gen_ratio(1, prime as u32) {
        t += 1;
    }
    if t >= 120 {
        return PAdicNumber::zero(prime);
    }
    random_shell_point(prime, -log_radius + t, rng)
}

/// Uniform point on the shell `|x| = p^{-val}` (canonical digits).
fn random_shell_point(prime: u64, val: i64, rng: &mut impl Rng) -> PAdicNumber {
    use num_bigint::BigUint;
    let mut unit = BigUint::from(rng.gen_range(1..prime));
    let mut place = BigUint::from(prime);
    for _ in 1..DEFAULT_PRECISION {
        unit += rng.gen_range(0..prime) * place.clone();
        place *= prime;
    }
    PAdicNumber::from_parts(prime, val, unit, DEFAULT_PRECISION).expect("unit is canonical")
}

/// Draw from one p-adic Gaussian coordinate restricted to `|x| <= p^r`:
/// inverse-CDF over shells, then uniform within the shell.
fn sample_padic_gauss_coord(
    prime: u64,
    s: f64,
    log_radius: i64,
    rng: &mut impl Rng,
) -> Result<PAdicNumber> {
    let p = prime as f64;
    let shell_frac = 1.0 - 1.0 / p;
    // collect shell weights downward until negligible
    let mut ks = Vec::new();
    let mut ws = Vec::new();
    let mut total = 0.0;
    let mut k = log_radius;
    let mut quiet = 0;
    while quiet < 40 && k > log_radius - 4000 {
        let w = (-p.powi(2 * k as i32) * s).exp() * p.powi(k as i32) * shell_frac;
        ks.push(k);
        ws.push(w);
        total += w;
        if total > 0.0 {
            if w <= 1e-17 * total {
                quiet += 1;
            } else {
                quiet = 0;
            }
        }
        k -= 1;
    }
    if !(total > 0.0) {
        return Err(Error::InvalidParameter(
            "p-adic Gaussian mass vanishes on the ball".into(),
        ));
    }
    let mut u = rng.gen_range(0.0..total);
    for (k, w) in ks.iter().zip(&ws) {
        if u < *w {
            return Ok(random_shell_point(prime, -k, rng));
        }
        u -= w;
    }
    Ok(random_shell_point(prime, -ks[ks.len() - 1], rng))
}

/// Outcome of `gaussian_shift_factor`: the factor saturates instead of
/// overflowing, with a flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftFactor {
    pub value: f64,
    pub saturated: bool,
}

/// The Radon-Nikodym factor of a Gaussian shift in the eigenvalue
/// convention: `exp(sum_l [2 z_l x_l - z_l^2] / lambda_l)`, the density of
/// the shifted product Gaussian against the unshifted one.
pub fn gaussian_shift_factor(z: &[f64], x: &[f64], lambdas: &[f64]) -> ShiftFactor {
    assert!(
        z.len() <= x.len() && z.len() <= lambdas.len(),
        "shift must live in truncated coordinates"
    );
    let mut arg = 0.0;
    for (l, zl) in z.iter().enumerate() {
        arg += (2.0 * zl * x[l] - zl * zl) / lambdas[l];
    }
    if arg > 709.0 {
        ShiftFactor {
            value: f64::MAX,
            saturated: true,
        }
    } else {
        ShiftFactor {
            value: arg.exp(),
            saturated: false,
        }
    }
}

/// Hellinger affinity `int sqrt(d mu / d r * d nu / d r) dr` between two
/// one-dimensional probability measures on `region`: adaptive quadrature
/// in the real case, exact shell sums in the p-adic case. Equals 1 only
/// for a.e.-equal inputs.
pub fn hellinger_affinity(mu: &MeasureModel, nu: &MeasureModel, region: &Region) -> Result<f64> {
    for m in [mu, nu] {
        let mass = m.mass(region)?;
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::NotAProbability);
        }
    }
    if mu.is_padic() != nu.is_padic() {
        return Err(Error::SpaceMismatch(mu.kind_name(), nu.kind_name()));
    }
    if mu.is_padic() {
        return padic_affinity(mu, nu, region);
    }
    let (lo, hi) = bounding_box(region)?;
    if lo.len() != 1 {
        return Err(Error::InvalidParameter(
            "hellinger_affinity expects 1-d models".into(),
        ));
    }
    let f = |x: f64| {
        let p = Point::real1(x);
        let inside = region.contains(&p).unwrap_or(false);
        if !inside {
            return 0.0;
        }
        let a = mu.density(&p).unwrap_or(0.0);
        let b = nu.density(&p).unwrap_or(0.0);
        (a * b).sqrt()
    };
    let v = adaptive_simpson(&f, lo[0], hi[0], QUAD_TOL);
    Ok(v.min(1.0))
}

fn padic_affinity(mu: &MeasureModel, nu: &MeasureModel, region: &Region) -> Result<f64> {
    match region {
        Region::Union { parts } => {
            let mut acc = 0.0;
            for part in parts {
                acc += padic_affinity(mu, nu, part)?;
            }
            Ok(acc.min(1.0))
        }
        Region::Difference { outer, inner } => {
            Ok((padic_affinity(mu, nu, outer)? - padic_affinity(mu, nu, inner)?).max(0.0))
        }
        Region::Ball { ball } => {
            if ball.dim() != 1 || !ball.center()[0].is_zero() {
                return Err(Error::InvalidParameter(
                    "p-adic affinities are implemented on balls centered at 0".into(),
                ));
            }
            let prime = ball.prime();
            let p = prime as f64;
            let shell_frac = 1.0 - 1.0 / p;
            let mut acc = 0.0;
            let mut quiet = 0;
            let mut k = ball.log_radius();
            while quiet < 40 && k > ball.log_radius() - 4000 {
                let point = shell_probe(prime, k);
                let a = mu.density(&point)?;
                let b = nu.density(&point)?;
                let term = (a * b).sqrt() * p.powi(k as i32) * shell_frac;
                acc += term;
                if acc > 0.0 {
                    if term <= 1e-17 * acc {
                        quiet += 1;
                    } else {
                        quiet = 0;
                    }
                }
                k -= 1;
            }
            Ok(acc.min(1.0))
        }
        Region::RealBox { .. } => Err(Error::SpaceMismatch("p-adic", "real")),
    }
}

/// A representative point on the shell `|x| = p^k` (densities here are
/// radial, so any representative works).
fn shell_probe(prime: u64, k: i64) -> Point {
    use num_bigint::BigUint;
    Point::padic1(
        PAdicNumber::from_parts(prime, -k, BigUint::from(1u32), DEFAULT_PRECISION)
            .expect("1 is a canonical unit"),
    )
}

/// Verdict of the Kakutani dichotomy for a product of coordinate pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Dichotomy {
    Equivalent,
    Singular,
    Undecided,
}

impl std::fmt::Display for Dichotomy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Dichotomy::Equivalent => "EQUIVALENT",
            Dichotomy::Singular => "SINGULAR",
            Dichotomy::Undecided => "UNDECIDED",
        };
        f.write_str(s)
    }
}

/// Stopping-rule thresholds for the dichotomy classifier.
#[derive(Debug, Clone, Copy)]
pub struct KakutaniOptions {
    /// Coordinates evaluated.
    pub cutoff: usize,
    /// EQUIVALENT needs the last quarter of partial products inside a band
    /// of this width...
    pub stable_band: f64,
    /// ...and a limit above this floor.
    pub stable_floor: f64,
    /// SINGULAR when the log partial sum trends below this.
    pub singular_log: f64,
}

impl Default for KakutaniOptions {
    fn default() -> Self {
        KakutaniOptions {
            cutoff: 2000,
            stable_band: 1e-6,
            stable_floor: 1e-3,
            singular_log: -30.0,
        }
    }
}

/// Dichotomy report: verdict plus the full partial-product trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct KakutaniReport {
    pub verdict: Dichotomy,
    pub affinities: Vec<f64>,
    pub partial_products: Vec<f64>,
}

/// Kakutani dichotomy for the product measures `prod mu_k` vs `prod nu_k`:
/// the partial products of coordinate Hellinger affinities either stay
/// bounded away from zero (equivalence) or vanish (singularity).
///
/// The finite-trajectory stopping rule: EQUIVALENT when the partial
/// products have stabilized above the floor; SINGULAR when the log partial
/// sum has crossed `singular_log` while still falling, or when the fitted
/// power-law decay of the affinity decrements has exponent <= 1 (a
/// divergent decrement series drives the trend below any floor); otherwise
/// UNDECIDED.
pub fn kakutani_dichotomy(
    pairs: &dyn Fn(usize) -> Result<(MeasureModel, MeasureModel, Region)>,
    opts: &KakutaniOptions,
) -> Result<KakutaniReport> {
    let mut affinities = Vec::with_capacity(opts.cutoff);
    let mut partial_products = Vec::with_capacity(opts.cutoff);
    let mut log_sum = 0.0;
    for k in 1..=opts.cutoff {
        let (mu, nu, region) = pairs(k)?;
        let a = hellinger_affinity(&mu, &nu, &region)?;
        affinities.push(a);
        if a <= 0.0 {
            partial_products.push(0.0);
            // disjoint coordinate supports: singular outright
            return Ok(KakutaniReport {
                verdict: Dichotomy::Singular,
                affinities,
                partial_products,
            });
        }
        log_sum += a.ln();
        partial_products.push(log_sum.exp());
        if log_sum < 4.0 * opts.singular_log {
            // far past any plausible floor; stop early
            break;
        }
    }
    let verdict = classify_trajectory(&affinities, &partial_products, opts);
    Ok(KakutaniReport {
        verdict,
        affinities,
        partial_products,
    })
}

fn classify_trajectory(affinities: &[f64], products: &[f64], opts: &KakutaniOptions) -> Dichotomy {
    let k = products.len();
    if k < 8 {
        return Dichotomy::Undecided;
    }
    let last = products[k - 1];
    let tail = &products[k - k / 4..];
    let tail_max = tail.iter().cloned().fold(f64::MIN, f64::max);
    let tail_min = tail.iter().cloned().fold(f64::MAX, f64::min);
    if tail_max - tail_min < opts.stable_band && last > opts.stable_floor {
        return Dichotomy::Equivalent;
    }
    let log_last = last.ln();
    if log_last < opts.singular_log && tail_min < tail[0] * (1.0 - 1e-12) {
        return Dichotomy::Singular;
    }
    // trend analysis: fit 1 - a_k ~ c k^{-alpha} on the tail half
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, a) in affinities.iter().enumerate().skip(k / 4) {
        let d = 1.0 - a;
        if d > 1e-11 {
            xs.push(((i + 1) as f64).ln());
            ys.push(d.ln());
        }
    }
    if xs.len() >= 20 {
        if let Some((alpha, lnc, r2)) = linear_fit(&xs, &ys) {
            // accept the fit on explanatory power, or on small residuals:
            // a flat decrement series has r2 near zero yet fits perfectly
            let n = xs.len() as f64;
            let rms_residual = (ys
                .iter()
                .zip(&xs)
                .map(|(y, x)| {
                    let pred = lnc - alpha * x;
                    (y - pred) * (y - pred)
                })
                .sum::<f64>()
                / n)
                .sqrt();
            if r2 >= 0.85 || rms_residual < 0.4 {
                if alpha <= 1.05 {
                    // sum of decrements diverges: the trend crosses any
                    // floor eventually
                    return Dichotomy::Singular;
                }
                // summable tail: extrapolate the limit
                let c = lnc.exp();
                let kf = k as f64;
                let remainder = c * kf.powf(1.0 - alpha) / (alpha - 1.0);
                if (log_last - remainder).exp() > opts.stable_floor {
                    return Dichotomy::Equivalent;
                }
            }
        }
    }
    Dichotomy::Undecided
}

/// A canned product-measure pair with its analytically expected verdict.
pub struct KakutaniFixture {
    pub name: &'static str,
    pub expected: Dichotomy,
    pub cutoff: usize,
    pub pair: Box<dyn Fn(usize) -> Result<(MeasureModel, MeasureModel, Region)> + Send + Sync>,
}

fn normal_pair(m1: f64, s1: f64, m2: f64, s2: f64) -> (MeasureModel, MeasureModel, Region) {
    let spread = s1.max(s2).sqrt();
    let lo = m1.min(m2) - 14.0 * spread;
    let hi = m1.max(m2) + 14.0 * spread;
    (
        MeasureModel::Normal {
            mean: vec![m1],
            sigma2: vec![s1],
        },
        MeasureModel::Normal {
            mean: vec![m2],
            sigma2: vec![s2],
        },
        Region::real_interval(lo, hi),
    )
}

/// The scale sequence of the real product-measure family: coordinate
/// density `C_k exp(-x^2 s_k^2)` with `s_k = k^{1.2}`, i.e. a normal law
/// with variance `1/(2 s_k^2)`.
fn lambda_family_sigma2(k: usize) -> f64 {
    let s = (k as f64).powf(1.2);
    1.0 / (2.0 * s * s)
}

fn eta_region(prime: u64) -> Region {
    Region::Ball {
        ball: PAdicBall::new(vec![PAdicNumber::zero(prime)], 2),
    }
}

/// The p-adic product-measure family: coordinate density
/// `F_k exp(-|y|^2 p^{2k})` relative to Haar.
fn eta_model(prime: u64, k: usize) -> MeasureModel {
    let p = prime as f64;
    MeasureModel::PAdicGaussianProduct {
        prime,
        s: vec![p.powi(2 * k as i32)],
    }
}

/// Twenty canned product-measure sequences classified by the summability
/// criterion for their coordinate perturbations.
pub fn canned_kakutani_fixtures() -> Vec<KakutaniFixture> {
    let mut out: Vec<KakutaniFixture> = Vec::new();
    let shift = |name: &'static str, expected, a: fn(usize) -> f64| KakutaniFixture {
        name,
        expected,
        cutoff: 2000,
        pair: Box::new(move |k| Ok(normal_pair(0.0, 1.0, a(k), 1.0))),
    };
    out.push(KakutaniFixture {
        name: "identical-normals",
        expected: Dichotomy::Equivalent,
        cutoff: 2000,
        pair: Box::new(|_| Ok(normal_pair(0.0, 1.0, 0.0, 1.0))),
    });
    out.push(shift(
        "gaussian-shift-geometric",
        Dichotomy::Equivalent,
        |k| 0.5f64.powi(k as i32),
    ));
    out.push(shift("gaussian-shift-invsqrt", Dichotomy::Singular, |k| {
        1.0 / (k as f64).sqrt()
    }));
    out.push(shift(
        "gaussian-shift-harmonic",
        Dichotomy::Equivalent,
        |k| 1.0 / k as f64,
    ));
    out.push(shift(
        "gaussian-shift-constant",
        Dichotomy::Singular,
        |_| 0.5,
    ));
    out.push(shift("gaussian-shift-p06", Dichotomy::Equivalent, |k| {
        (k as f64).powf(-0.6)
    }));
    out.push(shift("gaussian-shift-p04", Dichotomy::Singular, |k| {
        (k as f64).powf(-0.4)
    }));
    out.push(shift("gaussian-shift-finite", Dichotomy::Equivalent, |k| {
        if k <= 10 {
            1.0
        } else {
            0.0
        }
    }));
    out.push(KakutaniFixture {
        name: "variance-step-geometric",
        expected: Dichotomy::Equivalent,
        cutoff: 2000,
        pair: Box::new(|k| Ok(normal_pair(0.0, 1.0, 0.0, 1.0 + 0.5f64.powi(k as i32)))),
    });
    out.push(KakutaniFixture {
        name: "variance-step-constant",
        expected: Dichotomy::Singular,
        cutoff: 2000,
        pair: Box::new(|_| Ok(normal_pair(0.0, 1.0, 0.0, 2.0))),
    });
    out.push(KakutaniFixture {
        name: "variance-step-invsqrt",
        expected: Dichotomy::Singular,
        cutoff: 2000,
        pair: Box::new(|k| Ok(normal_pair(0.0, 1.0, 0.0, 1.0 + 1.0 / (k as f64).sqrt()))),
    });
    out.push(KakutaniFixture {
        name: "uniform-disjoint",
        expected: Dichotomy::Singular,
        cutoff: 50,
        pair: Box::new(|_| {
            Ok((
                MeasureModel::Uniform {
                    lo: vec![0.0],
                    hi: vec![1.0],
                },
                MeasureModel::Uniform {
                    lo: vec![2.0],
                    hi: vec![3.0],
                },
                Region::real_interval(-1.0, 4.0),
            ))
        }),
    });
    out.push(KakutaniFixture {
        name: "uniform-overlap-shrinking",
        expected: Dichotomy::Equivalent,
        cutoff: 400,
        pair: Box::new(|k| {
            let eps = 0.5f64.powi(k.min(500) as i32);
            Ok((
                MeasureModel::Uniform {
                    lo: vec![0.0],
                    hi: vec![1.0],
                },
                MeasureModel::Uniform {
                    lo: vec![eps],
                    hi: vec![1.0 + eps],
                },
                Region::real_interval(-1.0, 3.0),
            ))
        }),
    });
    // product family with shrinking coordinate scales: trace-class shifts
    // stay equivalent, critical and constant shifts are singular
    out.push(KakutaniFixture {
        name: "lambda-family-trace-shift",
        expected: Dichotomy::Equivalent,
        cutoff: 2000,
        pair: Box::new(|k| {
            let s2 = lambda_family_sigma2(k);
            Ok(normal_pair(0.0, s2, (k as f64).powf(-2.0), s2))
        }),
    });
    out.push(KakutaniFixture {
        name: "lambda-family-critical-shift",
        expected: Dichotomy::Singular,
        cutoff: 2000,
        pair: Box::new(|k| {
            let s2 = lambda_family_sigma2(k);
            let z = (2.0 * s2).sqrt() / (k as f64).sqrt(); // z_k s_k = 1/sqrt(k)
            Ok(normal_pair(0.0, s2, z, s2))
        }),
    });
    out.push(KakutaniFixture {
        name: "lambda-family-constant-shift",
        expected: Dichotomy::Singular,
        cutoff: 200,
        pair: Box::new(|k| {
            let s2 = lambda_family_sigma2(k);
            Ok(normal_pair(0.0, s2, 0.5, s2))
        }),
    });
    out.push(KakutaniFixture {
        name: "eta-family-identical",
        expected: Dichotomy::Equivalent,
        cutoff: 120,
        pair: Box::new(|k| Ok((eta_model(3, k), eta_model(3, k), eta_region(3)))),
    });
    out.push(KakutaniFixture {
        name: "eta-family-scale-step",
        expected: Dichotomy::Singular,
        cutoff: 120,
        pair: Box::new(|k| Ok((eta_model(3, k), eta_model(3, k + 1), eta_region(3)))),
    });
    out.push(KakutaniFixture {
        name: "eta-family-perturbed",
        expected: Dichotomy::Equivalent,
        cutoff: 120,
        pair: Box::new(|k| {
            let p = 3.0f64;
            let s = p.powi(2 * k.min(500) as i32);
            let s2 = s * (1.0 + 0.5f64.powi(k.min(500) as i32));
            Ok((
                MeasureModel::PAdicGaussianProduct {
                    prime: 3,
                    s: vec![s],
                },
                MeasureModel::PAdicGaussianProduct {
                    prime: 3,
                    s: vec![s2],
                },
                eta_region(3),
            ))
        }),
    });
    out.push(KakutaniFixture {
        name: "eta-family-p5-scale-step",
        expected: Dichotomy::Singular,
        cutoff: 100,
        pair: Box::new(|k| Ok((eta_model(5, k), eta_model(5, k + 1), eta_region(5)))),
    });
    out
}

/// The quasi-invariance factor `rho_m(psi, x) = m^psi(dx) / m(dx)` with
/// `m^psi(E) = m(psi^{-1} E)`: by change of variables, the density ratio
/// at the pulled-back point times the inverse volume factor.
pub fn rho_factor(m: &MeasureModel, psi: &Transformation, x: &Point) -> Result<f64> {
    let den = m.density(x)?;
    if den == 0.0 {
        return Err(Error::DensityZero);
    }
    let pre = psi.inverse().apply(x)?;
    let num = m.density(&pre)?;
    let vol = psi.inverse_volume_factor(x)?;
    Ok(num * vol / den)
}

/// Monte-Carlo diagnostic for the smallness condition on
/// `int |rho^{1/2}(psi, x) - 1|^2 m(dx)`, reported together with whether
/// the sampled window moved off itself.
#[derive(Debug, Clone, Serialize)]
pub struct SmallnessDiagnostic {
    pub estimate: f64,
    pub stderr: f64,
    pub window_mass: f64,
    pub moved_off_window: bool,
}

pub fn condition_2_8_ii_diagnostic(
    m: &MeasureModel,
    psi: &Transformation,
    window: &Region,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<SmallnessDiagnostic> {
    if samples == 0 {
        return Err(Error::ZeroSamples);
    }
    let mass = m.mass(window)?;
    let mut values = Vec::with_capacity(samples);
    let mut moved_off = true;
    for _ in 0..samples {
        let x = m.sample(window, rng)?;
        let r = rho_factor(m, psi, &x)?;
        let d = r.sqrt() - 1.0;
        values.push(d * d);
        if window.contains(&psi.apply(&x)?)? {
            moved_off = false;
        }
    }
    let (mean, se) = crate::numerics::mean_stderr(&values);
    Ok(SmallnessDiagnostic {
        estimate: mass * mean,
        stderr: mass * se,
        window_mass: mass,
        moved_off_window: moved_off,
    })
}

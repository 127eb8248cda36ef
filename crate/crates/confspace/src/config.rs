//! Finite point configurations, counting maps, clopen counting
//! neighborhoods, and the cross-section / permutation-cocycle machinery.
//!
//! A configuration stores its points in the canonical cross-section order,
//! so serialized configurations diff stably and `cross_section` is the
//! identity on storage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::local_field::{PAdicBall, PAdicNumber};
use crate::space::{Exhaustion, Point, Region};
use crate::transform::Transformation;

/// An n-point subset of the base space (pairwise distinct points,
/// canonical order). n = 0 is the empty configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FiniteConfig {
    points: Vec<Point>,
}

impl FiniteConfig {
    /// Build from points in any order; rejects colliding points
    /// (exactly equal p-adic points, real points within 1e-12).
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let mut points = points;
        points.sort_by(|a, b| a.canonical_cmp(b));
        for w in points.windows(2) {
            if w[0].collides_with(&w[1]) {
                return Err(Error::PointCollision);
            }
        }
        Ok(FiniteConfig { points })
    }

    pub fn empty() -> Self {
        FiniteConfig { points: Vec::new() }
    }

    pub fn card(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// `N_A`: the number of points inside the region.
    pub fn count(&self, region: &Region) -> Result<usize> {
        let mut n = 0;
        for p in &self.points {
            if region.contains(p)? {
                n += 1;
            }
        }
        Ok(n)
    }

    /// The sub-configuration inside the region.
    pub fn restrict(&self, region: &Region) -> Result<FiniteConfig> {
        let mut kept = Vec::new();
        for p in &self.points {
            if region.contains(p)? {
                kept.push(p.clone());
            }
        }
        Ok(FiniteConfig { points: kept })
    }

    /// Disjoint union; a point collision is an error (collisions are null
    /// events under nonatomic sampling, so hitting one indicates misuse).
    pub fn union(&self, other: &FiniteConfig) -> Result<FiniteConfig> {
        let mut all = self.points.clone();
        all.extend(other.points.iter().cloned());
        FiniteConfig::new(all)
    }

    /// The canonical ordered tuple s_n: real points lexicographically,
    /// p-adic points by valuation descending then digits. Reconstructing
    /// the configuration from it is the identity.
    pub fn cross_section(&self) -> &[Point] {
        &self.points
    }

    /// Alternative ordering mode: points grouped by the first exhaustion
    /// shell containing them, canonical order within a shell.
    pub fn cross_section_shell_first(&self, exhaustion: &Exhaustion) -> Result<Vec<Point>> {
        let mut keyed: Vec<(usize, &Point)> = Vec::with_capacity(self.points.len());
        for p in &self.points {
            let mut shell = exhaustion.len();
            for (i, level) in exhaustion.levels().iter().enumerate() {
                if level.contains(p)? {
                    shell = i;
                    break;
                }
            }
            keyed.push((shell, p));
        }
        keyed.sort_by(|(sa, pa), (sb, pb)| sa.cmp(sb).then_with(|| pa.canonical_cmp(pb)));
        Ok(keyed.into_iter().map(|(_, p)| p.clone()).collect())
    }

    /// Image under a transformation (pointwise).
    pub fn map(&self, psi: &Transformation) -> Result<FiniteConfig> {
        let mut out = Vec::with_capacity(self.points.len());
        for p in &self.points {
            out.push(psi.apply(p)?);
        }
        FiniteConfig::new(out).map_err(|e| match e {
            Error::PointCollision => Error::NotInjectiveOnConfig,
            other => other,
        })
    }
}

/// A configuration truncated to an exhaustion level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedConfiguration {
    level: usize,
    config: FiniteConfig,
}

impl TruncatedConfiguration {
    pub fn new(level: usize, exhaustion: &Exhaustion, config: FiniteConfig) -> Result<Self> {
        let region = exhaustion.level(level);
        for p in config.points() {
            if !region.contains(p)? {
                return Err(Error::NotInLevel(level));
            }
        }
        Ok(TruncatedConfiguration { level, config })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn config(&self) -> &FiniteConfig {
        &self.config
    }

    /// The restriction map pi^n_m to a lower level.
    pub fn project(&self, lower: usize, exhaustion: &Exhaustion) -> Result<TruncatedConfiguration> {
        assert!(lower <= self.level, "projections go to lower levels");
        let config = self.config.restrict(exhaustion.level(lower))?;
        TruncatedConfiguration::new(lower, exhaustion, config)
    }
}

/// A permutation of {0..n-1}, the value sigma(psi, gamma) of the
/// cross-section cocycle. Composition follows `(x sigma) tau = x (sigma tau)`
/// for the right action `(x sigma)_i = x_{sigma(i)}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PermutationCocycle {
    perm: Vec<usize>,
}

impl PermutationCocycle {
    pub fn identity(n: usize) -> Self {
        PermutationCocycle {
            perm: (0..n).collect(),
        }
    }

    pub fn from_mapping(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &i in &perm {
            if i >= n || seen[i] {
                return Err(Error::NotAPermutation(format!("{perm:?}"), n));
            }
            seen[i] = true;
        }
        Ok(PermutationCocycle { perm })
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.perm
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `(sigma tau)(i) = sigma(tau(i))`.
    pub fn compose(&self, other: &PermutationCocycle) -> PermutationCocycle {
        assert_eq!(self.n(), other.n());
        PermutationCocycle {
            perm: other.perm.iter().map(|&i| self.perm[i]).collect(),
        }
    }

    pub fn inverse(&self) -> PermutationCocycle {
        let mut inv = vec![0; self.perm.len()];
        for (i, &j) in self.perm.iter().enumerate() {
            inv[j] = i;
        }
        PermutationCocycle { perm: inv }
    }

    /// Signature: +1 for even, -1 for odd.
    pub fn sign(&self) -> i32 {
        let mut visited = vec![false; self.perm.len()];
        let mut sign = 1;
        for start in 0..self.perm.len() {
            if visited[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !visited[i] {
                visited[i] = true;
                i = self.perm[i];
                len += 1;
            }
            if len % 2 == 0 {
                sign = -sign;
            }
        }
        sign
    }

    /// Apply to a tuple: `(x sigma)_i = x_{sigma(i)}`.
    pub fn apply_to<T: Clone>(&self, tuple: &[T]) -> Vec<T> {
        self.perm.iter().map(|&i| tuple[i].clone()).collect()
    }

    /// The n-by-n permutation matrix of the right action: row i has a one
    /// in column sigma(i), so multiplying a coordinate vector implements
    /// `apply_to`.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut m = vec![vec![0.0; n]; n];
        for (i, &j) in self.perm.iter().enumerate() {
            m[i][j] = 1.0;
        }
        m
    }
}

/// The permutation relating the canonical ordering before and after a
/// transformation: `s_n(psi^{-1} gamma) = (psi^{-1} s_n(gamma)) sigma`.
///
/// It satisfies the cocycle law
/// `sigma(psi phi, gamma) = sigma(psi, gamma) . sigma(phi, psi^{-1} gamma)`.
pub fn cocycle(psi: &Transformation, gamma: &FiniteConfig) -> Result<PermutationCocycle> {
    cocycle_with_section(psi, gamma, &|c| Ok(c.cross_section().to_vec()))
}

/// Cocycle for the shell-first cross-section.
pub fn cocycle_shell_first(
    psi: &Transformation,
    gamma: &FiniteConfig,
    exhaustion: &Exhaustion,
) -> Result<PermutationCocycle> {
    cocycle_with_section(psi, gamma, &|c| c.cross_section_shell_first(exhaustion))
}

fn cocycle_with_section(
    psi: &Transformation,
    gamma: &FiniteConfig,
    section: &dyn Fn(&FiniteConfig) -> Result<Vec<Point>>,
) -> Result<PermutationCocycle> {
    let inv = psi.inverse();
    let s_gamma = section(gamma)?;
    // psi^{-1} applied entrywise to the ordered tuple
    let mut pulled = Vec::with_capacity(s_gamma.len());
    for p in &s_gamma {
        pulled.push(inv.apply(p)?);
    }
    let transformed = FiniteConfig::new(pulled.clone()).map_err(|e| match e {
        Error::PointCollision => Error::NotInjectiveOnConfig,
        other => other,
    })?;
    let target = section(&transformed)?;
    // sigma with target_i = pulled_{sigma(i)}; points match exactly because
    // target is a reordering of the very same computed points
    let mut perm = Vec::with_capacity(target.len());
    let mut used = vec![false; pulled.len()];
    for t in &target {
        let j = pulled
            .iter()
            .enumerate()
            .position(|(j, u)| !used[j] && u == t)
            .ok_or(Error::NotInjectiveOnConfig)?;
        used[j] = true;
        perm.push(j);
    }
    PermutationCocycle::from_mapping(perm)
}

/// A clopen counting neighborhood of a p-adic configuration: disjoint open
/// balls around the points such that any n-point configuration meeting
/// every ball is within `eps` of the original in the matching metric.
#[derive(Debug, Clone)]
pub struct CountingNeighborhood {
    balls: Vec<PAdicBall>,
    eta_exp: i64,
}

impl CountingNeighborhood {
    /// The chosen eta in the valuation group: the largest power of p
    /// strictly below eps that keeps the balls disjoint.
    pub fn eta(&self) -> f64 {
        let p = self.balls[0].prime() as f64;
        p.powi(self.eta_exp as i32)
    }

    pub fn balls(&self) -> &[PAdicBall] {
        &self.balls
    }

    /// Membership: does every ball contain at least one point of gamma?
    pub fn accepts(&self, gamma: &FiniteConfig) -> Result<bool> {
        for ball in &self.balls {
            let region = Region::Ball { ball: ball.clone() };
            if gamma.count(&region)? == 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Build the clopen counting neighborhood `O_eps(gamma)` of a
/// nonempty p-adic configuration: balls `U_{eta p^{-n}}(x_i)` with
/// `eta` maximal in the valuation group subject to `eta < eps` and
/// disjointness.
pub fn counting_neighborhood(gamma: &FiniteConfig, eps: f64) -> Result<CountingNeighborhood> {
    if gamma.is_empty() {
        return Err(Error::EmptyConfig);
    }
    if !(eps > 0.0) {
        return Err(Error::GranularityTooFine(eps));
    }
    let coords: Vec<&[PAdicNumber]> = gamma
        .points()
        .iter()
        .map(|p| match p {
            Point::Padic(v) => Ok(v.as_slice()),
            Point::Real(_) => Err(Error::SpaceMismatch("p-adic", "real")),
        })
        .collect::<Result<_>>()?;
    let p = coords[0][0].prime();
    let n = coords.len() as i64;

    // smallest t with p^{-t} < eps (exact float comparisons on powers of p)
    let mut t = (-(eps.ln()) / (p as f64).ln()).floor() as i64;
    while (p as f64).powi(-t as i32) >= eps {
        t += 1;
    }
    while t > i32::MIN as i64 && (p as f64).powi(-(t - 1) as i32) < eps {
        t -= 1;
    }

    // minimum pairwise distance exponent bounds the disjointness constraint:
    // open balls of radius eta p^{-n} are disjoint iff their closed forms of
    // radius eta p^{-n-1} are separated by more than that radius
    let mut min_e = i64::MAX;
    for i in 0..coords.len() {
        for j in (i + 1)..coords.len() {
            if let Some(e) = crate::space::ultra_dist_exp(coords[i], coords[j])? {
                min_e = min_e.min(e);
            } else {
                return Err(Error::RepeatedPoints);
            }
        }
    }
    if coords.len() > 1 {
        // need p^{-t-n-1} < p^{min_e}, i.e. t > -min_e - n - 1
        let t_disjoint = -min_e - n;
        t = t.max(t_disjoint);
    }
    let open_exp = -t - n; // open radius p^{-t-n} -> closed exponent -t-n-1
    if open_exp - 1 < -(308.0f64 * std::f64::consts::LN_10 / (p as f64).ln()) as i64 {
        return Err(Error::GranularityTooFine(eps));
    }
    let balls = coords
        .iter()
        .map(|c| PAdicBall::new_open(c.to_vec(), open_exp))
        .collect();
    Ok(CountingNeighborhood { balls, eta_exp: -t })
}

//! Base spaces (real boxes and p-adic ball products) with the tuple and
//! n-point-set metrics, plus exhaustion sequences of finite-mass regions.
//!
//! All p-adic distances are powers of the prime. They are manipulated as
//! integer exponents and rendered to `f64` exactly once, so equality and
//! order comparisons of ultrametric distances are exact.

pub mod assignment;

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::local_field::{PAdicBall, PAdicNumber};

/// A point of a base space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Real(Vec<f64>),
    Padic(Vec<PAdicNumber>),
}

impl Point {
    pub fn real1(x: f64) -> Self {
        Point::Real(vec![x])
    }

    pub fn padic1(x: PAdicNumber) -> Self {
        Point::Padic(vec![x])
    }

    pub fn dim(&self) -> usize {
        match self {
            Point::Real(v) => v.len(),
            Point::Padic(v) => v.len(),
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            Point::Real(_) => "real",
            Point::Padic(_) => "p-adic",
        }
    }

    /// Total order used by cross-sections: reals lexicographically by
    /// coordinate, p-adic points by the canonical order of `PAdicNumber`
    /// coordinate by coordinate.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Point::Real(a), Point::Real(b)) => {
                for (x, y) in a.iter().zip(b) {
                    match x.partial_cmp(y).expect("points must be finite") {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                a.len().cmp(&b.len())
            }
            (Point::Padic(a), Point::Padic(b)) => {
                for (x, y) in a.iter().zip(b) {
                    match x.cmp(y) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                a.len().cmp(&b.len())
            }
            (Point::Real(_), Point::Padic(_)) => Ordering::Less,
            (Point::Padic(_), Point::Real(_)) => Ordering::Greater,
        }
    }

    /// Equality at the collision tolerance: exact for p-adic points,
    /// within 1e-12 per coordinate for real points.
    pub fn collides_with(&self, other: &Self) -> bool {
        match (self, other) {
            (Point::Real(a), Point::Real(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
            }
            (Point::Padic(a), Point::Padic(b)) => a == b,
            _ => false,
        }
    }
}

/// Ultrametric distance rendered as an exact exponent: the distance is
/// `p^0 = 1` for `Some(0)`, and zero for `None`.
pub type UltraExp = Option<i64>;

/// Max-of-coordinates ultrametric between p-adic points, as an exponent.
pub fn ultra_dist_exp(a: &[PAdicNumber], b: &[PAdicNumber]) -> Result<UltraExp> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let mut best: UltraExp = None;
    for (x, y) in a.iter().zip(b) {
        if let Some(v) = x.dist_val(y)? {
            let e = -v; // coordinate distance p^{-v} = p^{e}
            best = Some(best.map_or(e, |cur| cur.max(e)));
        }
    }
    Ok(best)
}

fn exp_to_f64(prime: u64, e: UltraExp) -> f64 {
    match e {
        None => 0.0,
        Some(k) => (prime as f64).powi(k as i32),
    }
}

/// Metric mode for tuple metrics: `Sum` in the real case, `Max` in the
/// non-Archimedean case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricMode {
    Sum,
    Max,
}

/// A base space: a flat box in R^k or a ball product in Q_p^k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointSpace {
    /// The box `[-extent, extent]^dim` with the Euclidean per-point metric.
    RealBox { dim: usize, extent: f64 },
    /// The ball `B(0, p^log_radius)^dim` with the max-of-coordinate
    /// valuations metric.
    PadicProduct {
        prime: u64,
        dim: usize,
        log_radius: i64,
    },
}

impl PointSpace {
    pub fn dim(&self) -> usize {
        match self {
            PointSpace::RealBox { dim, .. } => *dim,
            PointSpace::PadicProduct { dim, .. } => *dim,
        }
    }

    pub fn is_padic(&self) -> bool {
        matches!(self, PointSpace::PadicProduct { .. })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            PointSpace::RealBox { .. } => "real",
            PointSpace::PadicProduct { .. } => "p-adic",
        }
    }

    pub fn prime(&self) -> Option<u64> {
        match self {
            PointSpace::PadicProduct { prime, .. } => Some(*prime),
            _ => None,
        }
    }

    /// The natural metric mode of the space.
    pub fn mode(&self) -> MetricMode {
        if self.is_padic() {
            MetricMode::Max
        } else {
            MetricMode::Sum
        }
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        match (self, x) {
            (PointSpace::RealBox { dim, .. }, Point::Real(v)) if v.len() == *dim => Ok(()),
            (PointSpace::PadicProduct { dim, .. }, Point::Padic(v)) if v.len() == *dim => Ok(()),
            _ => Err(Error::SpaceMismatch(self.kind_name(), x.kind_name())),
        }
    }

    /// Per-point base distance.
    pub fn base_dist(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        match (x, y) {
            (Point::Real(a), Point::Real(b)) => Ok(a
                .iter()
                .zip(b)
                .map(|(u, v)| (u - v) * (u - v))
                .sum::<f64>()
                .sqrt()),
            (Point::Padic(a), Point::Padic(b)) => {
                Ok(exp_to_f64(self.prime().unwrap(), ultra_dist_exp(a, b)?))
            }
            _ => unreachable!("check_point filters mixed kinds"),
        }
    }

    /// The whole space as a region.
    pub fn as_region(&self) -> Region {
        match self {
            PointSpace::RealBox { dim, extent } => Region::RealBox {
                lo: vec![-extent; *dim],
                hi: vec![*extent; *dim],
            },
            PointSpace::PadicProduct {
                prime,
                dim,
                log_radius,
            } => Region::Ball {
                ball: PAdicBall::new(vec![PAdicNumber::zero(*prime); *dim], *log_radius),
            },
        }
    }
}

fn check_tuple(space: &PointSpace, x: &[Point]) -> Result<()> {
    for p in x {
        space.check_point(p)?;
    }
    Ok(())
}

/// The tuple metric `d^n_K`: the sum of per-point distances in the real
/// case, the maximum in the non-Archimedean case.
pub fn product_metric(
    space: &PointSpace,
    x: &[Point],
    y: &[Point],
    mode: MetricMode,
) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if mode != space.mode() {
        let mode_name = if mode == MetricMode::Sum {
            "sum"
        } else {
            "max"
        };
        return Err(Error::ModeMismatch {
            mode: mode_name,
            space: space.kind_name(),
        });
    }
    check_tuple(space, x)?;
    check_tuple(space, y)?;
    match mode {
        MetricMode::Sum => {
            let mut total = 0.0;
            for (a, b) in x.iter().zip(y) {
                total += space.base_dist(a, b)?;
            }
            Ok(total)
        }
        MetricMode::Max => Ok(exp_to_f64(
            space.prime().unwrap(),
            product_metric_exp(x, y)?,
        )),
    }
}

fn padic_coords(p: &Point) -> &[PAdicNumber] {
    match p {
        Point::Padic(v) => v,
        Point::Real(_) => unreachable!("caller guarantees p-adic points"),
    }
}

fn product_metric_exp(x: &[Point], y: &[Point]) -> Result<UltraExp> {
    let mut best: UltraExp = None;
    for (a, b) in x.iter().zip(y) {
        if let Some(e) = ultra_dist_exp(padic_coords(a), padic_coords(b))? {
            best = Some(best.map_or(e, |cur| cur.max(e)));
        }
    }
    Ok(best)
}

/// Distance from a tuple to the diagonal (the complement of the
/// off-diagonal set inside `K^n`): the cheapest single pair merge, which is
/// `min_{i<j} d(x_i, x_j)` in both supported geometries. Returns infinity
/// for `n < 2`, where the complement is empty.
pub fn diagonal_distance(space: &PointSpace, x: &[Point]) -> Result<f64> {
    check_tuple(space, x)?;
    if x.len() < 2 {
        return Ok(f64::INFINITY);
    }
    if space.is_padic() {
        return Ok(exp_to_f64(
            space.prime().unwrap(),
            diagonal_distance_exp(x)?,
        ));
    }
    let mut best = f64::INFINITY;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            best = best.min(space.base_dist(&x[i], &x[j])?);
        }
    }
    Ok(best)
}

/// Exponent-side diagonal distance for p-adic tuples; `Err` is impossible
/// for well-formed tuples. The outer Option is `None` when n < 2
/// (infinite distance), the inner `UltraExp` is `None` on the diagonal.
fn diagonal_distance_exp(x: &[Point]) -> Result<UltraExp> {
    let mut best: Option<UltraExp> = None;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            let d = ultra_dist_exp(padic_coords(&x[i]), padic_coords(&x[j]))?;
            best = Some(match best {
                None => d,
                Some(cur) => cur.min(d), // Option<i64> order: None (zero) first
            });
            if best == Some(None) {
                return Ok(None); // repeated point, distance zero
            }
        }
    }
    Ok(best.expect("caller guarantees n >= 2"))
}

/// The bounded metric `delta^n_K` on tuples with pairwise-distinct entries.
///
/// Real case: `d / (d + diag(x) + diag(y))`; non-Archimedean case:
/// `d / max(d, diag(x), diag(y))`, an ultrametric. Always in [0, 1].
pub fn delta_metric(space: &PointSpace, x: &[Point], y: &[Point]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    for t in [x, y] {
        if diagonal_distance(space, t)? == 0.0 {
            return Err(Error::RepeatedPoints);
        }
    }
    if space.is_padic() {
        let d = product_metric_exp(x, y)?;
        let d = match d {
            None => return Ok(0.0),
            Some(e) => e,
        };
        // n >= 2 has finite diagonal distances; for n = 1 the diagonal is
        // empty and the denominator reduces to d itself
        let mut denom = d;
        for t in [x, y] {
            if t.len() >= 2 {
                if let Some(e) = diagonal_distance_exp(t)? {
                    denom = denom.max(e);
                }
            }
        }
        return Ok(exp_to_f64(space.prime().unwrap(), Some(d - denom)));
    }
    let d = product_metric(space, x, y, MetricMode::Sum)?;
    if d == 0.0 {
        return Ok(0.0);
    }
    let dx = diagonal_distance(space, x)?;
    let dy = diagonal_distance(space, y)?;
    if dx.is_infinite() || dy.is_infinite() {
        // n = 1: the diagonal is empty, fall back to the bounded quotient
        return Ok(1.0);
    }
    // (dx + dy) first keeps the value bit-identical under swapping x and y
    Ok(d / (d + (dx + dy)))
}

/// The matching metric `d^(n)_K` between two n-point sets: the minimum of
/// `d^n_K` over all pairings, computed by an optimal-assignment solver
/// (min-cost for sum mode, bottleneck for max mode).
pub fn matching_metric(space: &PointSpace, a: &[Point], b: &[Point]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::CardinalityMismatch(a.len(), b.len()));
    }
    check_tuple(space, a)?;
    check_tuple(space, b)?;
    let n = a.len();
    if n == 0 {
        return Ok(0.0);
    }
    if space.is_padic() {
        let mut cost = vec![vec![None as UltraExp; n]; n];
        for (i, pa) in a.iter().enumerate() {
            for (j, pb) in b.iter().enumerate() {
                cost[i][j] = ultra_dist_exp(padic_coords(pa), padic_coords(pb))?;
            }
        }
        let e = assignment::bottleneck_assignment(&cost).expect("n >= 1");
        return Ok(exp_to_f64(space.prime().unwrap(), e));
    }
    let mut cost = vec![vec![0.0; n]; n];
    for (i, pa) in a.iter().enumerate() {
        for (j, pb) in b.iter().enumerate() {
            cost[i][j] = space.base_dist(pa, pb)?;
        }
    }
    let (total, _) = assignment::min_cost_assignment(&cost);
    Ok(total)
}

/// A measurable region of a base space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    RealBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Ball {
        ball: PAdicBall,
    },
    /// Finite union of pairwise disjoint components.
    Union {
        parts: Vec<Region>,
    },
    /// `a \ b` with `b` contained in `a`.
    Difference {
        outer: Box<Region>,
        inner: Box<Region>,
    },
}

impl Region {
    pub fn real_interval(lo: f64, hi: f64) -> Self {
        Region::RealBox {
            lo: vec![lo],
            hi: vec![hi],
        }
    }

    pub fn contains(&self, x: &Point) -> Result<bool> {
        match (self, x) {
            (Region::RealBox { lo, hi }, Point::Real(v)) => {
                if v.len() != lo.len() {
                    return Err(Error::LengthMismatch(v.len(), lo.len()));
                }
                Ok(v.iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(c, (l, h))| *l <= *c && *c <= *h))
            }
            (Region::Ball { ball }, Point::Padic(v)) => ball.contains(v),
            (Region::Union { parts }, _) => {
                for part in parts {
                    if part.contains(x)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            (Region::Difference { outer, inner }, _) => {
                Ok(outer.contains(x)? && !inner.contains(x)?)
            }
            (r, p) => Err(Error::SpaceMismatch(r.kind_name(), p.kind_name())),
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            Region::RealBox { .. } => "real",
            Region::Ball { .. } => "p-adic",
            Region::Union { parts } => parts.first().map_or("empty", |p| p.kind_name()),
            Region::Difference { outer, .. } => outer.kind_name(),
        }
    }

    /// Conservative disjointness check for the supported shapes.
    pub fn is_disjoint_from(&self, other: &Region) -> Result<bool> {
        match (self, other) {
            (Region::RealBox { lo: la, hi: ha }, Region::RealBox { lo: lb, hi: hb }) => {
                // open overlap test: touching boundaries count as disjoint
                // for counting purposes only when strictly separated
                Ok(la
                    .iter()
                    .zip(ha)
                    .zip(lb.iter().zip(hb))
                    .any(|((la, ha), (lb, hb))| ha < lb || hb < la))
            }
            (Region::Ball { ball: a }, Region::Ball { ball: b }) => Ok(!a.intersects(b)?),
            (Region::Union { parts }, o) | (o, Region::Union { parts }) => {
                for part in parts {
                    if !part.is_disjoint_from(o)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            (Region::Difference { outer, .. }, o) => outer.is_disjoint_from(o),
            (o, Region::Difference { outer, .. }) => o.is_disjoint_from(outer),
            (a, b) => Err(Error::SpaceMismatch(a.kind_name(), b.kind_name())),
        }
    }

    pub fn is_padic(&self) -> bool {
        self.kind_name() == "p-adic"
    }

    /// Conservative containment check: every point of `inner` lies in
    /// `self`. False negatives are possible for exotic nestings, false
    /// positives are not.
    pub fn contains_region(&self, inner: &Region) -> Result<bool> {
        match (self, inner) {
            (Region::RealBox { lo, hi }, Region::RealBox { lo: il, hi: ih }) => Ok(lo
                .iter()
                .zip(il)
                .all(|(o, i)| o <= i)
                && hi.iter().zip(ih).all(|(o, i)| o >= i)),
            (Region::Ball { ball }, Region::Ball { ball: inner }) => ball.contains_ball(inner),
            (_, Region::Union { parts }) => {
                for part in parts {
                    if !self.contains_region(part)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            (_, Region::Difference { outer, .. }) => self.contains_region(outer),
            (Region::Union { parts }, _) => {
                for part in parts {
                    if part.contains_region(inner)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            (Region::Difference { outer, inner: hole }, _) => {
                Ok(outer.contains_region(inner)? && hole.is_disjoint_from(inner)?)
            }
            (a, b) => Err(Error::SpaceMismatch(a.kind_name(), b.kind_name())),
        }
    }
}

/// An increasing sequence of finite-mass regions exhausting the space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Exhaustion {
    levels: Vec<Region>,
    clopen: bool,
}

impl Exhaustion {
    pub fn levels(&self) -> &[Region] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> &Region {
        &self.levels[n]
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Clopen levels (always true in the non-Archimedean case).
    pub fn clopen(&self) -> bool {
        self.clopen
    }
}

/// Build an exhaustion: nested balls of radius `1, p, p^2, ...` centered at
/// zero in the p-adic case (each clopen), closed boxes with strictly
/// increasing extents in the real case.
pub fn make_exhaustion(space: &PointSpace, count: usize) -> Exhaustion {
    assert!(count >= 1, "an exhaustion needs at least one level");
    match space {
        PointSpace::RealBox { dim, .. } => {
            let extents: Vec<f64> = (1..=count).map(|n| n as f64).collect();
            make_real_exhaustion(*dim, &extents)
        }
        PointSpace::PadicProduct { prime, dim, .. } => {
            let levels = (0..count)
                .map(|n| Region::Ball {
                    ball: PAdicBall::new(vec![PAdicNumber::zero(*prime); *dim], n as i64),
                })
                .collect();
            Exhaustion {
                levels,
                clopen: true,
            }
        }
    }
}

/// Real exhaustion with explicit strictly increasing extents.
pub fn make_real_exhaustion(dim: usize, extents: &[f64]) -> Exhaustion {
    assert!(!extents.is_empty());
    assert!(
        extents.windows(2).all(|w| w[0] < w[1]),
        "extents must strictly increase"
    );
    let levels = extents
        .iter()
        .map(|e| Region::RealBox {
            lo: vec![-e; dim],
            hi: vec![*e; dim],
        })
        .collect();
    Exhaustion {
        levels,
        clopen: false,
    }
}

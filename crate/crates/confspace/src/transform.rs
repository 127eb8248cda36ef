//! Concrete invertible transformations of the base space: real
//! piecewise-affine bijections and flow steps acting on one coordinate,
//! and measure-preserving permutations of disjoint equal-radius p-adic
//! balls. Every kind carries its inverse in the same representation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::local_field::PAdicBall;
use crate::space::{Point, Region};

/// An invertible map of the base space, identity outside its support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transformation {
    Identity,
    /// Continuous piecewise-affine bijection acting on coordinate `coord`,
    /// identity outside `[knots[0], knots[last]]`. Knots and images are
    /// strictly increasing with equal endpoints.
    RealPiecewiseAffine {
        coord: usize,
        knots: Vec<f64>,
        images: Vec<f64>,
    },
    /// Time-1 map of a tent-shaped vector field supported on `[a, b]` with
    /// peak `strength` at `m`. Closed-form trajectories give exact inverses.
    RealFlowStep {
        coord: usize,
        a: f64,
        m: f64,
        b: f64,
        strength: f64,
    },
    /// Rigid permutation of disjoint equal-radius balls: a point in ball
    /// `i` is translated to ball `perm[i]`. Haar-preserving.
    PadicBallPermutation {
        balls: Vec<PAdicBall>,
        perm: Vec<usize>,
    },
    /// Composition: `children[0]` applied last.
    Composite {
        children: Vec<Transformation>,
    },
}

/// Build a measure-preserving permutation of disjoint equal-radius balls.
pub fn build_ball_permutation(balls: Vec<PAdicBall>, perm: Vec<usize>) -> Result<Transformation> {
    if perm.len() != balls.len() {
        return Err(Error::NotAPermutation(format!("{perm:?}"), balls.len()));
    }
    let mut seen = vec![false; balls.len()];
    for &i in &perm {
        if i >= balls.len() || seen[i] {
            return Err(Error::NotAPermutation(format!("{perm:?}"), balls.len()));
        }
        seen[i] = true;
    }
    if let Some(first) = balls.first() {
        if balls.iter().any(|b| b.log_radius() != first.log_radius()) {
            return Err(Error::UnequalRadii);
        }
    }
    for (i, a) in balls.iter().enumerate() {
        for b in &balls[..i] {
            if a.intersects(b)? {
                return Err(Error::OverlappingBalls);
            }
        }
    }
    Ok(Transformation::PadicBallPermutation { balls, perm })
}

/// Build a continuous piecewise-affine bijection on one real coordinate.
pub fn build_piecewise_affine(
    coord: usize,
    knots: Vec<f64>,
    images: Vec<f64>,
) -> Result<Transformation> {
    if knots.len() != images.len() || knots.len() < 2 {
        return Err(Error::NonMonotone);
    }
    if !knots.windows(2).all(|w| w[0] < w[1]) || !images.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::NonMonotone);
    }
    // identity outside the window forces matching endpoints
    if knots[0] != images[0] || knots[knots.len() - 1] != images[images.len() - 1] {
        return Err(Error::NonMonotone);
    }
    Ok(Transformation::RealPiecewiseAffine {
        coord,
        knots,
        images,
    })
}

/// Build a flow step: the time-1 map of the tent field on `[a, b]` with
/// peak value `strength` at `m`.
pub fn build_flow_step(
    coord: usize,
    a: f64,
    m: f64,
    b: f64,
    strength: f64,
) -> Result<Transformation> {
    if !(a < m && m < b) || !strength.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "flow step needs a < m < b, got {a}, {m}, {b}"
        )));
    }
    Ok(Transformation::RealFlowStep {
        coord,
        a,
        m,
        b,
        strength,
    })
}

pub fn compose(psi: &Transformation, phi: &Transformation) -> Transformation {
    Transformation::Composite {
        children: vec![psi.clone(), phi.clone()],
    }
}

/// Tent field value at x.
fn tent(a: f64, m: f64, b: f64, s: f64, x: f64) -> f64 {
    if x <= a || x >= b {
        0.0
    } else if x <= m {
        s * (x - a) / (m - a)
    } else {
        s * (b - x) / (b - m)
    }
}

/// Flow of the tent field for time `t` (any sign). Piecewise-linear fields
/// integrate to exponentials; crossings of the peak are handled by solving
/// the crossing time in closed form.
fn tent_flow(a: f64, m: f64, b: f64, s: f64, mut x: f64, t: f64) -> f64 {
    if s == 0.0 || x <= a || x >= b {
        return x;
    }
    // flow of the field with strength -s equals the reverse-time flow
    let (s, mut t) = if s < 0.0 { (-s, -t) } else { (s, t) };
    let alpha = s / (m - a); // left piece: v = alpha (x - a)
    let beta = s / (b - m); //  right piece: v = beta (b - x)
    while t != 0.0 {
        if t > 0.0 {
            if x < m {
                // rightward inside the left piece
                let t_cross = ((m - a) / (x - a)).ln() / alpha;
                if t <= t_cross {
                    return a + (x - a) * (alpha * t).exp();
                }
                x = m;
                t -= t_cross;
            } else {
                // rightward inside the right piece, never reaches b
                return b - (b - x) * (-beta * t).exp();
            }
        } else if x > m {
            // leftward inside the right piece
            let t_cross = -((b - m) / (b - x)).ln() / beta;
            if t >= t_cross {
                return b - (b - x) * (-beta * t).exp();
            }
            x = m;
            t -= t_cross;
        } else {
            // leftward inside the left piece, never reaches a
            return a + (x - a) * (alpha * t).exp();
        }
    }
    x
}

impl Transformation {
    pub fn identity() -> Self {
        Transformation::Identity
    }

    /// Apply to a single real coordinate value (real 1-d kinds only).
    fn apply_coord(&self, x: f64) -> f64 {
        match self {
            Transformation::RealPiecewiseAffine { knots, images, .. } => {
                let n = knots.len();
                if x <= knots[0] || x >= knots[n - 1] {
                    return x;
                }
                let i = match knots.binary_search_by(|k| k.partial_cmp(&x).unwrap()) {
                    Ok(i) => i,
                    Err(i) => i - 1,
                };
                let slope = (images[i + 1] - images[i]) / (knots[i + 1] - knots[i]);
                images[i] + slope * (x - knots[i])
            }
            Transformation::RealFlowStep {
                a, m, b, strength, ..
            } => tent_flow(*a, *m, *b, *strength, x, 1.0),
            _ => x,
        }
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        match self {
            Transformation::Identity => Ok(x.clone()),
            Transformation::RealPiecewiseAffine { coord, .. }
            | Transformation::RealFlowStep { coord, .. } => match x {
                Point::Real(v) => {
                    if *coord >= v.len() {
                        return Err(Error::OutsideDomain);
                    }
                    let mut out = v.clone();
                    out[*coord] = self.apply_coord(v[*coord]);
                    Ok(Point::Real(out))
                }
                Point::Padic(_) => Err(Error::SpaceMismatch("real", "p-adic")),
            },
            Transformation::PadicBallPermutation { balls, perm } => match x {
                Point::Padic(v) => {
                    for (i, ball) in balls.iter().enumerate() {
                        if ball.contains(v)? {
                            let src = ball.center();
                            let dst = balls[perm[i]].center();
                            let mut out = Vec::with_capacity(v.len());
                            for ((xi, ci), di) in v.iter().zip(src).zip(dst) {
                                out.push(xi.sub(ci)?.add(di)?);
                            }
                            return Ok(Point::Padic(out));
                        }
                    }
                    Ok(x.clone())
                }
                Point::Real(_) => Err(Error::SpaceMismatch("p-adic", "real")),
            },
            Transformation::Composite { children } => {
                let mut y = x.clone();
                for child in children.iter().rev() {
                    y = child.apply(&y)?;
                }
                Ok(y)
            }
        }
    }

    /// The inverse in the same representation.
    pub fn inverse(&self) -> Transformation {
        match self {
            Transformation::Identity => Transformation::Identity,
            Transformation::RealPiecewiseAffine {
                coord,
                knots,
                images,
            } => Transformation::RealPiecewiseAffine {
                coord: *coord,
                knots: images.clone(),
                images: knots.clone(),
            },
            Transformation::RealFlowStep {
                coord,
                a,
                m,
                b,
                strength,
            } => Transformation::RealFlowStep {
                coord: *coord,
                a: *a,
                m: *m,
                b: *b,
                strength: -strength,
            },
            Transformation::PadicBallPermutation { balls, perm } => {
                let mut inv = vec![0; perm.len()];
                for (i, &j) in perm.iter().enumerate() {
                    inv[j] = i;
                }
                Transformation::PadicBallPermutation {
                    balls: balls.clone(),
                    perm: inv,
                }
            }
            Transformation::Composite { children } => Transformation::Composite {
                children: children.iter().rev().map(|c| c.inverse()).collect(),
            },
        }
    }

    /// `|det D psi^{-1}(x)|`: the volume factor of the inverse at `x`.
    ///
    /// Exactly 1 for identity and ball permutations (rigid translations);
    /// the reciprocal slope of the active piece for piecewise-affine maps;
    /// the field-value ratio `v(phi_{-1}(x)) / v(x)` for flow steps.
    pub fn inverse_volume_factor(&self, x: &Point) -> Result<f64> {
        match self {
            Transformation::Identity | Transformation::PadicBallPermutation { .. } => Ok(1.0),
            Transformation::RealPiecewiseAffine {
                coord,
                knots,
                images,
            } => match x {
                Point::Real(v) => {
                    let y = v[*coord];
                    let n = images.len();
                    if y <= images[0] || y >= images[n - 1] {
                        return Ok(1.0);
                    }
                    let i = match images.binary_search_by(|k| k.partial_cmp(&y).unwrap()) {
                        Ok(i) => i,
                        Err(i) => i - 1,
                    };
                    let slope = (images[i + 1] - images[i]) / (knots[i + 1] - knots[i]);
                    Ok(1.0 / slope)
                }
                Point::Padic(_) => Err(Error::SpaceMismatch("real", "p-adic")),
            },
            Transformation::RealFlowStep {
                coord,
                a,
                m,
                b,
                strength,
            } => match x {
                Point::Real(v) => {
                    let y = v[*coord];
                    let vy = tent(*a, *m, *b, *strength, y);
                    if vy == 0.0 {
                        return Ok(1.0);
                    }
                    let pre = tent_flow(*a, *m, *b, *strength, y, -1.0);
                    Ok(tent(*a, *m, *b, *strength, pre) / vy)
                }
                Point::Padic(_) => Err(Error::SpaceMismatch("real", "p-adic")),
            },
            Transformation::Composite { children } => {
                // (psi phi)^{-1} = phi^{-1} psi^{-1}: chain rule through the
                // partially inverted points
                let mut factor = 1.0;
                let mut y = x.clone();
                for child in children {
                    factor *= child.inverse_volume_factor(&y)?;
                    y = child.inverse().apply(&y)?;
                }
                Ok(factor)
            }
        }
    }

    /// Whether the transformation preserves the reference measure exactly
    /// (Haar for p-adic kinds, Lebesgue for real kinds).
    pub fn is_isometry(&self) -> bool {
        match self {
            Transformation::Identity | Transformation::PadicBallPermutation { .. } => true,
            Transformation::Composite { children } => children.iter().all(|c| c.is_isometry()),
            _ => false,
        }
    }

    /// Conservative check that everything the map moves stays inside
    /// `region` (so does its image).
    pub fn supported_within(&self, region: &Region) -> Result<bool> {
        match self {
            Transformation::Identity => Ok(true),
            Transformation::RealPiecewiseAffine { coord, knots, .. } => {
                real_interval_within(region, *coord, knots[0], knots[knots.len() - 1])
            }
            Transformation::RealFlowStep { coord, a, b, .. } => {
                real_interval_within(region, *coord, *a, *b)
            }
            Transformation::PadicBallPermutation { balls, .. } => {
                for ball in balls {
                    match region {
                        Region::Ball { ball: big } => {
                            if !big.contains_ball(ball)? {
                                return Ok(false);
                            }
                        }
                        _ => return Ok(false),
                    }
                }
                Ok(true)
            }
            Transformation::Composite { children } => {
                for c in children {
                    if !c.supported_within(region)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    /// The union of support intervals on the acting coordinate for the real
    /// kinds, used by quadrature.
    pub fn real_support_interval(&self) -> Option<(usize, f64, f64)> {
        match self {
            Transformation::RealPiecewiseAffine { coord, knots, .. } => {
                Some((*coord, knots[0], knots[knots.len() - 1]))
            }
            Transformation::RealFlowStep { coord, a, b, .. } => Some((*coord, *a, *b)),
            Transformation::Composite { children } => {
                let mut acc: Option<(usize, f64, f64)> = None;
                for c in children {
                    match (acc, c.real_support_interval()) {
                        (None, s) => acc = s,
                        (Some(_), None) => {}
                        (Some((ca, lo, hi)), Some((cb, l2, h2))) => {
                            if ca != cb {
                                return None;
                            }
                            acc = Some((ca, lo.min(l2), hi.max(h2)));
                        }
                    }
                }
                acc
            }
            _ => None,
        }
    }
}

fn real_interval_within(region: &Region, coord: usize, lo: f64, hi: f64) -> Result<bool> {
    match region {
        Region::RealBox { lo: rl, hi: rh } => {
            if coord >= rl.len() {
                return Ok(false);
            }
            Ok(rl[coord] <= lo && hi <= rh[coord])
        }
        Region::Union { parts } => {
            for part in parts {
                if real_interval_within(part, coord, lo, hi)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        _ => Ok(false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_field::PAdicNumber;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn q(p: u64, n: i64) -> PAdicNumber {
        PAdicNumber::from_integer(p, n)
    }

    #[test]
    fn identity_fixes_everything() {
        let id = Transformation::identity();
        let x = Point::real1(1.5);
        assert_eq!(id.apply(&x).unwrap(), x);
        assert_eq!(id.inverse_volume_factor(&x).unwrap(), 1.0);
    }

    #[test]
    fn piecewise_affine_worked_example() {
        // knots (0,1,3) -> images (0,2,3): slope 2 then 1/2
        let f = build_piecewise_affine(0, vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 3.0]).unwrap();
        assert_eq!(f.apply(&Point::real1(0.5)).unwrap(), Point::real1(1.0));
        assert_eq!(f.apply(&Point::real1(2.0)).unwrap(), Point::real1(2.5));
        assert_eq!(f.apply(&Point::real1(-1.0)).unwrap(), Point::real1(-1.0));
        // inverse volume factor = 1/slope on the image of each piece
        assert_eq!(f.inverse_volume_factor(&Point::real1(1.0)).unwrap(), 0.5);
        assert_eq!(f.inverse_volume_factor(&Point::real1(2.5)).unwrap(), 2.0);
        assert_eq!(f.inverse_volume_factor(&Point::real1(5.0)).unwrap(), 1.0);
    }

    #[test]
    fn piecewise_affine_requires_monotone_endpoints() {
        assert!(build_piecewise_affine(0, vec![0.0, 1.0], vec![0.0, 2.0]).is_err());
        assert!(build_piecewise_affine(0, vec![0.0, 2.0, 1.0], vec![0.0, 0.5, 1.0]).is_err());
        let idlike = build_piecewise_affine(0, vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(idlike.apply(&Point::real1(0.3)).unwrap(), Point::real1(0.3));
    }

    #[test]
    fn piecewise_affine_roundtrip() {
        let f = build_piecewise_affine(0, vec![-2.0, -0.5, 1.0, 4.0], vec![-2.0, 0.8, 2.5, 4.0])
            .unwrap();
        let g = f.inverse();
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..10_000 {
            let x = rng.gen_range(-3.0..5.0);
            let y = match f.apply(&Point::real1(x)).unwrap() {
                Point::Real(v) => v[0],
                _ => unreachable!(),
            };
            let back = match g.apply(&Point::real1(y)).unwrap() {
                Point::Real(v) => v[0],
                _ => unreachable!(),
            };
            assert!((back - x).abs() < 1e-10, "roundtrip drift at {x}");
        }
    }

    #[test]
    fn flow_step_roundtrip_and_support() {
        let f = build_flow_step(0, -1.0, 0.2, 2.0, 0.7).unwrap();
        let g = f.inverse();
        let mut rng = StdRng::seed_from_u64(22);
        for _ in 0..10_000 {
            let x = rng.gen_range(-2.0..3.0);
            let y = match f.apply(&Point::real1(x)).unwrap() {
                Point::Real(v) => v[0],
                _ => unreachable!(),
            };
            if x <= -1.0 || x >= 2.0 {
                assert_eq!(y, x, "identity outside support");
            } else {
                assert!(y > x, "positive field flows right");
            }
            let back = match g.apply(&Point::real1(y)).unwrap() {
                Point::Real(v) => v[0],
                _ => unreachable!(),
            };
            assert!((back - x).abs() < 1e-10, "roundtrip drift at {x}");
        }
    }

    #[test]
    fn flow_step_volume_factor_matches_finite_differences() {
        let f = build_flow_step(0, -1.0, 0.2, 2.0, 0.7).unwrap();
        let h = 1e-6;
        let apply = |x: f64| match f.apply(&Point::real1(x)).unwrap() {
            Point::Real(v) => v[0],
            _ => unreachable!(),
        };
        for x in [-0.8, -0.3, 0.0, 0.4, 1.0, 1.7] {
            let y = apply(x);
            let fwd = (apply(x + h) - apply(x - h)) / (2.0 * h);
            let inv_at_y = f.inverse_volume_factor(&Point::real1(y)).unwrap();
            assert!(
                (inv_at_y - 1.0 / fwd).abs() < 1e-4,
                "x={x}: {inv_at_y} vs {}",
                1.0 / fwd
            );
        }
    }

    fn two_ball_swap() -> Transformation {
        let b0 = PAdicBall::new(vec![q(3, 0)], -1);
        let b1 = PAdicBall::new(vec![q(3, 1)], -1);
        build_ball_permutation(vec![b0, b1], vec![1, 0]).unwrap()
    }

    #[test]
    fn composite_support_stays_inside_union() {
        // points outside the union of child supports are fixed
        let f = build_piecewise_affine(0, vec![0.0, 1.0, 2.0], vec![0.0, 1.5, 2.0]).unwrap();
        let g = build_flow_step(0, 3.0, 3.5, 4.0, 0.5).unwrap();
        let both = compose(&f, &g);
        let (_, lo, hi) = both.real_support_interval().unwrap();
        assert_eq!((lo, hi), (0.0, 4.0));
        let mut rng = StdRng::seed_from_u64(29);
        for _ in 0..5_000 {
            let x = rng.gen_range(-6.0..8.0);
            if (0.0..=4.0).contains(&x) {
                continue;
            }
            assert_eq!(both.apply(&Point::real1(x)).unwrap(), Point::real1(x));
        }
    }

    #[test]
    fn ball_swap_translates_centers() {
        let swap = two_ball_swap();
        // x in O_1 maps to x - c_1 + c_2
        let x = Point::padic1(q(3, 3));
        let y = swap.apply(&x).unwrap();
        assert_eq!(y, Point::padic1(q(3, 4)));
        // applying twice is the identity
        assert_eq!(swap.apply(&y).unwrap(), x);
        // points off the balls stay fixed
        let far = Point::padic1(q(3, 2));
        assert_eq!(swap.apply(&far).unwrap(), far);
        assert!(swap.is_isometry());
        assert_eq!(swap.inverse_volume_factor(&x).unwrap(), 1.0);
    }

    #[test]
    fn ball_permutation_validation() {
        let b0 = PAdicBall::new(vec![q(3, 0)], -1);
        let b1 = PAdicBall::new(vec![q(3, 1)], -1);
        let wide = PAdicBall::new(vec![q(3, 1)], 0);
        assert!(matches!(
            build_ball_permutation(vec![b0.clone(), wide], vec![1, 0]),
            Err(Error::UnequalRadii)
        ));
        let b0bis = PAdicBall::new(vec![q(3, 3)], -1); // same ball as b0
        assert!(matches!(
            build_ball_permutation(vec![b0.clone(), b0bis], vec![1, 0]),
            Err(Error::OverlappingBalls)
        ));
        assert!(matches!(
            build_ball_permutation(vec![b0.clone(), b1], vec![0, 0]),
            Err(Error::NotAPermutation(..))
        ));
        assert_eq!(
            build_ball_permutation(vec![b0], vec![0])
                .unwrap()
                .apply(&Point::padic1(q(3, 3)))
                .unwrap(),
            Point::padic1(q(3, 3)),
            "identity permutation acts trivially"
        );
    }

    #[test]
    fn three_cycle_has_order_three() {
        let balls: Vec<PAdicBall> = (0..3).map(|i| PAdicBall::new(vec![q(5, i)], -1)).collect();
        let cycle = build_ball_permutation(balls, vec![1, 2, 0]).unwrap();
        let x = Point::padic1(q(5, 5));
        let mut y = x.clone();
        for _ in 0..3 {
            y = cycle.apply(&y).unwrap();
        }
        assert_eq!(y, x);
        assert_ne!(cycle.apply(&x).unwrap(), x);
    }

    #[test]
    fn composition_and_group_axioms() {
        let f = build_piecewise_affine(0, vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 3.0]).unwrap();
        let g = build_flow_step(0, -2.0, -1.0, 0.0, 0.4).unwrap();
        let fg = compose(&f, &g);
        let fid = compose(&f, &Transformation::identity());
        let finv = compose(&f, &f.inverse());
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..10_000 {
            let x = Point::real1(rng.gen_range(-3.0..4.0));
            let lhs = fg.apply(&x).unwrap();
            let rhs = f.apply(&g.apply(&x).unwrap()).unwrap();
            assert_eq!(lhs, rhs, "compose(f,g) = f after g");
            assert_eq!(fid.apply(&x).unwrap(), f.apply(&x).unwrap());
            let round = match finv.apply(&x).unwrap() {
                Point::Real(v) => v[0],
                _ => unreachable!(),
            };
            let orig = match &x {
                Point::Real(v) => v[0],
                _ => unreachable!(),
            };
            assert!((round - orig).abs() < 1e-10);
        }
    }

    #[test]
    fn disjoint_support_swaps_commute() {
        // four pairwise disjoint radius-1/3 balls: residues 0, 1, 2 and a
        // center outside the unit ball
        let centers = [q(3, 0), q(3, 1), q(3, 2), PAdicNumber::from_ratio(3, 1, 3)];
        let b: Vec<PAdicBall> = centers
            .iter()
            .map(|c| PAdicBall::new(vec![c.clone()], -1))
            .collect();
        let s01 = build_ball_permutation(vec![b[0].clone(), b[1].clone()], vec![1, 0]).unwrap();
        let s23 = build_ball_permutation(vec![b[2].clone(), b[3].clone()], vec![1, 0]).unwrap();
        for n in 0..20 {
            let x = Point::padic1(q(3, n));
            let ab = compose(&s01, &s23).apply(&x).unwrap();
            let ba = compose(&s23, &s01).apply(&x).unwrap();
            assert_eq!(ab, ba);
        }
    }

    #[test]
    fn support_containment() {
        let f = build_piecewise_affine(0, vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 3.0]).unwrap();
        let window = Region::real_interval(-4.0, 4.0);
        let tight = Region::real_interval(1.0, 2.0);
        assert!(f.supported_within(&window).unwrap());
        assert!(!f.supported_within(&tight).unwrap());

        let swap = two_ball_swap();
        let big = Region::Ball {
            ball: PAdicBall::new(vec![q(3, 0)], 2),
        };
        let small = Region::Ball {
            ball: PAdicBall::new(vec![q(3, 0)], -1),
        };
        assert!(swap.supported_within(&big).unwrap());
        assert!(!swap.supported_within(&small).unwrap());
    }

    #[test]
    fn serialization_roundtrip() {
        let f = build_piecewise_affine(0, vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 3.0]).unwrap();
        let swap = two_ball_swap();
        for t in [f.clone(), swap, compose(&f, &Transformation::identity())] {
            let json = serde_json::to_string(&t).unwrap();
            let back: Transformation = serde_json::from_str(&json).unwrap();
            assert_eq!(back, t);
        }
    }
}

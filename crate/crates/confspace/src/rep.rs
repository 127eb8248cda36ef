//! Finite-rank realizations of the unitary operators associated with the
//! Poisson law: the quasi-regular action on dictionary functions over
//! configurations, its twist by symmetric-group representations through
//! the cross-section cocycle, Monte-Carlo inner products, and the
//! spherical discriminator separating intensity-scaled laws.

use rand::Rng;
use serde::Serialize;

use crate::config::{cocycle, FiniteConfig, PermutationCocycle};
use crate::error::{Error, Result};
use crate::numerics::mean_stderr;
use crate::poisson::{rho_poisson, spherical_function, PoissonLaw, SphericalMode};
use crate::space::{Point, Region};
use crate::transform::Transformation;

/// Bounded measurable functions of a configuration, symmetric in the
/// points by construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DictionaryFunction {
    /// The constant function (f_0 for value 1).
    Constant { value: f64 },
    /// `1[N_A(gamma) = count]`.
    CountIndicator { region: Region, count: usize },
    /// `N_A(gamma)` itself.
    Count { region: Region },
    /// `prod_{x in gamma} g(x)` for the two-level function `g` equal to
    /// `inside` on the region and `outside` off it.
    ExpLinear {
        region: Region,
        inside: f64,
        outside: f64,
    },
    /// Power sum `sum_{x in gamma} x^degree` of 1-d real points.
    SymmetricPoly { degree: u32 },
}

impl DictionaryFunction {
    pub fn f0() -> Self {
        DictionaryFunction::Constant { value: 1.0 }
    }

    pub fn eval(&self, gamma: &FiniteConfig) -> Result<f64> {
        match self {
            DictionaryFunction::Constant { value } => Ok(*value),
            DictionaryFunction::CountIndicator { region, count } => {
                Ok(if gamma.count(region)? == *count {
                    1.0
                } else {
                    0.0
                })
            }
            DictionaryFunction::Count { region } => Ok(gamma.count(region)? as f64),
            DictionaryFunction::ExpLinear {
                region,
                inside,
                outside,
            } => {
                let mut prod = 1.0;
                for x in gamma.points() {
                    prod *= if region.contains(x)? {
                        *inside
                    } else {
                        *outside
                    };
                }
                Ok(prod)
            }
            DictionaryFunction::SymmetricPoly { degree } => {
                let mut acc = 0.0;
                for x in gamma.points() {
                    match x {
                        Point::Real(v) if v.len() == 1 => acc += v[0].powi(*degree as i32),
                        _ => {
                            return Err(Error::InvalidParameter(
                                "power sums need 1-d real points".into(),
                            ))
                        }
                    }
                }
                Ok(acc)
            }
        }
    }
}

/// A unitary representation of the symmetric group on W.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetricGroupRep {
    /// dim W = 1, q(sigma) = 1.
    Trivial,
    /// dim W = 1, q(sigma) = sgn(sigma).
    Sign,
    /// dim W = n, q(sigma) the permutation matrix `(q(sigma) v)_{sigma(i)}
    /// = v_i`, a homomorphism for the cocycle composition law.
    PermutationMatrices,
}

impl SymmetricGroupRep {
    pub fn dim(&self, n: usize) -> usize {
        match self {
            SymmetricGroupRep::Trivial | SymmetricGroupRep::Sign => 1,
            SymmetricGroupRep::PermutationMatrices => n,
        }
    }

    /// Apply `q(sigma)` to a W-vector.
    pub fn apply(&self, sigma: &PermutationCocycle, v: &[f64]) -> Result<Vec<f64>> {
        match self {
            SymmetricGroupRep::Trivial => Ok(v.to_vec()),
            SymmetricGroupRep::Sign => Ok(v.iter().map(|x| x * sigma.sign() as f64).collect()),
            SymmetricGroupRep::PermutationMatrices => {
                if v.len() != sigma.n() {
                    return Err(Error::LengthMismatch(v.len(), sigma.n()));
                }
                let mut out = vec![0.0; v.len()];
                for (i, &x) in v.iter().enumerate() {
                    out[sigma.mapping()[i]] = x;
                }
                Ok(out)
            }
        }
    }
}

/// A W-valued dictionary function on `B^n`: a scalar dictionary function
/// times a fixed W-vector.
#[derive(Debug, Clone, Serialize)]
pub struct WDictionary {
    pub scalar: DictionaryFunction,
    pub vector: Vec<f64>,
}

impl WDictionary {
    pub fn eval(&self, gamma: &FiniteConfig) -> Result<Vec<f64>> {
        let s = self.scalar.eval(gamma)?;
        Ok(self.vector.iter().map(|v| s * v).collect())
    }
}

/// Descriptor of a representation operator: the law, the group element,
/// and an optional symmetric-group twist.
#[derive(Debug, Clone)]
pub struct RepOperator {
    pub law: PoissonLaw,
    pub psi: Transformation,
    pub q: Option<SymmetricGroupRep>,
}

/// `U_m(psi) f (gamma) = rho^{1/2}(psi, gamma) f(psi^{-1} gamma)`.
pub fn apply_u(op: &RepOperator, f: &DictionaryFunction, gamma: &FiniteConfig) -> Result<f64> {
    let factor = rho_poisson(&op.law, &op.psi, gamma)?.sqrt();
    let pulled = gamma.map(&op.psi.inverse())?;
    Ok(factor * f.eval(&pulled)?)
}

/// `V^q_m(psi) f (gamma) = rho^{1/2}(psi, gamma) q(sigma(psi, gamma))
/// f(psi^{-1} gamma)` on n-point configurations.
pub fn apply_vq(op: &RepOperator, f: &WDictionary, gamma: &FiniteConfig) -> Result<Vec<f64>> {
    let q = op.q.as_ref().ok_or_else(|| {
        Error::InvalidParameter("apply_vq needs a symmetric-group representation".into())
    })?;
    if q.dim(gamma.card()) != f.vector.len() {
        return Err(Error::CardinalityMismatch(
            q.dim(gamma.card()),
            f.vector.len(),
        ));
    }
    let sigma = cocycle(&op.psi, gamma)?;
    let factor = rho_poisson(&op.law, &op.psi, gamma)?.sqrt();
    let pulled = gamma.map(&op.psi.inverse())?;
    let value = f.eval(&pulled)?;
    let twisted = q.apply(&sigma, &value)?;
    Ok(twisted.iter().map(|x| factor * x).collect())
}

/// Monte-Carlo estimate of the inner product `int f g dP_m`.
pub fn mc_inner_product(
    f: &DictionaryFunction,
    g: &DictionaryFunction,
    law: &PoissonLaw,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::ZeroSamples);
    }
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        let gamma = law.sample(rng)?;
        values.push(f.eval(&gamma)? * g.eval(&gamma)?);
    }
    Ok(mean_stderr(&values))
}

/// One pairwise entry of a unitarity report.
#[derive(Debug, Clone, Serialize)]
pub struct UnitarityEntry {
    pub i: usize,
    pub j: usize,
    pub transported: f64,
    pub direct: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct UnitarityReport {
    pub entries: Vec<UnitarityEntry>,
    pub max_abs_z: f64,
}

/// Check `<U f, U g> = <f, g>` for all dictionary pairs by importance
/// reweighting: both sides are estimated on the same sampled
/// configurations, so the difference has mean zero under unitarity.
pub fn unitarity_check(
    op: &RepOperator,
    dictionary: &[DictionaryFunction],
    samples: usize,
    rng: &mut impl Rng,
) -> Result<UnitarityReport> {
    if samples == 0 {
        return Err(Error::ZeroSamples);
    }
    let inv = op.psi.inverse();
    let mut diffs: Vec<Vec<f64>> = Vec::new();
    let mut transported_sums = vec![vec![0.0; dictionary.len()]; dictionary.len()];
    let mut direct_sums = vec![vec![0.0; dictionary.len()]; dictionary.len()];
    for _ in 0..dictionary.len() * dictionary.len() {
        diffs.push(Vec::with_capacity(samples));
    }
    for _ in 0..samples {
        let gamma = op.law.sample(rng)?;
        let weight = rho_poisson(&op.law, &op.psi, &gamma)?;
        let pulled = gamma.map(&inv)?;
        for (i, f) in dictionary.iter().enumerate() {
            for (j, g) in dictionary.iter().enumerate() {
                let transported = weight * f.eval(&pulled)? * g.eval(&pulled)?;
                let direct = f.eval(&gamma)? * g.eval(&gamma)?;
                transported_sums[i][j] += transported;
                direct_sums[i][j] += direct;
                diffs[i * dictionary.len() + j].push(transported - direct);
            }
        }
    }
    let mut entries = Vec::new();
    let mut max_abs_z = 0.0f64;
    for i in 0..dictionary.len() {
        for j in 0..dictionary.len() {
            let (mean, se) = mean_stderr(&diffs[i * dictionary.len() + j]);
            let z = if se > 0.0 { mean / se } else { 0.0 };
            max_abs_z = max_abs_z.max(z.abs());
            entries.push(UnitarityEntry {
                i,
                j,
                transported: transported_sums[i][j] / samples as f64,
                direct: direct_sums[i][j] / samples as f64,
                z,
            });
        }
    }
    Ok(UnitarityReport { entries, max_abs_z })
}

#[derive(Debug, Clone, Serialize)]
pub struct HomomorphismReport {
    /// Largest pointwise deviation of `U(psi phi)` from `U(psi) U(phi)`.
    pub max_abs_dev: f64,
    /// Whether the cocycle factorization held exactly on every sample.
    pub cocycle_exact: bool,
}

/// Pointwise comparison of `U_m(psi phi) f` against `U_m(psi) U_m(phi) f`
/// on sampled configurations, plus the exact cocycle factorization
/// `sigma(psi phi, gamma) = sigma(psi, gamma) sigma(phi, psi^{-1} gamma)`.
pub fn homomorphism_check(
    law: &PoissonLaw,
    psi: &Transformation,
    phi: &Transformation,
    dictionary: &[DictionaryFunction],
    samples: usize,
    rng: &mut impl Rng,
) -> Result<HomomorphismReport> {
    if samples == 0 {
        return Err(Error::ZeroSamples);
    }
    let composed = crate::transform::compose(psi, phi);
    let op_comp = RepOperator {
        law: law.clone(),
        psi: composed.clone(),
        q: None,
    };
    let op_phi = RepOperator {
        law: law.clone(),
        psi: phi.clone(),
        q: None,
    };
    let mut max_abs_dev = 0.0f64;
    let mut cocycle_exact = true;
    for _ in 0..samples {
        let gamma = law.sample(rng)?;
        for f in dictionary {
            let lhs = apply_u(&op_comp, f, &gamma)?;
            // (U(psi) U(phi) f)(gamma) = rho^{1/2}(psi, gamma) (U(phi) f)(psi^{-1} gamma)
            let pulled = gamma.map(&psi.inverse())?;
            let rhs = rho_poisson(law, psi, &gamma)?.sqrt() * apply_u(&op_phi, f, &pulled)?;
            max_abs_dev = max_abs_dev.max((lhs - rhs).abs());
        }
        if !gamma.is_empty() {
            let lhs = cocycle(&composed, &gamma)?;
            let pulled = gamma.map(&psi.inverse())?;
            let rhs = cocycle(psi, &gamma)?.compose(&cocycle(phi, &pulled)?);
            if lhs != rhs {
                cocycle_exact = false;
            }
        }
    }
    Ok(HomomorphismReport {
        max_abs_dev,
        cocycle_exact,
    })
}

/// Spherical values of one candidate witness under the two scaled laws.
#[derive(Debug, Clone, Serialize)]
pub struct DiscriminatorEntry {
    pub index: usize,
    pub u1_quadrature: f64,
    pub u2_quadrature: f64,
    pub u1_mc: f64,
    pub u1_stderr: f64,
    pub u2_mc: f64,
    pub u2_stderr: f64,
    pub separation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscriminatorReport {
    pub entries: Vec<DiscriminatorEntry>,
    /// Index of the transformation maximizing the separation, when any
    /// candidate separates at all.
    pub witness: Option<usize>,
    /// Whether the witness separation exceeds the combined 3-sigma error
    /// bars of the Monte-Carlo estimates.
    pub separated_beyond_error_bars: bool,
}

/// Evaluate `u_{l1 m}` and `u_{l2 m}` on a set of candidate witnesses by
/// both modes; report the best separator. All-isometry candidate sets
/// cannot produce a witness (every spherical value is 1) and are reported
/// as such.
pub fn spherical_discriminator(
    law: &PoissonLaw,
    lambda1: f64,
    lambda2: f64,
    psis: &[Transformation],
    samples: usize,
    rng: &mut impl Rng,
) -> Result<DiscriminatorReport> {
    let law1 = law.with_intensity(lambda1);
    let law2 = law.with_intensity(lambda2);
    let mut entries = Vec::with_capacity(psis.len());
    for (index, psi) in psis.iter().enumerate() {
        let u1q = spherical_function(&law1, psi, SphericalMode::Quadrature, 0, rng)?;
        let u2q = spherical_function(&law2, psi, SphericalMode::Quadrature, 0, rng)?;
        let u1m = spherical_function(&law1, psi, SphericalMode::MonteCarlo, samples, rng)?;
        let u2m = spherical_function(&law2, psi, SphericalMode::MonteCarlo, samples, rng)?;
        entries.push(DiscriminatorEntry {
            index,
            u1_quadrature: u1q.value,
            u2_quadrature: u2q.value,
            u1_mc: u1m.value,
            u1_stderr: u1m.stderr,
            u2_mc: u2m.value,
            u2_stderr: u2m.stderr,
            separation: (u1q.value - u2q.value).abs(),
        });
    }
    let witness = entries
        .iter()
        .max_by(|a, b| a.separation.partial_cmp(&b.separation).unwrap())
        .filter(|e| e.separation > 0.0)
        .map(|e| e.index);
    let separated = witness
        .map(|w| {
            let e = &entries[w];
            let bars = 3.0 * (e.u1_stderr * e.u1_stderr + e.u2_stderr * e.u2_stderr).sqrt();
            (e.u1_mc - e.u2_mc).abs() > bars
        })
        .unwrap_or(false);
    Ok(DiscriminatorReport {
        entries,
        witness,
        separated_beyond_error_bars: separated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_field::{PAdicBall, PAdicNumber};
    use crate::measure::MeasureModel;
    use crate::transform::{build_ball_permutation, build_piecewise_affine};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lebesgue_law(lo: f64, hi: f64) -> PoissonLaw {
        PoissonLaw::new(
            MeasureModel::Lebesgue { dim: 1 },
            Region::real_interval(lo, hi),
            1.0,
        )
        .unwrap()
    }

    fn haar_law() -> PoissonLaw {
        PoissonLaw::new(
            MeasureModel::Haar { prime: 3, dim: 1 },
            Region::Ball {
                ball: PAdicBall::new(vec![PAdicNumber::zero(3)], 1),
            },
            1.0,
        )
        .unwrap()
    }

    fn two_ball_swap() -> Transformation {
        let b0 = PAdicBall::new(vec![PAdicNumber::from_integer(3, 0)], -1);
        let b1 = PAdicBall::new(vec![PAdicNumber::from_integer(3, 1)], -1);
        build_ball_permutation(vec![b0, b1], vec![1, 0]).unwrap()
    }

    #[test]
    fn apply_u_examples() {
        let law = lebesgue_law(-4.0, 4.0);
        let region = Region::real_interval(0.0, 1.0);
        let f = DictionaryFunction::CountIndicator { region, count: 1 };
        let gamma = FiniteConfig::new(vec![Point::real1(0.5), Point::real1(2.0)]).unwrap();
        // identity leaves f(gamma) unchanged
        let id_op = RepOperator {
            law: law.clone(),
            psi: Transformation::identity(),
            q: None,
        };
        assert_eq!(
            apply_u(&id_op, &f, &gamma).unwrap(),
            f.eval(&gamma).unwrap()
        );
        // constant f recovers the square root of the product factor
        let pw = build_piecewise_affine(0, vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 3.0]).unwrap();
        let op = RepOperator {
            law: law.clone(),
            psi: pw.clone(),
            q: None,
        };
        let f0 = DictionaryFunction::f0();
        let got = apply_u(&op, &f0, &gamma).unwrap();
        let expect = rho_poisson(&law, &pw, &gamma).unwrap().sqrt();
        assert_eq!(got, expect);
    }

    #[test]
    fn apply_u_padic_swap_exact() {
        let law = haar_law();
        let swap = two_ball_swap();
        let op = RepOperator {
            law: law.clone(),
            psi: swap.clone(),
            q: None,
        };
        // count indicator on a swapped ball evaluates on the pre-swap side
        // with factor exactly 1
        let b1 = Region::Ball {
            ball: PAdicBall::new(vec![PAdicNumber::from_integer(3, 1)], -1),
        };
        let f = DictionaryFunction::CountIndicator {
            region: b1.clone(),
            count: 1,
        };
        let gamma =
            FiniteConfig::new(vec![Point::padic1(PAdicNumber::from_integer(3, 0))]).unwrap();
        // gamma has its point in B(0,1/3); the pulled-back configuration
        // moves it into B(1,1/3)
        assert_eq!(f.eval(&gamma).unwrap(), 0.0);
        assert_eq!(apply_u(&op, &f, &gamma).unwrap(), 1.0);
    }

    #[test]
    fn sign_twist_is_exactly_minus_one() {
        let law = haar_law();
        let swap = two_ball_swap();
        let op = RepOperator {
            law,
            psi: swap,
            q: Some(SymmetricGroupRep::Sign),
        };
        let gamma = FiniteConfig::new(vec![
            Point::padic1(PAdicNumber::from_integer(3, 0)),
            Point::padic1(PAdicNumber::from_integer(3, 1)),
        ])
        .unwrap();
        let f = WDictionary {
            scalar: DictionaryFunction::f0(),
            vector: vec![1.0],
        };
        let out = apply_vq(&op, &f, &gamma).unwrap();
        assert_eq!(
            out,
            vec![-1.0],
            "transposition under the sign representation"
        );
        // identity gives back f(gamma)
        let id_op = RepOperator {
            law: haar_law(),
            psi: Transformation::identity(),
            q: Some(SymmetricGroupRep::Sign),
        };
        assert_eq!(apply_vq(&id_op, &f, &gamma).unwrap(), vec![1.0]);
    }

    #[test]
    fn trivial_twist_matches_apply_u() {
        let law = haar_law();
        let swap = two_ball_swap();
        let op_v = RepOperator {
            law: law.clone(),
            psi: swap.clone(),
            q: Some(SymmetricGroupRep::Trivial),
        };
        let op_u = RepOperator {
            law,
            psi: swap,
            q: None,
        };
        let gamma = FiniteConfig::new(vec![
            Point::padic1(PAdicNumber::from_integer(3, 0)),
            Point::padic1(PAdicNumber::from_integer(3, 1)),
        ])
        .unwrap();
        let scalar = DictionaryFunction::ExpLinear {
            region: Region::Ball {
                ball: PAdicBall::new(vec![PAdicNumber::from_integer(3, 1)], -1),
            },
            inside: 0.5,
            outside: 1.0,
        };
        let f = WDictionary {
            scalar: scalar.clone(),
            vector: vec![1.0],
        };
        let v = apply_vq(&op_v, &f, &gamma).unwrap();
        let u = apply_u(&op_u, &scalar, &gamma).unwrap();
        assert_eq!(v, vec![u]);
    }

    #[test]
    fn permutation_rep_is_homomorphism() {
        use crate::config::PermutationCocycle;
        let q = SymmetricGroupRep::PermutationMatrices;
        let s = PermutationCocycle::from_mapping(vec![1, 2, 0]).unwrap();
        let t = PermutationCocycle::from_mapping(vec![1, 0, 2]).unwrap();
        let v = vec![1.0, 2.0, 3.0];
        let st = s.compose(&t);
        let lhs = q.apply(&st, &v).unwrap();
        let rhs = q.apply(&s, &q.apply(&t, &v).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        // unitarity: permutation matrices preserve the euclidean norm
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        assert_eq!(norm(&lhs), norm(&v));
    }

    #[test]
    fn mc_inner_product_examples() {
        let law = lebesgue_law(-2.0, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        // f = g = 1: exactly 1 with zero error
        let f0 = DictionaryFunction::f0();
        let (m, se) = mc_inner_product(&f0, &f0, &law, 5_000, &mut rng).unwrap();
        assert_eq!(m, 1.0);
        assert_eq!(se, 0.0);
        // empty-count indicator of a unit-mass region: e^{-1}
        let b = Region::real_interval(0.0, 1.0);
        let f = DictionaryFunction::CountIndicator {
            region: b.clone(),
            count: 0,
        };
        let (m, se) = mc_inner_product(&f, &f0, &law, 60_000, &mut rng).unwrap();
        let expect = (-1.0f64).exp();
        assert!((m - expect).abs() < 3.0 * se, "{m} vs {expect}");
        // count of a mass-2 region has mean 2
        let b2 = Region::real_interval(-1.0, 1.0);
        let f = DictionaryFunction::Count { region: b2 };
        let (m, se) = mc_inner_product(&f, &f0, &law, 60_000, &mut rng).unwrap();
        assert!((m - 2.0).abs() < 3.0 * se, "{m} vs 2");
        drop(b);
    }

    #[test]
    fn unitarity_identity_and_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(102);
        let dict = vec![
            DictionaryFunction::f0(),
            DictionaryFunction::CountIndicator {
                region: Region::real_interval(0.0, 1.0),
                count: 0,
            },
            DictionaryFunction::Count {
                region: Region::real_interval(-1.0, 2.0),
            },
        ];
        let law = lebesgue_law(-4.0, 4.0);
        let id_op = RepOperator {
            law: law.clone(),
            psi: Transformation::identity(),
            q: None,
        };
        let report = unitarity_check(&id_op, &dict, 2_000, &mut rng).unwrap();
        assert_eq!(
            report.max_abs_z, 0.0,
            "identity is exactly unitary per sample"
        );

        // p-adic isometry: rho = 1 and psi relabels samples bijectively,
        // so the transported integrand at psi(gamma) equals the direct
        // integrand at gamma exactly, point by point
        let pd = vec![
            DictionaryFunction::f0(),
            DictionaryFunction::CountIndicator {
                region: Region::Ball {
                    ball: PAdicBall::new(vec![PAdicNumber::from_integer(3, 1)], -1),
                },
                count: 1,
            },
        ];
        let law = haar_law();
        let swap = two_ball_swap();
        for _ in 0..500 {
            let gamma = law.sample(&mut rng).unwrap();
            let relabeled = gamma.map(&swap).unwrap();
            let weight = rho_poisson(&law, &swap, &relabeled).unwrap();
            assert_eq!(weight, 1.0);
            for f in &pd {
                let transported =
                    weight * f.eval(&relabeled.map(&swap.inverse()).unwrap()).unwrap();
                assert_eq!(transported, f.eval(&gamma).unwrap());
            }
        }
        // and the reweighted estimator agrees in distribution
        let op = RepOperator {
            law,
            psi: swap,
            q: None,
        };
        let report = unitarity_check(&op, &pd, 4_000, &mut rng).unwrap();
        assert!(report.max_abs_z < 3.5, "max |z| = {}", report.max_abs_z);
    }

    #[test]
    fn unitarity_piecewise_affine_within_3_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        let dict = vec![
            DictionaryFunction::f0(),
            DictionaryFunction::CountIndicator {
                region: Region::real_interval(0.0, 2.0),
                count: 1,
            },
            DictionaryFunction::ExpLinear {
                region: Region::real_interval(0.0, 2.0),
                inside: 0.7,
                outside: 1.0,
            },
        ];
        let law = lebesgue_law(-4.0, 4.0);
        let pw = build_piecewise_affine(0, vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 3.0]).unwrap();
        let op = RepOperator {
            law,
            psi: pw,
            q: None,
        };
        let report = unitarity_check(&op, &dict, 100_000, &mut rng).unwrap();
        assert!(report.max_abs_z < 3.5, "max |z| = {}", report.max_abs_z);
    }

    #[test]
    fn homomorphism_exact_for_isometries() {
        let mut rng = ChaCha8Rng::seed_from_u64(104);
        let balls: Vec<PAdicBall> = (0..3)
            .map(|i| PAdicBall::new(vec![PAdicNumber::from_integer(3, i)], -1))
            .collect();
        let psi = build_ball_permutation(balls.clone(), vec![1, 2, 0]).unwrap();
        let phi = build_ball_permutation(balls, vec![1, 0, 2]).unwrap();
        let dict = vec![
            DictionaryFunction::f0(),
            DictionaryFunction::CountIndicator {
                region: Region::Ball {
                    ball: PAdicBall::new(vec![PAdicNumber::from_integer(3, 2)], -1),
                },
                count: 1,
            },
        ];
        let report = homomorphism_check(&haar_law(), &psi, &phi, &dict, 500, &mut rng).unwrap();
        assert_eq!(report.max_abs_dev, 0.0, "isometry composition is exact");
        assert!(report.cocycle_exact);
    }

    #[test]
    fn homomorphism_tight_for_piecewise_affine() {
        let mut rng = ChaCha8Rng::seed_from_u64(105);
        let psi = build_piecewise_affine(0, vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 3.0]).unwrap();
        let phi = build_piecewise_affine(0, vec![-2.0, -1.0, 1.0], vec![-2.0, 0.0, 1.0]).unwrap();
        let dict = vec![
            DictionaryFunction::f0(),
            DictionaryFunction::Count {
                region: Region::real_interval(-1.0, 2.0),
            },
        ];
        let report =
            homomorphism_check(&lebesgue_law(-4.0, 4.0), &psi, &phi, &dict, 2_000, &mut rng)
                .unwrap();
        assert!(
            report.max_abs_dev < 1e-9,
            "deviation {}",
            report.max_abs_dev
        );
        assert!(report.cocycle_exact);
        // phi = identity composes trivially
        let report = homomorphism_check(
            &lebesgue_law(-4.0, 4.0),
            &psi,
            &Transformation::identity(),
            &dict,
            500,
            &mut rng,
        )
        .unwrap();
        assert!(report.max_abs_dev < 1e-12);
    }

    #[test]
    fn discriminator_finds_witness_for_scaled_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(106);
        let law = lebesgue_law(-4.0, 4.0);
        let psis = vec![
            Transformation::identity(),
            build_piecewise_affine(0, vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 3.0]).unwrap(),
        ];
        let report = spherical_discriminator(&law, 1.0, 2.0, &psis, 60_000, &mut rng).unwrap();
        assert_eq!(report.witness, Some(1), "the non-trivial map separates");
        assert!(report.separated_beyond_error_bars);
        // scaling law: u_2 = u_1^2 for the witness
        let e = &report.entries[1];
        assert!((e.u2_quadrature - e.u1_quadrature.powi(2)).abs() < 1e-9);
        // equal scalings separate nothing
        let report = spherical_discriminator(&law, 1.0, 1.0, &psis, 5_000, &mut rng).unwrap();
        assert!(report.entries.iter().all(|e| e.separation == 0.0));
        assert_eq!(report.witness, None);
    }

    #[test]
    fn discriminator_reports_no_witness_for_isometries() {
        let mut rng = ChaCha8Rng::seed_from_u64(107);
        let law = haar_law();
        let psis = vec![Transformation::identity(), two_ball_swap()];
        let report = spherical_discriminator(&law, 1.0, 2.0, &psis, 2_000, &mut rng).unwrap();
        assert_eq!(
            report.witness, None,
            "isometries cannot separate scaled laws"
        );
        assert!(!report.separated_beyond_error_bars);
        for e in &report.entries {
            assert_eq!(e.u1_quadrature, 1.0);
            assert_eq!(e.u2_quadrature, 1.0);
        }
    }

    #[test]
    fn matrix_coefficient_matches_quadrature() {
        // <U(psi) f0, f0> estimated through the representation surface
        // agrees with the quadrature spherical function
        let mut rng = ChaCha8Rng::seed_from_u64(108);
        let law = lebesgue_law(-4.0, 4.0);
        let pw = build_piecewise_affine(0, vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 3.0]).unwrap();
        let op = RepOperator {
            law: law.clone(),
            psi: pw.clone(),
            q: None,
        };
        let f0 = DictionaryFunction::f0();
        let n = 60_000;
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            let gamma = law.sample(&mut rng).unwrap();
            values.push(apply_u(&op, &f0, &gamma).unwrap() * f0.eval(&gamma).unwrap());
        }
        let (mean, se) = mean_stderr(&values);
        let quad = spherical_function(&law, &pw, SphericalMode::Quadrature, 0, &mut rng)
            .unwrap()
            .value;
        let tol = (3.0 * se).max(1e-3);
        assert!((mean - quad).abs() < tol, "{mean} +- {se} vs {quad}");
    }
}

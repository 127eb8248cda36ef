//! Python bindings: the main arithmetic, metric, Poisson and verification
//! operations, driven in-process from Python.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use confspace::error::Error;
use confspace::local_field::PAdicNumber;
use confspace::measure::{hellinger_affinity, MeasureModel};
use confspace::poisson::{spherical_function, PoissonLaw, SphericalMode};
use confspace::report::{sha256_hex, Report};
use confspace::space::{
    delta_metric, matching_metric, product_metric, MetricMode, Point, PointSpace, Region,
};
use confspace::suites::{run_suite, ExperimentSpec};
use confspace::transform::build_piecewise_affine;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// An element of the field of p-adic numbers at the default precision.
#[pyclass(name = "PAdic", from_py_object)]
#[derive(Clone)]
struct PyPAdic {
    inner: PAdicNumber,
}

#[pymethods]
impl PyPAdic {
    /// Build from an integer ratio `num/den` in Q_p.
    #[new]
    #[pyo3(signature = (prime, num, den=1))]
    fn new(prime: u64, num: i64, den: i64) -> PyResult<Self> {
        if den == 0 {
            return Err(PyValueError::new_err("denominator must be nonzero"));
        }
        Ok(PyPAdic {
            inner: PAdicNumber::from_ratio(prime, num, den),
        })
    }

    /// Parse the textual form `p:val:d0d1d2...`.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyPAdic {
            inner: PAdicNumber::from_text(text).map_err(err)?,
        })
    }

    /// The absolute value `p^{-val}` (0 for zero).
    fn abs(&self) -> f64 {
        self.inner.abs()
    }

    /// The valuation exponent, None for zero.
    fn val(&self) -> Option<i64> {
        self.inner.val()
    }

    fn add(&self, other: &PyPAdic) -> PyResult<Self> {
        Ok(PyPAdic {
            inner: self.inner.add(&other.inner).map_err(err)?,
        })
    }

    fn sub(&self, other: &PyPAdic) -> PyResult<Self> {
        Ok(PyPAdic {
            inner: self.inner.sub(&other.inner).map_err(err)?,
        })
    }

    fn mul(&self, other: &PyPAdic) -> PyResult<Self> {
        Ok(PyPAdic {
            inner: self.inner.mul(&other.inner).map_err(err)?,
        })
    }

    fn neg(&self) -> Self {
        PyPAdic {
            inner: self.inner.neg(),
        }
    }

    fn text(&self) -> String {
        self.inner.to_text()
    }

    fn __repr__(&self) -> String {
        format!("PAdic({})", self.inner.to_text())
    }

    fn __eq__(&self, other: &PyPAdic) -> bool {
        self.inner == other.inner
    }
}

fn real_tuple(xs: &[f64]) -> Vec<Point> {
    xs.iter().map(|&x| Point::real1(x)).collect()
}

fn padic_tuple(texts: &[String]) -> PyResult<Vec<Point>> {
    texts
        .iter()
        .map(|t| Ok(Point::padic1(PAdicNumber::from_text(t).map_err(err)?)))
        .collect()
}

/// Sum-mode tuple distance between two real tuples.
#[pyfunction]
fn product_distance(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    let space = PointSpace::RealBox {
        dim: 1,
        extent: f64::MAX,
    };
    product_metric(&space, &real_tuple(&a), &real_tuple(&b), MetricMode::Sum).map_err(err)
}

/// Matching distance (optimal assignment) between two real point sets.
#[pyfunction]
fn matching_distance(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    let space = PointSpace::RealBox {
        dim: 1,
        extent: f64::MAX,
    };
    matching_metric(&space, &real_tuple(&a), &real_tuple(&b)).map_err(err)
}

/// Bounded delta distance between two real tuples of distinct points.
#[pyfunction]
fn delta_distance(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    let space = PointSpace::RealBox {
        dim: 1,
        extent: f64::MAX,
    };
    delta_metric(&space, &real_tuple(&a), &real_tuple(&b)).map_err(err)
}

/// Matching distance between two p-adic point sets given in textual form.
#[pyfunction]
fn matching_distance_padic(prime: u64, a: Vec<String>, b: Vec<String>) -> PyResult<f64> {
    let space = PointSpace::PadicProduct {
        prime,
        dim: 1,
        log_radius: i64::MAX / 2,
    };
    matching_metric(&space, &padic_tuple(&a)?, &padic_tuple(&b)?).map_err(err)
}

/// Hellinger affinity of two normal laws N(m1, v1), N(m2, v2) by
/// quadrature.
#[pyfunction]
fn hellinger_normal(m1: f64, v1: f64, m2: f64, v2: f64) -> PyResult<f64> {
    let spread = v1.max(v2).sqrt();
    let lo = m1.min(m2) - 14.0 * spread;
    let hi = m1.max(m2) + 14.0 * spread;
    hellinger_affinity(
        &MeasureModel::Normal {
            mean: vec![m1],
            sigma2: vec![v1],
        },
        &MeasureModel::Normal {
            mean: vec![m2],
            sigma2: vec![v2],
        },
        &Region::real_interval(lo, hi),
    )
    .map_err(err)
}

/// A Poisson point process with Lebesgue intensity on a real interval.
#[pyclass(name = "PoissonLaw")]
struct PyPoissonLaw {
    law: PoissonLaw,
    rng: ChaCha8Rng,
}

#[pymethods]
impl PyPoissonLaw {
    #[new]
    #[pyo3(signature = (lo, hi, intensity=1.0, seed=0))]
    fn new(lo: f64, hi: f64, intensity: f64, seed: u64) -> PyResult<Self> {
        let law = PoissonLaw::new(
            MeasureModel::Lebesgue { dim: 1 },
            Region::real_interval(lo, hi),
            intensity,
        )
        .map_err(err)?;
        Ok(PyPoissonLaw {
            law,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Expected number of points.
    fn mean_count(&self) -> PyResult<f64> {
        self.law.mean_count().map_err(err)
    }

    /// Draw a configuration as a sorted list of coordinates.
    fn sample(&mut self) -> PyResult<Vec<f64>> {
        let gamma = self.law.sample(&mut self.rng).map_err(err)?;
        Ok(gamma
            .points()
            .iter()
            .map(|p| match p {
                Point::Real(v) => v[0],
                Point::Padic(_) => unreachable!("law is real"),
            })
            .collect())
    }

    /// Exact joint count probability over disjoint intervals
    /// `[(lo, hi), ...]` with the given counts.
    fn count_probability(&self, intervals: Vec<(f64, f64)>, counts: Vec<usize>) -> PyResult<f64> {
        let regions: Vec<Region> = intervals
            .iter()
            .map(|&(lo, hi)| Region::real_interval(lo, hi))
            .collect();
        self.law.count_probability(&regions, &counts).map_err(err)
    }

    /// Spherical function of the piecewise-affine map given by knots and
    /// images, by quadrature or seeded Monte Carlo.
    #[pyo3(signature = (knots, images, mode="quadrature", samples=50_000))]
    fn spherical_u(
        &mut self,
        knots: Vec<f64>,
        images: Vec<f64>,
        mode: &str,
        samples: usize,
    ) -> PyResult<(f64, f64)> {
        let psi = build_piecewise_affine(0, knots, images).map_err(err)?;
        let mode = match mode {
            "quadrature" => SphericalMode::Quadrature,
            "monte_carlo" => SphericalMode::MonteCarlo,
            other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
        };
        let est = spherical_function(&self.law, &psi, mode, samples, &mut self.rng).map_err(err)?;
        Ok((est.value, est.stderr))
    }
}

/// Run a verification suite from an experiment-spec JSON document and
/// return the report as JSON.
#[pyfunction]
fn run_suite_json(spec_json: &str) -> PyResult<String> {
    let spec: ExperimentSpec =
        serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    spec.validate().map_err(err)?;
    let output = run_suite(&spec).map_err(err)?;
    let report = Report::new(
        &spec.suite,
        spec.seed,
        spec.shards.unwrap_or(1).max(1),
        sha256_hex(spec_json.as_bytes()),
        output.checks,
    );
    Ok(report.to_json())
}

#[pymodule]
fn confspace_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyPAdic>()?;
    m.add_class::<PyPoissonLaw>()?;
    m.add_function(wrap_pyfunction!(product_distance, m)?)?;
    m.add_function(wrap_pyfunction!(matching_distance, m)?)?;
    m.add_function(wrap_pyfunction!(delta_distance, m)?)?;
    m.add_function(wrap_pyfunction!(matching_distance_padic, m)?)?;
    m.add_function(wrap_pyfunction!(hellinger_normal, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite_json, m)?)?;
    Ok(())
}

//! Configuration-space measures over real and p-adic base spaces.
//!
//! The crate makes the following machinery computable and testable at desk
//! scale:
//!
//! * exact arithmetic and Haar geometry in Q_p ([`local_field`]);
//! * tuple and n-point-set metrics with assignment solvers ([`space`]);
//! * finite configurations, counting maps, cross-sections and permutation
//!   cocycles ([`config`]);
//! * base measures with samplers, quasi-invariance factors, Hellinger
//!   affinities and the Kakutani dichotomy ([`measure`]);
//! * invertible transformations: piecewise-affine maps, flow steps and
//!   measure-preserving ball permutations ([`transform`]);
//! * Poisson point measures: exact count laws, superposition, spherical
//!   functions and scaling-singularity evidence ([`poisson`]);
//! * finite-rank realizations of the associated unitary operators ([`rep`]);
//! * batch verification suites behind the `confspace` CLI ([`suites`]).

pub mod config;
pub mod error;
pub mod local_field;
pub mod measure;
pub mod numerics;
pub mod poisson;
pub mod rep;
pub mod report;
pub mod space;
pub mod suites;
pub mod transform;

pub use error::{Error, Result};

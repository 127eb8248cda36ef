use thiserror::Error;

/// Errors surfaced by the library.
///
/// Numeric soft-check failures are never errors; they are carried in
/// reports. Errors mean a contract violation at a call site.
#[derive(Debug, Error)]
pub enum Error {
    #[error("operands belong to different prime fields: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("leading digit of the result falls outside the representable window")]
    PrecisionExhausted,
    #[error("radius {0} is not a power of the prime {1}")]
    RadiusNotInValuationGroup(f64, u64),
    #[error("tuple lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("metric mode {mode} is not valid for a {space} space")]
    ModeMismatch {
        mode: &'static str,
        space: &'static str,
    },
    #[error("tuple contains repeated points")]
    RepeatedPoints,
    #[error("configuration cardinalities differ: {0} vs {1}")]
    CardinalityMismatch(usize, usize),
    #[error("operation requires a nonempty configuration")]
    EmptyConfig,
    #[error("epsilon {0} is below the representable granularity")]
    GranularityTooFine(f64),
    #[error("point collision: configurations are not disjoint")]
    PointCollision,
    #[error("configuration is not contained in exhaustion level {0}")]
    NotInLevel(usize),
    #[error("transformation is not injective on the given configuration")]
    NotInjectiveOnConfig,
    #[error("point lies outside the transformation domain")]
    OutsideDomain,
    #[error("ball radii must all be equal")]
    UnequalRadii,
    #[error("balls must be pairwise disjoint")]
    OverlappingBalls,
    #[error("knots and images must be strictly increasing with matching endpoints")]
    NonMonotone,
    #[error("{0} is not a permutation of 0..{1}")]
    NotAPermutation(String, usize),
    #[error("density vanishes at the evaluation point")]
    DensityZero,
    #[error("measure is not a probability on the integration domain")]
    NotAProbability,
    #[error("regions overlap but must be disjoint")]
    RegionOverlap,
    #[error("region lies outside the law's window")]
    OutsideWindow,
    #[error("laws live on different windows")]
    WindowMismatch,
    #[error("shell cutoff {0} too small for the requested tail tolerance")]
    CutoffTooSmall(i64),
    #[error("need at least one sample")]
    ZeroSamples,
    #[error("transformation support exceeds the integration window")]
    SupportExceedsWindow,
    #[error("mismatched space kinds: {0} vs {1}")]
    SpaceMismatch(&'static str, &'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors surfaced by the map, orbit, shadowing and entropy estimators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("flat critical point at x = {location}: derivatives up to order {order_bound} all vanish")]
    FlatCriticalPoint { location: f64, order_bound: u32 },

    #[error("root finding failed: {0}")]
    RootFindingFailure(String),

    #[error("orbit left the domain at step {step}: x = {x}")]
    DomainEscape { step: usize, x: f64 },

    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),

    #[error("no critical point within epsilon = {epsilon} of x_{index} = {x} (delta not admissible)")]
    NoNearbyCritical { index: usize, x: f64, epsilon: f64 },

    #[error("weight product never reached 1 within {budget} steps past the segment end (|(f^n)'x| -> infinity fails empirically)")]
    NonExpandingOrbit { budget: usize },

    #[error("orbit point x_{index} is exactly critical; l({index}) = +infinity")]
    ExactCriticalHit { index: usize },

    #[error("PSI supports are disjoint; union undefined")]
    DisjointSupports,

    #[error("start set resolution insufficient: adjacent points {gap:.3e} apart in the Bowen metric (limit {limit:.3e})")]
    ResolutionInsufficient { gap: f64, limit: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

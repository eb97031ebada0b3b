//! Numerical laboratory for smooth one-dimensional dynamics.
//!
//! The crate models smooth non-flat maps of the interval and the circle,
//! estimates Lyapunov exponents and uniform-integrability defects of measure
//! sequences, builds piecewise shadowing intervals around visits to the
//! critical set, counts combinatorial interval types exactly, estimates
//! spanning numbers over Bowen metrics, and assembles the entropy-gap report
//! tying those quantities together.

pub mod entropy;
pub mod error;
pub mod extended;
pub mod io;
pub mod map;
pub mod measure;
pub mod orbit;
pub mod periodic;
pub mod shadow;

pub use error::{Error, Result};
pub use map::{
    compute_constants, evaluate_g, find_critical_points, CriticalPoint, DomainKind, MapConstants,
    MapExpr, SmoothMap,
};
pub use orbit::{iterate, EscapePolicy, Orbit};

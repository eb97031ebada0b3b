//! Finite trajectories with cached derivative logs, the substrate of every
//! estimator in the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{DomainKind, SmoothMap};

/// What to do when an iterate leaves the domain by more than the rounding
/// allowance of 1e-12. Escapes within the allowance are always clamped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EscapePolicy {
    #[default]
    Abort,
    Clamp,
}

const ESCAPE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Orbit {
    pub map_id: String,
    pub x0: f64,
    /// x_0 .. x_N.
    pub points: Vec<f64>,
    /// log|f'(x_i)|; -inf exactly when f'(x_i) = 0.
    pub dlog: Vec<f64>,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest admissible window end (= number of points).
    pub fn horizon(&self) -> usize {
        self.points.len()
    }
}

/// Iterates the map N times from x0, caching log|f'| along the way.
/// Deterministic given (map, x0, N).
pub fn iterate(map: &SmoothMap, x0: f64, n: usize, escape: EscapePolicy) -> Result<Orbit> {
    if n < 1 {
        return Err(Error::InvalidParameter("orbit length N must be >= 1".into()));
    }
    let mut points = Vec::with_capacity(n + 1);
    let mut dlog = Vec::with_capacity(n + 1);
    let mut x = x0;
    for step in 0..=n {
        if map.domain == DomainKind::UnitInterval && !(0.0..=1.0).contains(&x) {
            let overshoot = if x < 0.0 { -x } else { x - 1.0 };
            if overshoot <= ESCAPE_TOL || escape == EscapePolicy::Clamp {
                x = x.clamp(0.0, 1.0);
            } else {
                return Err(Error::DomainEscape { step, x });
            }
        }
        points.push(x);
        dlog.push(map.df(x).abs().ln());
        if step < n {
            x = map.eval(x);
        }
    }
    Ok(Orbit {
        map_id: map.family_tag.clone(),
        x0,
        points,
        dlog,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_superstable_orbit() {
        let map = SmoothMap::logistic(4.0);
        let o = iterate(&map, 0.5, 3, EscapePolicy::Abort).unwrap();
        assert_eq!(o.points, vec![0.5, 1.0, 0.0, 0.0]);
        assert_eq!(o.dlog[0], f64::NEG_INFINITY);
        assert_eq!(o.dlog[2], 4.0f64.ln());
    }

    #[test]
    fn doubling_period_two() {
        let map = SmoothMap::doubling();
        let third = 1.0 / 3.0;
        let o = iterate(&map, third, 4, EscapePolicy::Abort).unwrap();
        for (i, &p) in o.points.iter().enumerate() {
            let expect = if i % 2 == 0 { third } else { 2.0 / 3.0 };
            assert!((p - expect).abs() < 1e-13, "step {i}: {p}");
        }
    }

    #[test]
    fn logistic_direct_arithmetic() {
        let map = SmoothMap::logistic(4.0);
        let o = iterate(&map, 0.3, 2, EscapePolicy::Abort).unwrap();
        assert!((o.points[1] - 0.84).abs() < 1e-15);
        assert!((o.points[2] - 0.5376).abs() < 1e-15);
    }

    #[test]
    fn escape_aborts_or_clamps() {
        // x - 0.6: leaves [0,1] from small x
        let map = SmoothMap::polynomial(vec![-0.6, 1.0]);
        match iterate(&map, 0.5, 4, EscapePolicy::Abort) {
            Err(Error::DomainEscape { .. }) => {}
            other => panic!("expected DomainEscape, got {other:?}"),
        }
        let o = iterate(&map, 0.5, 4, EscapePolicy::Clamp).unwrap();
        assert_eq!(o.points[2], 0.0);
    }
}

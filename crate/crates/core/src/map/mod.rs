//! Smooth non-flat maps of the interval or the circle, with exact derivatives.
//!
//! Two expression kinds cover every map used here: polynomials with f64
//! coefficients (differentiated by coefficient arithmetic) and the circle
//! family m·x + β + (k/2π)·sin(2πx) mod 1 (differentiated in closed form).
//! Finite differences are never used: the critical-point order d_c is the
//! smallest d with f^(d)(c) ≠ 0 and needs exact vanishing orders.

mod constants;
mod critical;

pub use constants::{compute_constants, MapConstants};
pub use critical::{evaluate_g, find_critical_points, CriticalPoint, DERIV_ORDER_BOUND};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    UnitInterval,
    Circle,
}

impl DomainKind {
    /// Metric of the phase space: |x-y| on [0,1], arc distance on R/Z.
    #[inline]
    pub fn dist(self, x: f64, y: f64) -> f64 {
        match self {
            DomainKind::UnitInterval => (x - y).abs(),
            DomainKind::Circle => {
                let mut d = x - y;
                if d < 0.0 {
                    d = -d;
                }
                while d >= 1.0 {
                    d -= 1.0;
                }
                d.min(1.0 - d)
            }
        }
    }

    pub fn diameter(self) -> f64 {
        match self {
            DomainKind::UnitInterval => 1.0,
            DomainKind::Circle => 0.5,
        }
    }
}

/// Exact map expression. Evaluation of f and of f^(d) for every d is closed
/// form in both variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MapExpr {
    /// Coefficients in ascending degree order: f(x) = Σ c_i x^i on [0,1].
    Poly(Vec<f64>),
    /// Lift F(x) = m·x + beta + (k/2π)·sin(2πx); the map is F mod 1 on R/Z.
    TrigCircle { m: i32, beta: f64, k: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmoothMap {
    pub expr: MapExpr,
    pub domain: DomainKind,
    pub family_tag: String,
    pub parameters: Vec<f64>,
}

#[inline]
fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// d-th derivative coefficients of a polynomial, ascending order.
fn poly_deriv(coeffs: &[f64], d: u32) -> Vec<f64> {
    let mut cur = coeffs.to_vec();
    for _ in 0..d {
        if cur.len() <= 1 {
            return vec![0.0];
        }
        cur = cur
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * i as f64)
            .collect();
    }
    cur
}

impl SmoothMap {
    pub fn logistic(a: f64) -> Self {
        SmoothMap {
            expr: MapExpr::Poly(vec![0.0, a, -a]),
            domain: DomainKind::UnitInterval,
            family_tag: "logistic".into(),
            parameters: vec![a],
        }
    }

    /// The doubling map x ↦ 2x mod 1.
    pub fn doubling() -> Self {
        SmoothMap {
            expr: MapExpr::TrigCircle { m: 2, beta: 0.0, k: 0.0 },
            domain: DomainKind::Circle,
            family_tag: "doubling".into(),
            parameters: vec![],
        }
    }

    /// f(x) = 3x² - 2x³; critical points 0 and 1, both of order 2.
    pub fn cubic() -> Self {
        SmoothMap {
            expr: MapExpr::Poly(vec![0.0, 0.0, 3.0, -2.0]),
            domain: DomainKind::UnitInterval,
            family_tag: "cubic".into(),
            parameters: vec![],
        }
    }

    /// Degree-m circle map with a sinusoidal perturbation; critical points
    /// appear when k > m.
    pub fn trig_circle(m: i32, beta: f64, k: f64) -> Self {
        SmoothMap {
            expr: MapExpr::TrigCircle { m, beta, k },
            domain: DomainKind::Circle,
            family_tag: "trig_circle".into(),
            parameters: vec![m as f64, beta, k],
        }
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        SmoothMap {
            expr: MapExpr::Poly(coeffs.clone()),
            domain: DomainKind::UnitInterval,
            family_tag: "poly".into(),
            parameters: coeffs,
        }
    }

    /// f(x), reduced into the domain for circle maps.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match &self.expr {
            MapExpr::Poly(c) => poly_eval(c, x),
            MapExpr::TrigCircle { .. } => {
                let mut y = self.lift(x);
                // lift values stay within a few turns; branches beat fmod
                while y >= 1.0 {
                    y -= 1.0;
                }
                while y < 0.0 {
                    y += 1.0;
                }
                y
            }
        }
    }

    /// The lift F(x) without reduction mod 1. For interval maps this is f.
    #[inline]
    pub fn lift(&self, x: f64) -> f64 {
        match &self.expr {
            MapExpr::Poly(c) => poly_eval(c, x),
            MapExpr::TrigCircle { m, beta, k } => {
                if *k == 0.0 {
                    *m as f64 * x + beta
                } else {
                    *m as f64 * x
                        + beta
                        + k / (2.0 * std::f64::consts::PI) * (2.0 * std::f64::consts::PI * x).sin()
                }
            }
        }
    }

    /// f'(x).
    pub fn df(&self, x: f64) -> f64 {
        self.deriv(x, 1)
    }

    /// f^(d)(x), exact (coefficient arithmetic or closed form).
    pub fn deriv(&self, x: f64, d: u32) -> f64 {
        assert!(d >= 1);
        match &self.expr {
            MapExpr::Poly(c) => poly_eval(&poly_deriv(c, d), x),
            MapExpr::TrigCircle { m, k, .. } => {
                let two_pi = 2.0 * std::f64::consts::PI;
                // d-th derivative of (k/2π)·sin(2πx) is k·(2π)^(d-1)·sin(2πx + dπ/2)
                let trig = k * two_pi.powi(d as i32 - 1) * (two_pi * x + d as f64 * std::f64::consts::FRAC_PI_2).sin();
                if d == 1 {
                    *m as f64 + trig
                } else {
                    trig
                }
            }
        }
    }

    pub fn dist(&self, x: f64, y: f64) -> f64 {
        self.domain.dist(x, y)
    }

    /// Checks that f maps the domain into itself. For polynomials the range
    /// bound is certified: extrema occur at zeros of f' or at the endpoints,
    /// all of which are checked after a dense-grid bracketing pass.
    pub fn check_into_domain(&self, resolution: usize) -> Result<()> {
        match &self.expr {
            MapExpr::TrigCircle { .. } => Ok(()), // reduced mod 1 by construction
            MapExpr::Poly(_) => {
                let mut probes: Vec<f64> = vec![0.0, 1.0];
                let crit = critical::bracket_df_zeros(self, resolution)?;
                probes.extend(crit);
                let tol = 1e-9;
                for x in probes {
                    let y = self.eval(x);
                    if !(-tol..=1.0 + tol).contains(&y) {
                        return Err(Error::InvalidParameter(format!(
                            "map leaves the domain: f({x}) = {y}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

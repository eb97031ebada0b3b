//! Shadowing intervals: visits to the critical neighborhood, the weight
//! function F, admissible δ selection, and the primitive checks behind the
//! piecewise-shadowing-interval construction.
//!
//! Conventions used throughout (the source material mixes inclusive and
//! half-open weight products; one choice has to be made and kept):
//!
//! * the weight at position i is F(i) = Λ if |f'(x_i)| ≥ δ, else
//!   2^(K+1)·|f'(x_i)|;
//! * the stored PSI profile is inclusive, G(k) = Π_{a₁ ≤ j ≤ k} F(j) for
//!   k in [a₁, e] with e the support end;
//! * PSI validity requires G(k) < 1 for a₁ ≤ k < e, and right-maximality is
//!   G(e) ≥ 1 (the endpoint weight participates in the endpoint test only);
//! * the distance bound of the inductive construction uses the half-open
//!   product P(k) = G(k-1), with P(a₁) = 1.
//!
//! Under this convention the endpoint of a right-maximal PSI is provably
//! outside A, and the length bound |supp| ≥ Σ (l(a) - (K+1)log2/λ) follows
//! from G(e) ≥ 1 with the slack |A ∩ supp| - 1 ≥ 0.

mod decomposition;
mod psi;

pub use decomposition::{
    build_decomposition, coverage_report, geometric_schedule, CoverageReport, CoverageRow,
    ShadowingDecomposition,
};
pub use psi::{
    build_right_maximal_psi, check_ipsi_bounds, psi_union, validate_psi, Psi, PsiValidity,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::{ReferenceOrbits, DEFAULT_PRECISION_BITS};
use crate::map::{CriticalPoint, MapConstants, SmoothMap};
use crate::orbit::Orbit;

const LN2: f64 = std::f64::consts::LN_2;

/// Parameters of one shadowing experiment.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShadowParams {
    pub epsilon: f64,
    pub delta: f64,
    /// Minimal member length L of the decomposition S(x).
    pub l_min: usize,
}

/// One ε-shadowing interval [a, b) tracking the forward orbit of a critical
/// point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShadowingInterval {
    pub a: usize,
    pub b: usize,
    /// Index into the critical-point list.
    pub critical: usize,
    pub epsilon: f64,
}

impl ShadowingInterval {
    pub fn len(&self) -> usize {
        self.b - self.a
    }

    pub fn is_empty(&self) -> bool {
        self.b <= self.a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Switching {
    Switching,
    NonSwitching,
}

/// Visits to the critical neighborhood: sorted indices a with |f'(x_a)| < δ.
/// The cached dlog values are authoritative (in extended orbit mode the
/// stored points are rounded snapshots, the dlog is not).
pub fn detect_a(orbit: &Orbit, delta: f64) -> Vec<usize> {
    let log_delta = delta.ln();
    orbit
        .dlog
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < log_delta)
        .map(|(i, _)| i)
        .collect()
}

/// l(a) = -log|f'(x_a)| / λ(f); +inf at an exactly critical point.
pub fn shadow_length(orbit: &Orbit, a: usize, constants: &MapConstants) -> f64 {
    -orbit.dlog[a] / constants.lambda_log
}

/// F at position i: Λ off the critical neighborhood, 2^(K+1)·|f'(x_i)| inside.
pub fn weight_f(orbit: &Orbit, i: usize, delta: f64, k_order: u32, lambda_cap: f64) -> f64 {
    let v = orbit.dlog[i];
    if v < delta.ln() {
        2f64.powi(k_order as i32 + 1) * v.exp()
    } else {
        lambda_cap
    }
}

/// log F at position i under a processed-visit cutoff: a visit above the
/// cutoff has not been incorporated yet and still weighs Λ.
#[inline]
fn log_weight(orbit: &Orbit, i: usize, log_delta: f64, k_order: u32, lambda_log: f64, cutoff: usize) -> f64 {
    let v = orbit.dlog[i];
    if v < log_delta && i <= cutoff {
        v + (k_order as f64 + 1.0) * LN2
    } else {
        lambda_log
    }
}

/// Admissible δ for (ε, L): below the uniqueness bound δ'₁, below Λ^(-L),
/// and satisfying -log δ > L·(L + (K+1)/λ); returns the largest power of 1/2
/// meeting all three.
pub fn choose_delta(
    map: &SmoothMap,
    criticals: &[CriticalPoint],
    constants: &MapConstants,
    epsilon: f64,
    l_min: usize,
) -> Result<f64> {
    if epsilon >= constants.epsilon1 {
        return Err(Error::InfeasibleParameters(format!(
            "epsilon {epsilon} >= epsilon1 {}",
            constants.epsilon1
        )));
    }
    if constants.lambda_cap <= 1.0 {
        return Err(Error::InfeasibleParameters(
            "sup|f'| <= 1: shadow lengths undefined".into(),
        ));
    }
    // δ'₁: |f'(x)| < δ'₁ must force a unique critical point within ε of x
    let grid = 100_000;
    let mut delta1_prime = constants.lambda_cap;
    for i in 0..=grid {
        let x = i as f64 / grid as f64;
        let near = criticals
            .iter()
            .filter(|c| map.dist(x, c.location) < epsilon)
            .count();
        if near != 1 {
            delta1_prime = delta1_prime.min(map.df(x).abs());
        }
    }
    // the (K+1)/λ term carries the log 2 of the 2^(K+1) weights
    let lam = constants.lambda_log;
    let l = l_min as f64;
    let strengthened = l * (l + (constants.k_max_order as f64 + 1.0) * LN2 / lam);
    for m in 1..1074 {
        let delta = 2f64.powi(-m);
        if delta < delta1_prime
            && delta < constants.lambda_cap.powi(-(l_min as i32))
            && m as f64 * LN2 > strengthened
        {
            return Ok(delta);
        }
    }
    Err(Error::InfeasibleParameters(
        "no representable power of 1/2 satisfies the delta constraints".into(),
    ))
}

/// Everything a shadowing experiment needs, bundled once: the orbit, the
/// visit set A, the critical data and extended-precision reference orbits.
/// Immutable after construction.
pub struct ShadowContext<'a> {
    pub map: &'a SmoothMap,
    pub orbit: &'a Orbit,
    pub criticals: &'a [CriticalPoint],
    pub constants: &'a MapConstants,
    pub params: ShadowParams,
    pub a_set: Vec<usize>,
    pub refs: ReferenceOrbits,
    /// Step budget of the weight-crossing search past a segment end.
    pub expansion_budget: usize,
}

impl<'a> ShadowContext<'a> {
    pub fn new(
        map: &'a SmoothMap,
        orbit: &'a Orbit,
        criticals: &'a [CriticalPoint],
        constants: &'a MapConstants,
        params: ShadowParams,
    ) -> Result<Self> {
        Self::with_precision(map, orbit, criticals, constants, params, DEFAULT_PRECISION_BITS)
    }

    pub fn with_precision(
        map: &'a SmoothMap,
        orbit: &'a Orbit,
        criticals: &'a [CriticalPoint],
        constants: &'a MapConstants,
        params: ShadowParams,
        precision_bits: usize,
    ) -> Result<Self> {
        if !(params.delta > 0.0 && params.delta < 1.0) || params.l_min == 0 {
            return Err(Error::InvalidParameter(format!("bad params {params:?}")));
        }
        if params.epsilon >= constants.epsilon1 {
            return Err(Error::InfeasibleParameters(format!(
                "epsilon {} >= epsilon1 {}",
                params.epsilon, constants.epsilon1
            )));
        }
        // -log δ > (K+1) log 2 keeps weights below 1 inside A and the PSI
        // seed length at least 1
        if params.delta >= 2f64.powi(-(constants.k_max_order as i32 + 1)) {
            return Err(Error::InfeasibleParameters(format!(
                "delta {} >= 2^-(K+1); weights inside A would not contract",
                params.delta
            )));
        }
        let a_set = detect_a(orbit, params.delta);
        let budget = 4096usize;
        let ref_len = orbit.horizon().min(budget + 64);
        let locations: Vec<f64> = criticals.iter().map(|c| c.location).collect();
        let refs = ReferenceOrbits::compute(map, &locations, ref_len, precision_bits);
        Ok(ShadowContext {
            map,
            orbit,
            criticals,
            constants,
            params,
            a_set,
            refs,
            expansion_budget: budget,
        })
    }

    pub fn in_a(&self, i: usize) -> bool {
        self.orbit.dlog[i] < self.params.delta.ln()
    }

    /// Smallest visit index in (lo, hi], if any.
    pub(crate) fn next_visit(&self, lo: usize, hi: usize) -> Option<usize> {
        let idx = self.a_set.partition_point(|&a| a <= lo);
        self.a_set.get(idx).copied().filter(|&a| a <= hi)
    }

    pub fn shadow_length(&self, a: usize) -> f64 {
        shadow_length(self.orbit, a, self.constants)
    }

    pub(crate) fn log_weight(&self, i: usize, cutoff: usize) -> f64 {
        log_weight(
            self.orbit,
            i,
            self.params.delta.ln(),
            self.constants.k_max_order,
            self.constants.lambda_log,
            cutoff,
        )
    }

    /// Nearest critical point within ε of x, if any.
    pub fn critical_near(&self, x: f64) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in self.criticals.iter().enumerate() {
            let d = self.map.dist(x, c.location);
            if d < self.params.epsilon && best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Checks d(x_{a+h}, f^h c) < ε for all 0 ≤ h < b - a, the reference
    /// orbit iterated at extended precision.
    pub fn verify_shadowing(&self, interval: &ShadowingInterval) -> bool {
        if interval.b > self.orbit.horizon() || interval.is_empty() {
            return false;
        }
        (0..interval.len()).all(|h| {
            self.refs
                .dist_to(interval.critical, h, self.orbit.points[interval.a + h])
                < interval.epsilon
        })
    }

    /// Switching test of an interval ending at b ∈ A: non-switching iff
    /// d(x_b, c_b) ≥ d(x_b, f^{b-a} c_a).
    pub fn classify_switching(&self, interval: &ShadowingInterval, b: usize) -> Result<Switching> {
        debug_assert_eq!(interval.b, b);
        let x_b = self.orbit.points[b];
        let cb = self.critical_near(x_b).ok_or(Error::NoNearbyCritical {
            index: b,
            x: x_b,
            epsilon: self.params.epsilon,
        })?;
        let d_new = self.map.dist(x_b, self.criticals[cb].location);
        let d_ref = self.refs.dist_to(interval.critical, b - interval.a, x_b);
        Ok(if d_new >= d_ref {
            Switching::NonSwitching
        } else {
            Switching::Switching
        })
    }

    /// One-step contraction bound at a visit b closing the interval [a, b):
    /// the distance after one more step is controlled by 2^(K+1)|f'(x_b)|
    /// times the incoming distance, toward the kept reference (non-switching)
    /// or the new critical orbit (switching).
    pub fn check_one_step_bound(&self, interval: &ShadowingInterval, b: usize) -> Result<bool> {
        if b + 1 >= self.orbit.horizon() {
            return Err(Error::InvalidParameter("b+1 beyond orbit horizon".into()));
        }
        let x_next = self.orbit.points[b + 1];
        let factor = 2f64.powi(self.constants.k_max_order as i32 + 1) * self.orbit.dlog[b].exp();
        let d_in = self.refs.dist_to(interval.critical, b - interval.a, self.orbit.points[b]);
        let rhs = factor * d_in;
        let lhs = match self.classify_switching(interval, b)? {
            Switching::NonSwitching => self.refs.dist_to(interval.critical, b - interval.a + 1, x_next),
            Switching::Switching => {
                let cb = self.critical_near(self.orbit.points[b]).unwrap();
                self.refs.dist_to(cb, 1, x_next)
            }
        };
        // rounding headroom on an inequality between exact quantities
        Ok(lhs <= rhs * (1.0 + 1e-9) + 1e-300)
    }
}

//! Empirical measures (orbit windows), Lyapunov exponents, and the uniform
//! integrability defect of a measure sequence.
//!
//! An empirical measure is the uniform distribution on an orbit window; its
//! Lyapunov exponent is the Birkhoff mean of log|f'|. The defect table holds
//! ∫_{|f'|<δ} -log|f'| dμ_k over a decreasing δ-grid; the double limit
//! (δ → 0 after k → ∞) is replaced by the tail-sup heuristic at the smallest
//! grid value, and the full table is always reported.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orbit::Orbit;

#[derive(Debug, Clone)]
pub struct EmpiricalMeasure<'a> {
    pub orbit: &'a Orbit,
    pub window: Range<usize>,
}

impl<'a> EmpiricalMeasure<'a> {
    pub fn new(orbit: &'a Orbit, window: Range<usize>) -> Result<Self> {
        if window.is_empty() || window.end > orbit.horizon() {
            return Err(Error::InvalidParameter(format!(
                "window {window:?} invalid for orbit of length {}",
                orbit.horizon()
            )));
        }
        Ok(EmpiricalMeasure { orbit, window })
    }

    /// Whole-orbit window.
    pub fn full(orbit: &'a Orbit) -> Self {
        EmpiricalMeasure { orbit, window: 0..orbit.horizon() }
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.orbit.points[self.window.clone()]
    }
}

#[derive(Debug, Clone)]
pub struct MeasureSequence<'a> {
    pub measures: Vec<EmpiricalMeasure<'a>>,
    pub tag: String,
}

impl<'a> MeasureSequence<'a> {
    pub fn new(measures: Vec<EmpiricalMeasure<'a>>, tag: impl Into<String>) -> Result<Self> {
        if measures.is_empty() {
            return Err(Error::InvalidParameter("measure sequence is empty".into()));
        }
        Ok(MeasureSequence { measures, tag: tag.into() })
    }
}

/// λ(μ) as the window mean of log|f'|; -inf when the window contains an
/// exactly critical point (a meaningful value: superstable orbits).
pub fn lyapunov_exponent(measure: &EmpiricalMeasure) -> f64 {
    let mut sum = 0.0;
    for &v in &measure.orbit.dlog[measure.window.clone()] {
        if v == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        sum += v;
    }
    sum / measure.len() as f64
}

/// log_δ t: 0 for t ≥ δ, log t otherwise (-inf at t = 0).
pub fn truncated_log(t: f64, delta: f64) -> f64 {
    debug_assert!(t >= 0.0 && delta > 0.0 && delta < 1.0);
    if t >= delta {
        0.0
    } else {
        t.ln()
    }
}

/// Raw accumulation Σ_{i ∈ window, |f'(x_i)| < δ} -log|f'(x_i)|, left to
/// right. Shared by the defect table and by the φ₀ Birkhoff mean so the two
/// use bitwise-identical sums.
pub fn window_defect_sum(orbit: &Orbit, window: Range<usize>, delta: f64) -> f64 {
    let log_delta = delta.ln();
    let mut sum = 0.0;
    for &v in &orbit.dlog[window] {
        // v < log δ  <=>  |f'| < δ, except ties; compare in linear scale
        if v < log_delta || (v == log_delta && v.exp() < delta) {
            sum += -v;
        }
    }
    sum
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DefectTable {
    /// Strictly decreasing values in (0, 1).
    pub delta_grid: Vec<f64>,
    /// entries[d][k] = ∫_{|f'|<δ_d} -log|f'| dμ_k.
    pub entries: Vec<Vec<f64>>,
    /// Tail-sup at the smallest δ: the defect estimate.
    pub alpha_estimate: f64,
    pub diverged: bool,
    /// Fraction of the sequence treated as the tail (default last third).
    pub tail_fraction: f64,
}

impl DefectTable {
    pub fn tail_start(&self) -> usize {
        let k = self.entries.first().map_or(0, |row| row.len());
        tail_start(k, self.tail_fraction)
    }
}

fn tail_start(k: usize, tail_fraction: f64) -> usize {
    if k == 0 {
        return 0;
    }
    let len = ((k as f64 * tail_fraction).ceil() as usize).clamp(1, k);
    k - len
}

/// Builds the defect table of a measure sequence over a δ-grid.
pub fn defect_alpha(seq: &MeasureSequence, delta_grid: &[f64]) -> Result<DefectTable> {
    defect_alpha_with_tail(seq, delta_grid, 1.0 / 3.0)
}

pub fn defect_alpha_with_tail(
    seq: &MeasureSequence,
    delta_grid: &[f64],
    tail_fraction: f64,
) -> Result<DefectTable> {
    if delta_grid.is_empty()
        || delta_grid.windows(2).any(|w| w[1] >= w[0])
        || delta_grid.iter().any(|&d| !(0.0 < d && d < 1.0))
    {
        return Err(Error::InvalidParameter(
            "delta grid must be strictly decreasing within (0,1)".into(),
        ));
    }
    let mut entries = Vec::with_capacity(delta_grid.len());
    let mut diverged = false;
    for &delta in delta_grid {
        let row: Vec<f64> = seq
            .measures
            .iter()
            .map(|m| {
                let s = window_defect_sum(m.orbit, m.window.clone(), delta);
                if s.is_infinite() {
                    diverged = true;
                }
                s / m.len() as f64
            })
            .collect();
        entries.push(row);
    }
    let last = entries.last().unwrap();
    let alpha_estimate = last[tail_start(last.len(), tail_fraction)..]
        .iter()
        .fold(0.0f64, |a, &b| a.max(b));
    Ok(DefectTable {
        delta_grid: delta_grid.to_vec(),
        entries,
        alpha_estimate,
        diverged,
        tail_fraction,
    })
}

/// Residual |α - (λ(μ) - min_{k in tail} λ(μ_k))| of the defect identity.
/// Reported for inspection; estimator noise makes a hard pass/fail
/// inappropriate.
pub fn check_defect_identity(
    seq: &MeasureSequence,
    limit_measure: &EmpiricalMeasure,
    table: &DefectTable,
) -> f64 {
    let lam_limit = lyapunov_exponent(limit_measure);
    let tail = &seq.measures[table.tail_start()..];
    let liminf = tail
        .iter()
        .map(lyapunov_exponent)
        .fold(f64::INFINITY, f64::min);
    (table.alpha_estimate - (lam_limit - liminf)).abs()
}

//! Entropy-side quantities: the binary entropy function, exact combinatorial
//! type counts, Bowen-metric spanning estimates, and the gap bound assembly.

mod report;
mod spanning;
mod types_count;

pub use report::{check_partial_shadowing, main_report, GapInputs, GapReport, PartialShadowingCheck};
pub use spanning::{
    check_submultiplicativity, katok_entropy_estimate, spanning_number, spanning_number_on_grid,
    spanning_schedule, topological_entropy_estimate, EntropyFit, EpsFit, SpanningEstimate,
    StartSet, SubmultiplicativityCheck,
};
pub use types_count::{count_types, TypeCount};

use crate::error::{Error, Result};
use crate::measure::window_defect_sum;
use crate::orbit::Orbit;
use std::ops::Range;

/// H(t) = t log(1/t) + (1-t) log(1/(1-t)), extended by continuity with
/// H(0) = H(1) = 0.
pub fn binary_entropy(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    t * (1.0 / t).ln() + (1.0 - t) * (1.0 / (1.0 - t)).ln()
}

/// K(ε, γ, L) = H(2/L) + (log C + log D)/L.
pub fn k_term(l_min: usize, c_est: f64, d_est: f64) -> Result<f64> {
    if l_min < 4 {
        return Err(Error::InvalidParameter(format!(
            "L = {l_min} < 4: the type-count bound needs L >= 4"
        )));
    }
    if c_est < 1.0 || d_est < 1.0 {
        return Err(Error::InvalidParameter(
            "C and D estimates must be >= 1".into(),
        ));
    }
    let l = l_min as f64;
    Ok(binary_entropy(2.0 / l) + (c_est.ln() + d_est.ln()) / l)
}

/// The gap bound h_top - (1 - 1/L)·φ̄·(h_top - h_cover) + K + 2γ.
pub fn gap_rhs(
    h_top: f64,
    h_cover: f64,
    phi_mean: f64,
    l_min: usize,
    k_term: f64,
    gamma: f64,
) -> f64 {
    h_top - (1.0 - 1.0 / l_min as f64) * phi_mean * (h_top - h_cover) + k_term + 2.0 * gamma
}

/// Birkhoff mean of φ₀ = -1_{|f'|<δ₀}·log|f'|/λ over the window, computed
/// through the same accumulation as the defect table.
pub fn phi0_mean(orbit: &Orbit, delta0: f64, lambda_log: f64, window: Range<usize>) -> f64 {
    let n = window.len() as f64;
    window_defect_sum(orbit, window, delta0) / n / lambda_log
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_entropy_examples() {
        assert!((binary_entropy(0.5) - 2f64.ln()).abs() < 1e-15);
        assert!((binary_entropy(0.25) - 0.5623351446188083).abs() < 1e-12);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        for i in 1..50 {
            let t = i as f64 / 50.0;
            assert!((binary_entropy(t) - binary_entropy(1.0 - t)).abs() < 1e-14);
        }
        // strictly increasing on (0, 1/2), unique max at 1/2
        let mut prev = 0.0;
        for i in 1..=25 {
            let v = binary_entropy(i as f64 / 50.0);
            assert!(v > prev);
            prev = v;
        }
        assert!(prev <= 2f64.ln());
    }

    #[test]
    fn k_term_examples() {
        assert!(k_term(1_000_000, 2.0, 2.0).unwrap() < 1e-4);
        assert!((k_term(8, 1.0, 1.0).unwrap() - binary_entropy(0.25)).abs() < 1e-12);
        let e8 = 8f64.exp();
        assert!((k_term(8, e8, 1.0).unwrap() - (binary_entropy(0.25) + 1.0)).abs() < 1e-12);
        assert!(k_term(3, 1.0, 1.0).is_err());
        assert!(k_term(8, 0.5, 1.0).is_err());
    }

    #[test]
    fn gap_rhs_examples() {
        let h = 2f64.ln();
        // no shadowing mass: h_top + K + 2γ
        assert_eq!(gap_rhs(h, 0.0, 0.0, 8, 0.3, 0.1), h + 0.3 + 0.2);
        // large L limit with φ̄ = 0.2: 0.8·h
        let v = gap_rhs(h, 0.0, 0.2, 100_000_000, 0.0, 0.0);
        assert!((v - 0.8 * h).abs() < 1e-7);
        // full shadowing kills entropy
        let v = gap_rhs(h, 0.0, 1.0, 100_000_000, 0.0, 0.0);
        assert!(v.abs() < 1e-7);
    }

    #[test]
    fn gap_rhs_monotonicity() {
        let h = 2f64.ln();
        let mut prev = f64::INFINITY;
        for i in 0..=10 {
            let phi = i as f64 / 10.0;
            let v = gap_rhs(h, 0.1, phi, 16, 0.05, 0.01);
            assert!(v < prev);
            prev = v;
        }
        // decreasing in L toward the large-L limit
        let at = |l| gap_rhs(h, 0.0, 0.5, l, 0.0, 0.0);
        assert!(at(8) > at(16));
        assert!(at(16) > at(64));
        assert!(at(64) > at(1_000_000));
    }
}

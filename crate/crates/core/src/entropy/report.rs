//! The main-theorem report: defect α, entropy estimates, and the bound
//! (1 - α/λ)·h_top with every intermediate constant, plus the four
//! partial-shadowing conditions re-verified on a built decomposition.

use serde::{Deserialize, Serialize};

use super::spanning::EntropyFit;
use crate::error::{Error, Result};
use crate::measure::DefectTable;
use crate::shadow::{CoverageReport, ShadowContext, ShadowingDecomposition};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapReport {
    pub h_top_est: f64,
    pub h_top_residual: f64,
    /// Katok entropy estimate h(μ_k, ε) per sequence member.
    pub h_measure_est: Vec<f64>,
    pub h_measure_residuals: Vec<f64>,
    pub alpha: f64,
    pub lambda_log: f64,
    pub phi_mean: f64,
    pub l_min: usize,
    pub epsilon: f64,
    pub gamma: f64,
    pub delta0: f64,
    /// Intercept-based spanning constant, clamped to ≥ 1.
    pub c_est: f64,
    /// |C(f)| for the constant covering system (entropy 0).
    pub d_est: f64,
    pub k_term: f64,
    pub h_cover: f64,
    /// h_top - (1-1/L)·φ̄·(h_top - h_cover) + K + 2γ.
    pub rhs_gap: f64,
    /// (1 - α/λ)·h_top.
    pub rhs_main: f64,
    /// Inequality slack per member: rhs_main + tolerance - h(μ_k, ε).
    pub margins: Vec<f64>,
    /// 2 × (sum of fit residuals); every check reports margins against it.
    pub tolerance: f64,
    pub violations: usize,
}

pub struct GapInputs<'a> {
    pub topo: &'a EntropyFit,
    pub katok: &'a [EntropyFit],
    pub table: &'a DefectTable,
    pub phi_mean: f64,
    pub lambda_log: f64,
    pub critical_count: usize,
    pub l_min: usize,
    pub epsilon: f64,
    pub gamma: f64,
    pub delta0: f64,
}

/// Assembles the report from the individual estimators.
pub fn main_report(inp: &GapInputs) -> Result<GapReport> {
    let worst_katok_res = inp
        .katok
        .iter()
        .map(|f| f.residual)
        .fold(0.0f64, f64::max);
    let tolerance = 2.0 * (inp.topo.residual + worst_katok_res);
    let c_est = inp.topo.intercept.exp().max(1.0);
    let d_est = (inp.critical_count as f64).max(1.0);
    let k = super::k_term(inp.l_min, c_est, d_est)?;
    let h_cover = 0.0;
    let rhs_gap = super::gap_rhs(inp.topo.h, h_cover, inp.phi_mean, inp.l_min, k, inp.gamma);
    let alpha = inp.table.alpha_estimate;
    if alpha < 0.0 {
        return Err(Error::InvalidParameter("negative defect estimate".into()));
    }
    let rhs_main = (1.0 - alpha / inp.lambda_log) * inp.topo.h;
    let h_measure_est: Vec<f64> = inp.katok.iter().map(|f| f.h).collect();
    let margins: Vec<f64> = h_measure_est
        .iter()
        .map(|&h| rhs_main + tolerance - h)
        .collect();
    let violations = margins.iter().filter(|&&m| m < 0.0).count();
    Ok(GapReport {
        h_top_est: inp.topo.h,
        h_top_residual: inp.topo.residual,
        h_measure_est,
        h_measure_residuals: inp.katok.iter().map(|f| f.residual).collect(),
        alpha,
        lambda_log: inp.lambda_log,
        phi_mean: inp.phi_mean,
        l_min: inp.l_min,
        epsilon: inp.epsilon,
        gamma: inp.gamma,
        delta0: inp.delta0,
        c_est,
        d_est,
        k_term: k,
        h_cover,
        rhs_gap,
        rhs_main,
        margins,
        tolerance,
        violations,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PartialShadowingCheck {
    /// Every member has length ≥ L.
    pub cond0_min_length: bool,
    /// Every member starts inside a Bowen ball of its critical point.
    pub cond1_bowen_ball: bool,
    /// Measurability; finite data, reported as satisfied.
    pub cond2_measurable: bool,
    /// Coverage deficit rate at the horizon within tolerance.
    pub cond3_coverage: bool,
    pub deficit_rate_final: f64,
}

impl PartialShadowingCheck {
    pub fn all_ok(&self) -> bool {
        self.cond0_min_length && self.cond1_bowen_ball && self.cond2_measurable && self.cond3_coverage
    }
}

/// The four partial-shadowing conditions against a built decomposition and
/// its coverage report; `tau` bounds the admissible final deficit rate.
pub fn check_partial_shadowing(
    ctx: &ShadowContext,
    dec: &ShadowingDecomposition,
    coverage: &CoverageReport,
    tau: f64,
) -> PartialShadowingCheck {
    let cond0 = dec.intervals.iter().all(|iv| iv.len() >= ctx.params.l_min);
    let cond1 = dec.intervals.iter().all(|iv| ctx.verify_shadowing(iv));
    let deficit_rate_final = coverage.rows.last().map_or(0.0, |r| r.deficit_rate);
    PartialShadowingCheck {
        cond0_min_length: cond0,
        cond1_bowen_ball: cond1,
        cond2_measurable: true,
        cond3_coverage: deficit_rate_final <= tau,
        deficit_rate_final,
    }
}

//! The decomposition S(x): disjoint right-maximal PSIs along the orbit and
//! their segments of length at least L, plus coverage statistics against the
//! truncated-logarithm target.

use serde::{Deserialize, Serialize};

use super::psi::{build_right_maximal_psi, Psi};
use super::{ShadowContext, ShadowParams, ShadowingInterval};
use crate::error::Result;
use crate::measure::window_defect_sum;

const LN2: f64 = std::f64::consts::LN_2;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShadowingDecomposition {
    /// Right-maximal PSIs in orbit order; a trailing horizon-cut PSI is kept
    /// with `right_maximal = false` and contributes nothing to `intervals`.
    pub psis: Vec<Psi>,
    /// S(x): segments of length ≥ L from the right-maximal PSIs.
    pub intervals: Vec<ShadowingInterval>,
    pub params: ShadowParams,
    pub horizon: usize,
}

/// Builds PSIs left to right, each next start being the first visit past the
/// previous support, and collects the members of S(x).
pub fn build_decomposition(ctx: &ShadowContext) -> Result<ShadowingDecomposition> {
    let mut psis: Vec<Psi> = Vec::new();
    let mut intervals: Vec<ShadowingInterval> = Vec::new();
    let mut from = 0usize;
    let last_usable = ctx.orbit.horizon() - 1;
    loop {
        let idx = ctx.a_set.partition_point(|&a| a < from);
        let Some(&a) = ctx.a_set.get(idx) else { break };
        if a >= last_usable {
            break; // a visit at the very horizon has no room to shadow
        }
        let psi = build_right_maximal_psi(ctx, a)?;
        let complete = psi.right_maximal;
        if complete {
            intervals.extend(psi.segments().filter(|seg| seg.len() >= ctx.params.l_min));
        }
        from = psi.end(); // next start a > max supp = end - 1
        psis.push(psi);
        if !complete {
            break; // horizon reached
        }
    }
    Ok(ShadowingDecomposition {
        psis,
        intervals,
        params: ctx.params,
        horizon: ctx.orbit.horizon(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageRow {
    pub n: usize,
    /// |∪S(x) ∩ [0,n)|.
    pub covered: usize,
    /// (1 - 1/L)·Σ_{i<n} -log_δ|f'(x_i)| / λ.
    pub target: f64,
    pub deficit: f64,
    pub deficit_rate: f64,
    /// Enclosing-PSI overhang b_n - n (0 when n is outside every support).
    pub overhang_b: usize,
    /// n - a_n for the enclosing PSI.
    pub overhang_a: usize,
    pub overhang_fraction: f64,
    /// Diagnostic: Birkhoff mean over [0,n) of Ψ = -λ off A,
    /// -(log|f'| + (K+1)log 2) on A. The source analysis needs its mean
    /// negative; reported, not asserted.
    pub psi_mean: f64,
    /// Diagnostic: Σ_{i<n} L·1_{|f'(x_i)|<δ} (the un-named β·n majorant).
    pub raw_l_indicator: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageReport {
    pub params: ShadowParams,
    pub horizon: usize,
    pub rows: Vec<CoverageRow>,
}

/// Geometric n-schedule start, start·ratio, … capped at the horizon (always
/// included).
pub fn geometric_schedule(start: usize, ratio: f64, horizon: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut x = start.max(1) as f64;
    while (x as usize) < horizon {
        out.push(x as usize);
        x *= ratio.max(1.1);
    }
    out.push(horizon);
    out.dedup();
    out
}

/// Coverage of [0, n) by S(x) against the truncated-log target, on a
/// schedule of n values.
pub fn coverage_report(
    ctx: &ShadowContext,
    dec: &ShadowingDecomposition,
    schedule: &[usize],
) -> CoverageReport {
    let orbit = ctx.orbit;
    let lam = ctx.constants.lambda_log;
    let l = ctx.params.l_min as f64;
    let kp1_ln2 = (ctx.constants.k_max_order as f64 + 1.0) * LN2;
    let log_delta = ctx.params.delta.ln();

    let mut rows = Vec::with_capacity(schedule.len());
    for &n in schedule {
        let n = n.min(orbit.horizon());
        let covered: usize = dec
            .intervals
            .iter()
            .filter(|iv| iv.a < n)
            .map(|iv| iv.b.min(n) - iv.a)
            .sum();
        let target = (1.0 - 1.0 / l) * window_defect_sum(orbit, 0..n, ctx.params.delta) / lam;
        let deficit = (target - covered as f64).max(0.0);

        let (oa, ob) = match dec.psis.iter().find(|p| n >= p.start() && n < p.end()) {
            Some(p) => (n - p.start(), p.end() - 1 - n),
            None => (0, 0),
        };

        let mut psi_sum = 0.0;
        let mut visits = 0usize;
        for &v in &orbit.dlog[..n] {
            if v < log_delta {
                psi_sum += -(v + kp1_ln2);
                visits += 1;
            } else {
                psi_sum += -lam;
            }
        }
        rows.push(CoverageRow {
            n,
            covered,
            target,
            deficit,
            deficit_rate: deficit / n as f64,
            overhang_b: ob,
            overhang_a: oa,
            overhang_fraction: ob as f64 / n as f64,
            psi_mean: psi_sum / n as f64,
            raw_l_indicator: l * visits as f64,
        });
    }
    CoverageReport {
        params: ctx.params,
        horizon: dec.horizon,
        rows,
    }
}

//! Serialization: CSV for tabular data (RFC-4180 via the csv crate), JSON
//! with stable key order (struct field order) for reports.

use std::io::Write;

use serde::Serialize;

use crate::entropy::{EntropyFit, TypeCount};
use crate::error::{Error, Result};
use crate::measure::DefectTable;
use crate::orbit::Orbit;
use crate::shadow::{CoverageReport, ShadowingDecomposition};

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("write failed: {e}"))
}

/// index, x, dlog rows.
pub fn write_orbit_csv<W: Write>(w: W, orbit: &Orbit) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["index", "x", "dlog"]).map_err(io_err)?;
    for (i, (&x, &d)) in orbit.points.iter().zip(&orbit.dlog).enumerate() {
        wtr.write_record([i.to_string(), format!("{x:.17e}"), format!("{d:.17e}")])
            .map_err(io_err)?;
    }
    wtr.flush().map_err(io_err)?;
    Ok(())
}

#[derive(Serialize)]
struct DefectJson<'a> {
    delta_grid: &'a [f64],
    /// rows keyed by δ index, columns by measure index k.
    entries: &'a [Vec<f64>],
    alpha_estimate: f64,
    diverged: bool,
    tail_fraction: f64,
}

pub fn write_defect_json<W: Write>(w: W, table: &DefectTable) -> Result<()> {
    let doc = DefectJson {
        delta_grid: &table.delta_grid,
        entries: &table.entries,
        alpha_estimate: table.alpha_estimate,
        diverged: table.diverged,
        tail_fraction: table.tail_fraction,
    };
    write_json(w, &doc)
}

#[derive(Serialize)]
struct PsiJson {
    breakpoints: Vec<usize>,
    critical_per_segment: Vec<usize>,
    g_endpoint: f64,
    right_maximal: bool,
}

#[derive(Serialize)]
struct IntervalJson {
    a: usize,
    b: usize,
    critical: usize,
}

#[derive(Serialize)]
struct DecompositionJson<'a> {
    epsilon: f64,
    delta: f64,
    l_min: usize,
    horizon: usize,
    psi_list: Vec<PsiJson>,
    intervals: Vec<IntervalJson>,
    coverage: &'a CoverageReport,
}

pub fn write_decomposition_json<W: Write>(
    w: W,
    dec: &ShadowingDecomposition,
    coverage: &CoverageReport,
) -> Result<()> {
    let doc = DecompositionJson {
        epsilon: dec.params.epsilon,
        delta: dec.params.delta,
        l_min: dec.params.l_min,
        horizon: dec.horizon,
        psi_list: dec
            .psis
            .iter()
            .map(|p| PsiJson {
                breakpoints: p.breakpoints.clone(),
                critical_per_segment: p.critical_per_segment.clone(),
                g_endpoint: p.g_endpoint(),
                right_maximal: p.right_maximal,
            })
            .collect(),
        intervals: dec
            .intervals
            .iter()
            .map(|iv| IntervalJson { a: iv.a, b: iv.b, critical: iv.critical })
            .collect(),
        coverage,
    };
    write_json(w, &doc)
}

/// coverage schedule rows as CSV.
pub fn write_coverage_csv<W: Write>(w: W, coverage: &CoverageReport) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "n",
        "covered",
        "target",
        "deficit",
        "deficit_rate",
        "overhang_a",
        "overhang_b",
        "overhang_fraction",
        "psi_mean",
        "raw_l_indicator",
    ])
    .map_err(io_err)?;
    for r in &coverage.rows {
        wtr.write_record([
            r.n.to_string(),
            r.covered.to_string(),
            format!("{:.12e}", r.target),
            format!("{:.12e}", r.deficit),
            format!("{:.12e}", r.deficit_rate),
            r.overhang_a.to_string(),
            r.overhang_b.to_string(),
            format!("{:.12e}", r.overhang_fraction),
            format!("{:.12e}", r.psi_mean),
            format!("{:.12e}", r.raw_l_indicator),
        ])
        .map_err(io_err)?;
    }
    wtr.flush().map_err(io_err)?;
    Ok(())
}

/// (epsilon, n, log_r) rows of every fit.
pub fn write_spanning_csv<W: Write>(w: W, fits: &[&EntropyFit]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["epsilon", "n", "log_r"]).map_err(io_err)?;
    for fit in fits {
        for pe in &fit.per_eps {
            for &(n, logr) in &pe.points {
                wtr.write_record([
                    format!("{:.12e}", pe.epsilon),
                    n.to_string(),
                    format!("{logr:.12e}"),
                ])
                .map_err(io_err)?;
            }
        }
    }
    wtr.flush().map_err(io_err)?;
    Ok(())
}

/// (n, L, count) rows; counts in decimal, exact.
pub fn write_types_csv<W: Write>(w: W, counts: &[TypeCount]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["n", "L", "count", "log_rate"]).map_err(io_err)?;
    for tc in counts {
        wtr.write_record([
            tc.n.to_string(),
            tc.l_min.to_string(),
            tc.count.to_string(),
            format!("{:.12e}", tc.log_rate),
        ])
        .map_err(io_err)?;
    }
    wtr.flush().map_err(io_err)?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value).map_err(io_err)?;
    w.write_all(b"\n").map_err(io_err)?;
    Ok(())
}

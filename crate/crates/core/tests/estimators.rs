//! Estimator pipelines against analytic benchmarks: Birkhoff sums, defect
//! tables, spanning fits, Katok estimates and the assembled gap report.

use shadowlab::entropy::{
    check_partial_shadowing, katok_entropy_estimate, main_report, phi0_mean,
    topological_entropy_estimate, GapInputs,
};
use shadowlab::map::{compute_constants, find_critical_points};
use shadowlab::measure::{
    defect_alpha, lyapunov_exponent, window_defect_sum, EmpiricalMeasure, MeasureSequence,
};
use shadowlab::orbit::{iterate, EscapePolicy};
use shadowlab::periodic::find_periodic_orbit;
use shadowlab::shadow::{
    build_decomposition, coverage_report, geometric_schedule, ShadowContext, ShadowParams,
};
use shadowlab::SmoothMap;

const LN2: f64 = std::f64::consts::LN_2;

#[test]
fn ulam_long_orbit_matches_analytic_exponent() {
    let map = SmoothMap::logistic(4.0);
    let o = iterate(&map, 0.318309886, 1_000_000, EscapePolicy::Abort).unwrap();
    let lam = lyapunov_exponent(&EmpiricalMeasure::full(&o));
    assert!((lam - LN2).abs() < 0.01, "λ = {lam}");
}

#[test]
fn birkhoff_sum_equals_chain_rule_product() {
    let map = SmoothMap::logistic(4.0);
    let o = iterate(&map, 0.2137, 400, EscapePolicy::Abort).unwrap();
    for n in [10usize, 50, 200] {
        let sum: f64 = o.dlog[..n].iter().sum();
        // independent route: product of |f'| along the orbit
        let mut prod_log = 0.0;
        let mut x = o.x0;
        for _ in 0..n {
            prod_log += map.df(x).abs().ln();
            x = map.eval(x);
        }
        assert!(
            (sum - prod_log).abs() < 1e-8 * (1.0 + sum.abs()),
            "n={n}: {sum} vs {prod_log}"
        );
    }
}

#[test]
fn ulam_defect_entries_decay_with_delta() {
    let map = SmoothMap::logistic(4.0);
    let o = iterate(&map, 0.2137, 500_000, EscapePolicy::Abort).unwrap();
    let ms: Vec<_> = [50_000usize, 150_000, 500_000]
        .iter()
        .map(|&w| EmpiricalMeasure::new(&o, 0..w).unwrap())
        .collect();
    let seq = MeasureSequence::new(ms, "ulam").unwrap();
    let grid = [0.5, 0.1, 0.02, 0.004, 0.0008];
    let table = defect_alpha(&seq, &grid).unwrap();
    assert!(!table.diverged);
    // -log|f'| is integrable for the acim: the tail-sup at the smallest δ is
    // already tiny, and each measure's entries decay along the grid
    assert!(table.alpha_estimate < 0.01, "α = {}", table.alpha_estimate);
    for k in 0..seq.measures.len() {
        assert!(table.entries[grid.len() - 1][k] < table.entries[0][k]);
    }
}

#[test]
fn phi0_equals_scaled_defect_entry_on_the_same_window() {
    let map = SmoothMap::logistic(4.0);
    let lam = 4f64.ln();
    let o = iterate(&map, 0.2137, 100_000, EscapePolicy::Abort).unwrap();
    let phi = phi0_mean(&o, 1e-3, lam, 0..100_000);
    let entry = window_defect_sum(&o, 0..100_000, 1e-3) / 100_000.0;
    assert!((phi * lam - entry).abs() <= 4.0 * f64::EPSILON * entry.max(1e-300));
    // and both vanish when the orbit avoids the critical neighborhood
    let od = iterate(&SmoothMap::doubling(), 0.37, 1000, EscapePolicy::Abort).unwrap();
    assert_eq!(phi0_mean(&od, 0.5, LN2, 0..1000), 0.0);
}

#[test]
fn katok_estimate_vanishes_on_periodic_orbits() {
    let map = SmoothMap::logistic(4.0);
    let cycles = find_periodic_orbit(&map, 3, 2000).unwrap();
    let cycle = cycles
        .iter()
        .find(|o| o.points.iter().all(|&x| x > 1e-6 && (x - 0.5).abs() > 1e-6))
        .unwrap();
    let m = EmpiricalMeasure::full(cycle);
    let fit = katok_entropy_estimate(&map, &[0.5], &m, 0.1, &[2, 4, 6, 8]).unwrap();
    assert!(fit.h.abs() < 0.05, "h = {}", fit.h);
}

#[test]
fn katok_estimate_on_ulam_window_near_log2() {
    let map = SmoothMap::logistic(4.0);
    let o = iterate(&map, 0.2137, 100_000, EscapePolicy::Abort).unwrap();
    let m = EmpiricalMeasure::full(&o);
    let fit = katok_entropy_estimate(&map, &[0.5], &m, 0.1, &[4, 5, 6, 7, 8, 9, 10]).unwrap();
    assert!((fit.h - LN2).abs() / LN2 < 0.15, "h = {}", fit.h);
}

#[test]
fn partial_shadowing_conditions_on_planted_decomposition() {
    let map = SmoothMap::logistic(4.0);
    let crits = find_critical_points(&map, 1000).unwrap();
    let consts = compute_constants(&map, &crits, 1000);
    let o = iterate(&map, 0.5 + 2f64.powi(-44), 200_000, EscapePolicy::Abort).unwrap();
    let params = ShadowParams { epsilon: 0.1, delta: 2f64.powi(-40), l_min: 8 };
    let ctx = ShadowContext::new(&map, &o, &crits, &consts, params).unwrap();
    let dec = build_decomposition(&ctx).unwrap();
    assert!(!dec.intervals.is_empty());
    let coverage = coverage_report(&ctx, &dec, &geometric_schedule(1024, 2.0, o.horizon()));
    let check = check_partial_shadowing(&ctx, &dec, &coverage, 0.02);
    assert!(check.cond0_min_length);
    assert!(check.cond1_bowen_ball);
    assert!(check.cond2_measurable);
    assert!(check.cond3_coverage, "deficit rate {}", check.deficit_rate_final);

    // vacuous case: the doubling map never visits a critical neighborhood
    let dbl = SmoothMap::doubling();
    let dconsts = compute_constants(&dbl, &[], 1000);
    let od = iterate(&dbl, 0.37, 10_000, EscapePolicy::Abort).unwrap();
    let dparams = ShadowParams { epsilon: 0.1, delta: 0.1, l_min: 4 };
    let dctx = ShadowContext::new(&dbl, &od, &[], &dconsts, dparams).unwrap();
    let ddec = build_decomposition(&dctx).unwrap();
    let dcov = coverage_report(&dctx, &ddec, &[1000, 10_000]);
    let dcheck = check_partial_shadowing(&dctx, &ddec, &dcov, 0.02);
    assert!(dcheck.all_ok());
    assert_eq!(dcheck.deficit_rate_final, 0.0);
}

#[test]
fn assembled_report_is_consistent_for_the_ulam_pipeline() {
    let map = SmoothMap::logistic(4.0);
    let consts = compute_constants(&map, &find_critical_points(&map, 1000).unwrap(), 1000);
    let o = iterate(&map, 0.2137, 200_000, EscapePolicy::Abort).unwrap();
    let topo = topological_entropy_estimate(&map, &[0.5], &[0.1], &[8, 9, 10, 11, 12]).unwrap();
    let windows = [20_000usize, 80_000, 200_000];
    let measures: Vec<_> =
        windows.iter().map(|&w| EmpiricalMeasure::new(&o, 0..w).unwrap()).collect();
    let seq = MeasureSequence::new(measures, "w").unwrap();
    let katok: Vec<_> = seq
        .measures
        .iter()
        .map(|m| katok_entropy_estimate(&map, &[0.5], m, 0.1, &[4, 5, 6, 7, 8, 9]).unwrap())
        .collect();
    let table = defect_alpha(&seq, &[0.5, 0.1, 0.02, 0.004]).unwrap();
    let phi = phi0_mean(&o, 1e-3, consts.lambda_log, 0..o.horizon());
    let report = main_report(&GapInputs {
        topo: &topo,
        katok: &katok,
        table: &table,
        phi_mean: phi,
        lambda_log: consts.lambda_log,
        critical_count: 1,
        l_min: 8,
        epsilon: 0.1,
        gamma: 0.05,
        delta0: 1e-3,
    })
    .unwrap();
    assert_eq!(report.violations, 0, "margins {:?}", report.margins);
    assert!(report.rhs_main <= report.h_top_est);
    assert!(report.k_term > 0.0);
    assert!(report.rhs_gap > 0.0);
    // α = 0 degenerate case: the bound collapses onto h_top
    let zero_table = defect_alpha(&seq, &[0.5]).map(|mut t| {
        t.alpha_estimate = 0.0;
        t
    }).unwrap();
    let degenerate = main_report(&GapInputs {
        topo: &topo,
        katok: &katok,
        table: &zero_table,
        phi_mean: phi,
        lambda_log: consts.lambda_log,
        critical_count: 1,
        l_min: 8,
        epsilon: 0.1,
        gamma: 0.05,
        delta0: 1e-3,
    })
    .unwrap();
    assert_eq!(degenerate.rhs_main, degenerate.h_top_est);
}

use std::time::Instant;
use shadowlab::entropy::*;
use shadowlab::measure::*;
use shadowlab::orbit::{iterate, EscapePolicy};
use shadowlab::SmoothMap;

fn main() {
    // Ulam Lyapunov
    let t0 = Instant::now();
    let map = SmoothMap::logistic(4.0);
    let o = iterate(&map, 0.2137, 1_000_000, EscapePolicy::Abort).unwrap();
    let lam = lyapunov_exponent(&EmpiricalMeasure::full(&o));
    println!("[{:?}] ulam lyap 1e6: {} (err {:+.2e})", t0.elapsed(), lam, lam - 2f64.ln());

    // doubling spanning n=10..18
    let t0 = Instant::now();
    let dbl = SmoothMap::doubling();
    let ns: Vec<usize> = (10..=18).collect();
    let fit = topological_entropy_estimate(&dbl, &[], &[0.1], &ns).unwrap();
    println!("[{:?}] doubling fit: h={:.5} (log2={:.5}) resid={:.2e} intercept={:.3}", t0.elapsed(), fit.h, 2f64.ln(), fit.residual, fit.intercept);

    // logistic spanning
    let t0 = Instant::now();
    let ns: Vec<usize> = (8..=14).collect();
    let fit_l = topological_entropy_estimate(&map, &[0.5], &[0.1], &ns).unwrap();
    println!("[{:?}] logistic fit: h={:.5} resid={:.2e} intercept={:.3}", t0.elapsed(), fit_l.h, fit_l.residual, fit_l.intercept);
    for pe in &fit_l.per_eps { for &(n, lr) in &pe.points { println!("   n={n} log r={lr:.3} r={:.0}", lr.exp()); } }

    // katok doubling window (extended orbit: f64 doubling collapses)
    let t0 = Instant::now();
    let n_dbl = 16384usize;
        let x0big = shadowlab::extended::seeded_big_uniform(7, n_dbl + 64);
    let od = shadowlab::extended::iterate_extended(&dbl, &x0big, n_dbl, n_dbl + 64);
    let m = EmpiricalMeasure::full(&od);
    let kd = katok_entropy_estimate(&dbl, &[], &m, 0.1, &[4,5,6,7,8,9,10]).unwrap();
    println!("[{:?}] katok doubling(ext): h={:.5} resid={:.2e}", t0.elapsed(), kd.h, kd.residual);
    // katok ulam window
    let t0 = Instant::now();
    let m = EmpiricalMeasure::new(&o, 0..100_000).unwrap();
    let ku = katok_entropy_estimate(&map, &[0.5], &m, 0.1, &[4,5,6,7,8,9,10]).unwrap();
    println!("[{:?}] katok ulam: h={:.5} resid={:.2e}", t0.elapsed(), ku.h, ku.residual);

    // katok periodic
    let per = shadowlab::periodic::find_periodic_orbit(&map, 3, 2000).unwrap();
    let p3 = per.iter().find(|o| o.points.iter().all(|&x| x > 1e-6)).unwrap();
    let mp = EmpiricalMeasure::full(p3);
    let kp = katok_entropy_estimate(&map, &[0.5], &mp, 0.1, &[2,4,6,8]).unwrap();
    println!("katok 3-cycle: h={:.5}", kp.h);

    // submultiplicativity
    let t0 = Instant::now();
    for split in [vec![6usize,6], vec![4,4,4]] {
        let chk = check_submultiplicativity(&dbl, &[], 12, &split, 0.2).unwrap();
        println!("[{:?}] submul {:?}: lhs={} rhs={:?} prod={} holds={}", t0.elapsed(), chk.split, chk.lhs_r, chk.rhs_factors, chk.rhs_product, chk.holds);
    }

    // defect table ulam
    let ms: Vec<_> = [1000usize, 4000, 16000, 64000, 256000, 1000000].iter().map(|&k| EmpiricalMeasure::new(&o, 0..k).unwrap()).collect();
    let seq = MeasureSequence::new(ms, "ulam-windows").unwrap();
    let grid = [0.5, 0.1, 0.02, 0.004, 0.0008];
    let table = defect_alpha(&seq, &grid).unwrap();
    println!("alpha = {:.4e}, diverged={}", table.alpha_estimate, table.diverged);
    for (d, row) in table.delta_grid.iter().zip(&table.entries) {
        println!("  delta={d}: {:?}", row.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>());
    }
    let resid = check_defect_identity(&seq, &EmpiricalMeasure::full(&o), &table);
    println!("defect identity residual: {resid:.4e}");
}

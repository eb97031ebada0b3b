//! Global constants of a map: Λ = sup|f'|, λ = log Λ, K = max d_c, and the
//! critical-neighborhood radii ε'₁ (monotonicity of |f'|) and ε''₁ (bounded
//! distortion of g_c). The radii are found by doubling-then-bisect outward
//! scans on local grids; a radius confirmed up to its cap is returned as the
//! cap, a radius found by bisection is shrunk by a 0.9 safety factor.

use serde::{Deserialize, Serialize};

use super::critical::evaluate_g;
use super::{CriticalPoint, DomainKind, SmoothMap};

/// Cap used when there is no other critical point or boundary to halve a
/// distance to (doubling map, single critical on the circle).
const DEFAULT_CAP: f64 = 0.25;

const LOCAL_GRID: usize = 10_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapConstants {
    pub lambda_cap: f64,
    pub lambda_log: f64,
    pub k_max_order: u32,
    pub epsilon1: f64,
    pub epsilon1_mono: f64,
    pub epsilon1_ratio: f64,
    /// C(f) = ∅; epsilon1 is the cap rather than a certified radius.
    pub critical_set_empty: bool,
}

fn sup_abs_df(map: &SmoothMap, resolution: usize) -> f64 {
    let n = resolution.max(1000);
    let mut best = 0.0f64;
    let mut prev_d2 = map.deriv(0.0, 2);
    for i in 0..=n {
        let x = i as f64 / n as f64;
        best = best.max(map.df(x).abs());
        // refine at extrema of f' (zeros of f'')
        let d2 = map.deriv(x, 2);
        if i > 0 && prev_d2.signum() != d2.signum() && prev_d2 != 0.0 {
            let (mut lo, mut hi) = ((i - 1) as f64 / n as f64, x);
            let mut flo = prev_d2;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = map.deriv(mid, 2);
                if fm == 0.0 {
                    lo = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            best = best.max(map.df(0.5 * (lo + hi)).abs());
        }
        prev_d2 = d2;
    }
    best
}

/// Half the distance to the nearest other critical point or boundary.
fn scan_cap(map: &SmoothMap, criticals: &[CriticalPoint], c: f64) -> f64 {
    let mut cap = DEFAULT_CAP;
    for other in criticals {
        if other.location != c {
            cap = cap.min(0.5 * map.domain.dist(c, other.location));
        }
    }
    if map.domain == DomainKind::UnitInterval {
        for e in [0.0, 1.0] {
            if e != c {
                cap = cap.min(0.5 * (c - e).abs());
            }
        }
        if c == 0.0 || c == 1.0 {
            // boundary critical point: only the far side constrains
            cap = cap.max(DEFAULT_CAP.min(0.25));
            for other in criticals {
                if other.location != c {
                    cap = cap.min(0.5 * map.domain.dist(c, other.location));
                }
            }
        }
    }
    cap
}

/// Largest radius r ≤ cap for which `good(r)` holds; doubling then bisection,
/// 0.9 safety factor on a bisected boundary.
fn outward_scan<F: Fn(f64) -> bool>(cap: f64, good: F) -> f64 {
    if good(cap) {
        return cap;
    }
    let mut r = cap * 2f64.powi(-20);
    if !good(r) {
        return 0.0;
    }
    while 2.0 * r < cap && good(2.0 * r) {
        r *= 2.0;
    }
    let mut hi = (2.0 * r).min(cap);
    for _ in 0..60 {
        let mid = 0.5 * (r + hi);
        if good(mid) {
            r = mid;
        } else {
            hi = mid;
        }
    }
    0.9 * r
}

/// Points of the one-sided window between `from` and `c` (exclusive of c),
/// clipped to the domain for interval maps, ordered toward c.
fn window_points(map: &SmoothMap, c: f64, r2: f64, left: bool, out: &mut Vec<f64>) {
    out.clear();
    let n = LOCAL_GRID;
    for i in 0..n {
        let t = (i as f64 + 0.5) / n as f64; // 0 -> far end, 1 -> c
        let off = r2 * (1.0 - t);
        let x = if left { c - off } else { c + off };
        match map.domain {
            DomainKind::UnitInterval => {
                if (0.0..=1.0).contains(&x) {
                    out.push(x);
                }
            }
            DomainKind::Circle => out.push(x.rem_euclid(1.0)),
        }
    }
}

fn monotone_toward_c(map: &SmoothMap, pts: &[f64]) -> bool {
    // |f'| must be nonincreasing as the points approach c
    let mut prev = f64::INFINITY;
    for &x in pts {
        let v = map.df(x).abs();
        if v > prev * (1.0 + 1e-12) + 1e-300 {
            return false;
        }
        prev = v;
    }
    true
}

fn epsilon1_mono_at(map: &SmoothMap, criticals: &[CriticalPoint], c: f64) -> f64 {
    let cap = scan_cap(map, criticals, c);
    outward_scan(cap, |r| {
        let r2 = 2.0 * r;
        let mut buf = Vec::with_capacity(LOCAL_GRID);
        let mut ok = true;
        for left in [true, false] {
            window_points(map, c, r2, left, &mut buf);
            ok &= monotone_toward_c(map, &buf);
        }
        ok
    })
}

fn epsilon1_ratio_at(map: &SmoothMap, criticals: &[CriticalPoint], cp: &CriticalPoint) -> f64 {
    let cap = scan_cap(map, criticals, cp.location);
    outward_scan(cap, |r| {
        let r2 = 2.0 * r;
        // 1/2 < |g(x)|/|g(y)| < 2 for all pairs within radius 2r of c, i.e.
        // max|g| / min|g| < 2 on the window (and g never vanishes there)
        let n = LOCAL_GRID;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..=n {
            let x0 = cp.location - r2 + 2.0 * r2 * i as f64 / n as f64;
            let x = match map.domain {
                DomainKind::UnitInterval => {
                    if !(0.0..=1.0).contains(&x0) {
                        continue;
                    }
                    x0
                }
                DomainKind::Circle => x0.rem_euclid(1.0),
            };
            let g = evaluate_g(map, cp, x).abs();
            lo = lo.min(g);
            hi = hi.max(g);
        }
        lo > 0.0 && hi / lo < 2.0
    })
}

/// Computes Λ, λ = log Λ, K(f) and ε₁ = min(ε'₁, ε''₁). With C(f) = ∅ the
/// radii are undefined; the cap is reported and `critical_set_empty` set.
pub fn compute_constants(
    map: &SmoothMap,
    criticals: &[CriticalPoint],
    resolution: usize,
) -> MapConstants {
    let lambda_cap = sup_abs_df(map, resolution);
    let lambda_log = lambda_cap.ln();
    let k_max_order = criticals.iter().map(|c| c.order).max().unwrap_or(0);

    if criticals.is_empty() {
        return MapConstants {
            lambda_cap,
            lambda_log,
            k_max_order,
            epsilon1: DEFAULT_CAP,
            epsilon1_mono: DEFAULT_CAP,
            epsilon1_ratio: DEFAULT_CAP,
            critical_set_empty: true,
        };
    }

    let mut mono = f64::INFINITY;
    let mut ratio = f64::INFINITY;
    for cp in criticals {
        mono = mono.min(epsilon1_mono_at(map, criticals, cp.location));
        ratio = ratio.min(epsilon1_ratio_at(map, criticals, cp));
    }
    MapConstants {
        lambda_cap,
        lambda_log,
        k_max_order,
        epsilon1: mono.min(ratio),
        epsilon1_mono: mono,
        epsilon1_ratio: ratio,
        critical_set_empty: false,
    }
}

//! Periodic orbits by sign-change bisection on f^p(x) - x.
//!
//! These supply the ergodic test measures (periodic-orbit measures) for the
//! defect estimators. Cycles are deduplicated; fixed points of lower period
//! are kept, each reported as a period-length orbit.

use crate::error::{Error, Result};
use crate::map::{DomainKind, SmoothMap};
use crate::orbit::Orbit;

const ROOT_TOL: f64 = 1e-10;
const CYCLE_MATCH_TOL: f64 = 1e-7;

fn iter_p(map: &SmoothMap, x: f64, p: usize) -> f64 {
    let mut y = x;
    for _ in 0..p {
        y = map.eval(y);
    }
    y
}

/// Signed displacement of f^p relative to x; wrapped into (-1/2, 1/2] on the
/// circle so that roots are genuine returns, not winding artifacts.
fn displacement(map: &SmoothMap, x: f64, p: usize) -> f64 {
    let y = iter_p(map, x, p);
    match map.domain {
        DomainKind::UnitInterval => y - x,
        DomainKind::Circle => {
            let d = (y - x).rem_euclid(1.0);
            if d > 0.5 {
                d - 1.0
            } else {
                d
            }
        }
    }
}

/// Finds all fixed points of f^period on a seed grid of `seed_grid` cells,
/// deduplicated by cycle. Each cycle is returned as one Orbit of `period`
/// points starting from the smallest cycle element.
pub fn find_periodic_orbit(map: &SmoothMap, period: usize, seed_grid: usize) -> Result<Vec<Orbit>> {
    if period == 0 || period > 24 {
        return Err(Error::InvalidParameter(format!(
            "period {period} outside 1..=24"
        )));
    }
    let n = seed_grid.max(64);
    let g = |x: f64| displacement(map, x, period);

    let mut roots: Vec<f64> = Vec::new();
    let mut prev_x = 0.0;
    let mut prev_g = g(prev_x);
    if prev_g == 0.0 {
        roots.push(prev_x);
    }
    for i in 1..=n {
        let x = i as f64 / n as f64;
        let gx = g(x);
        if gx == 0.0 {
            roots.push(x);
        } else if prev_g != 0.0 && prev_g.signum() != gx.signum() {
            // bisect; wrap jumps of the circle displacement converge to a
            // point with |g| near 1/2 and are rejected below
            let (mut lo, mut hi, mut glo) = (prev_x, x, prev_g);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                let gm = g(mid);
                if gm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if gm.signum() == glo.signum() {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            let root = 0.5 * (lo + hi);
            if g(root).abs() < ROOT_TOL {
                roots.push(root);
            }
        }
        prev_x = x;
        prev_g = gx;
    }

    // unit-interval endpoint 1 handled above; circle identifies 0 and 1
    if map.domain == DomainKind::Circle {
        roots.retain(|&r| r < 1.0 - 1e-12);
    }

    // deduplicate by cycle: canonical representative is the smallest point
    let mut cycles: Vec<Vec<f64>> = Vec::new();
    'next_root: for &r in &roots {
        let mut cycle = Vec::with_capacity(period);
        let mut x = r;
        for _ in 0..period {
            cycle.push(x);
            x = map.eval(x);
        }
        let canon = cycle.iter().cloned().fold(f64::INFINITY, f64::min);
        for existing in &cycles {
            let ecanon = existing.iter().cloned().fold(f64::INFINITY, f64::min);
            if map.domain.dist(canon, ecanon) < CYCLE_MATCH_TOL {
                continue 'next_root;
            }
        }
        // rotate so the orbit starts at its smallest element
        let start = cycle
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        cycle.rotate_left(start);
        cycles.push(cycle);
    }

    Ok(cycles
        .into_iter()
        .map(|points| {
            let dlog = points.iter().map(|&x| map.df(x).abs().ln()).collect();
            Orbit {
                map_id: map.family_tag.clone(),
                x0: points[0],
                points,
                dlog,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::SmoothMap;

    #[test]
    fn logistic_fixed_points() {
        let map = SmoothMap::logistic(4.0);
        let orbits = find_periodic_orbit(&map, 1, 1000).unwrap();
        assert_eq!(orbits.len(), 2);
        assert!(orbits[0].points[0].abs() < 1e-9);
        assert!((orbits[1].points[0] - 0.75).abs() < 1e-9);
    }

    #[test]
    fn doubling_period_two_cycles() {
        let map = SmoothMap::doubling();
        let orbits = find_periodic_orbit(&map, 2, 1000).unwrap();
        // fixed 0 plus the cycle {1/3, 2/3}
        assert_eq!(orbits.len(), 2);
        assert!(orbits[0].points[0].abs() < 1e-9);
        assert!((orbits[1].points[0] - 1.0 / 3.0).abs() < 1e-9);
        assert!((orbits[1].points[1] - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn logistic_period_three_cycles_match_tent_conjugacy() {
        // tent-map period-3 orbits {2/9,4/9,8/9} and {2/7,4/7,6/7} pull back
        // through h(y) = sin^2(pi y / 2)
        let map = SmoothMap::logistic(4.0);
        let orbits = find_periodic_orbit(&map, 3, 2000).unwrap();
        let genuinely_p3: Vec<_> = orbits
            .iter()
            .filter(|o| map.domain.dist(map.eval(o.points[2]), o.points[0]) < 1e-8
                && map.domain.dist(o.points[0], o.points[1]) > 1e-6)
            .collect();
        assert_eq!(genuinely_p3.len(), 2);
        let h = |y: f64| (std::f64::consts::FRAC_PI_2 * y).sin().powi(2);
        for tent_cycle in [[2.0 / 9.0, 4.0 / 9.0, 8.0 / 9.0], [2.0 / 7.0, 4.0 / 7.0, 6.0 / 7.0]] {
            let expect_min = tent_cycle.iter().cloned().map(h).fold(f64::INFINITY, f64::min);
            assert!(
                genuinely_p3
                    .iter()
                    .any(|o| (o.points[0] - expect_min).abs() < 1e-7),
                "missing cycle with min {expect_min}"
            );
        }
    }
}

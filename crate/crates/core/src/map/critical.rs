//! Critical points: location, non-flatness order d_c and the factorization
//! f'(x) = p_c(x)·g_c(x) with p_c the leading Taylor term of f' at c.

use serde::{Deserialize, Serialize};

use super::{DomainKind, SmoothMap};
use crate::error::{Error, Result};

/// Largest derivative order certified before a zero of f' is declared flat.
pub const DERIV_ORDER_BOUND: u32 = 10;

const ZERO_TOL: f64 = 1e-12;
const NONZERO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: f64,
    /// d_c = min { d ≥ 1 : f^(d)(c) ≠ 0 }.
    pub order: u32,
    /// f^(d_c)(c).
    pub leading_coefficient: f64,
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

impl CriticalPoint {
    /// p_c(x) = f^(d_c)(c)/(d_c-1)! · (x-c)^(d_c-1).
    pub fn taylor_factor(&self, x: f64) -> f64 {
        self.leading_coefficient / factorial(self.order - 1) * (x - self.location).powi(self.order as i32 - 1)
    }
}

/// g_c(x) = f'(x)/p_c(x); the removable singularity at x = c has value 1 and
/// is returned directly rather than divided out.
pub fn evaluate_g(map: &SmoothMap, critical: &CriticalPoint, x: f64) -> f64 {
    if x == critical.location {
        return 1.0;
    }
    map.df(x) / critical.taylor_factor(x)
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::RootFindingFailure(format!(
            "no sign change on [{lo}, {hi}]"
        )));
    }
    // relative tolerance 1e-14 at scale 1; ~50 halvings suffice
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * (1.0 + mid.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// All zeros of f' on the domain, bracketed on a grid of `resolution` cells.
/// Three routes: sign changes of f' (odd-order zeros), sign changes of f''
/// where |f'| is locally small (even-order zeros), and the interval
/// endpoints. Returns sorted, deduplicated locations.
pub(super) fn bracket_df_zeros(map: &SmoothMap, resolution: usize) -> Result<Vec<f64>> {
    let n = resolution.max(1000);
    let grid = |i: usize| i as f64 / n as f64;
    let mut roots: Vec<f64> = Vec::new();

    for i in 0..n {
        let (a, b) = (grid(i), grid(i + 1));
        let (fa, fb) = (map.df(a), map.df(b));
        if fa == 0.0 {
            roots.push(a);
        }
        if fa.signum() != fb.signum() && fa != 0.0 && fb != 0.0 {
            roots.push(bisect(&|x| map.df(x), a, b)?);
        }
        // even-order zero of f': f' keeps its sign but f'' crosses zero and
        // |f'| dips; only worth refining when the dip is genuinely small
        let (ga, gb) = (map.deriv(a, 2), map.deriv(b, 2));
        if ga.signum() != gb.signum() && ga != 0.0 && gb != 0.0 {
            let c = bisect(&|x| map.deriv(x, 2), a, b)?;
            if map.df(c).abs() < 1e-6 {
                roots.push(c);
            }
        }
    }
    if map.domain == DomainKind::UnitInterval {
        for e in [0.0, 1.0] {
            if map.df(e).abs() < ZERO_TOL {
                roots.push(e);
            }
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| map.domain.dist(*a, *b) < 1e-10);
    // circle wrap: 0 and 1 are the same point
    if map.domain == DomainKind::Circle && roots.len() >= 2 {
        let (first, last) = (roots[0], *roots.last().unwrap());
        if map.domain.dist(first, last) < 1e-10 {
            roots.pop();
        }
    }
    roots.retain(|&c| map.df(c).abs() < ZERO_TOL);
    Ok(roots)
}

/// Locates every critical point of the map together with its order and
/// leading coefficient.
pub fn find_critical_points(map: &SmoothMap, resolution: usize) -> Result<Vec<CriticalPoint>> {
    if resolution < 1000 {
        return Err(Error::InvalidParameter(format!(
            "resolution {resolution} below the required 10^3"
        )));
    }
    let mut out = Vec::new();
    for c in bracket_df_zeros(map, resolution)? {
        let mut order = None;
        for d in 2..=DERIV_ORDER_BOUND {
            let v = map.deriv(c, d);
            if v.abs() > NONZERO_TOL {
                order = Some((d, v));
                break;
            }
        }
        match order {
            Some((d, v)) => out.push(CriticalPoint {
                location: c,
                order: d,
                leading_coefficient: v,
            }),
            None => {
                return Err(Error::FlatCriticalPoint {
                    location: c,
                    order_bound: DERIV_ORDER_BOUND,
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_critical_point() {
        let map = SmoothMap::logistic(4.0);
        let crits = find_critical_points(&map, 1000).unwrap();
        assert_eq!(crits.len(), 1);
        let c = &crits[0];
        assert!((c.location - 0.5).abs() < 1e-12);
        assert_eq!(c.order, 2);
        assert!((c.leading_coefficient + 8.0).abs() < 1e-8);
    }

    #[test]
    fn doubling_has_no_critical_points() {
        let crits = find_critical_points(&SmoothMap::doubling(), 1000).unwrap();
        assert!(crits.is_empty());
    }

    #[test]
    fn cubic_boundary_critical_points() {
        // f = 3x^2 - 2x^3, f' = 6x(1-x)
        let map = SmoothMap::cubic();
        let crits = find_critical_points(&map, 1000).unwrap();
        assert_eq!(crits.len(), 2);
        assert!(crits[0].location.abs() < 1e-12);
        assert_eq!(crits[0].order, 2);
        assert!((crits[0].leading_coefficient - 6.0).abs() < 1e-8);
        assert!((crits[1].location - 1.0).abs() < 1e-12);
        assert!((crits[1].leading_coefficient + 6.0).abs() < 1e-8);
    }

    #[test]
    fn inflection_cubic_has_order_three() {
        // f = 4x^3 - 6x^2 + 3x, f' = 3(2x-1)^2: even-order zero at 1/2
        let map = SmoothMap::polynomial(vec![0.0, 3.0, -6.0, 4.0]);
        let crits = find_critical_points(&map, 1000).unwrap();
        assert_eq!(crits.len(), 1);
        assert!((crits[0].location - 0.5).abs() < 1e-10);
        assert_eq!(crits[0].order, 3);
        assert!((crits[0].leading_coefficient - 24.0).abs() < 1e-6);
    }

    #[test]
    fn trig_circle_criticals() {
        let map = SmoothMap::trig_circle(2, 0.0869188603391377, 2.5);
        let crits = find_critical_points(&map, 2000).unwrap();
        assert_eq!(crits.len(), 2);
        let c1 = (-2.0f64 / 2.5).acos() / (2.0 * std::f64::consts::PI);
        assert!((crits[0].location - c1).abs() < 1e-10);
        assert!((crits[1].location - (1.0 - c1)).abs() < 1e-10);
        assert_eq!(crits[0].order, 2);
        assert_eq!(crits[1].order, 2);
    }

    #[test]
    fn flat_point_is_rejected() {
        // f = 0.4 + (x-1/2)^12 / 12: f' = (x-1/2)^11, flat beyond order 10
        let mut coeffs = vec![0.0; 13];
        // binomial expansion of (x-1/2)^12 / 12
        let mut binom = 1.0f64;
        for j in 0..=12usize {
            // C(12, j) * x^j * (-1/2)^(12-j)
            coeffs[j] = binom * (-0.5f64).powi(12 - j as i32) / 12.0;
            binom = binom * (12 - j) as f64 / (j + 1) as f64;
        }
        coeffs[0] += 0.4;
        let map = SmoothMap::polynomial(coeffs);
        match find_critical_points(&map, 1000) {
            Err(Error::FlatCriticalPoint { location, .. }) => {
                assert!((location - 0.5).abs() < 1e-6)
            }
            other => panic!("expected FlatCriticalPoint, got {other:?}"),
        }
    }

    #[test]
    fn g_factorization_examples() {
        let logistic = SmoothMap::logistic(4.0);
        let c = &find_critical_points(&logistic, 1000).unwrap()[0];
        for x in [0.0, 0.1, 0.5, 0.9] {
            assert!((evaluate_g(&logistic, c, x) - 1.0).abs() < 1e-9, "x={x}");
        }
        assert_eq!(evaluate_g(&logistic, c, c.location), 1.0);

        let cubic = SmoothMap::cubic();
        let c0 = &find_critical_points(&cubic, 1000).unwrap()[0];
        // p_0(x) = 6x, g = (1-x)
        assert!((evaluate_g(&cubic, c0, 0.5) - 0.5).abs() < 1e-9);
        assert_eq!(evaluate_g(&cubic, c0, 0.0), 1.0);
    }

    #[test]
    fn g_times_p_reproduces_df() {
        for map in [SmoothMap::logistic(4.0), SmoothMap::cubic(), SmoothMap::trig_circle(2, 0.0869188603391377, 2.5)] {
            let crits = find_critical_points(&map, 1000).unwrap();
            for c in &crits {
                for i in 0..1000 {
                    let x = (i as f64 + 0.5) / 1000.0;
                    if x == c.location {
                        continue;
                    }
                    let recon = c.taylor_factor(x) * evaluate_g(&map, c, x);
                    let want = map.df(x);
                    if want.abs() > 1e-300 {
                        assert!(
                            ((recon - want) / want).abs() < 1e-10,
                            "map {} x {x}: {recon} vs {want}",
                            map.family_tag
                        );
                    }
                }
            }
        }
    }
}

//! Extended-precision support: reference orbits of critical points and an
//! extended orbit mode.
//!
//! Orbit data is binary64 by default, but two computations are carried at a
//! configurable mantissa (256 bits unless asked otherwise): the forward
//! orbits f^h(c) of critical points, against which shadowing distances are
//! measured, and the optional extended orbit mode, where the trajectory is
//! iterated at full precision and only the stored points are rounded —
//! log|f'| is evaluated before rounding, which is what matters once δ drops
//! below the f64 resolution of the critical neighborhood.

use astro_float::{BigFloat, Consts, RoundingMode};

use crate::map::{DomainKind, MapExpr, SmoothMap};
use crate::orbit::Orbit;

pub const DEFAULT_PRECISION_BITS: usize = 256;

const RM: RoundingMode = RoundingMode::ToEven;

/// Working context: precision plus the shared constants cache.
pub struct ExtCtx {
    pub prec: usize,
    consts: Consts,
}

impl ExtCtx {
    pub fn new(prec: usize) -> Self {
        ExtCtx {
            prec: prec.max(64),
            consts: Consts::new().expect("constants cache"),
        }
    }

    pub fn big(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.prec)
    }

    pub fn to_f64(x: &BigFloat) -> f64 {
        big_to_f64(x)
    }

    fn two_pi(&mut self) -> BigFloat {
        let pi = self.consts.pi(self.prec, RM);
        pi.mul(&self.big(2.0), self.prec, RM)
    }

    /// f(x) at extended precision (reduced mod 1 on the circle).
    pub fn eval_map(&mut self, map: &SmoothMap, x: &BigFloat) -> BigFloat {
        let p = self.prec;
        match &map.expr {
            MapExpr::Poly(coeffs) => {
                let mut acc = self.big(0.0);
                for &c in coeffs.iter().rev() {
                    acc = acc.mul(x, p, RM).add(&self.big(c), p, RM);
                }
                acc
            }
            MapExpr::TrigCircle { m, beta, k } => {
                let lin = self.big(*m as f64).mul(x, p, RM).add(&self.big(*beta), p, RM);
                let y = if *k == 0.0 {
                    lin
                } else {
                    let two_pi = self.two_pi();
                    let s = x.mul(&two_pi, p, RM).sin(p, RM, &mut self.consts);
                    lin.add(&self.big(*k).div(&two_pi, p, RM).mul(&s, p, RM), p, RM)
                };
                mod_one(&y, p)
            }
        }
    }

    /// |f'(x)| at extended precision.
    pub fn abs_df(&mut self, map: &SmoothMap, x: &BigFloat) -> BigFloat {
        let p = self.prec;
        let v = match &map.expr {
            MapExpr::Poly(coeffs) => {
                let mut acc = self.big(0.0);
                for (i, &c) in coeffs.iter().enumerate().skip(1).rev() {
                    acc = acc
                        .mul(x, p, RM)
                        .add(&self.big(c * i as f64), p, RM);
                }
                acc
            }
            MapExpr::TrigCircle { m, k, .. } => {
                if *k == 0.0 {
                    self.big(*m as f64)
                } else {
                    let two_pi = self.two_pi();
                    let c = x.mul(&two_pi, p, RM).cos(p, RM, &mut self.consts);
                    self.big(*m as f64).add(&self.big(*k).mul(&c, p, RM), p, RM)
                }
            }
        };
        v.abs()
    }

    /// Phase-space distance between an extended point and an f64 point.
    pub fn dist(&self, domain: DomainKind, a: &BigFloat, b: f64) -> f64 {
        let p = self.prec;
        let diff = a.sub(&self.big(b), p, RM);
        match domain {
            DomainKind::UnitInterval => big_to_f64(&diff.abs()),
            DomainKind::Circle => {
                let d = big_to_f64(&mod_one(&diff, p));
                d.min(1.0 - d)
            }
        }
    }
}

fn mod_one(x: &BigFloat, p: usize) -> BigFloat {
    x.sub(&x.floor(), p, RM)
}

/// Rounds a BigFloat to the nearest f64 (top 128 mantissa bits suffice).
pub fn big_to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    if x.is_zero() {
        return 0.0;
    }
    let e = x.exponent().expect("finite") as i32;
    let words = x.mantissa_digits().expect("finite");
    let n = words.len();
    let mut mant = words[n - 1] as f64 / 2f64.powi(64);
    if n >= 2 {
        mant += words[n - 2] as f64 / 2f64.powi(128);
    }
    let v = mant * 2f64.powi(e);
    if x.is_negative() {
        -v
    } else {
        v
    }
}

/// Forward orbits f^h(c) of the critical points, precomputed once at
/// extended precision and shared read-only by all shadowing checks.
pub struct ReferenceOrbits {
    pub domain: DomainKind,
    orbits: Vec<Vec<BigFloat>>,
    prec: usize,
}

impl ReferenceOrbits {
    pub fn compute(map: &SmoothMap, criticals: &[f64], len: usize, prec: usize) -> Self {
        let mut ctx = ExtCtx::new(prec);
        let orbits = criticals
            .iter()
            .map(|&c| {
                let mut orbit = Vec::with_capacity(len + 1);
                let mut x = ctx.big(c);
                for _ in 0..=len {
                    orbit.push(x.clone());
                    x = ctx.eval_map(map, &x);
                }
                orbit
            })
            .collect();
        ReferenceOrbits { domain: map.domain, orbits, prec }
    }

    pub fn len(&self) -> usize {
        self.orbits.first().map_or(0, |o| o.len())
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    /// d(x, f^h(c_i)) with the reference point at extended precision.
    pub fn dist_to(&self, critical: usize, h: usize, x: f64) -> f64 {
        let r = &self.orbits[critical][h];
        let diff = r.sub(&BigFloat::from_f64(x, self.prec), self.prec, RM);
        match self.domain {
            DomainKind::UnitInterval => big_to_f64(&diff.abs()),
            DomainKind::Circle => {
                let d = big_to_f64(&mod_one(&diff, self.prec));
                d.min(1.0 - d)
            }
        }
    }

    /// f64 snapshot of f^h(c_i).
    pub fn point(&self, critical: usize, h: usize) -> f64 {
        big_to_f64(&self.orbits[critical][h])
    }
}

/// Uniform point of [0,1) with a full `prec`-bit mantissa. An f64 seed point
/// carries only 53 significant bits, which the doubling map shifts out in as
/// many steps; extended orbits of bit-shifting maps need this much entropy
/// to stay typical over their whole length.
pub fn seeded_big_uniform(seed: u64, prec: usize) -> BigFloat {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let ctx = ExtCtx::new(prec);
    let chunk = BigFloat::from_f64(2f64.powi(-32), prec);
    let mut scale = chunk.clone();
    let mut acc = ctx.big(0.0);
    for _ in 0..(prec / 32 + 1) {
        let u: u32 = rng.gen();
        acc = acc.add(&ctx.big(u as f64).mul(&scale, prec, RM), prec, RM);
        scale = scale.mul(&chunk, prec, RM);
    }
    acc
}

/// Iterates the orbit at extended precision. Stored points are f64
/// snapshots; dlog is computed from the pre-rounding iterates.
pub fn iterate_extended(map: &SmoothMap, x0: &BigFloat, n: usize, prec: usize) -> Orbit {
    let mut ctx = ExtCtx::new(prec);
    let mut points = Vec::with_capacity(n + 1);
    let mut dlog = Vec::with_capacity(n + 1);
    let mut x = x0.clone();
    for step in 0..=n {
        points.push(big_to_f64(&x));
        let df = big_to_f64(&ctx.abs_df(map, &x));
        dlog.push(df.ln());
        if step < n {
            x = ctx.eval_map(map, &x);
        }
    }
    Orbit {
        map_id: map.family_tag.clone(),
        x0: big_to_f64(x0),
        points,
        dlog,
    }
}

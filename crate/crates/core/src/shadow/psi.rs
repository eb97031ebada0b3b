//! Piecewise shadowing intervals and their inductive construction.
//!
//! A PSI is a chain of consecutive shadowing intervals whose cumulative
//! weight product stays below 1; it is right-maximal when the product first
//! reaches 1 at its end. The builder follows the inductive scheme: seed the
//! first segment at a visit a₁ with length ⌈l(a₁) - (K+1)log2/λ⌉, then while
//! a later visit q lies in the processed window, classify the closing
//! segment as switching or non-switching, incorporate q's small weight, and
//! push the end to the next crossing G ≥ 1. One deliberate difference from
//! the source construction: the visit window is (a*, e] including the
//! current end e, so a crossing that lands exactly on a visit is processed
//! rather than finalized, and every finished PSI provably ends outside A.

use serde::{Deserialize, Serialize};

use super::{ShadowContext, ShadowingInterval, Switching};
use crate::error::{Error, Result};

const LN2: f64 = std::f64::consts::LN_2;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Psi {
    /// a₁ < … < a_n < e: segment starts plus the common end.
    pub breakpoints: Vec<usize>,
    /// Critical-point index shadowed by each segment.
    pub critical_per_segment: Vec<usize>,
    /// Inclusive log-profile: log_g[j] = log G(a₁+j) = Σ_{i ≤ a₁+j} log F(i),
    /// for j = 0 ..= (e - a₁). Interior validity is log_g < 0 strictly before
    /// the end; right-maximality is log_g ≥ 0 at the end.
    pub log_g: Vec<f64>,
    pub right_maximal: bool,
    pub epsilon: f64,
}

impl Psi {
    pub fn start(&self) -> usize {
        self.breakpoints[0]
    }

    /// Exclusive end of the support.
    pub fn end(&self) -> usize {
        *self.breakpoints.last().unwrap()
    }

    pub fn support_len(&self) -> usize {
        self.end() - self.start()
    }

    pub fn segment_count(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn segments(&self) -> impl Iterator<Item = ShadowingInterval> + '_ {
        self.breakpoints.windows(2).enumerate().map(|(i, w)| ShadowingInterval {
            a: w[0],
            b: w[1],
            critical: self.critical_per_segment[i],
            epsilon: self.epsilon,
        })
    }

    pub fn contains(&self, k: usize) -> bool {
        (self.start()..self.end()).contains(&k)
    }

    /// G at the endpoint (the right-maximality quantity).
    pub fn g_endpoint(&self) -> f64 {
        self.log_g.last().unwrap().exp()
    }

    /// log G(k) for k in [a₁, e].
    pub fn log_g_at(&self, k: usize) -> f64 {
        self.log_g[k - self.start()]
    }

    /// Recomputes the log-profile from raw weights (no cutoff); for a
    /// finished PSI every visit inside the support has been incorporated,
    /// so this must reproduce the stored profile.
    pub fn recompute_log_g(&self, ctx: &ShadowContext) -> Vec<f64> {
        let (a1, e) = (self.start(), self.end());
        let mut acc = 0.0;
        (a1..=e)
            .map(|i| {
                acc += ctx.log_weight(i, usize::MAX);
                acc
            })
            .collect()
    }
}

struct Builder<'c, 'a> {
    ctx: &'c ShadowContext<'a>,
    a1: usize,
    starts: Vec<usize>,
    crit: Vec<usize>,
    end: usize,
    a_star: usize,
    /// Inclusive log-profile over [a1, last extended position].
    log_g: Vec<f64>,
}

impl<'c, 'a> Builder<'c, 'a> {
    /// Extends the profile through position p (inclusive) under the current
    /// cutoff.
    fn extend_profile(&mut self, p: usize) {
        while self.a1 + self.log_g.len() <= p {
            let i = self.a1 + self.log_g.len();
            let prev = *self.log_g.last().unwrap();
            self.log_g.push(prev + self.ctx.log_weight(i, self.a_star));
        }
    }

    fn finish(mut self, right_maximal_candidate: bool) -> Psi {
        self.extend_profile(self.end);
        self.log_g.truncate(self.end - self.a1 + 1);
        let right_maximal = right_maximal_candidate && *self.log_g.last().unwrap() >= 0.0;
        let mut breakpoints = self.starts;
        breakpoints.push(self.end);
        Psi {
            breakpoints,
            critical_per_segment: self.crit,
            log_g: self.log_g,
            right_maximal,
            epsilon: self.ctx.params.epsilon,
        }
    }
}

/// Builds the right-maximal PSI starting at the visit a₁. A PSI cut short by
/// the orbit horizon is returned with `right_maximal = false`; an orbit whose
/// weight product cannot reach 1 within the expansion budget is reported as
/// non-expanding.
pub fn build_right_maximal_psi(ctx: &ShadowContext, a1: usize) -> Result<Psi> {
    let orbit = ctx.orbit;
    let last_usable = orbit.horizon() - 1;
    if !ctx.in_a(a1) {
        return Err(Error::InvalidParameter(format!("a1 = {a1} is not a visit")));
    }
    if orbit.dlog[a1] == f64::NEG_INFINITY {
        return Err(Error::ExactCriticalHit { index: a1 });
    }
    if a1 >= last_usable {
        return Err(Error::InvalidParameter(format!(
            "visit {a1} too close to the orbit horizon"
        )));
    }
    let constants = ctx.constants;
    let kp1_ln2 = (constants.k_max_order as f64 + 1.0) * LN2;
    let c1 = ctx
        .critical_near(orbit.points[a1])
        .ok_or(Error::NoNearbyCritical {
            index: a1,
            x: orbit.points[a1],
            epsilon: ctx.params.epsilon,
        })?;

    let seed = (ctx.shadow_length(a1) - kp1_ln2 / constants.lambda_log).ceil().max(1.0);
    let seed_end = if seed >= (last_usable - a1) as f64 {
        // seed alone overruns the data: partial
        let mut b = Builder {
            ctx,
            a1,
            starts: vec![a1],
            crit: vec![c1],
            end: last_usable,
            a_star: a1,
            log_g: vec![ctx.log_weight(a1, a1)],
        };
        b.extend_profile(last_usable);
        return Ok(b.finish(false));
    } else {
        a1 + seed as usize
    };

    let mut b = Builder {
        ctx,
        a1,
        starts: vec![a1],
        crit: vec![c1],
        end: seed_end,
        a_star: a1,
        log_g: vec![ctx.log_weight(a1, a1)],
    };

    loop {
        b.extend_profile(b.end);
        let Some(q) = ctx.next_visit(b.a_star, b.end) else {
            return Ok(b.finish(true));
        };
        if orbit.dlog[q] == f64::NEG_INFINITY {
            return Err(Error::ExactCriticalHit { index: q });
        }
        // classify the segment [a_r, q) that the visit closes
        let seg = ShadowingInterval {
            a: *b.starts.last().unwrap(),
            b: q,
            critical: *b.crit.last().unwrap(),
            epsilon: ctx.params.epsilon,
        };
        let switching = ctx.classify_switching(&seg, q)?;
        // incorporate the visit: its weight drops from Λ to 2^(K+1)|f'|
        let delta_w = constants.lambda_log - (orbit.dlog[q] + kp1_ln2);
        for v in b.log_g[(q - b.a1)..].iter_mut() {
            *v -= delta_w;
        }
        b.a_star = q;
        // the drop at q pushes the whole tail of the profile back below 1
        debug_assert!(b.log_g[b.end - b.a1] < 0.0);

        // push the end to the next crossing G ≥ 1, strictly past the old end
        let old_end = b.end;
        let mut i = old_end;
        let crossing = loop {
            i += 1;
            if i > last_usable {
                break None;
            }
            if i - old_end > ctx.expansion_budget {
                return Err(Error::NonExpandingOrbit { budget: ctx.expansion_budget });
            }
            b.extend_profile(i);
            if b.log_g[i - b.a1] >= 0.0 {
                break Some(i);
            }
        };
        let (new_end, hit_horizon) = match crossing {
            Some(i) => (i, false),
            None => (last_usable, true),
        };
        if switching == Switching::Switching {
            // close [a_r, q) and open a new segment at the visit
            b.starts.push(q);
            let cq = ctx.critical_near(orbit.points[q]).unwrap();
            b.crit.push(cq);
        }
        b.end = new_end;
        if hit_horizon {
            return Ok(b.finish(false));
        }
    }
}

/// Distance-bound violations of the final construction state: for every k in
/// the support, d(x_k, f^{k-a_j} c_{a_j}) < P(k)·ε with P the half-open
/// weight product. Returns the number of violations (0 for a sound build).
pub fn check_ipsi_bounds(ctx: &ShadowContext, psi: &Psi) -> usize {
    let a1 = psi.start();
    let mut violations = 0;
    for seg in psi.segments() {
        for k in seg.a..seg.b {
            let log_p = if k == a1 { 0.0 } else { psi.log_g[k - a1 - 1] };
            let bound = log_p.exp() * psi.epsilon;
            let d = ctx.refs.dist_to(seg.critical, k - seg.a, ctx.orbit.points[k]);
            if d >= bound {
                violations += 1;
            }
        }
    }
    violations
}

/// Merges two PSIs with intersecting supports: the union of their segment
/// starts below the larger end. The profile is recomputed from raw weights.
pub fn psi_union(ctx: &ShadowContext, i1: &Psi, i2: &Psi) -> Result<Psi> {
    let (s1, e1) = (i1.start(), i1.end());
    let (s2, e2) = (i2.start(), i2.end());
    if e1 <= s2 || e2 <= s1 {
        return Err(Error::DisjointSupports);
    }
    let end = e1.max(e2);
    let mut starts: Vec<usize> = i1
        .breakpoints[..i1.breakpoints.len() - 1]
        .iter()
        .chain(&i2.breakpoints[..i2.breakpoints.len() - 1])
        .copied()
        .collect();
    starts.sort_unstable();
    starts.dedup();

    let seg_of = |psi: &Psi, s: usize, until: usize| -> Option<usize> {
        psi.segments()
            .find(|seg| seg.a == s && seg.b >= until)
            .map(|seg| seg.critical)
    };
    let any_seg_of = |psi: &Psi, s: usize| -> Option<usize> {
        psi.segments().find(|seg| seg.a == s).map(|seg| seg.critical)
    };

    let mut crit = Vec::with_capacity(starts.len());
    for (idx, &s) in starts.iter().enumerate() {
        let until = starts.get(idx + 1).copied().unwrap_or(end);
        let c = seg_of(i1, s, until)
            .or_else(|| seg_of(i2, s, until))
            .or_else(|| any_seg_of(i1, s))
            .or_else(|| any_seg_of(i2, s))
            .expect("every merged start comes from a source segment");
        crit.push(c);
    }

    let a1 = starts[0];
    let mut acc = 0.0;
    let log_g: Vec<f64> = (a1..=end)
        .map(|i| {
            acc += ctx.log_weight(i, usize::MAX);
            acc
        })
        .collect();
    let right_maximal = *log_g.last().unwrap() >= 0.0;
    let mut breakpoints = starts;
    breakpoints.push(end);
    Ok(Psi {
        breakpoints,
        critical_per_segment: crit,
        log_g,
        right_maximal,
        epsilon: i1.epsilon,
    })
}

/// Structural validity of a PSI against the stored profile: starts are
/// visits, interior G < 1, endpoint test when flagged right-maximal, and
/// every segment ε-shadowing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PsiValidity {
    pub starts_are_visits: bool,
    pub interior_g_below_one: bool,
    pub endpoint_g_consistent: bool,
    pub segments_shadowing: bool,
}

impl PsiValidity {
    pub fn all_ok(&self) -> bool {
        self.starts_are_visits
            && self.interior_g_below_one
            && self.endpoint_g_consistent
            && self.segments_shadowing
    }
}

pub fn validate_psi(ctx: &ShadowContext, psi: &Psi) -> PsiValidity {
    let starts_are_visits = psi.breakpoints[..psi.breakpoints.len() - 1]
        .iter()
        .all(|&a| ctx.in_a(a));
    let last = psi.log_g.len() - 1;
    let interior_g_below_one = psi.log_g[..last].iter().all(|&v| v < 0.0);
    let endpoint_g_consistent = !psi.right_maximal || psi.log_g[last] >= 0.0;
    let segments_shadowing = psi.segments().all(|seg| ctx.verify_shadowing(&seg));
    PsiValidity {
        starts_are_visits,
        interior_g_below_one,
        endpoint_g_consistent,
        segments_shadowing,
    }
}

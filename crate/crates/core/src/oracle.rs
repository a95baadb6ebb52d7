//! Independent numerical re-derivation of ξ*(α): grid maximin over the grouped parameters,
//! boundary root-finding, and curve verification.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SignalModel;
use crate::threshold::{
    flat_boundary, flat_value, segment3_params, segment_value, steep_value, theta, xi_nl, xi_pair, xi_star,
    Segment,
};

pub const DEFAULT_RESOLUTION: f64 = 1e-3;
pub const DEFAULT_TOL: f64 = 2e-3;
/// Slack for the non-strict feasibility test of the lower bound.
pub const FEASIBILITY_SLACK: f64 = 1e-9;
pub const BISECTION_STEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumericBounds {
    pub lower: f64,
    pub upper: f64,
    /// `(beta_h1, beta_l0, gamma)` of the best unbiased grid point.
    pub argmax: (f64, f64, f64),
    /// Unbiased maximin before combining with the floor.
    pub upper_grid: f64,
    pub lower_grid: f64,
    /// Best value with every minority agent voting A.
    pub biased_floor: f64,
}

/// Best deviation cap when all minority agents vote A: the seg-1 majority solution must keep
/// `beta_l* >= 0` (the `Δ(α - 1/2)/p_hL` bound) and `beta_h* <= 1` (the `Δ/(2 p_lL)` bound).
pub fn biased_floor(s: &SignalModel, alpha: f64) -> f64 {
    steep_value(s, alpha).min(flat_value(s))
}

/// γ in [0, 1 - α] maximizing `min(ξ_h, ξ_ℓ)`: the crossing of the decreasing ξ_h and the
/// increasing ξ_ℓ, or an endpoint when they do not cross.
pub fn equalize_gamma(s: &SignalModel, alpha: f64, beta_h1: f64, beta_l0: f64) -> f64 {
    let hi = 1.0 - alpha;
    let at = |g: f64| {
        let p = xi_pair(s, alpha, beta_h1, beta_l0, g);
        p.xi_h - p.xi_l
    };
    if at(0.0) <= 0.0 {
        return 0.0;
    }
    if at(hi) >= 0.0 {
        return hi;
    }
    // ξ_h - ξ_ℓ is affine in γ (the denominators do not involve γ), so the crossing is exact.
    let a = alpha - 0.5;
    let y = 1.0 - beta_l0;
    let dh = crate::threshold::xi_h_den(s, beta_h1, beta_l0);
    let dl = crate::threshold::xi_l_den(s, beta_h1, beta_l0);
    let g = ((a + (1.0 - alpha) * beta_h1) * dl - a * dh) / (beta_h1 * dl + y * dh);
    g.clamp(0.0, hi)
}

/// Same crossing found by bisection (the bracketing precondition is checked at both ends).
pub fn bisect_gamma(s: &SignalModel, alpha: f64, beta_h1: f64, beta_l0: f64) -> f64 {
    let at = |g: f64| {
        let p = xi_pair(s, alpha, beta_h1, beta_l0, g);
        p.xi_h - p.xi_l
    };
    let (mut lo, mut hi) = (0.0, 1.0 - alpha);
    if at(lo) <= 0.0 {
        return lo;
    }
    if at(hi) >= 0.0 {
        return hi;
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if at(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    value: f64,
    feasible: bool,
    params: (f64, f64, f64),
}

fn evaluate(s: &SignalModel, alpha: f64, b1: f64, b0: f64) -> Candidate {
    let g = equalize_gamma(s, alpha, b1, b0);
    let p = xi_pair(s, alpha, b1, b0, g);
    let value = p.xi_h.min(p.xi_l);
    let feasible = value <= g + FEASIBILITY_SLACK && value <= 1.0 - alpha - g + FEASIBILITY_SLACK;
    Candidate { value, feasible, params: (b1, b0, g) }
}

/// Keep the first (lexicographically smallest) strict maximum.
fn better(best: &Option<Candidate>, c: &Candidate) -> bool {
    best.is_none_or(|b| c.value > b.value)
}

fn grid_best(s: &SignalModel, alpha: f64, steps: usize) -> (Option<Candidate>, Option<Candidate>) {
    let rows: Vec<(Option<Candidate>, Option<Candidate>)> = (0..=steps)
        .into_par_iter()
        .map(|i| {
            let b1 = i as f64 / steps as f64;
            let mut up: Option<Candidate> = None;
            let mut low: Option<Candidate> = None;
            for j in 0..=steps {
                let c = evaluate(s, alpha, b1, j as f64 / steps as f64);
                if better(&up, &c) {
                    up = Some(c);
                }
                if c.feasible && better(&low, &c) {
                    low = Some(c);
                }
            }
            (up, low)
        })
        .collect();
    let mut up = None;
    let mut low = None;
    for (u, l) in rows {
        if let Some(u) = u {
            if better(&up, &u) {
                up = Some(u);
            }
        }
        if let Some(l) = l {
            if better(&low, &l) {
                low = Some(l);
            }
        }
    }
    (up, low)
}

fn refine(s: &SignalModel, alpha: f64, start: Candidate, resolution: f64, feasible_only: bool) -> Candidate {
    let mut best = start;
    let mut radius = resolution;
    for _ in 0..2 {
        let step = radius * 0.1;
        let (c1, c0) = (best.params.0, best.params.1);
        for i in -10..=10 {
            for j in -10..=10 {
                let b1 = (c1 + i as f64 * step).clamp(0.0, 1.0);
                let b0 = (c0 + j as f64 * step).clamp(0.0, 1.0);
                let c = evaluate(s, alpha, b1, b0);
                if (!feasible_only || c.feasible) && c.value > best.value {
                    best = c;
                }
            }
        }
        radius = step;
    }
    // Report γ from the bisection search at the final point.
    let (b1, b0, _) = best.params;
    best.params.2 = bisect_gamma(s, alpha, b1, b0);
    best
}

/// Numeric lower and upper bounds on ξ*(α) for 1/2 < α <= θ.
pub fn numeric_xi_bounds(s: &SignalModel, alpha: f64, resolution: f64) -> Result<NumericBounds> {
    let th = theta(s);
    if !(alpha > 0.5 && alpha <= th + 1e-12) {
        return Err(Error::DomainError(format!("α = {alpha} outside (1/2, θ = {th}]")));
    }
    if !(resolution > 0.0 && resolution <= 0.5) {
        return Err(Error::DomainError(format!("resolution {resolution} must lie in (0, 1/2]")));
    }
    let steps = (1.0 / resolution).round() as usize;
    let (up, low) = grid_best(s, alpha, steps);
    let up = refine(s, alpha, up.expect("grid is non-empty"), resolution, false);
    let low = low.map(|l| refine(s, alpha, l, resolution, true));
    let floor = biased_floor(s, alpha);
    let lower_grid = low.map_or(f64::NEG_INFINITY, |l| l.value);
    Ok(NumericBounds {
        lower: lower_grid.max(floor),
        upper: up.value.max(floor),
        argmax: up.params,
        upper_grid: up.value,
        lower_grid,
        biased_floor: floor,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyPoint {
    pub alpha: f64,
    pub segment: Segment,
    pub closed_form: f64,
    pub lower: f64,
    pub upper: f64,
    pub abs_diff: f64,
    pub sandwich_ok: bool,
    /// Segment suggested by the numeric argmax.
    pub inferred: Segment,
    pub label_ok: bool,
    pub argmax: (f64, f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub points: Vec<VerifyPoint>,
    pub max_abs_diff: f64,
    pub tol: f64,
    /// Every point within `tol` and sandwiched.
    pub pass: bool,
    pub labels_agree: bool,
}

fn infer_segment(s: &SignalModel, alpha: f64, b: &NumericBounds, resolution: f64, tol: f64) -> Segment {
    if b.upper_grid <= b.biased_floor + tol {
        if alpha >= flat_boundary(s) {
            Segment::Flat
        } else {
            Segment::Steep
        }
    } else if b.argmax.1 <= 2.0 * resolution {
        Segment::Tail
    } else {
        Segment::NonLinear
    }
}

/// Compare the closed form against the numeric bounds on every grid α in (1/2, θ]; other
/// α values are skipped.
pub fn verify_curve(s: &SignalModel, alpha_grid: &[f64], tol: f64, resolution: f64) -> Result<VerifyReport> {
    let th = theta(s);
    let mut points = Vec::new();
    for &alpha in alpha_grid.iter().filter(|&&a| a > 0.5 && a <= th + 1e-12) {
        let tp = xi_star(s, alpha)?;
        let b = numeric_xi_bounds(s, alpha, resolution)?;
        let closed = tp.xi_star;
        let inferred = infer_segment(s, alpha, &b, resolution, tol);
        let label_ok = inferred == tp.segment
            || segment_value(s, inferred, alpha).is_ok_and(|v| (v - closed).abs() <= tol);
        points.push(VerifyPoint {
            alpha,
            segment: tp.segment,
            closed_form: closed,
            lower: b.lower,
            upper: b.upper,
            abs_diff: (closed - b.upper).abs(),
            sandwich_ok: b.lower <= closed + FEASIBILITY_SLACK && closed <= b.upper + tol,
            inferred,
            label_ok,
            argmax: b.argmax,
        });
    }
    let max_abs_diff = points.iter().map(|p| p.abs_diff).fold(0.0, f64::max);
    let pass = points.iter().all(|p| p.abs_diff <= tol && p.sandwich_ok);
    let labels_agree = points.iter().all(|p| p.label_ok);
    Ok(VerifyReport { points, max_abs_diff, tol, pass, labels_agree })
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    let positive_low = flo > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == positive_low {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Roots of `ξ_NL(α) - Δ(α - 1/2)/p_hL` and of the NonLinear/Tail switch.
///
/// `ξ_NL(α) - Δα/2` only touches zero at the tail boundary (it is nonnegative on both
/// sides), so the second root is bracketed through the equivalent condition `b*(α) = 1`.
pub fn boundary_roots(s: &SignalModel) -> Result<(f64, f64)> {
    let fb = flat_boundary(s);
    let root_steep = bisect(0.5, fb, |a| xi_nl(s, a).unwrap_or(f64::NAN) - steep_value(s, a))?;
    let b_star = |a: f64| {
        let root = (2.0 * (1.0 - a * s.p_lh) * (1.0 - 2.0 * a * s.p_ll) * s.p_lh * s.p_ll).max(0.0).sqrt();
        (1.0 - 2.0 * a) + root / (s.p_ll * s.p_lh) - 1.0
    };
    let root_tail = bisect(0.5, fb, b_star)?;
    Ok((root_steep, root_tail))
}

/// Segment-3 parameters for α, if α lies in the NonLinear segment.
pub fn argmax_reference(s: &SignalModel, alpha: f64) -> Option<(f64, f64, f64)> {
    segment3_params(s, alpha).ok().map(|p| (1.0, 1.0 - p.b_star, p.gamma_star))
}

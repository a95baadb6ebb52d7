//! Closed-form threshold quantities: θ, α_NL, ξ_NL, the piecewise ξ*(α), the ξ_h/ξ_ℓ caps,
//! majority solution systems, γ̂/ξ̂, segment-3 parameters and derivative signs.
//!
//! Every function expects a canonical [`SignalModel`] (`p_hH <= p_lL`).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SignalModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Segment {
    StrongEq,
    Flat,
    Steep,
    NonLinear,
    Tail,
}

impl Segment {
    pub fn label(&self) -> &'static str {
        match self {
            Segment::StrongEq => "StrongEq",
            Segment::Flat => "Flat",
            Segment::Steep => "Steep",
            Segment::NonLinear => "NonLinear",
            Segment::Tail => "Tail",
        }
    }
}

impl std::fmt::Display for Segment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Majority fraction above which the whole minority can be withstood.
pub fn theta(s: &SignalModel) -> f64 {
    0.5 + s.p_lh / (2.0 * s.p_ll)
}

/// Lower end of the Flat segment, `1/(2 p_lL) = (1 - θ)/Δ`.
pub fn flat_boundary(s: &SignalModel) -> f64 {
    1.0 / (2.0 * s.p_ll)
}

/// Boundary between the NonLinear and Tail segments.
pub fn tail_boundary(s: &SignalModel) -> f64 {
    1.0 / (1.0 + 2.0 * s.p_ll - s.p_hh)
}

/// The Tail segment exists only when its boundary lies above 1/2.
pub fn has_tail(s: &SignalModel) -> bool {
    tail_boundary(s) > 0.5
}

/// Boundary between the Steep and NonLinear segments.
pub fn alpha_nl(s: &SignalModel) -> f64 {
    let (hh, lh, hl, ll) = (s.p_hh, s.p_lh, s.p_hl, s.p_ll);
    let num = 2.0 * hh * ll * ll + hh * (hh + 3.0 * ll) - (3.0 * hh + ll) + 2.0
        - 2.0 * hl * (hh * hl * lh * ll).sqrt();
    let den = 2.0 * lh * lh + 8.0 * hh * ll * ll;
    num / den
}

/// Radicand `2 (1 - α p_lH)(1 - 2 α p_lL) p_lH p_lL` shared by ξ_NL and the segment-3 parameters.
fn nl_radicand(s: &SignalModel, alpha: f64) -> f64 {
    2.0 * (1.0 - alpha * s.p_lh) * (1.0 - 2.0 * alpha * s.p_ll) * s.p_lh * s.p_ll
}

fn nl_sqrt(s: &SignalModel, alpha: f64) -> Result<f64> {
    let r = nl_radicand(s, alpha);
    if r < -1e-14 {
        return Err(Error::DomainError(format!("ξ_NL radicand {r} < 0 at α = {alpha}")));
    }
    Ok(r.max(0.0).sqrt())
}

/// ξ_NL(α), defined for α ≤ 1/(2 p_lL).
pub fn xi_nl(s: &SignalModel, alpha: f64) -> Result<f64> {
    let root = nl_sqrt(s, alpha)?;
    Ok(s.delta / (4.0 * root + 2.0 * s.p_lh + 4.0 * s.p_ll - 8.0 * alpha * s.p_lh * s.p_ll))
}

/// Steep-segment formula `Δ(α - 1/2)/p_hL`, also the biased-γ bound.
pub fn steep_value(s: &SignalModel, alpha: f64) -> f64 {
    s.delta * (alpha - 0.5) / s.p_hl
}

/// Flat-segment value `Δ/(2 p_lL)`.
pub fn flat_value(s: &SignalModel) -> f64 {
    s.delta / (2.0 * s.p_ll)
}

/// Tail-segment formula `Δα/2`.
pub fn tail_value(s: &SignalModel, alpha: f64) -> f64 {
    0.5 * s.delta * alpha
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdPoint {
    pub alpha: f64,
    pub segment: Segment,
    /// Sentinel 1.0 for [`Segment::StrongEq`].
    pub xi_star: f64,
    pub theta: f64,
    pub alpha_nl: f64,
    pub tail_boundary: f64,
}

/// Segment containing α (α > 1/2). Boundary points go to the segment listed first
/// when reading from θ downwards.
pub fn classify_segment(s: &SignalModel, alpha: f64) -> Segment {
    if alpha > theta(s) {
        Segment::StrongEq
    } else if alpha >= flat_boundary(s) {
        Segment::Flat
    } else if alpha >= alpha_nl(s) {
        Segment::Steep
    } else if has_tail(s) && alpha <= tail_boundary(s) {
        Segment::Tail
    } else {
        Segment::NonLinear
    }
}

/// Closed-form value of one segment's formula at α (the StrongEq sentinel is 1.0).
pub fn segment_value(s: &SignalModel, seg: Segment, alpha: f64) -> Result<f64> {
    Ok(match seg {
        Segment::StrongEq => 1.0,
        Segment::Flat => flat_value(s),
        Segment::Steep => steep_value(s, alpha),
        Segment::NonLinear => xi_nl(s, alpha)?,
        Segment::Tail => tail_value(s, alpha),
    })
}

pub fn xi_star(s: &SignalModel, alpha: f64) -> Result<ThresholdPoint> {
    if !(alpha > 0.5 && alpha <= 1.0) {
        return Err(Error::DomainError(format!("α = {alpha} must lie in (1/2, 1]")));
    }
    let segment = classify_segment(s, alpha);
    Ok(ThresholdPoint {
        alpha,
        segment,
        xi_star: segment_value(s, segment, alpha)?,
        theta: theta(s),
        alpha_nl: alpha_nl(s),
        tail_boundary: tail_boundary(s),
    })
}

/// The two binding deviation caps for grouped parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiPair {
    pub xi_h: f64,
    pub xi_l: f64,
    pub beta_h1: f64,
    pub beta_l0: f64,
    pub gamma: f64,
}

/// Denominator of ξ_h.
pub fn xi_h_den(s: &SignalModel, beta_h1: f64, beta_l0: f64) -> f64 {
    let y = 1.0 - beta_l0;
    s.p_hh * s.p_ll * beta_h1 + s.p_lh * s.p_ll * y + s.p_lh
}

/// Denominator of ξ_ℓ.
pub fn xi_l_den(s: &SignalModel, beta_h1: f64, beta_l0: f64) -> f64 {
    let y = 1.0 - beta_l0;
    s.p_hh * s.p_hl * beta_h1 + s.p_hh * s.p_ll * y + s.p_hl
}

pub fn xi_pair(s: &SignalModel, alpha: f64, beta_h1: f64, beta_l0: f64, gamma: f64) -> XiPair {
    let y = 1.0 - beta_l0;
    let a = alpha - 0.5;
    XiPair {
        xi_h: s.delta * (a + (1.0 - alpha - gamma) * beta_h1) / xi_h_den(s, beta_h1, beta_l0),
        xi_l: s.delta * (a + gamma * y) / xi_l_den(s, beta_h1, beta_l0),
        beta_h1,
        beta_l0,
        gamma,
    }
}

/// Majority strategy solving a two-equation system; coordinates may leave [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MajoritySolution {
    pub beta_l_star: f64,
    pub beta_h_star: f64,
    /// Both coordinates inside [0, 1].
    pub feasible: bool,
}

impl MajoritySolution {
    fn new(beta_l_star: f64, beta_h_star: f64) -> Self {
        let inside = |x: f64| (0.0..=1.0).contains(&x);
        MajoritySolution { beta_l_star, beta_h_star, feasible: inside(beta_l_star) && inside(beta_h_star) }
    }
}

/// Majority solution of `{f_H = 1/2 + ξ, f_L = 1/2}` with every minority agent voting A.
pub fn majority_solution_seg1(s: &SignalModel, alpha: f64, xi: f64) -> MajoritySolution {
    let a = alpha - 0.5;
    MajoritySolution::new(
        (a - s.p_hl / s.delta * xi) / alpha,
        (a + s.p_ll / s.delta * xi) / alpha,
    )
}

/// Deviating shares for grouped parameters: majority `(bl, bh)`, type-1 `(1, beta_h1)`,
/// type-0 `(beta_l0, 0)`; ξ type-1 agents turn always-R in H and ξ type-0 agents turn always-A in L.
#[allow(clippy::too_many_arguments)]
pub fn grouped_deviating_shares(
    s: &SignalModel,
    alpha: f64,
    xi: f64,
    beta_h1: f64,
    beta_l0: f64,
    gamma: f64,
    bl: f64,
    bh: f64,
) -> (f64, f64) {
    let f_h = alpha * (s.p_hh * bh + s.p_lh * bl)
        + (1.0 - alpha - gamma - xi) * (s.p_hh * beta_h1 + s.p_lh)
        + gamma * s.p_lh * beta_l0;
    let f_l = alpha * (s.p_hl * bh + s.p_ll * bl)
        + (1.0 - alpha - gamma) * (s.p_hl * beta_h1 + s.p_ll)
        + (gamma - xi) * s.p_ll * beta_l0
        + xi;
    (f_h, f_l)
}

/// Majority solution of `{f'_H = 1/2, f'_L = 1/2}` for the grouped deviation system.
pub fn majority_solution_general(
    s: &SignalModel,
    alpha: f64,
    xi: f64,
    beta_h1: f64,
    beta_l0: f64,
    gamma: f64,
) -> MajoritySolution {
    let y = 1.0 - beta_l0;
    let k = xi / (s.delta * alpha);
    let bl = (0.5 - (1.0 - alpha) + gamma * y) / alpha - k * xi_l_den(s, beta_h1, beta_l0);
    let bh = (0.5 - (1.0 - alpha - gamma) * beta_h1) / alpha + k * xi_h_den(s, beta_h1, beta_l0);
    let (fh, fl) = grouped_deviating_shares(s, alpha, xi, beta_h1, beta_l0, gamma, bl, bh);
    if (fh - 0.5).abs() <= 1e-12 && (fl - 0.5).abs() <= 1e-12 {
        return MajoritySolution::new(bl, bh);
    }
    // Fall back to solving the 2x2 linear system directly.
    let (rh, rl) = grouped_deviating_shares(s, alpha, xi, beta_h1, beta_l0, gamma, 0.0, 0.0);
    let (rh, rl) = (0.5 - rh, 0.5 - rl);
    let det = alpha * alpha * (s.p_hh * s.p_ll - s.p_lh * s.p_hl);
    let bh = (rh * alpha * s.p_ll - rl * alpha * s.p_lh) / det;
    let bl = (alpha * s.p_hh * rl - alpha * s.p_hl * rh) / det;
    MajoritySolution::new(bl, bh)
}

/// Equalizing γ̂ and the common value ξ̂ when type-1 agents always vote A.
pub fn hat_gamma_xi(s: &SignalModel, alpha: f64, beta_l0: f64) -> (f64, f64) {
    let y = 1.0 - beta_l0;
    let den = (s.p_ll * y + s.p_hl) * (s.p_lh * y + s.p_hh + 1.0);
    let gamma = (0.5 * (s.p_ll * y + s.p_hl + 1.0) - alpha * (s.p_hh * s.p_ll + s.p_lh * s.p_ll * y + s.p_lh)) / den;
    let xi = s.delta * (alpha - 0.5 + 0.5 * y) / den;
    (gamma, xi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment3Params {
    /// `1 - beta_l0*`.
    pub b_star: f64,
    pub gamma_star: f64,
    pub xi_nl: f64,
    /// The two alternative closed forms of γ*.
    pub gamma_alt: (f64, f64),
}

/// Lower end of the NonLinear segment (the tail boundary, or 1/2 when there is no Tail).
pub fn nonlinear_lower(s: &SignalModel) -> f64 {
    tail_boundary(s).max(0.5)
}

pub fn segment3_params(s: &SignalModel, alpha: f64) -> Result<Segment3Params> {
    let lo = nonlinear_lower(s);
    let hi = alpha_nl(s);
    if !(alpha >= lo - 1e-12 && alpha <= hi + 1e-12 && alpha > 0.5) {
        return Err(Error::DomainError(format!("α = {alpha} outside the NonLinear segment [{lo}, {hi}]")));
    }
    let root = nl_sqrt(s, alpha)?;
    let (lh, ll) = (s.p_lh, s.p_ll);
    let b_star = (1.0 - 2.0 * alpha) + root / (ll * lh);
    let (gamma_star, _) = hat_gamma_xi(s, alpha, 1.0 - b_star);
    let u = (1.0 - 2.0 * alpha * ll) * (1.0 - alpha * lh);
    let alt1 = (u + 0.5 * (1.0 / lh - 2.0 * alpha) * root)
        / (4.0 * u + (1.0 / ll + 2.0 / lh - 4.0 * alpha) * root);
    let alt2 = (2.0 * ll * ll - (3.0 - 2.0 * alpha * lh) * lh * ll + lh * root)
        / (2.0 * (2.0 * ll - lh).powi(2));
    Ok(Segment3Params { b_star, gamma_star, xi_nl: xi_nl(s, alpha)?, gamma_alt: (alt1, alt2) })
}

/// Expressions whose signs are those of dξ_h and dξ_ℓ along the line `1 - beta_l0 = t·beta_h1`.
pub fn derivative_signs(s: &SignalModel, alpha: f64, gamma: f64, t: f64) -> (f64, f64) {
    let a = alpha - 0.5;
    let h = (1.0 - alpha - gamma) * s.p_lh - a * s.p_hh * s.p_ll - a * s.p_lh * s.p_ll * t;
    // The constant term carries p_hL (quotient rule on the ξ_ℓ denominator's constant p_hL).
    let l = t * (gamma * s.p_hl - a * s.p_hh * s.p_ll) - a * s.p_hh * s.p_hl;
    (h, l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex2() -> SignalModel {
        SignalModel::new(0.7, 0.2).unwrap()
    }

    #[test]
    fn example_values() {
        let s = ex2();
        assert!((theta(&s) - 0.6875).abs() < 1e-12);
        assert!((alpha_nl(&s) - 0.55597).abs() < 1e-5);
        assert!((xi_nl(&s, 0.54).unwrap() - 0.135181).abs() < 1e-6);
        let p = xi_star(&s, 0.65).unwrap();
        assert_eq!(p.segment, Segment::Flat);
        assert!((p.xi_star - 0.3125).abs() < 1e-12);
        assert_eq!(xi_star(&s, 0.60).unwrap().segment, Segment::Steep);
        assert_eq!(xi_star(&s, 0.54).unwrap().segment, Segment::NonLinear);
        let t = xi_star(&s, 0.51).unwrap();
        assert_eq!(t.segment, Segment::Tail);
        assert!((t.xi_star - 0.1275).abs() < 1e-12);
        assert!(xi_star(&s, 0.5).is_err());
    }

    #[test]
    fn seg1_solution() {
        let m = majority_solution_seg1(&ex2(), 0.65, 0.28);
        assert!((m.beta_l_star - 0.058462).abs() < 1e-6);
        assert!((m.beta_h_star - 0.92).abs() < 1e-12);
    }

    #[test]
    fn general_solution_substitutes() {
        let s = ex2();
        let m = majority_solution_general(&s, 0.6, 0.1, 0.4, 0.3, 0.2);
        let (fh, fl) = grouped_deviating_shares(&s, 0.6, 0.1, 0.4, 0.3, 0.2, m.beta_l_star, m.beta_h_star);
        assert!((fh - 0.5).abs() < 1e-12 && (fl - 0.5).abs() < 1e-12);
    }
}

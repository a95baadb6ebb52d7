//! Equilibrium profile constructions for every regime of α.

use serde::Serialize;

use crate::deviation::deviation_margins;
use crate::error::{Error, Result};
use crate::model::{AgentGroup, AgentType, Environment, GroupedProfile, SignalModel, Strategy};
use crate::threshold::{
    alpha_nl, classify_segment, flat_boundary, flat_value, has_tail, majority_solution_general,
    majority_solution_seg1, nonlinear_lower, segment3_params, steep_value, tail_boundary, tail_value, theta,
    xi_star, Segment,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructionResult {
    pub env: Environment,
    pub profile: GroupedProfile,
    /// Analytic `(f'_H - 1/2, 1/2 - f'_L)`.
    pub margins: (f64, f64),
    pub delta_push: f64,
    pub segment: Segment,
    pub xi: f64,
}

/// Move `(bl, bh)` along `(-(p_hH + p_hL), p_lH + p_lL)` until one coordinate hits its boundary.
/// Inputs already on the boundary come back unchanged with `δ = 0`.
pub fn push_to_boundary(s: &SignalModel, beta_l_star: f64, beta_h_star: f64) -> Result<(Strategy, f64)> {
    if !(0.0..=1.0).contains(&beta_l_star) || !(0.0..=1.0).contains(&beta_h_star) {
        return Err(Error::DomainError(format!(
            "cannot push ({beta_l_star}, {beta_h_star}) from outside the unit square"
        )));
    }
    if beta_l_star == 0.0 || beta_h_star == 1.0 {
        return Ok((Strategy { beta_l: beta_l_star, beta_h: beta_h_star }, 0.0));
    }
    let rl = s.p_hh + s.p_hl;
    let rh = s.p_lh + s.p_ll;
    let dl = beta_l_star / rl;
    let dh = (1.0 - beta_h_star) / rh;
    Ok(if dl <= dh {
        (Strategy { beta_l: 0.0, beta_h: (beta_h_star + dl * rh).min(1.0) }, dl)
    } else {
        (Strategy { beta_l: (beta_l_star - dh * rl).max(0.0), beta_h: 1.0 }, dh)
    })
}

fn majority_group(env: &Environment, strategy: Strategy) -> AgentGroup {
    AgentGroup::new(env.profile.majority_count(), AgentType::Majority, env.majority_utility(), strategy)
}

fn minority_group(env: &Environment, count: usize, t: AgentType, strategy: Strategy) -> Option<AgentGroup> {
    (count > 0).then(|| AgentGroup::new(count, t, env.minority_utility(), strategy))
}

fn finish(env: &Environment, groups: Vec<AgentGroup>, xi: f64, delta_push: f64, segment: Segment, cap: f64) -> Result<ConstructionResult> {
    let env = env.with_groups(groups)?;
    let margins = deviation_margins(&env.profile, &env.signal, xi);
    if !(margins.0 > 0.0 && margins.1 > 0.0) {
        return Err(Error::InfeasibleXi { xi, cap });
    }
    Ok(ConstructionResult { profile: env.profile.clone(), env, margins, delta_push, segment, xi })
}

fn check_xi(xi: f64, cap: f64) -> Result<()> {
    if !(xi >= 0.0) || xi >= cap {
        return Err(Error::InfeasibleXi { xi, cap });
    }
    Ok(())
}

fn seg1_profile(env: &Environment, xi: f64, segment: Segment, cap: f64) -> Result<ConstructionResult> {
    let s = &env.signal;
    let m = majority_solution_seg1(s, env.alpha, xi);
    if !m.feasible {
        return Err(Error::InfeasibleXi { xi, cap });
    }
    let (strategy, delta) = push_to_boundary(s, m.beta_l_star, m.beta_h_star)?;
    let minority = env.n - env.profile.majority_count();
    let mut groups = vec![majority_group(env, strategy)];
    groups.extend(minority_group(env, minority, AgentType::MinorityType1, Strategy::ALWAYS_A));
    finish(env, groups, xi, delta, segment, cap)
}

/// Flat regime: every minority agent always votes A; the majority solves the seg-1 system and is pushed.
pub fn construct_flat(env: &Environment, xi: f64) -> Result<ConstructionResult> {
    let s = &env.signal;
    if env.alpha < flat_boundary(s) {
        return Err(Error::DomainError(format!("α = {} is below the Flat boundary {}", env.alpha, flat_boundary(s))));
    }
    let cap = flat_value(s);
    check_xi(xi, cap)?;
    seg1_profile(env, xi, Segment::Flat, cap)
}

/// α > θ: withstand the whole minority (the seg-1 system at ξ = 1 - α).
pub fn construct_above_theta(env: &Environment) -> Result<ConstructionResult> {
    let s = &env.signal;
    let xi = 1.0 - env.alpha;
    let cap = flat_value(s);
    if env.alpha <= theta(s) || xi >= cap {
        return Err(Error::InfeasibleXi { xi, cap });
    }
    seg1_profile(env, xi, Segment::StrongEq, cap)
}

/// Open δ interval of the steep construction.
pub fn steep_delta_interval(s: &SignalModel, alpha: f64, xi: f64) -> (f64, f64) {
    let shift = xi * s.p_ll / (alpha * s.delta);
    let a = alpha - 0.5;
    ((xi + a * s.p_lh) / (alpha * s.p_hh) - shift, a * s.p_ll / (alpha * s.p_hl) - shift)
}

/// Steep regime: minority always A, informative-leaning majority at the midpoint of the δ interval.
pub fn construct_steep(env: &Environment, xi: f64) -> Result<ConstructionResult> {
    let s = &env.signal;
    let alpha = env.alpha;
    if alpha > flat_boundary(s) || alpha <= 0.5 {
        return Err(Error::DomainError(format!("α = {alpha} is outside (1/2, {}]", flat_boundary(s))));
    }
    let cap = steep_value(s, alpha);
    check_xi(xi, cap)?;
    let (lo, hi) = steep_delta_interval(s, alpha, xi);
    if lo >= hi {
        return Err(Error::InfeasibleXi { xi, cap });
    }
    let delta = 0.5 * (lo + hi);
    let beta_h = 1.0 + (-0.5 + xi * s.p_ll / s.delta) / alpha + delta;
    let minority = env.n - env.profile.majority_count();
    let mut groups = vec![majority_group(env, Strategy { beta_l: 0.0, beta_h })];
    groups.extend(minority_group(env, minority, AgentType::MinorityType1, Strategy::ALWAYS_A));
    finish(env, groups, xi, delta, Segment::Steep, cap)
}

fn ceil_count(xi: f64, n: usize) -> usize {
    (xi * n as f64 - 1e-9).ceil().max(0.0) as usize
}

/// NonLinear regime: type-1 always A, type-0 `(1 - b*, 0)` at fraction γ*, pushed general solution.
pub fn construct_nonlinear(env: &Environment, xi: f64) -> Result<ConstructionResult> {
    let s = &env.signal;
    let alpha = env.alpha;
    if classify_segment(s, alpha) != Segment::NonLinear {
        return Err(Error::DomainError(format!(
            "α = {alpha} is outside the NonLinear segment [{}, {})",
            nonlinear_lower(s),
            alpha_nl(s)
        )));
    }
    let p = segment3_params(s, alpha)?;
    check_xi(xi, p.xi_nl)?;
    let majority = env.profile.majority_count();
    let c0 = (p.gamma_star * env.n as f64).round() as usize;
    if c0 + majority > env.n {
        return Err(Error::InfeasibleXi { xi, cap: p.xi_nl });
    }
    let c1 = env.n - majority - c0;
    let need = ceil_count(xi, env.n);
    if c0 < need || c1 < need {
        return Err(Error::InfeasibleXi { xi, cap: p.xi_nl });
    }
    let beta_l0 = 1.0 - p.b_star;
    let gamma = c0 as f64 / env.n as f64;
    let m = majority_solution_general(s, alpha, xi, 1.0, beta_l0, gamma);
    if !m.feasible {
        return Err(Error::InfeasibleXi { xi, cap: p.xi_nl });
    }
    let (strategy, delta) = push_to_boundary(s, m.beta_l_star, m.beta_h_star)?;
    let mut groups = vec![majority_group(env, strategy)];
    groups.extend(minority_group(env, c0, AgentType::MinorityType0, Strategy { beta_l: beta_l0, beta_h: 0.0 }));
    groups.extend(minority_group(env, c1, AgentType::MinorityType1, Strategy::ALWAYS_A));
    finish(env, groups, xi, delta, Segment::NonLinear, p.xi_nl)
}

/// Tail-segment type-0 fraction `(1 - (p_lL + p_lH) α)/2`.
pub fn tail_gamma(s: &SignalModel, alpha: f64) -> f64 {
    0.5 * (1.0 - (s.p_ll + s.p_lh) * alpha)
}

/// Tail regime: informative majority, γ* always-R and the rest always-A minority.
pub fn construct_tail(env: &Environment, xi: f64) -> Result<ConstructionResult> {
    let s = &env.signal;
    let alpha = env.alpha;
    if !(has_tail(s) && alpha > 0.5 && alpha <= tail_boundary(s)) {
        return Err(Error::DomainError(format!("α = {alpha} is outside the Tail segment")));
    }
    let cap = tail_value(s, alpha);
    check_xi(xi, cap)?;
    let majority = env.profile.majority_count();
    let c0 = (tail_gamma(s, alpha) * env.n as f64).round() as usize;
    if c0 + majority > env.n {
        return Err(Error::InfeasibleXi { xi, cap });
    }
    let c1 = env.n - majority - c0;
    let mut groups = vec![majority_group(env, Strategy::INFORMATIVE)];
    groups.extend(minority_group(env, c0, AgentType::MinorityType0, Strategy::ALWAYS_R));
    groups.extend(minority_group(env, c1, AgentType::MinorityType1, Strategy::ALWAYS_A));
    finish(env, groups, xi, 0.0, Segment::Tail, cap)
}

/// Largest admissible ξ at α: ξ*(α) below θ, the whole minority `1 - α` above it.
pub fn segment_cap(s: &SignalModel, alpha: f64) -> Result<f64> {
    let p = xi_star(s, alpha)?;
    Ok(if p.segment == Segment::StrongEq { 1.0 - alpha } else { p.xi_star })
}

/// Dispatch on the segment of the environment's realized α.
pub fn construct(env: &Environment, xi: f64) -> Result<ConstructionResult> {
    match classify_segment(&env.signal, env.alpha) {
        Segment::StrongEq => {
            let cap = 1.0 - env.alpha;
            if !(xi >= 0.0) || xi > cap {
                return Err(Error::InfeasibleXi { xi, cap });
            }
            if xi == cap {
                construct_above_theta(env)
            } else {
                seg1_profile(env, xi, Segment::StrongEq, cap)
            }
        }
        Segment::Flat => construct_flat(env, xi),
        Segment::Steep => construct_steep(env, xi),
        Segment::NonLinear => construct_nonlinear(env, xi),
        Segment::Tail => construct_tail(env, xi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_example() {
        let s = SignalModel::new(0.7, 0.2).unwrap();
        let m = majority_solution_seg1(&s, 0.65, 0.28);
        let (st, d) = push_to_boundary(&s, m.beta_l_star, m.beta_h_star).unwrap();
        assert_eq!(st.beta_l, 0.0);
        assert!((st.beta_h - 0.991453).abs() < 1e-6);
        assert!((d - 0.064957).abs() < 1e-6);
        let (same, d0) = push_to_boundary(&s, 0.0, 0.5).unwrap();
        assert_eq!((same.beta_l, same.beta_h, d0), (0.0, 0.5, 0.0));
    }

    #[test]
    fn steep_interval_example() {
        let s = SignalModel::new(0.7, 0.2).unwrap();
        let (lo, hi) = steep_delta_interval(&s, 0.6, 0.2);
        assert!((lo - 0.014286).abs() < 1e-6 && (hi - 0.133333).abs() < 1e-6);
    }
}

//! Coalition deviations: extreme deviation profiles, analytic deviating shares,
//! exact finite-n equilibrium checks and a brute-force small-n oracle.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AgentGroup, AgentType, Environment, GroupedProfile, Prior, SignalModel, State, Strategy};
use crate::voteshare::{expected_vote_shares, fidelity_from_wins, utility_from_wins, win_probabilities, WinProbabilities};

/// Gains above `-GAIN_TOL` count as weak improvements.
pub const GAIN_TOL: f64 = 1e-12;

/// `count` agents of `profile.groups[group]` switch to `strategy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationMove {
    pub group: usize,
    pub count: usize,
    pub strategy: Strategy,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DeviationSpec {
    pub moves: Vec<DeviationMove>,
}

impl DeviationSpec {
    fn count_where(&self, profile: &GroupedProfile, t: AgentType) -> usize {
        self.moves.iter().filter(|m| profile.groups[m.group].agent_type == t).map(|m| m.count).sum()
    }

    /// Deviators drawn from type-0 groups.
    pub fn k0(&self, profile: &GroupedProfile) -> usize {
        self.count_where(profile, AgentType::MinorityType0)
    }

    /// Deviators drawn from type-1 groups.
    pub fn k1(&self, profile: &GroupedProfile) -> usize {
        self.count_where(profile, AgentType::MinorityType1)
    }

    pub fn total(&self) -> usize {
        self.moves.iter().map(|m| m.count).sum()
    }
}

fn type_for(original: AgentType, s: &Strategy) -> AgentType {
    match original {
        AgentType::Majority => AgentType::Majority,
        _ => AgentType::minority_for(s).unwrap_or(original),
    }
}

/// Merge blocks with identical type, utility and strategy (first occurrence keeps its place).
pub fn reblock(groups: Vec<AgentGroup>) -> GroupedProfile {
    let mut out: Vec<AgentGroup> = Vec::with_capacity(groups.len());
    for g in groups.into_iter().filter(|g| g.count > 0) {
        match out
            .iter_mut()
            .find(|o| o.agent_type == g.agent_type && o.utility == g.utility && o.strategy == g.strategy)
        {
            Some(o) => o.count += g.count,
            None => out.push(g),
        }
    }
    GroupedProfile::new(out)
}

/// Profile after the deviation.
pub fn apply_deviation(profile: &GroupedProfile, spec: &DeviationSpec) -> GroupedProfile {
    let mut stay: Vec<AgentGroup> = profile.groups.clone();
    let mut moved = Vec::new();
    for m in &spec.moves {
        let g = &mut stay[m.group];
        g.count -= m.count;
        moved.push(AgentGroup::new(m.count, type_for(g.agent_type, &m.strategy), g.utility, m.strategy));
    }
    stay.extend(moved);
    reblock(stay)
}

/// Minority group indices in the order deviators are drawn for an all-A (`State::L`)
/// or all-R (`State::H`) deviation.
fn deviation_order(profile: &GroupedProfile, signal: &SignalModel, target: State) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..profile.groups.len())
        .filter(|&i| profile.groups[i].agent_type != AgentType::Majority)
        .collect();
    let q = |i: usize| profile.groups[i].strategy.q(signal, target);
    match target {
        // all-A: type-0 first, then the least A-likely in L
        State::L => idx.sort_by(|&a, &b| {
            let ta = profile.groups[a].agent_type != AgentType::MinorityType0;
            let tb = profile.groups[b].agent_type != AgentType::MinorityType0;
            ta.cmp(&tb).then(q(a).total_cmp(&q(b)))
        }),
        // all-R: type-1 first, then the most A-likely in H
        State::H => idx.sort_by(|&a, &b| {
            let ta = profile.groups[a].agent_type != AgentType::MinorityType1;
            let tb = profile.groups[b].agent_type != AgentType::MinorityType1;
            ta.cmp(&tb).then(q(b).total_cmp(&q(a)))
        }),
    }
    idx
}

fn extreme_spec(profile: &GroupedProfile, signal: &SignalModel, k: usize, target: State) -> DeviationSpec {
    let strategy = match target {
        State::L => Strategy::ALWAYS_A,
        State::H => Strategy::ALWAYS_R,
    };
    let mut left = k;
    let mut moves = Vec::new();
    for i in deviation_order(profile, signal, target) {
        if left == 0 {
            break;
        }
        let c = left.min(profile.groups[i].count);
        moves.push(DeviationMove { group: i, count: c, strategy });
        left -= c;
    }
    DeviationSpec { moves }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviated {
    pub spec: DeviationSpec,
    pub profile: GroupedProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremeDeviations {
    pub all_a: Deviated,
    pub all_r: Deviated,
}

/// The two extreme coalition deviations of `k` minority agents.
pub fn extreme_deviation_profiles(profile: &GroupedProfile, signal: &SignalModel, k: usize) -> Result<ExtremeDeviations> {
    let available = profile.n() - profile.majority_count();
    if k > available {
        return Err(Error::KTooLarge { k, available });
    }
    let make = |target| {
        let spec = extreme_spec(profile, signal, k, target);
        let profile = apply_deviation(profile, &spec);
        Deviated { spec, profile }
    };
    Ok(ExtremeDeviations { all_a: make(State::L), all_r: make(State::H) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviatingShares {
    /// f'_H after a ξ fraction of the minority turns always-R.
    pub f_h: f64,
    /// f'_L after a ξ fraction of the minority turns always-A.
    pub f_l: f64,
    /// `f'_H <= 1/2`.
    pub fails_h: bool,
    /// `f'_L >= 1/2`.
    pub fails_l: bool,
}

/// Analytic deviating shares for a deviating fraction `xi` (deviators drawn as in the extreme profiles).
pub fn deviating_shares(profile: &GroupedProfile, signal: &SignalModel, xi: f64) -> DeviatingShares {
    let n = profile.n() as f64;
    let base = expected_vote_shares(profile, signal);
    let shift = |target: State| {
        let mut left = xi;
        let mut d = 0.0;
        for i in deviation_order(profile, signal, target) {
            if left <= 0.0 {
                break;
            }
            let g = &profile.groups[i];
            let frac = left.min(g.count as f64 / n);
            let q = g.strategy.q(signal, target);
            d += match target {
                State::H => -frac * q,
                State::L => frac * (1.0 - q),
            };
            left -= frac;
        }
        d
    };
    let f_h = base.f_h + shift(State::H);
    let f_l = base.f_l + shift(State::L);
    DeviatingShares { f_h, f_l, fails_h: f_h <= 0.5, fails_l: f_l >= 0.5 }
}

/// Analytic margins `(f'_H - 1/2, 1/2 - f'_L)`.
pub fn deviation_margins(profile: &GroupedProfile, signal: &SignalModel, xi: f64) -> (f64, f64) {
    let d = deviating_shares(profile, signal, xi);
    (d.f_h - 0.5, 0.5 - d.f_l)
}

/// Per-deviator gains of a deviation and the resulting coalition gain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationGains {
    /// `(origin group, gain)` for every deviating block.
    pub per_group: Vec<(usize, f64)>,
    /// Max gain when all deviators weakly improve, otherwise the (negative) worst gain.
    pub gain: f64,
    /// Utility change of every original group (deviators or not).
    pub all_groups: Vec<f64>,
}

fn gains_for(
    prior: &Prior,
    base_win: &WinProbabilities,
    new_win: &WinProbabilities,
    profile: &GroupedProfile,
    spec: &DeviationSpec,
) -> DeviationGains {
    let all_groups: Vec<f64> = profile
        .groups
        .iter()
        .map(|g| utility_from_wins(prior, new_win, &g.utility) - utility_from_wins(prior, base_win, &g.utility))
        .collect();
    let per_group: Vec<(usize, f64)> =
        spec.moves.iter().filter(|m| m.count > 0).map(|m| (m.group, all_groups[m.group])).collect();
    let gain = coalition_gain(per_group.iter().map(|p| p.1));
    DeviationGains { per_group, gain, all_groups }
}

fn coalition_gain(gains: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut any = false;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for g in gains {
        any = true;
        min = min.min(g);
        max = max.max(g);
    }
    if !any {
        0.0
    } else if min >= -GAIN_TOL {
        max
    } else {
        min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub n: usize,
    pub xi: f64,
    pub k: usize,
    pub base_fidelity: f64,
    pub base_win: WinProbabilities,
    /// `(f'_H - 1/2, 1/2 - f'_L)`.
    pub margins: (f64, f64),
    pub gain_all_a: DeviationGains,
    pub gain_all_r: DeviationGains,
    pub max_gain: f64,
    /// Largest utility change of any majority group under either extreme deviation.
    pub majority_max_gain: f64,
    /// Hoeffding surrogate `2 exp(-2 m^2 n)` with `m` the smaller margin.
    pub e: f64,
    /// Whether both exact win probabilities are at least `1 - e`.
    pub high_fidelity_premise: bool,
    pub epsilon_bound: f64,
    pub verdict: Verdict,
}

/// Default ε: `2 B (B + 1) e / (p_H p_L)`.
pub fn epsilon_bound(b: u32, e: f64, prior: &Prior) -> f64 {
    let b = b as f64;
    2.0 * b * (b + 1.0) * e / (prior.p_h * prior.p_l)
}

/// Exact finite-n check of the ξ-coalition equilibrium conditions for `profile`.
pub fn check_equilibrium(env: &Environment, profile: &GroupedProfile, xi: f64, epsilon: Option<f64>) -> EquilibriumReport {
    let n = profile.n();
    let signal = &env.signal;
    let minority = n - profile.majority_count();
    let k = ((xi * n as f64 + 1e-9).floor().max(0.0) as usize).min(minority);
    let margins = deviation_margins(profile, signal, xi);
    let base_win = win_probabilities(profile, signal);
    let base_fidelity = fidelity_from_wins(&env.prior, base_win).fidelity;
    let ext = extreme_deviation_profiles(profile, signal, k).expect("k is capped at the minority count");
    let gain_all_a = gains_for(&env.prior, &base_win, &win_probabilities(&ext.all_a.profile, signal), profile, &ext.all_a.spec);
    let gain_all_r = gains_for(&env.prior, &base_win, &win_probabilities(&ext.all_r.profile, signal), profile, &ext.all_r.spec);
    let max_gain = gain_all_a.gain.max(gain_all_r.gain);
    let majority_max_gain = profile
        .groups
        .iter()
        .enumerate()
        .filter(|(_, g)| g.agent_type == AgentType::Majority)
        .flat_map(|(i, _)| [gain_all_a.all_groups[i], gain_all_r.all_groups[i]])
        .fold(f64::NEG_INFINITY, f64::max);
    let m = margins.0.min(margins.1);
    let e = if m > 0.0 { (2.0 * (-2.0 * m * m * n as f64).exp()).min(2.0) } else { 2.0 };
    let high_fidelity_premise = base_win.lambda_ha >= 1.0 - e && base_win.lambda_lr >= 1.0 - e;
    let epsilon_bound = epsilon.unwrap_or_else(|| epsilon_bound(profile.b(), e, &env.prior));
    let verdict = if max_gain <= epsilon_bound && margins.0 > 0.0 && margins.1 > 0.0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    EquilibriumReport {
        n,
        xi,
        k,
        base_fidelity,
        base_win,
        margins,
        gain_all_a,
        gain_all_r,
        max_gain,
        majority_max_gain,
        e,
        high_fidelity_premise,
        epsilon_bound,
        verdict,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteForceResult {
    pub best_gain: f64,
    pub witness: DeviationSpec,
    /// Deviations in which every deviator weakly improves and some majority deviator strictly improves.
    pub majority_strict_witnesses: usize,
    /// Shortfall `1 - min(λ_HA, λ_LR)` of the base profile.
    pub base_shortfall: f64,
    /// Deviations contradicting the majority-screening bound at `e = base_shortfall`: some agent
    /// gains more than `2B(B+1)e/(p_H p_L)` while not every majority agent strictly loses.
    pub screening_violations: usize,
    pub evaluated: u64,
}

/// Default enumeration budget for [`brute_force_best_deviation`].
pub const BRUTE_FORCE_BUDGET: u128 = 20_000_000;

fn count_vectors(caps: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(caps: &[usize], left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == caps.len() {
            if cur.iter().any(|&c| c > 0) {
                out.push(cur.clone());
            }
            return;
        }
        for c in 0..=caps[cur.len()].min(left) {
            cur.push(c);
            rec(caps, left - c, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(caps, k, &mut Vec::new(), &mut out);
    out
}

/// Best gain over coalitions of at most `k` agents in which each deviating block shares one
/// strategy from the grid `{0, step, ..., 1}^2`, counting only deviations where every deviator
/// weakly improves.
pub fn brute_force_best_deviation(
    env: &Environment,
    profile: &GroupedProfile,
    k: usize,
    grid_step: f64,
    include_majority: bool,
    budget: Option<u128>,
) -> Result<BruteForceResult> {
    if !(grid_step > 0.0 && grid_step <= 1.0) || ((1.0 / grid_step) - (1.0 / grid_step).round()).abs() > 1e-9 {
        return Err(Error::DomainError(format!("grid step {grid_step} must divide 1")));
    }
    let steps = (1.0 / grid_step).round() as usize;
    let grid: Vec<Strategy> = (0..=steps)
        .flat_map(|i| (0..=steps).map(move |j| Strategy { beta_l: i as f64 / steps as f64, beta_h: j as f64 / steps as f64 }))
        .collect();
    let blocks: Vec<usize> = (0..profile.groups.len())
        .filter(|&i| include_majority || profile.groups[i].agent_type != AgentType::Majority)
        .collect();
    let caps: Vec<usize> = blocks.iter().map(|&i| profile.groups[i].count).collect();
    let vectors = if k == 0 { Vec::new() } else { count_vectors(&caps, k) };
    let g = grid.len() as u128;
    let size: u128 = vectors.iter().map(|v| g.pow(v.iter().filter(|&&c| c > 0).count() as u32)).sum();
    let budget = budget.unwrap_or(BRUTE_FORCE_BUDGET);
    if size > budget {
        return Err(Error::ExplosionGuard { size, budget });
    }
    let base_win = win_probabilities(profile, &env.signal);
    let prior = env.prior;
    let signal = env.signal;
    let base_shortfall = 1.0 - base_win.lambda_ha.min(base_win.lambda_lr);
    let screen = epsilon_bound(profile.b(), base_shortfall, &prior);
    let majority_groups: Vec<usize> =
        (0..profile.groups.len()).filter(|&i| profile.groups[i].agent_type == AgentType::Majority).collect();
    let per_vector: Vec<(f64, DeviationSpec, usize, usize, u64)> = vectors
        .par_iter()
        .map(|v| {
            let active: Vec<(usize, usize)> =
                blocks.iter().zip(v).filter(|(_, &c)| c > 0).map(|(&b, &c)| (b, c)).collect();
            let mut best = (f64::NEG_INFINITY, DeviationSpec::default());
            let mut majority_strict = 0usize;
            let mut violations = 0usize;
            let mut evaluated = 0u64;
            let mut choice = vec![0usize; active.len()];
            loop {
                let spec = DeviationSpec {
                    moves: active
                        .iter()
                        .zip(&choice)
                        .map(|(&(group, count), &c)| DeviationMove { group, count, strategy: grid[c] })
                        .collect(),
                };
                let dev = apply_deviation(profile, &spec);
                let win = win_probabilities(&dev, &signal);
                let gains = gains_for(&prior, &base_win, &win, profile, &spec);
                evaluated += 1;
                let someone_above = gains.all_groups.iter().any(|&g| g > screen + GAIN_TOL);
                let majority_all_lose = majority_groups.iter().all(|&i| gains.all_groups[i] < 0.0);
                if someone_above && !majority_all_lose {
                    violations += 1;
                }
                let weakly = gains.per_group.iter().all(|p| p.1 >= -GAIN_TOL);
                if weakly {
                    if gains.gain > best.0 {
                        best = (gains.gain, spec.clone());
                    }
                    if gains
                        .per_group
                        .iter()
                        .any(|&(grp, gain)| profile.groups[grp].agent_type == AgentType::Majority && gain > GAIN_TOL)
                    {
                        majority_strict += 1;
                    }
                }
                // odometer over grid choices
                let mut pos = 0;
                while pos < choice.len() {
                    choice[pos] += 1;
                    if choice[pos] < grid.len() {
                        break;
                    }
                    choice[pos] = 0;
                    pos += 1;
                }
                if pos == choice.len() {
                    break;
                }
            }
            (best.0, best.1, majority_strict, violations, evaluated)
        })
        .collect();
    let mut result = BruteForceResult {
        best_gain: 0.0,
        witness: DeviationSpec::default(),
        majority_strict_witnesses: 0,
        base_shortfall,
        screening_violations: 0,
        evaluated: 0,
    };
    for (gain, spec, strict, violations, evaluated) in per_vector {
        if gain > result.best_gain {
            result.best_gain = gain;
            result.witness = spec;
        }
        result.majority_strict_witnesses += strict;
        result.screening_violations += violations;
        result.evaluated += evaluated;
    }
    Ok(result)
}

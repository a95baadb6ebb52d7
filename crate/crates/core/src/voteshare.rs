//! Expected vote shares, exact tallies, fidelity, utilities, variances and Monte Carlo.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Environment, GroupedProfile, Prior, SignalModel, State, UtilityTable};

/// Expected A-vote fractions per world state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VoteShares {
    pub f_h: f64,
    pub f_l: f64,
}

pub fn expected_vote_shares(profile: &GroupedProfile, signal: &SignalModel) -> VoteShares {
    let n = profile.n() as f64;
    let mut f_h = 0.0;
    let mut f_l = 0.0;
    for g in &profile.groups {
        f_h += g.count as f64 * g.strategy.q(signal, State::H);
        f_l += g.count as f64 * g.strategy.q(signal, State::L);
    }
    VoteShares { f_h: f_h / n, f_l: f_l / n }
}

/// Exact distribution of the number of A votes in state `w` (length `n + 1`).
pub fn tally_distribution(profile: &GroupedProfile, signal: &SignalModel, w: State) -> Vec<f64> {
    let n = profile.n();
    let mut dp = vec![0.0; n + 1];
    dp[0] = 1.0;
    // dp is supported on [lo, hi]; deterministic voters only shift it.
    let mut lo = 0usize;
    let mut hi = 0usize;
    for g in &profile.groups {
        let q = g.strategy.q(signal, w).clamp(0.0, 1.0);
        if q == 0.0 {
            continue;
        }
        if q == 1.0 {
            dp.copy_within(lo..=hi, lo + g.count);
            dp[lo..lo + g.count].iter_mut().for_each(|x| *x = 0.0);
            lo += g.count;
            hi += g.count;
            continue;
        }
        let p = 1.0 - q;
        for _ in 0..g.count {
            hi += 1;
            for j in (lo + 1..=hi).rev() {
                dp[j] = dp[j] * p + dp[j - 1] * q;
            }
            dp[lo] *= p;
        }
    }
    dp
}

/// Outcome probabilities in both states; ties are a win for neither alternative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WinProbabilities {
    pub lambda_ha: f64,
    pub lambda_hr: f64,
    pub lambda_la: f64,
    pub lambda_lr: f64,
    pub tie_h: f64,
    pub tie_l: f64,
}

/// (A wins, R wins, tie) masses of a tally distribution over `n` voters.
pub fn outcome_masses(dist: &[f64]) -> (f64, f64, f64) {
    let n = dist.len() - 1;
    let mut a = 0.0;
    let mut r = 0.0;
    let mut tie = 0.0;
    for (k, p) in dist.iter().enumerate() {
        match (2 * k).cmp(&n) {
            std::cmp::Ordering::Greater => a += p,
            std::cmp::Ordering::Less => r += p,
            std::cmp::Ordering::Equal => tie += p,
        }
    }
    (a, r, tie)
}

pub fn win_probabilities(profile: &GroupedProfile, signal: &SignalModel) -> WinProbabilities {
    let (lambda_ha, lambda_hr, tie_h) = outcome_masses(&tally_distribution(profile, signal, State::H));
    let (lambda_la, lambda_lr, tie_l) = outcome_masses(&tally_distribution(profile, signal, State::L));
    WinProbabilities { lambda_ha, lambda_hr, lambda_la, lambda_lr, tie_h, tie_l }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityResult {
    pub fidelity: f64,
    pub win: WinProbabilities,
    pub tie_mass_h: f64,
    pub tie_mass_l: f64,
}

pub fn fidelity_from_wins(prior: &Prior, win: WinProbabilities) -> FidelityResult {
    FidelityResult {
        fidelity: prior.p_h * win.lambda_ha + prior.p_l * win.lambda_lr,
        win,
        tie_mass_h: win.tie_h,
        tie_mass_l: win.tie_l,
    }
}

/// Probability that the informed majority decision wins.
pub fn fidelity(env: &Environment, profile: &GroupedProfile) -> FidelityResult {
    fidelity_from_wins(&env.prior, win_probabilities(profile, &env.signal))
}

/// Ex-ante utility of a table given the outcome probabilities.
pub fn utility_from_wins(prior: &Prior, win: &WinProbabilities, v: &UtilityTable) -> f64 {
    prior.p_l * (win.lambda_la * v.v_la as f64 + win.lambda_lr * v.v_lr as f64)
        + prior.p_h * (win.lambda_ha * v.v_ha as f64 + win.lambda_hr * v.v_hr as f64)
}

/// Exact ex-ante utility of the agents in `profile.groups[group_index]`.
pub fn expected_utility(env: &Environment, profile: &GroupedProfile, group_index: usize) -> f64 {
    let win = win_probabilities(profile, &env.signal);
    utility_from_wins(&env.prior, &win, &profile.groups[group_index].utility)
}

/// `(1/n) Σ q_i (1 - q_i)` in state `w`.
pub fn per_agent_variance(profile: &GroupedProfile, signal: &SignalModel, w: State) -> f64 {
    variance_where(profile, signal, w, |_| true)
}

/// Same normalization as [`per_agent_variance`] but summing majority agents only.
pub fn majority_variance(profile: &GroupedProfile, signal: &SignalModel, w: State) -> f64 {
    variance_where(profile, signal, w, |t| t == crate::model::AgentType::Majority)
}

fn variance_where(
    profile: &GroupedProfile,
    signal: &SignalModel,
    w: State,
    keep: impl Fn(crate::model::AgentType) -> bool,
) -> f64 {
    let n = profile.n() as f64;
    profile
        .groups
        .iter()
        .filter(|g| keep(g.agent_type))
        .map(|g| {
            let q = g.strategy.q(signal, w);
            g.count as f64 * q * (1.0 - q)
        })
        .sum::<f64>()
        / n
}

/// Hoeffding bound on the wrong-side tail when the expected share clears 1/2 by `margin`.
pub fn hoeffding_tail(margin: f64, n: usize) -> f64 {
    (-2.0 * margin * margin * n as f64).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub trials: u64,
    pub lambda_ha: f64,
    pub lambda_lr: f64,
    pub fidelity: f64,
    pub se_lambda_ha: f64,
    pub se_lambda_lr: f64,
    pub se_fidelity: f64,
}

/// Trials per independently seeded chunk.
pub const MC_CHUNK: u64 = 4096;

/// Seeded estimate of the win probabilities; independent of the number of worker threads.
pub fn monte_carlo(env: &Environment, profile: &GroupedProfile, trials: u64, seed: u64) -> Result<MonteCarloEstimate> {
    if trials == 0 {
        return Err(Error::InvalidTrials);
    }
    let signal = env.signal;
    let n = profile.n();
    let blocks: Vec<(usize, f64, f64)> = profile
        .groups
        .iter()
        .map(|g| (g.count, g.strategy.q(&signal, State::H), g.strategy.q(&signal, State::L)))
        .collect();
    let chunks = trials.div_ceil(MC_CHUNK);
    let (ha, lr) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let len = MC_CHUNK.min(trials - c * MC_CHUNK);
            let mut ha = 0u64;
            let mut lr = 0u64;
            for _ in 0..len {
                let a_h = sample_votes(&blocks, |b| b.1, &mut rng);
                let a_l = sample_votes(&blocks, |b| b.2, &mut rng);
                ha += (2 * a_h > n) as u64;
                lr += (2 * a_l < n) as u64;
            }
            (ha, lr)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let t = trials as f64;
    let lambda_ha = ha as f64 / t;
    let lambda_lr = lr as f64 / t;
    let var_ha = lambda_ha * (1.0 - lambda_ha) / t;
    let var_lr = lambda_lr * (1.0 - lambda_lr) / t;
    let (p_h, p_l) = (env.prior.p_h, env.prior.p_l);
    Ok(MonteCarloEstimate {
        trials,
        lambda_ha,
        lambda_lr,
        fidelity: p_h * lambda_ha + p_l * lambda_lr,
        se_lambda_ha: var_ha.sqrt(),
        se_lambda_lr: var_lr.sqrt(),
        se_fidelity: (p_h * p_h * var_ha + p_l * p_l * var_lr).sqrt(),
    })
}

fn sample_votes(blocks: &[(usize, f64, f64)], q: impl Fn(&(usize, f64, f64)) -> f64, rng: &mut ChaCha8Rng) -> usize {
    let mut votes = 0;
    for b in blocks {
        let p = q(b);
        if p <= 0.0 {
            continue;
        }
        if p >= 1.0 {
            votes += b.0;
            continue;
        }
        for _ in 0..b.0 {
            votes += (rng.gen::<f64>() < p) as usize;
        }
    }
    votes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AgentGroup, AgentType, Strategy};

    fn informative(n: usize) -> GroupedProfile {
        GroupedProfile::new(vec![AgentGroup::new(
            n,
            AgentType::Majority,
            UtilityTable::MAJORITY_EXAMPLE,
            Strategy::INFORMATIVE,
        )])
    }

    #[test]
    fn three_informative_voters() {
        let s = SignalModel::new(0.7, 0.2).unwrap();
        let w = win_probabilities(&informative(3), &s);
        assert!((w.lambda_ha - 0.784).abs() < 1e-12);
        assert!((w.lambda_lr - 0.896).abs() < 1e-12);
    }

    #[test]
    fn permanent_tie() {
        let s = SignalModel::new(0.7, 0.2).unwrap();
        let p = GroupedProfile::new(vec![
            AgentGroup::new(1, AgentType::Majority, UtilityTable::MAJORITY_EXAMPLE, Strategy::ALWAYS_A),
            AgentGroup::new(1, AgentType::MinorityType0, UtilityTable::MINORITY_EXAMPLE, Strategy::ALWAYS_R),
        ]);
        let w = win_probabilities(&p, &s);
        assert_eq!((w.lambda_ha, w.lambda_lr), (0.0, 0.0));
        assert_eq!((w.tie_h, w.tie_l), (1.0, 1.0));
    }

    #[test]
    fn deterministic_shift_keeps_mass() {
        let s = SignalModel::new(0.7, 0.2).unwrap();
        let p = GroupedProfile::new(vec![
            AgentGroup::new(4, AgentType::MinorityType1, UtilityTable::MINORITY_EXAMPLE, Strategy::ALWAYS_A),
            AgentGroup::new(5, AgentType::Majority, UtilityTable::MAJORITY_EXAMPLE, Strategy::INFORMATIVE),
            AgentGroup::new(2, AgentType::MinorityType1, UtilityTable::MINORITY_EXAMPLE, Strategy::ALWAYS_A),
        ]);
        let d = tally_distribution(&p, &s, State::H);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(d[..6].iter().all(|&x| x == 0.0));
    }
}

//! Core domain types: signals, priors, utilities, strategies and environments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the row-sum and Δ-form identities.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Coordinates within this distance of 0 or 1 count as on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// World state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum State {
    H,
    L,
}

/// Conditional signal probabilities, always stored in canonical form (`p_hh <= p_ll`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalModel {
    pub p_hh: f64,
    pub p_lh: f64,
    pub p_hl: f64,
    pub p_ll: f64,
    pub delta: f64,
    /// True when the raw input was relabelled (H<->L, h<->l, A<->R) to reach canonical form.
    pub swapped: bool,
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(format!("{name} = {p} is outside [0, 1]")));
    }
    Ok(())
}

/// Validate raw `(p_hH, p_lH, p_hL, p_lL)` and return the canonical model.
pub fn validate_signal(raw: [f64; 4]) -> Result<SignalModel> {
    let [p_hh, p_lh, p_hl, p_ll] = raw;
    for (name, p) in [("p_hH", p_hh), ("p_lH", p_lh), ("p_hL", p_hl), ("p_lL", p_ll)] {
        check_prob(name, p)?;
    }
    if (p_hh + p_lh - 1.0).abs() > IDENTITY_TOL || (p_hl + p_ll - 1.0).abs() > IDENTITY_TOL {
        return Err(Error::InvalidProbability(format!(
            "signal rows must sum to 1: p_hH + p_lH = {}, p_hL + p_lL = {}",
            p_hh + p_lh,
            p_hl + p_ll
        )));
    }
    if p_hh <= p_hl {
        return Err(Error::NonInformative { p_hh, p_hl });
    }
    let model = SignalModel { p_hh, p_lh, p_hl, p_ll, delta: p_hh - p_hl, swapped: false };
    let model = if p_hh > p_ll { model.swap() } else { model };
    model.check_delta()?;
    Ok(model)
}

impl SignalModel {
    /// Canonical model from the two "h" probabilities.
    pub fn new(p_hh: f64, p_hl: f64) -> Result<Self> {
        validate_signal([p_hh, 1.0 - p_hh, p_hl, 1.0 - p_hl])
    }

    /// Symmetric model with `p_hH = p_lL = p`.
    pub fn symmetric(p: f64) -> Result<Self> {
        Self::new(p, 1.0 - p)
    }

    /// Relabel H<->L, h<->l, A<->R. Applying it twice is the identity.
    pub fn swap(&self) -> Self {
        SignalModel {
            p_hh: self.p_ll,
            p_lh: self.p_hl,
            p_hl: self.p_lh,
            p_ll: self.p_hh,
            delta: self.delta,
            swapped: !self.swapped,
        }
    }

    /// The four algebraic forms of Δ.
    pub fn delta_forms(&self) -> [f64; 4] {
        [
            self.p_hh - self.p_hl,
            self.p_ll - self.p_lh,
            self.p_hh * self.p_ll - self.p_hl * self.p_lh,
            self.p_hh + self.p_ll - 1.0,
        ]
    }

    fn check_delta(&self) -> Result<()> {
        let forms = self.delta_forms();
        for f in forms {
            if (f - self.delta).abs() > IDENTITY_TOL {
                return Err(Error::InvalidProbability(format!(
                    "Δ forms disagree: {forms:?}"
                )));
            }
        }
        Ok(())
    }

    /// Probability of an `h` signal in state `w`.
    pub fn p_h(&self, w: State) -> f64 {
        match w {
            State::H => self.p_hh,
            State::L => self.p_hl,
        }
    }

    /// Probability of an `l` signal in state `w`.
    pub fn p_l(&self, w: State) -> f64 {
        match w {
            State::H => self.p_lh,
            State::L => self.p_ll,
        }
    }
}

/// Δ of a signal model.
pub fn delta(signal: &SignalModel) -> f64 {
    signal.delta
}

/// Common prior on the world state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prior {
    pub p_h: f64,
    pub p_l: f64,
}

impl Prior {
    pub fn new(p_h: f64, p_l: f64) -> Result<Self> {
        check_prob("p_H", p_h)?;
        check_prob("p_L", p_l)?;
        if (p_h + p_l - 1.0).abs() > IDENTITY_TOL || p_h <= 0.0 || p_l <= 0.0 {
            return Err(Error::InvalidProbability(format!(
                "prior must be strictly positive and sum to 1, got ({p_h}, {p_l})"
            )));
        }
        Ok(Prior { p_h, p_l })
    }

    pub fn swap(&self) -> Self {
        Prior { p_h: self.p_l, p_l: self.p_h }
    }
}

/// Which alternative an agent prefers in state H.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Majority,
    Minority,
}

/// Integer utilities `v(W, X)` bounded by `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UtilityTable {
    pub v_ha: u32,
    pub v_la: u32,
    pub v_hr: u32,
    pub v_lr: u32,
}

impl UtilityTable {
    /// Example majority table (A is right in H, R is right in L).
    pub const MAJORITY_EXAMPLE: UtilityTable = UtilityTable { v_ha: 4, v_la: 0, v_hr: 1, v_lr: 2 };
    /// Example minority table.
    pub const MINORITY_EXAMPLE: UtilityTable = UtilityTable { v_ha: 2, v_la: 3, v_hr: 3, v_lr: 1 };

    pub fn new(v_ha: u32, v_la: u32, v_hr: u32, v_lr: u32) -> Self {
        UtilityTable { v_ha, v_la, v_hr, v_lr }
    }

    /// Largest entry.
    pub fn b(&self) -> u32 {
        self.v_ha.max(self.v_la).max(self.v_hr).max(self.v_lr)
    }

    /// `None` for tables that are neither strictly majority nor strictly minority.
    pub fn orientation(&self) -> Option<Orientation> {
        if self.v_ha > self.v_hr && self.v_la < self.v_lr {
            Some(Orientation::Majority)
        } else if self.v_ha < self.v_hr && self.v_la > self.v_lr {
            Some(Orientation::Minority)
        } else {
            None
        }
    }

    pub fn swap(&self) -> Self {
        UtilityTable { v_ha: self.v_lr, v_la: self.v_hr, v_hr: self.v_la, v_lr: self.v_ha }
    }
}

/// Probabilities of voting A after an `l` and after an `h` signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub beta_l: f64,
    pub beta_h: f64,
}

impl Strategy {
    pub const ALWAYS_A: Strategy = Strategy { beta_l: 1.0, beta_h: 1.0 };
    pub const ALWAYS_R: Strategy = Strategy { beta_l: 0.0, beta_h: 0.0 };
    pub const INFORMATIVE: Strategy = Strategy { beta_l: 0.0, beta_h: 1.0 };

    pub fn new(beta_l: f64, beta_h: f64) -> Result<Self> {
        check_prob("beta_l", beta_l)?;
        check_prob("beta_h", beta_h)?;
        Ok(Strategy { beta_l, beta_h })
    }

    /// Probability of an A vote in state `w`.
    pub fn q(&self, signal: &SignalModel, w: State) -> f64 {
        signal.p_h(w) * self.beta_h + signal.p_l(w) * self.beta_l
    }

    pub fn swap(&self) -> Self {
        Strategy { beta_l: 1.0 - self.beta_h, beta_h: 1.0 - self.beta_l }
    }
}

/// Majority, or one of the two non-dominated minority families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentType {
    Majority,
    /// Minority with `beta_h = 0`.
    MinorityType0,
    /// Minority with `beta_l = 1`.
    MinorityType1,
}

impl AgentType {
    pub fn orientation(&self) -> Orientation {
        match self {
            AgentType::Majority => Orientation::Majority,
            _ => Orientation::Minority,
        }
    }

    pub fn swap(&self) -> Self {
        match self {
            AgentType::Majority => AgentType::Majority,
            AgentType::MinorityType0 => AgentType::MinorityType1,
            AgentType::MinorityType1 => AgentType::MinorityType0,
        }
    }

    /// Non-dominated minority family of `s`, preferring type-0 when both apply.
    pub fn minority_for(s: &Strategy) -> Option<AgentType> {
        if s.beta_h == 0.0 {
            Some(AgentType::MinorityType0)
        } else if s.beta_l == 1.0 {
            Some(AgentType::MinorityType1)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dominance {
    NonDominated,
    Dominated { witness: Strategy },
}

/// Lemma-1 classification with a strictly improving witness for dominated strategies.
pub fn classify_strategy(orientation: Orientation, s: &Strategy, signal: &SignalModel) -> Dominance {
    // Moving beta_h by one unit while moving beta_l by -r shifts q_H and q_L by +-Δ/(p_lH + p_lL).
    let r = (signal.p_hh + signal.p_hl) / (signal.p_lh + signal.p_ll);
    match orientation {
        Orientation::Majority => {
            if s.beta_l <= BOUNDARY_TOL || s.beta_h >= 1.0 - BOUNDARY_TOL {
                return Dominance::NonDominated;
            }
            let eps_h = 1.0 - s.beta_h;
            let eps_l = s.beta_l / r;
            let witness = if eps_h <= eps_l {
                Strategy { beta_l: (s.beta_l - eps_h * r).max(0.0), beta_h: 1.0 }
            } else {
                Strategy { beta_l: 0.0, beta_h: (s.beta_h + eps_l).min(1.0) }
            };
            Dominance::Dominated { witness }
        }
        Orientation::Minority => {
            if s.beta_l >= 1.0 - BOUNDARY_TOL || s.beta_h <= BOUNDARY_TOL {
                return Dominance::NonDominated;
            }
            let eps_h = s.beta_h;
            let eps_l = (1.0 - s.beta_l) / r;
            let witness = if eps_h <= eps_l {
                Strategy { beta_l: (s.beta_l + eps_h * r).min(1.0), beta_h: 0.0 }
            } else {
                Strategy { beta_l: 1.0, beta_h: (s.beta_h - eps_l).max(0.0) }
            };
            Dominance::Dominated { witness }
        }
    }
}

/// A block of identical agents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentGroup {
    pub count: usize,
    pub agent_type: AgentType,
    pub utility: UtilityTable,
    pub strategy: Strategy,
}

impl AgentGroup {
    pub fn new(count: usize, agent_type: AgentType, utility: UtilityTable, strategy: Strategy) -> Self {
        AgentGroup { count, agent_type, utility, strategy }
    }

    fn swap(&self) -> Self {
        AgentGroup {
            count: self.count,
            agent_type: self.agent_type.swap(),
            utility: self.utility.swap(),
            strategy: self.strategy.swap(),
        }
    }

    fn validate(&self, index: usize) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidGroup(format!("group {index} has zero agents")));
        }
        Strategy::new(self.strategy.beta_l, self.strategy.beta_h)?;
        match self.agent_type {
            AgentType::MinorityType0 if self.strategy.beta_h != 0.0 => {
                return Err(Error::InvalidGroup(format!("type-0 group {index} must have beta_h = 0")))
            }
            AgentType::MinorityType1 if self.strategy.beta_l != 1.0 => {
                return Err(Error::InvalidGroup(format!("type-1 group {index} must have beta_l = 1")))
            }
            _ => {}
        }
        if self.utility.orientation() != Some(self.agent_type.orientation()) {
            return Err(Error::InvalidUtility(format!(
                "group {index} utility {:?} does not match type {:?}",
                self.utility, self.agent_type
            )));
        }
        Ok(())
    }
}

/// Strategy profile as homogeneous blocks.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupedProfile {
    pub groups: Vec<AgentGroup>,
}

impl GroupedProfile {
    pub fn new(groups: Vec<AgentGroup>) -> Self {
        GroupedProfile { groups }
    }

    pub fn n(&self) -> usize {
        self.groups.iter().map(|g| g.count).sum()
    }

    pub fn count_of(&self, t: AgentType) -> usize {
        self.groups.iter().filter(|g| g.agent_type == t).map(|g| g.count).sum()
    }

    pub fn majority_count(&self) -> usize {
        self.count_of(AgentType::Majority)
    }

    /// Largest utility across all groups.
    pub fn b(&self) -> u32 {
        self.groups.iter().map(|g| g.utility.b()).max().unwrap_or(0)
    }
}

/// A validated instance: agents, prior and canonical signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub n: usize,
    pub prior: Prior,
    pub signal: SignalModel,
    pub profile: GroupedProfile,
    /// Realized majority fraction.
    pub alpha: f64,
    /// Realized type-0 fraction.
    pub gamma: f64,
}

impl Environment {
    /// Validate groups already expressed in canonical labels.
    pub fn new(prior: Prior, signal: SignalModel, groups: Vec<AgentGroup>, strict: bool) -> Result<Self> {
        let profile = GroupedProfile::new(groups);
        for (i, g) in profile.groups.iter().enumerate() {
            g.validate(i)?;
            if strict && g.agent_type == AgentType::Majority {
                if let Dominance::Dominated { .. } = classify_strategy(Orientation::Majority, &g.strategy, &signal) {
                    return Err(Error::DominatedStrategyInProfile {
                        index: i,
                        beta_l: g.strategy.beta_l,
                        beta_h: g.strategy.beta_h,
                    });
                }
            }
        }
        let n = profile.n();
        if n == 0 {
            return Err(Error::InconsistentCounts("environment has no agents".into()));
        }
        let alpha = profile.majority_count() as f64 / n as f64;
        if alpha <= 0.5 {
            return Err(Error::DomainError(format!("majority fraction {alpha} must exceed 1/2")));
        }
        let gamma = profile.count_of(AgentType::MinorityType0) as f64 / n as f64;
        Ok(Environment { n, prior, signal, profile, alpha, gamma })
    }

    /// Same agents with a different profile (counts and types re-derived).
    pub fn with_groups(&self, groups: Vec<AgentGroup>) -> Result<Self> {
        Environment::new(self.prior, self.signal, groups, false)
    }

    /// Majority utility table (first majority group).
    pub fn majority_utility(&self) -> UtilityTable {
        self.profile
            .groups
            .iter()
            .find(|g| g.agent_type == AgentType::Majority)
            .map(|g| g.utility)
            .unwrap_or(UtilityTable::MAJORITY_EXAMPLE)
    }

    /// Minority utility table (first minority group, or the example table).
    pub fn minority_utility(&self) -> UtilityTable {
        self.profile
            .groups
            .iter()
            .find(|g| g.agent_type != AgentType::Majority)
            .map(|g| g.utility)
            .unwrap_or(UtilityTable::MINORITY_EXAMPLE)
    }
}

/// How the agents of an environment are specified.
#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    /// Explicit groups in the raw (possibly non-canonical) labelling.
    Groups(Vec<AgentGroup>),
    /// Counts derived from target fractions; majority informative, type-0 always-R, type-1 always-A.
    Fractions {
        n: usize,
        alpha: f64,
        gamma: f64,
        majority_utility: UtilityTable,
        minority_utility: UtilityTable,
    },
}

/// `(majority, type-0, type-1)` counts by rounding half away from zero.
pub fn counts_from_fractions(n: usize, alpha: f64, gamma: f64) -> Result<(usize, usize, usize)> {
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InconsistentCounts(format!("fractions ({alpha}, {gamma}) outside [0, 1]")));
    }
    let maj = (alpha * n as f64).round() as usize;
    let t0 = (gamma * n as f64).round() as usize;
    if maj + t0 > n {
        return Err(Error::InconsistentCounts(format!(
            "{maj} majority + {t0} type-0 agents exceed n = {n}"
        )));
    }
    Ok((maj, t0, n - maj - t0))
}

/// Build and validate an environment, canonicalizing the signal (and everything labelled by it).
pub fn build_environment(prior: Prior, raw_signal: [f64; 4], layout: Layout, strict: bool) -> Result<Environment> {
    let signal = validate_signal(raw_signal)?;
    let groups = match layout {
        Layout::Groups(groups) => {
            if signal.swapped {
                groups.iter().map(AgentGroup::swap).collect()
            } else {
                groups
            }
        }
        Layout::Fractions { n, alpha, gamma, majority_utility, minority_utility } => {
            let (maj, t0, t1) = counts_from_fractions(n, alpha, gamma)?;
            let (majority_utility, minority_utility) = if signal.swapped {
                (majority_utility.swap(), minority_utility.swap())
            } else {
                (majority_utility, minority_utility)
            };
            let mut groups = vec![AgentGroup::new(maj, AgentType::Majority, majority_utility, Strategy::INFORMATIVE)];
            if t0 > 0 {
                groups.push(AgentGroup::new(t0, AgentType::MinorityType0, minority_utility, Strategy::ALWAYS_R));
            }
            if t1 > 0 {
                groups.push(AgentGroup::new(t1, AgentType::MinorityType1, minority_utility, Strategy::ALWAYS_A));
            }
            groups
        }
    };
    let prior = if signal.swapped { prior.swap() } else { prior };
    Environment::new(prior, signal, groups, strict)
}

/// Environment with `round(alpha n)` majority agents and the rest always-A minority (type-1).
pub fn simple_environment(prior: Prior, signal: SignalModel, n: usize, alpha: f64) -> Result<Environment> {
    let (maj, _, rest) = counts_from_fractions(n, alpha, 0.0)?;
    let mut groups = vec![AgentGroup::new(maj, AgentType::Majority, UtilityTable::MAJORITY_EXAMPLE, Strategy::INFORMATIVE)];
    if rest > 0 {
        groups.push(AgentGroup::new(rest, AgentType::MinorityType1, UtilityTable::MINORITY_EXAMPLE, Strategy::ALWAYS_A));
    }
    Environment::new(prior, signal, groups, false)
}

//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use antvote::model::{build_environment, Layout};
use antvote::{Environment, Prior, SignalModel, UtilityTable};
use rand::Rng;

/// The running example: prior (0.6, 0.4), signal p_hH = 0.7, p_hL = 0.2.
pub const EXAMPLE_RAW: [f64; 4] = [0.7, 0.3, 0.2, 0.8];

pub fn example_signal() -> SignalModel {
    SignalModel::new(0.7, 0.2).unwrap()
}

pub fn example_prior() -> Prior {
    Prior::new(0.6, 0.4).unwrap()
}

/// The three signal models of the published curve figure, as (p_hH, p_hL).
pub const FIGURE_SIGNALS: [(f64, f64); 3] = [(0.8, 0.2), (0.6, 0.1), (0.5, 0.4)];

/// Example environment with `round(alpha n)` informative majority agents and always-A minority.
pub fn example_env(n: usize, alpha: f64) -> Environment {
    build_environment(
        example_prior(),
        EXAMPLE_RAW,
        Layout::Fractions {
            n,
            alpha,
            gamma: 0.0,
            majority_utility: UtilityTable::MAJORITY_EXAMPLE,
            minority_utility: UtilityTable::MINORITY_EXAMPLE,
        },
        false,
    )
    .unwrap()
}

/// Random informative canonical signal with every probability in [0.02, 0.98].
pub fn random_signal(rng: &mut impl Rng) -> SignalModel {
    loop {
        let p_hh: f64 = rng.gen_range(0.02..0.98);
        let p_hl: f64 = rng.gen_range(0.02..0.98);
        if p_hh - p_hl > 0.02 {
            return SignalModel::new(p_hh, p_hl).unwrap();
        }
    }
}

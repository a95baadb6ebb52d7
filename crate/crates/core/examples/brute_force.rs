//! Exhaustive small-n search over grouped coalition deviations.
//!
//! cargo run --release --example brute_force

use antvote::construct::construct;
use antvote::deviation::{brute_force_best_deviation, check_equilibrium};
use antvote::model::simple_environment;
use antvote::{Prior, SignalModel};

fn main() -> anyhow::Result<()> {
    let env = simple_environment(Prior::new(0.6, 0.4)?, SignalModel::new(0.7, 0.2)?, 20, 0.65)?;
    let r = construct(&env, 0.25)?;
    let k = 5;
    let extreme = check_equilibrium(&r.env, &r.profile, k as f64 / 20.0, None);
    println!("extreme-deviation gain {:.4}", extreme.max_gain);
    for include_majority in [false, true] {
        let bf = brute_force_best_deviation(&r.env, &r.profile, k, 0.25, include_majority, None)?;
        println!(
            "majority may deviate: {include_majority}; {} deviations, best gain {:.4}, strict majority witnesses {}, screening violations {}",
            bf.evaluated, bf.best_gain, bf.majority_strict_witnesses, bf.screening_violations
        );
        for m in &bf.witness.moves {
            println!("    {} agents of group {} → ({}, {})", m.count, m.group, m.strategy.beta_l, m.strategy.beta_h);
        }
    }
    Ok(())
}

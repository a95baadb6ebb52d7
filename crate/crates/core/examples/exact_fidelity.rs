//! Exact win probabilities, fidelity and expected utilities of a grouped profile.
//!
//! cargo run --example exact_fidelity

use antvote::model::simple_environment;
use antvote::voteshare::{expected_utility, expected_vote_shares, fidelity, win_probabilities};
use antvote::{Prior, SignalModel};

fn main() -> anyhow::Result<()> {
    let prior = Prior::new(0.6, 0.4)?;
    let signal = SignalModel::new(0.7, 0.2)?;
    println!("{:>6} {:>8} {:>8} {:>8} {:>9} {:>9}", "n", "f_H", "f_L", "fidelity", "u_major", "u_minor");
    for n in [3, 11, 51, 201, 1001] {
        // Informative majority of round(0.7 n) agents, minority always voting A.
        let env = simple_environment(prior, signal, n, 0.7)?;
        let shares = expected_vote_shares(&env.profile, &env.signal);
        let f = fidelity(&env, &env.profile);
        println!(
            "{n:>6} {:>8.4} {:>8.4} {:>8.5} {:>9.4} {:>9.4}",
            shares.f_h,
            shares.f_l,
            f.fidelity,
            expected_utility(&env, &env.profile, 0),
            expected_utility(&env, &env.profile, 1),
        );
    }
    let env = simple_environment(prior, signal, 3, 1.0)?;
    let w = win_probabilities(&env.profile, &env.signal);
    println!("three informative voters: λ_HA = {:.3}, λ_LR = {:.3}", w.lambda_ha, w.lambda_lr);
    Ok(())
}

//! Equilibrium profiles for every segment, with their deviation margins.
//!
//! cargo run --example constructions

use antvote::construct::{construct, segment_cap};
use antvote::model::simple_environment;
use antvote::voteshare::fidelity;
use antvote::{Prior, SignalModel};

fn main() -> anyhow::Result<()> {
    let prior = Prior::new(0.6, 0.4)?;
    let signal = SignalModel::new(0.7, 0.2)?;
    for alpha in [0.7, 0.65, 0.6, 0.54, 0.51] {
        let env = simple_environment(prior, signal, 4001, alpha)?;
        let xi = 0.9 * segment_cap(&signal, env.alpha)?;
        let r = construct(&env, xi)?;
        println!("α = {alpha}: {} at ξ = {xi:.4}", r.segment);
        for g in &r.profile.groups {
            println!(
                "    {:>5} × {:<13} (bl, bh) = ({:.4}, {:.4})",
                g.count,
                format!("{:?}", g.agent_type),
                g.strategy.beta_l,
                g.strategy.beta_h
            );
        }
        println!(
            "    margins ({:.4}, {:.4}), push δ = {:.4}, fidelity {:.5}",
            r.margins.0,
            r.margins.1,
            r.delta_push,
            fidelity(&r.env, &r.profile).fidelity
        );
    }
    Ok(())
}

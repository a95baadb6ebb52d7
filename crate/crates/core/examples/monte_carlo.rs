//! Seeded Monte Carlo elections against the exact fidelity.
//!
//! cargo run --release --example monte_carlo

use antvote::construct::construct;
use antvote::model::simple_environment;
use antvote::voteshare::{fidelity, monte_carlo};
use antvote::{Prior, SignalModel};

fn main() -> anyhow::Result<()> {
    let env = simple_environment(Prior::new(0.6, 0.4)?, SignalModel::new(0.7, 0.2)?, 101, 0.6)?;
    let r = construct(&env, 0.1)?;
    let exact = fidelity(&r.env, &r.profile).fidelity;
    println!("exact fidelity {exact:.5}");
    for seed in 0..5 {
        let mc = monte_carlo(&r.env, &r.profile, 100_000, seed)?;
        println!(
            "seed {seed}: {:.5} ± {:.5} (z = {:+.2})",
            mc.fidelity,
            mc.se_fidelity,
            (mc.fidelity - exact) / mc.se_fidelity
        );
    }
    Ok(())
}

//! Exact finite-n equilibrium checks below and above the threshold.
//!
//! cargo run --example equilibrium_check

use antvote::construct::construct;
use antvote::deviation::check_equilibrium;
use antvote::model::simple_environment;
use antvote::threshold::xi_star;
use antvote::{Prior, SignalModel};

fn main() -> anyhow::Result<()> {
    let prior = Prior::new(0.6, 0.4)?;
    let signal = SignalModel::new(0.7, 0.2)?;
    let alpha = 0.51;
    let star = xi_star(&signal, alpha)?.xi_star;
    println!("α = {alpha}, ξ* = {star}");
    for n in [251, 1001, 4001] {
        let env = simple_environment(prior, signal, n, alpha)?;
        let below = construct(&env, 0.8 * star)?;
        let ok = check_equilibrium(&below.env, &below.profile, 0.8 * star, None);
        // The same kind of profile, attacked by a coalition larger than ξ*.
        let base = construct(&env, 0.0)?;
        let bad = check_equilibrium(&base.env, &base.profile, 0.15, None);
        println!(
            "n = {n:>5}: ξ = 0.8ξ* → {:?} (gain {:.2e}, ε {:.2e});  ξ = 0.15 → {:?} (gain {:.3}, margins {:.4}, {:.4})",
            ok.verdict, ok.max_gain, ok.epsilon_bound, bad.verdict, bad.max_gain, bad.margins.0, bad.margins.1
        );
    }
    Ok(())
}

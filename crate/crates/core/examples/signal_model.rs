//! Signal canonicalisation, the four equivalent forms of Δ, and dominance of strategies.
//!
//! cargo run --example signal_model

use antvote::model::{classify_strategy, validate_signal, Dominance};
use antvote::{Orientation, Strategy};

fn main() -> anyhow::Result<()> {
    // Raw (p_hH, p_lH, p_hL, p_lL): the h signal is more reliable here, so states are relabelled.
    let s = validate_signal([0.9, 0.1, 0.3, 0.7])?;
    println!("canonical: p_hH = {}, p_lL = {}, Δ = {:.3}, relabelled = {}", s.p_hh, s.p_ll, s.delta, s.swapped);
    println!("Δ forms: {:?}", s.delta_forms());

    let s = validate_signal([0.7, 0.3, 0.2, 0.8])?;
    for (label, st) in [
        ("informative", Strategy::INFORMATIVE),
        ("always A", Strategy::ALWAYS_A),
        ("interior (0.2, 0.9)", Strategy::new(0.2, 0.9)?),
    ] {
        for o in [Orientation::Majority, Orientation::Minority] {
            let verdict = match classify_strategy(o, &st, &s) {
                Dominance::NonDominated => "non-dominated".to_string(),
                Dominance::Dominated { witness } => {
                    format!("dominated by ({:.3}, {:.3})", witness.beta_l, witness.beta_h)
                }
            };
            println!("{label:>20} as {o:?}: {verdict}");
        }
    }
    Ok(())
}

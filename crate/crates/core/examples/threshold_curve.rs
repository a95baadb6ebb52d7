//! The piecewise threshold ξ*(α) and its segment boundaries for a few signal models.
//!
//! cargo run --example threshold_curve

use antvote::threshold::{alpha_nl, flat_boundary, has_tail, tail_boundary, theta, xi_star};
use antvote::SignalModel;

fn main() -> anyhow::Result<()> {
    for (p_hh, p_hl) in [(0.7, 0.2), (0.8, 0.2), (0.6, 0.1), (0.5, 0.4)] {
        let s = SignalModel::new(p_hh, p_hl)?;
        println!("signal p_hH = {}, p_lL = {} (Δ = {:.2})", s.p_hh, s.p_ll, s.delta);
        let tail = if has_tail(&s) { format!("{:.4}", tail_boundary(&s)) } else { "none".into() };
        println!(
            "  tail boundary {tail}, α_NL {:.4}, flat boundary {:.4}, θ {:.4}",
            alpha_nl(&s),
            flat_boundary(&s),
            theta(&s)
        );
        for i in 1..=10 {
            let alpha = 0.5 + 0.05 * i as f64;
            let p = xi_star(&s, alpha)?;
            println!("  α = {alpha:.2}  {:<9} ξ* = {:.4}", p.segment.label(), p.xi_star);
        }
    }
    Ok(())
}

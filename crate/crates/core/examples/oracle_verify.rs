//! Numeric re-derivation of ξ*(α) and the segment boundary roots.
//!
//! cargo run --release --example oracle_verify

use antvote::cli::alpha_grid;
use antvote::oracle::{boundary_roots, numeric_xi_bounds, verify_curve, DEFAULT_TOL};
use antvote::threshold::{alpha_nl, tail_boundary, theta};
use antvote::SignalModel;

fn main() -> anyhow::Result<()> {
    let s = SignalModel::new(0.7, 0.2)?;
    let b = numeric_xi_bounds(&s, 0.54, 1e-3)?;
    println!(
        "α = 0.54: numeric ξ in [{:.5}, {:.5}], argmax (β_h1, β_l0, γ) = ({:.3}, {:.3}, {:.3})",
        b.lower, b.upper, b.argmax.0, b.argmax.1, b.argmax.2
    );

    let report = verify_curve(&s, &alpha_grid(0.01, theta(&s)), DEFAULT_TOL, 1e-3)?;
    println!(
        "verify: {} points, max |closed - numeric| = {:.2e}, pass = {}, labels agree = {}",
        report.points.len(),
        report.max_abs_diff,
        report.pass,
        report.labels_agree
    );

    let (steep_root, tail_root) = boundary_roots(&s)?;
    println!("roots: {steep_root:.8} (α_NL {:.8}), {tail_root:.8} (tail {:.8})", alpha_nl(&s), tail_boundary(&s));
    match boundary_roots(&SignalModel::new(0.6, 0.1)?) {
        Ok(r) => println!("unexpected roots {r:?}"),
        Err(e) => println!("three-segment model: {e}"),
    }
    Ok(())
}

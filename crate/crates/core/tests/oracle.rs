mod common;

use antvote::oracle::{
    biased_floor, bisect_gamma, boundary_roots, equalize_gamma, numeric_xi_bounds, verify_curve, DEFAULT_RESOLUTION,
    DEFAULT_TOL,
};
use antvote::threshold::{alpha_nl, flat_boundary, segment3_params, steep_value, tail_boundary, theta, xi_pair, xi_star};
use antvote::{Error, SignalModel};
use common::example_signal;
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn steep_point() {
    let b = numeric_xi_bounds(&example_signal(), 0.6, DEFAULT_RESOLUTION).unwrap();
    assert!(close(b.lower, 0.25, DEFAULT_TOL) && close(b.upper, 0.25, DEFAULT_TOL), "{b:?}");
    assert!(b.lower <= b.upper + 1e-9);
}

#[test]
fn nonlinear_point_argmax() {
    let s = example_signal();
    let b = numeric_xi_bounds(&s, 0.54, DEFAULT_RESOLUTION).unwrap();
    assert!(close(b.upper, 0.135181, DEFAULT_TOL) && close(b.lower, 0.135181, DEFAULT_TOL), "{b:?}");
    let p = segment3_params(&s, 0.54).unwrap();
    let (b1, b0, g) = b.argmax;
    assert!(close(b1, 1.0, 0.02) && close(b0, 1.0 - p.b_star, 0.02) && close(g, p.gamma_star, 0.02), "{:?}", b.argmax);
}

#[test]
fn symmetric_tail_point() {
    let s = SignalModel::symmetric(0.8).unwrap();
    let b = numeric_xi_bounds(&s, 0.55, DEFAULT_RESOLUTION).unwrap();
    assert!(close(b.upper, 0.165, DEFAULT_TOL) && close(b.lower, 0.165, DEFAULT_TOL), "{b:?}");
    let (b1, b0, g) = b.argmax;
    let g_star = 0.5 * (1.0 - (s.p_ll + s.p_lh) * 0.55);
    assert!(close(b1, 1.0, 0.02) && close(b0, 0.0, 0.02) && close(g, g_star, 0.02), "{:?}", b.argmax);
}

#[test]
fn domain_and_empty_grid() {
    let s = example_signal();
    assert!(matches!(numeric_xi_bounds(&s, 0.5, 1e-2), Err(Error::DomainError(_))));
    assert!(matches!(numeric_xi_bounds(&s, 0.8, 1e-2), Err(Error::DomainError(_))));
    let r = verify_curve(&s, &[], DEFAULT_TOL, DEFAULT_RESOLUTION).unwrap();
    assert!(r.points.is_empty() && r.pass && r.max_abs_diff == 0.0);
    // Points outside (1/2, θ] are skipped.
    assert!(verify_curve(&s, &[0.4, 0.9], DEFAULT_TOL, DEFAULT_RESOLUTION).unwrap().points.is_empty());
}

#[test]
fn roots() {
    let s = example_signal();
    let (a, t) = boundary_roots(&s).unwrap();
    assert!(close(a, alpha_nl(&s), 1e-6) && close(t, 1.0 / 1.9, 1e-6));
    let (a, t) = boundary_roots(&SignalModel::symmetric(0.8).unwrap()).unwrap();
    assert!(close(a, 1.0 / 1.8, 1e-6) && close(t, 1.0 / 1.8, 1e-6));
    // 0.9 (ℓL) / 0.6 (hH): no Tail segment.
    let three = SignalModel::new(0.6, 0.1).unwrap();
    assert!(tail_boundary(&three) <= 0.5);
    assert!(matches!(boundary_roots(&three), Err(Error::NoBracket { .. })));
}

/// Independent reference: a plain triple grid over (beta_h1, beta_l0, γ) without γ equalisation,
/// combined with the all-minority-votes-A floor.
fn triple_grid_upper(s: &SignalModel, alpha: f64) -> f64 {
    let steps = 50;
    let g_steps = 400;
    let mut best = biased_floor(s, alpha);
    for i in 0..=steps {
        for j in 0..=steps {
            for k in 0..=g_steps {
                let g = (1.0 - alpha) * k as f64 / g_steps as f64;
                let p = xi_pair(s, alpha, i as f64 / steps as f64, j as f64 / steps as f64, g);
                best = best.max(p.xi_h.min(p.xi_l));
            }
        }
    }
    best
}

#[test]
fn closed_form_matches_triple_grid() {
    let s = example_signal();
    for alpha in [0.505, 0.52, 0.54, 0.55, 0.58, 0.62, 0.66] {
        let reference = triple_grid_upper(&s, alpha);
        let closed = xi_star(&s, alpha).unwrap().xi_star;
        assert!(reference <= closed + 1e-9, "α = {alpha}: grid {reference} > closed {closed}");
        assert!(close(reference, closed, 5e-3), "α = {alpha}: grid {reference} vs closed {closed}");
    }
}

fn signal() -> impl Strategy<Value = SignalModel> {
    (0.05f64..0.95, 0.05f64..0.95)
        .prop_filter("informative", |(a, b)| a - b > 0.05)
        .prop_map(|(a, b)| SignalModel::new(a, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gamma_root_agrees_with_bisection(s in signal(), alpha in 0.505f64..0.95, b1 in 0.0f64..=1.0, b0 in 0.0f64..=1.0) {
        let a = equalize_gamma(&s, alpha, b1, b0);
        let b = bisect_gamma(&s, alpha, b1, b0);
        prop_assert!(close(a, b, 1e-12));
        prop_assert!((0.0..=1.0 - alpha).contains(&a));
        // Inside the interval the two thresholds meet.
        if a > 0.0 && a < 1.0 - alpha {
            let p = xi_pair(&s, alpha, b1, b0, a);
            prop_assert!(close(p.xi_h, p.xi_l, 1e-12));
        }
    }

    #[test]
    fn floor_is_min_of_caps(s in signal(), alpha in 0.505f64..0.95) {
        prop_assert_eq!(biased_floor(&s, alpha), steep_value(&s, alpha).min(s.delta / (2.0 * s.p_ll)));
        if alpha >= flat_boundary(&s) {
            prop_assert!(close(biased_floor(&s, alpha), s.delta / (2.0 * s.p_ll), 1e-15));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sandwich_and_argmax_structure(s in signal(), u in 0.02f64..=1.0) {
        let alpha = 0.5 + u * (theta(&s) - 0.5);
        let resolution = 1e-2;
        let b = numeric_xi_bounds(&s, alpha, resolution).unwrap();
        let closed = xi_star(&s, alpha).unwrap().xi_star;
        prop_assert!(b.lower <= b.upper + 1e-9);
        prop_assert!(b.lower >= b.biased_floor - 1e-15);
        prop_assert!(b.lower <= closed + 1e-9 && closed <= b.upper + DEFAULT_TOL, "{b:?} vs {closed}");
        if b.upper > steep_value(&s, alpha) + DEFAULT_TOL {
            let (b1, b0, _) = b.argmax;
            prop_assert!(b1 >= 1.0 - resolution || b0 <= resolution, "{:?}", b.argmax);
        }
    }
}

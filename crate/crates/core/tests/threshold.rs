mod common;

use antvote::threshold::{
    alpha_nl, classify_segment, derivative_signs, flat_boundary, flat_value, grouped_deviating_shares, has_tail,
    hat_gamma_xi, majority_solution_general, majority_solution_seg1, nonlinear_lower, segment3_params,
    segment_value, steep_value, tail_boundary, tail_value, theta, xi_nl, xi_pair, xi_star,
};
use antvote::{Error, Segment, SignalModel};
use common::example_signal;
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn example_boundaries() {
    let s = example_signal();
    assert!(close(theta(&s), 0.6875, 1e-12));
    assert!(close(theta(&s), 1.0 - s.delta / (2.0 * s.p_ll), 1e-12));
    assert!(close(flat_boundary(&s), 0.625, 1e-12));
    assert!(close(tail_boundary(&s), 1.0 / 1.9, 1e-12));
    assert!(has_tail(&s));
    assert!(close(alpha_nl(&s), 0.55597, 1e-5));
}

#[test]
fn example_values() {
    let s = example_signal();
    let cases = [
        (0.65, Segment::Flat, 0.3125),
        (0.60, Segment::Steep, 0.25),
        (0.54, Segment::NonLinear, 0.135181),
        (0.51, Segment::Tail, 0.1275),
        (0.70, Segment::StrongEq, 1.0),
    ];
    for (alpha, seg, v) in cases {
        let p = xi_star(&s, alpha).unwrap();
        assert_eq!(p.segment, seg, "α = {alpha}");
        assert!(close(p.xi_star, v, 1e-6), "α = {alpha}: {}", p.xi_star);
    }
    assert!(matches!(xi_star(&s, 0.5), Err(Error::DomainError(_))));
}

#[test]
fn xi_nl_at_boundaries() {
    let s = example_signal();
    let a = alpha_nl(&s);
    assert!(close(xi_nl(&s, a).unwrap(), steep_value(&s, a), 1e-9));
    assert!(close(xi_nl(&s, a).unwrap(), 0.13993, 1e-5));
    let t = tail_boundary(&s);
    assert!(close(xi_nl(&s, t).unwrap(), tail_value(&s, t), 1e-9));
    assert!(close(xi_nl(&s, t).unwrap(), 0.131579, 1e-6));
    // Radicand negative past 1/(2 p_lL).
    assert!(matches!(xi_nl(&s, 0.9), Err(Error::DomainError(_))));
}

#[test]
fn symmetric_signal() {
    let s = SignalModel::symmetric(0.8).unwrap();
    assert!(close(theta(&s), 0.625, 1e-12));
    assert!(close(theta(&s), flat_boundary(&s), 1e-9));
    assert!(close(alpha_nl(&s), 1.0 / 1.8, 1e-9));
    assert!(close(tail_boundary(&s), 1.0 / 1.8, 1e-9));
    let p = xi_star(&s, 0.55).unwrap();
    assert_eq!(p.segment, Segment::Tail);
    assert!(close(p.xi_star, 0.165, 1e-12));
}

#[test]
fn xi_pair_examples() {
    let s = example_signal();
    for gamma in [0.0, 0.1, 0.4] {
        let p = xi_pair(&s, 0.6, 0.0, 1.0, gamma);
        assert!(close(p.xi_h, 0.1 * s.delta / s.p_lh, 1e-12) && close(p.xi_h, 1.0 / 6.0, 1e-5));
        assert!(close(p.xi_l, 0.25, 1e-12));
    }
    let g = 0.5 * (1.0 - (s.p_ll + s.p_lh) * 0.51);
    let p = xi_pair(&s, 0.51, 1.0, 0.0, g);
    assert!(close(p.xi_h, 0.1275, 1e-12) && close(p.xi_l, 0.1275, 1e-12));
}

#[test]
fn seg1_examples() {
    let s = example_signal();
    let m = majority_solution_seg1(&s, 0.65, 0.28);
    assert!(close(m.beta_l_star, 0.058462, 1e-6) && close(m.beta_h_star, 0.92, 1e-12));
    assert!(m.feasible);
    let m = majority_solution_seg1(&s, 0.65, 0.0);
    assert!(close(m.beta_l_star, 0.15 / 0.65, 1e-15) && close(m.beta_h_star, 0.15 / 0.65, 1e-15));
    let m = majority_solution_seg1(&s, 0.65, flat_value(&s));
    assert!(close(m.beta_h_star, 1.0, 1e-12));
}

#[test]
fn general_solution_examples() {
    let s = example_signal();
    let p = segment3_params(&s, 0.54).unwrap();
    assert!(close(p.b_star, 0.894542, 1e-6));
    assert!(close(p.xi_nl, 0.135181, 1e-6));
    let m = majority_solution_general(&s, 0.54, 0.9 * p.xi_nl, 1.0, 1.0 - p.b_star, p.gamma_star);
    assert!(m.beta_l_star > 0.0 && m.beta_l_star < 1.0 && m.beta_h_star > 0.0 && m.beta_h_star < 1.0);
    let pair = xi_pair(&s, 0.6, 0.7, 0.3, 0.2);
    let m = majority_solution_general(&s, 0.6, pair.xi_h, 0.7, 0.3, 0.2);
    assert!(close(m.beta_h_star, 1.0, 1e-12));
}

#[test]
fn hat_examples() {
    let s = example_signal();
    let (_, xi) = hat_gamma_xi(&s, 0.6, 1.0);
    assert!(close(xi, 0.1 * s.delta / (s.p_hl * (s.p_hh + 1.0)), 1e-12) && close(xi, 0.147059, 1e-6));
    let (_, xi) = hat_gamma_xi(&s, 0.6, 0.0);
    assert!(close(xi, 0.5 * s.delta * 0.6, 1e-12));
}

#[test]
fn segment3_boundary_and_domain() {
    let s = example_signal();
    assert!(close(segment3_params(&s, 1.0 / 1.9).unwrap().b_star, 1.0, 1e-5));
    assert!(matches!(segment3_params(&s, 0.6), Err(Error::DomainError(_))));
}

#[test]
fn derivative_example_and_limits() {
    let s = example_signal();
    let (h, l) = derivative_signs(&s, 0.6, 0.25, 1.0);
    let (fh, fl) = fd_along_line(&s, 0.6, 0.25, 1.0, 0.5);
    assert_eq!((h > 0.0, l > 0.0), (fh > 0.0, fl > 0.0));
    assert!(derivative_signs(&s, 0.6, 0.25, 0.0).1 < 0.0);
    assert!(derivative_signs(&s, 0.6, 0.4, 0.7).0 < 0.0);
}

/// Central finite differences of (ξ_h, ξ_ℓ) along `1 - beta_l0 = t·beta_h1` at `beta_h1 = u`.
fn fd_along_line(s: &SignalModel, alpha: f64, gamma: f64, t: f64, u: f64) -> (f64, f64) {
    let h = 1e-6;
    let at = |u: f64| xi_pair(s, alpha, u, 1.0 - t * u, gamma);
    let (p, m) = (at(u + h), at(u - h));
    ((p.xi_h - m.xi_h) / (2.0 * h), (p.xi_l - m.xi_l) / (2.0 * h))
}

/// Canonical random signals away from the symmetric case.
fn signal() -> impl Strategy<Value = SignalModel> {
    (0.02f64..0.98, 0.02f64..0.98)
        .prop_filter("informative", |(a, b)| a - b > 0.02)
        .prop_map(|(a, b)| SignalModel::new(a, b).unwrap())
        .prop_filter("asymmetric", |s| (s.p_ll - s.p_hh).abs() > 1e-6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn boundaries_ordered(s in signal()) {
        let fb = flat_boundary(&s);
        let anl = alpha_nl(&s);
        prop_assert!(anl > 0.5 && anl < fb && fb <= theta(&s) + 1e-15);
        prop_assert!(anl >= 1.0 / (1.0 + s.p_ll) - 1e-12);
        if has_tail(&s) {
            prop_assert!(tail_boundary(&s) < anl);
        }
        prop_assert!(close(theta(&s), 1.0 - s.delta / (2.0 * s.p_ll), 1e-12));
    }
}

proptest! {
    #[test]
    fn continuous_at_boundaries(s in signal()) {
        let fb = flat_boundary(&s);
        if fb < theta(&s) {
            prop_assert!(close(segment_value(&s, Segment::Flat, fb).unwrap(), segment_value(&s, Segment::Steep, fb).unwrap(), 1e-9));
        }
        // Flat meets the whole-minority cap at θ.
        prop_assert!(close(flat_value(&s), 1.0 - theta(&s), 1e-12));
        let a = alpha_nl(&s);
        prop_assert!(close(xi_nl(&s, a).unwrap(), steep_value(&s, a), 1e-9));
        if has_tail(&s) {
            let t = tail_boundary(&s);
            prop_assert!(close(xi_nl(&s, t).unwrap(), tail_value(&s, t), 1e-9));
        }
    }

    #[test]
    fn positive_and_nondecreasing(s in signal()) {
        let th = theta(&s);
        let mut prev = 0.0;
        let mut alpha = 0.5 + 0.005;
        while alpha <= th {
            let v = xi_star(&s, alpha).unwrap().xi_star;
            prop_assert!(v > 0.0 && v <= 1.0);
            prop_assert!(v >= prev - 1e-12, "α = {alpha}: {v} < {prev}");
            prev = v;
            alpha += 0.005;
        }
        if has_tail(&s) {
            prop_assert!(close(xi_star(&s, 0.5 + 1e-9).unwrap().xi_star, s.delta / 4.0, 1e-8));
        }
    }

    #[test]
    fn nonlinear_dominates_neighbours(s in signal(), u in 0.0f64..1.0) {
        let lo = nonlinear_lower(&s);
        let a = alpha_nl(&s);
        let alpha = lo + u * (a - lo);
        prop_assume!(alpha > 0.5);
        let v = xi_nl(&s, alpha).unwrap();
        prop_assert!(v >= steep_value(&s, alpha) - 1e-12);
        prop_assert!(v >= tail_value(&s, alpha) - 1e-12);
        let fb = flat_boundary(&s);
        let beyond = a + u * (fb - a);
        if beyond > a + 1e-9 {
            prop_assert!(xi_nl(&s, beyond).unwrap() < steep_value(&s, beyond));
        }
    }

    #[test]
    fn segment3_structure(s in signal(), u in 0.0f64..=1.0) {
        let lo = nonlinear_lower(&s);
        let alpha = lo + u * (alpha_nl(&s) - lo);
        prop_assume!(alpha > 0.5 + 1e-9);
        let p = segment3_params(&s, alpha).unwrap();
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&p.b_star));
        let pair = xi_pair(&s, alpha, 1.0, 1.0 - p.b_star, p.gamma_star);
        prop_assert!(close(pair.xi_h, p.xi_nl, 1e-10) && close(pair.xi_l, p.xi_nl, 1e-10));
        prop_assert!(close(p.gamma_alt.0, p.gamma_star, 1e-10));
        prop_assert!(close(p.gamma_alt.1, p.gamma_star, 1e-10));
        prop_assert!(p.gamma_star >= p.xi_nl - 1e-12);
        prop_assert!(1.0 - alpha - p.gamma_star >= p.xi_nl - 1e-12);
    }

    #[test]
    fn gamma_moves_thresholds_oppositely(s in signal(), alpha in 0.51f64..0.9, b1 in 0.05f64..=1.0, b0 in 0.0f64..0.95, g in 0.0f64..1.0) {
        let gamma = g * (1.0 - alpha - 0.01);
        let p = xi_pair(&s, alpha, b1, b0, gamma);
        let q = xi_pair(&s, alpha, b1, b0, gamma + 0.01);
        prop_assert!(q.xi_h < p.xi_h && q.xi_l > p.xi_l);
    }

    #[test]
    fn general_solution_solves_system(s in signal(), alpha in 0.51f64..0.95, xi in 0.0f64..0.2, b1 in 0.0f64..=1.0, b0 in 0.0f64..=1.0, g in 0.0f64..=1.0) {
        let gamma = g * (1.0 - alpha);
        let m = majority_solution_general(&s, alpha, xi, b1, b0, gamma);
        let (fh, fl) = grouped_deviating_shares(&s, alpha, xi, b1, b0, gamma, m.beta_l_star, m.beta_h_star);
        prop_assert!(close(fh, 0.5, 1e-12) && close(fl, 0.5, 1e-12));
    }

    #[test]
    fn hat_equalizes(s in signal(), alpha in 0.51f64..0.95, b0 in 0.0f64..=1.0) {
        let (g, xi) = hat_gamma_xi(&s, alpha, b0);
        let p = xi_pair(&s, alpha, 1.0, b0, g);
        prop_assert!(close(p.xi_h, xi, 1e-12) && close(p.xi_l, xi, 1e-12));
    }

    #[test]
    fn derivative_signs_match_differences(s in signal(), alpha in 0.51f64..0.95, g in 0.0f64..=1.0, t in 0.0f64..3.0, u in 0.05f64..0.95) {
        let gamma = g * (1.0 - alpha);
        prop_assume!(t * (u + 1e-6) <= 1.0);
        let (h, l) = derivative_signs(&s, alpha, gamma, t);
        let (fh, fl) = fd_along_line(&s, alpha, gamma, t, u);
        // Skip near-zero slopes where finite differences cannot resolve the sign.
        if fh.abs() > 1e-6 && h.abs() > 1e-9 {
            prop_assert_eq!(h > 0.0, fh > 0.0);
        }
        if fl.abs() > 1e-6 && l.abs() > 1e-9 {
            prop_assert_eq!(l > 0.0, fl > 0.0);
        }
    }

    #[test]
    fn classification_matches_value(s in signal(), alpha in 0.5001f64..1.0) {
        let p = xi_star(&s, alpha).unwrap();
        prop_assert_eq!(p.segment, classify_segment(&s, alpha));
        if p.segment != Segment::StrongEq {
            prop_assert_eq!(p.xi_star, segment_value(&s, p.segment, alpha).unwrap());
        }
    }
}

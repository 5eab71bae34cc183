use std::f64::consts::{PI, SQRT_2};

use nodal_core::bound_engine::{
    alpha, circle_prob_lower_bound, conditional_integrand, nu_lower_bound, optimize, threshold_t,
    BoundMode,
};
use nodal_core::special_functions::j0_first_zeros;
use nodal_core::Error;
use proptest::prelude::*;

fn j0_quad(x: f64) -> f64 {
    let m = 512;
    (0..m).map(|k| (x * (2.0 * PI * k as f64 / m as f64).sin()).cos()).sum::<f64>() / m as f64
}

/// Gaussian tail by composite Simpson on `[t, t + 30]`.
fn psi_quad(t: f64) -> f64 {
    let n = 200_000;
    let h = 30.0 / n as f64;
    let phi = |s: f64| (-0.5 * s * s).exp() / (2.0 * PI).sqrt();
    let mut acc = phi(t) + phi(t + 30.0);
    for k in 1..n {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * phi(t + k as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn chosen_point_against_quadrature() {
    let (r, t) = (3.8, 3.35);
    let a = (1.0 - j0_quad(r).powi(2)).sqrt();
    assert!((alpha(r).unwrap() - a).abs() < 1e-14);
    assert!((a - 0.9154).abs() < 1e-4);

    let want = 2.0 * psi_quad(t) - SQRT_2 * r * psi_quad(t / a);
    let got = circle_prob_lower_bound(r, t).unwrap();
    assert!(((got - want) / want).abs() < 1e-8, "{got} vs {want}");
    assert!((got - 1.294e-4).abs() < 1e-7);

    let e = nu_lower_bound(r, t, BoundMode::Exact).unwrap();
    assert!((e.nu_lb - 16.0 * want / (r * r)).abs() < 1e-12);
    assert!((1.39e-4..=1.6e-4).contains(&e.nu_lb), "{}", e.nu_lb);
    assert!((e.psi_t - 4.04e-4).abs() < 5e-7);
}

#[test]
fn printed_factors_reproduce_the_bound() {
    let p = nu_lower_bound(3.8, 3.35, BoundMode::PaperReplication).unwrap();
    assert_eq!((p.factors.area_factor, p.factors.psi_argument, p.factors.half_perimeter), (2.216, 3.659, 2.69));
    let by_hand = 2.216 * (psi_quad(3.35) - 2.69 * psi_quad(3.659));
    assert!((p.nu_lb - by_hand).abs() < 1e-12);
    assert!(p.nu_lb >= 1.39e-4, "{}", p.nu_lb);
    let e = nu_lower_bound(3.8, 3.35, BoundMode::Exact).unwrap();
    assert!(e.nu_lb >= p.nu_lb);
}

fn threshold_oracle(r: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 500.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if conditional_integrand(r, mid).unwrap() < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[test]
fn threshold_against_bisection() {
    let t = threshold_t(3.8).unwrap();
    assert!((t - threshold_oracle(3.8)).abs() < 1e-9);
    assert!((t - 3.34).abs() < 0.01 && t < 3.35, "{t}");
    for r in [2.6, 3.0, 4.5, 5.4] {
        assert!((threshold_t(r).unwrap() - threshold_oracle(r)).abs() < 1e-9, "r = {r}");
    }
    for x0 in [t + 1e-6, -(t + 1e-6)] {
        assert!(conditional_integrand(3.8, x0).unwrap() > 0.0);
    }
    assert!(conditional_integrand(3.8, t - 1e-3).unwrap() < 0.0);
}

#[test]
fn threshold_maximises_the_circle_bound() {
    // d/dT of the circle bound is -2φ(T) times the conditional integrand
    for r in [3.0, 3.8, 4.7] {
        let ts = threshold_t(r).unwrap();
        let best = circle_prob_lower_bound(r, ts).unwrap();
        for k in 1..200 {
            let t = k as f64 * 0.03;
            assert!(circle_prob_lower_bound(r, t).unwrap() <= best + 1e-18, "r = {r}, T = {t}");
        }
    }
}

#[test]
fn admissible_interval_is_enforced() {
    let (r1, r2) = j0_first_zeros();
    for r in [1.0, r1, r2, 6.0] {
        assert!(matches!(
            nu_lower_bound(r, 1.0, BoundMode::Exact),
            Err(Error::RadiusOutsideAdmissible { .. })
        ));
    }
    assert!(nu_lower_bound(3.8, f64::INFINITY, BoundMode::Exact).is_err());
    assert!(nu_lower_bound(3.8, f64::NAN, BoundMode::Exact).is_err());
}

#[test]
fn vanishing_for_huge_threshold() {
    let a = nu_lower_bound(3.8, 7.0, BoundMode::Exact).unwrap().nu_lb;
    let b = nu_lower_bound(3.8, 9.0, BoundMode::Exact).unwrap().nu_lb;
    assert!(a > b && b > 0.0 && a < 1e-10);
}

#[test]
fn optimum_dominates_and_is_deterministic() {
    let o = optimize().unwrap();
    let again = optimize().unwrap();
    assert_eq!(serde_json::to_string(&o).unwrap(), serde_json::to_string(&again).unwrap());

    let at_chosen = nu_lower_bound(3.8, 3.35, BoundMode::Exact).unwrap().nu_lb;
    assert!(o.best.nu_lb >= at_chosen && o.best.nu_lb >= 1.39e-4);
    let (r1, r2) = j0_first_zeros();
    assert!(r1 < o.r_star && o.r_star < r2);
    assert!(o.t_star >= threshold_t(o.r_star).unwrap() - 1e-12);
    assert_eq!(o.best.r, o.r_star);
    assert_eq!(o.best.t, o.t_star);
}

#[test]
fn optimum_beats_brute_force_grid() {
    let o = optimize().unwrap();
    let (r1, r2) = j0_first_zeros();
    let mut best = f64::NEG_INFINITY;
    let mut r = r1 + 0.005;
    while r < r2 {
        for k in 0..600 {
            let t = k as f64 * 0.01;
            best = best.max(nu_lower_bound(r, t, BoundMode::Exact).unwrap().nu_lb);
        }
        r += 0.005;
    }
    assert!(o.best.nu_lb >= best - 1e-15, "{} < {best}", o.best.nu_lb);
    assert!(o.best.nu_lb - best < 1e-7);
}

proptest! {
    #[test]
    fn alpha_in_unit_interval(r in 1e-3f64..100.0) {
        let a = alpha(r).unwrap();
        prop_assert!(a > 0.0 && a <= 1.0);
    }

    #[test]
    fn nu_and_circle_bounds_agree(frac in 0.001f64..0.999, t in 0.0f64..8.0) {
        let (r1, r2) = j0_first_zeros();
        let r = r1 + frac * (r2 - r1);
        let e = nu_lower_bound(r, t, BoundMode::Exact).unwrap();
        let circle = circle_prob_lower_bound(r, t).unwrap();
        prop_assert!((e.circle_prob_lb - circle).abs() < 1e-15);
        prop_assert!((e.nu_lb - 16.0 * circle / (r * r)).abs() < 1e-14);
    }

    #[test]
    fn rounded_factors_are_pessimistic(frac in 0.001f64..0.999, t in 0.0f64..8.0) {
        let (r1, r2) = j0_first_zeros();
        let r = r1 + frac * (r2 - r1);
        let e = nu_lower_bound(r, t, BoundMode::Exact).unwrap();
        let p = nu_lower_bound(r, t, BoundMode::PaperReplication).unwrap();
        prop_assert!(p.factors.area_factor <= e.factors.area_factor);
        prop_assert!(p.factors.psi_argument <= e.factors.psi_argument);
        prop_assert!(p.factors.half_perimeter >= e.factors.half_perimeter);
        if p.nu_lb >= 0.0 {
            prop_assert!(p.nu_lb <= e.nu_lb);
        }
    }
}

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use extremal_core::discs::{
    choose_theta, eval_disc, feasible, optimize_discs, radial_twist, random_feasible_disc, sigma_f, sigma_unchecked,
    verify_th21, AnalyticDisc, BivariateDisc, DiscOptResult, OptimizerParams, SigmaMode, Th21Params,
};
use extremal_core::envelope::{solve_extremal, GridField, SolverParams};
use extremal_core::geometry::{ComplexPoint, DomainSpec, Rect, SetExpr, TorusSet, TAU};
use extremal_core::rng;

mod common;
use common::horner;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn log_formula(z: Complex64) -> f64 {
    (z.norm().ln() / 2f64.ln()).max(-1.0)
}

#[test]
fn evaluation_and_feasibility_examples() {
    let id = AnalyticDisc::univariate(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    assert_eq!(eval_disc(&id, c(0.0, 1.0)).unwrap().coords()[0], c(0.0, 1.0));
    let affine = AnalyticDisc::univariate(vec![c(0.5, 0.0), c(0.3, 0.0)]).unwrap();
    assert!((eval_disc(&affine, c(1.0, 0.0)).unwrap().coords()[0] - c(0.8, 0.0)).norm() < 1e-15);
    let sq = AnalyticDisc::univariate(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    let v = eval_disc(&sq, Complex64::from_polar(1.0, PI / 4.0)).unwrap().coords()[0];
    assert!((v - c(0.0, 1.0)).norm() < 1e-15);
    assert!(eval_disc(&sq, c(1.5, 0.0)).is_err());

    let half = AnalyticDisc::univariate(vec![c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
    let f = feasible(&half, &DomainSpec::UnitDisc, 64).unwrap();
    assert!(f.feasible && (f.margin - 0.5).abs() < 1e-12);
    let out = AnalyticDisc::univariate(vec![c(0.5, 0.0), c(0.6, 0.0)]).unwrap();
    let f = feasible(&out, &DomainSpec::UnitDisc, 64).unwrap();
    assert!(!f.feasible && (f.margin + 0.1).abs() < 1e-12);
    let ball = AnalyticDisc::new(vec![vec![c(0.0, 0.0), c(0.5, 0.0)], vec![c(0.0, 0.0), c(0.5, 0.0)]]).unwrap();
    let f = feasible(&ball, &DomainSpec::UnitBall { n: 2 }, 64).unwrap();
    assert!(f.feasible && (f.margin - (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
}

#[test]
fn exact_sigma_agrees_with_dense_sampling() {
    let f = AnalyticDisc::univariate(vec![c(0.25, 0.0), c(0.5, 0.0)]).unwrap();
    for r in [0.8, 0.6, 0.4] {
        let set = SetExpr::closed_disc0(r);
        let exact = sigma_f(&f, &DomainSpec::UnitDisc, &set, 4096, SigmaMode::Exact).unwrap();
        let m = 1_000_000;
        let hits = (0..m)
            .filter(|&k| horner(&[c(0.25, 0.0), c(0.5, 0.0)], Complex64::from_polar(1.0, TAU * (k as f64 + 0.5) / m as f64)).norm() <= r)
            .count();
        assert!((exact - hits as f64 / m as f64).abs() < 1e-3, "r = {r}");
    }
    let id = AnalyticDisc::univariate(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    let big = DomainSpec::Disc { center: c(0.0, 0.0), radius: 2.0 };
    assert_eq!(sigma_f(&id, &big, &SetExpr::open_disc0(0.5), 4096, SigmaMode::Sampled).unwrap(), 0.0);
    let x = ComplexPoint::real(0.2);
    assert_eq!(sigma_f(&AnalyticDisc::constant(&x), &DomainSpec::UnitDisc, &SetExpr::closed_disc0(0.5), 4096, SigmaMode::Sampled).unwrap(), 1.0);
}

fn grid_envelope() -> &'static GridField {
    static FIELD: std::sync::OnceLock<GridField> = std::sync::OnceLock::new();
    FIELD.get_or_init(|| {
        let (_, env) = solve_extremal(&DomainSpec::UnitDisc, &SetExpr::closed_disc0(0.5), &SolverParams::with_h(1.0 / 64.0)).unwrap();
        assert!(env.converged);
        env.field
    })
}

fn disc_at(x: Complex64, degree: usize, seed: u64) -> AnalyticDisc {
    let mut g = rng::stream(seed, 0);
    random_feasible_disc(&DomainSpec::UnitDisc, &ComplexPoint::one(x), degree, 4096, &mut g).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn disc_bound_dominates_envelope(r in 0.0f64..0.95, arg in 0.0f64..TAU, degree in 1usize..10, seed: u64) {
        let x = Complex64::from_polar(r, arg);
        let f = disc_at(x, degree, seed);
        prop_assert!(feasible(&f, &DomainSpec::UnitDisc, 8192).unwrap().feasible);
        let s = sigma_f(&f, &DomainSpec::UnitDisc, &SetExpr::closed_disc0(0.5), 4096, SigmaMode::Exact).unwrap();
        prop_assert!(log_formula(x) <= -s + 1e-9, "closed form {} vs disc {}", log_formula(x), -s);
        let est = grid_envelope().interpolate(&[x.re, x.im]).unwrap();
        prop_assert!(est <= -s + 3e-2, "grid {} vs disc {}", est, -s);
    }

    #[test]
    fn sigma_is_additive_on_disjoint_sets(arg in 0.0f64..TAU, degree in 1usize..8, seed: u64, split in 0.3f64..0.7) {
        let f = disc_at(Complex64::from_polar(0.3, arg), degree, seed);
        let a = SetExpr::closed_disc(c(-0.5, 0.0), split * 0.45);
        let b = SetExpr::open_disc0(0.05 + (1.0 - split) * 0.2);
        let u = SetExpr::union(vec![a.clone(), b.clone()]);
        let sa = sigma_unchecked(&f, &a, 4096, SigmaMode::Exact).unwrap();
        let sb = sigma_unchecked(&f, &b, 4096, SigmaMode::Exact).unwrap();
        let su = sigma_unchecked(&f, &u, 4096, SigmaMode::Exact).unwrap();
        prop_assert!((su - sa - sb).abs() < 1e-9, "{} vs {} + {}", su, sa, sb);
    }

    #[test]
    fn twist_keeps_the_pinned_centre(seed: u64, k in 0u32..6, theta in 0.0f64..TAU, dz in 1usize..4, dw in 1usize..4) {
        let mut g = rng::stream(seed, 1);
        let h = random_feasible_disc(&DomainSpec::UnitDisc, &ComplexPoint::real(0.1), dw, 256, &mut g).unwrap();
        let coeffs: Vec<Vec<Complex64>> = (0..=dz)
            .map(|_| (0..=dw).map(|_| c(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0))).collect())
            .collect();
        let f = BivariateDisc::new(vec![coeffs], 0).unwrap().pinned(&h).unwrap();
        let t = radial_twist(&f, k, theta).unwrap();
        prop_assert!((t.center().coords()[0] - h.center().coords()[0]).norm() < 1e-14);
        prop_assert!(t.degree() <= dz * (k as usize + 1) + dw);
    }
}

#[test]
fn twist_examples() {
    let z = BivariateDisc::new(vec![vec![vec![c(0.0, 0.0)], vec![c(1.0, 0.0)]]], 0).unwrap();
    let g = radial_twist(&z, 1, 0.0).unwrap();
    assert_eq!(g.coeffs()[0], vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let w = BivariateDisc::new(vec![vec![vec![c(0.0, 0.0), c(1.0, 0.0)]]], 0).unwrap();
    for (k, theta) in [(0, 0.3), (4, 2.0)] {
        assert_eq!(radial_twist(&w, k, theta).unwrap().coeffs()[0], vec![c(0.0, 0.0), c(1.0, 0.0)]);
    }
}

/// `sigma({w : (e^{i theta} w^(k+1), w) in C})` by brute-force sampling.
fn slice_sampled(c: &TorusSet, k: u32, theta: f64, m: usize) -> f64 {
    let inside = |a: f64, b: f64| {
        c.rects().iter().any(|r| {
            let hit = |t: f64, (s, e): (f64, f64)| (s..=e).contains(&t);
            hit(a, r.i) && hit(b, r.j)
        })
    };
    let hits = (0..m)
        .filter(|&n| {
            let t = (n as f64 + 0.5) / m as f64;
            inside((theta / TAU + (k as f64 + 1.0) * t).rem_euclid(1.0), t)
        })
        .count();
    hits as f64 / m as f64
}

#[test]
fn theta_choice_examples() {
    let band = TorusSet::new(vec![Rect::new((0.0, 1.0), (0.1, 0.3)).unwrap()]);
    let strip = TorusSet::new(vec![Rect::new((0.4, 0.7), (0.0, 1.0)).unwrap()]);
    let product = TorusSet::new(vec![Rect::new((0.1, 0.4), (0.5, 0.7)).unwrap()]);
    let a = choose_theta(&band, 3, 256).unwrap();
    assert!((a.value - 0.2).abs() < 1e-12 && (a.grid_mean - 0.2).abs() < 1e-12);
    let b = choose_theta(&strip, 0, 256).unwrap();
    assert!((b.value - 0.3).abs() < 1e-12 && (b.grid_mean - 0.3).abs() < 1e-12);
    let p = choose_theta(&product, 5, 1024).unwrap();
    assert!(p.value >= 0.06 - 1e-12, "{}", p.value);
    assert!((p.grid_mean - 0.06).abs() <= 1.0 / 1024.0);
    let brute = slice_sampled(&product, 5, p.theta, 1 << 20);
    assert!((brute - p.value).abs() < 1e-5, "{brute} vs {}", p.value);
    let sweep = (0..256).map(|j| slice_sampled(&product, 5, TAU * j as f64 / 256.0, 1 << 14)).fold(0.0, f64::max);
    assert!(p.value >= sweep - 1e-3);
    assert_eq!(choose_theta(&TorusSet::empty(), 2, 256).unwrap().value, 0.0);
    assert!(choose_theta(&product, 2, 100).is_err());
}

#[test]
fn shear_preserves_torus_measure() {
    let mut g = rng::stream(11, 0);
    for _ in 0..20 {
        let rects: Vec<Rect> = (0..4)
            .map(|_| {
                let (a, b) = (g.gen_range(0.0..0.5), g.gen_range(0.0..0.5));
                let (p, q) = (g.gen_range(0.0..0.5), g.gen_range(0.0..0.5));
                Rect::new((a, a + b), (p, p + q)).unwrap()
            })
            .collect();
        let t = TorusSet::new(rects);
        for shear in [0, 1, 3, 7] {
            assert!((t.sheared_measure(shear) - t.measure()).abs() < 1e-12);
        }
    }
}

fn small_params(seed: u64) -> OptimizerParams {
    OptimizerParams {
        degree: 4,
        restarts: 3,
        budget: 600,
        seed,
        samples: 1024,
        ..OptimizerParams::default()
    }
}

#[test]
fn optimizer_baselines_and_feasibility() {
    let d = DomainSpec::UnitDisc;
    let inside = optimize_discs(&d, &SetExpr::closed_disc0(0.5), &ComplexPoint::real(0.2), &small_params(1)).unwrap();
    assert_eq!(inside.sigma, 1.0);
    assert_eq!(inside.omega_upper, -1.0);
    let far = SetExpr::closed_disc(c(3.0, 0.0), 0.5);
    let none = optimize_discs(&d, &far, &ComplexPoint::real(0.2), &small_params(1)).unwrap();
    assert_eq!(none.sigma, 0.0);
    let r = optimize_discs(&d, &SetExpr::closed_disc0(0.5), &ComplexPoint::real(0.7), &small_params(2)).unwrap();
    assert!(r.sigma > 0.0 && r.omega_upper == -r.sigma);
    assert!(feasible(&r.best, &d, 1 << 16).unwrap().feasible);
    assert!((r.best.center().coords()[0] - c(0.7, 0.0)).norm() < 1e-15);
    let again = sigma_f(&r.best, &d, &SetExpr::closed_disc0(0.5), r.samples, r.mode).unwrap();
    assert_eq!(again, r.sigma);
    assert!(r.sigma <= -log_formula(c(0.7, 0.0)) + 1e-9);
    assert!(optimize_discs(&d, &SetExpr::closed_disc0(0.5), &ComplexPoint::real(1.2), &small_params(1)).is_err());
}

#[test]
fn optimizer_is_deterministic_and_serializes() {
    let d = DomainSpec::UnitDisc;
    let set = SetExpr::open_disc0(0.5);
    let x = ComplexPoint::real(0.7);
    let a = optimize_discs(&d, &set, &x, &small_params(9)).unwrap();
    let b = optimize_discs(&d, &set, &x, &small_params(9)).unwrap();
    assert_eq!(a, b);
    let text = serde_json::to_string(&a).unwrap();
    let back: DiscOptResult = serde_json::from_str(&text).unwrap();
    assert_eq!(back, a);
    assert_eq!(back.seed, 9);
}

#[test]
fn comparison_trivial_cases() {
    let params = Th21Params {
        solver: SolverParams::with_h(1.0 / 32.0),
        optimizer: small_params(3),
        ..Th21Params::default()
    };
    let inside = verify_th21(&DomainSpec::UnitDisc, &SetExpr::closed_disc0(0.5), &ComplexPoint::real(0.1), &params).unwrap();
    assert!(inside.pass && inside.omega_upper == -1.0 && (inside.omega_est + 1.0).abs() < 1e-9);
    let empty = verify_th21(&DomainSpec::UnitDisc, &SetExpr::empty(1), &ComplexPoint::real(0.1), &params).unwrap();
    assert!(empty.pass && empty.omega_upper == 0.0 && empty.omega_est.abs() < 1e-9);
    assert!(verify_th21(&DomainSpec::UnitDisc, &SetExpr::open_disc0(0.5), &ComplexPoint::real(0.7), &params).is_err());
}

use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use extremal_core::capacity::{axiom_suite, capacity, polar_disc_test, AxiomFamily, ChartMeasure, PolarParams};
use extremal_core::envelope::{GridSpec, SolverParams, DEFAULT_NODE_CAP};
use extremal_core::geometry::{ComplexPoint, DomainSpec, SetExpr, TAU};

mod common;
use common::disc_capacity;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cap(set: &SetExpr, h: f64) -> f64 {
    let r = capacity(&DomainSpec::UnitDisc, set, &SolverParams::with_h(h)).unwrap();
    assert!(r.converged && (0.0..=1.0).contains(&r.value));
    r.value
}

#[test]
fn chart_weights_are_a_probability() {
    for d in [DomainSpec::UnitDisc, DomainSpec::Polydisc { radii: vec![1.0, 0.5] }, DomainSpec::UnitBall { n: 2 }] {
        let grid = GridSpec::new(&d, if d.dim() == 1 { 1.0 / 64.0 } else { 1.0 / 8.0 }, DEFAULT_NODE_CAP).unwrap();
        let mu = ChartMeasure::new(Arc::new(grid)).unwrap();
        assert!(mu.weights().iter().all(|&w| w >= 0.0));
        assert!((mu.total() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn trivial_capacities() {
    assert_eq!(cap(&SetExpr::empty(1), 1.0 / 32.0), 0.0);
    assert!((cap(&SetExpr::everything(1), 1.0 / 32.0) - 1.0).abs() < 1e-9);
}

#[test]
fn centred_disc_matches_radial_quadrature() {
    let want = disc_capacity(0.5);
    assert!((want - 0.541).abs() < 1e-3);
    let got = cap(&SetExpr::closed_disc0(0.5), 1.0 / 128.0);
    assert!((got - want).abs() < 2e-2, "{got} vs {want}");
}

#[test]
fn rotation_invariance() {
    let h = 1.0 / 64.0;
    let base = cap(&SetExpr::closed_disc(c(0.4, 0.0), 0.2), h);
    for angle in [0.3, 1.1, 2.5, 4.0] {
        let moved = cap(&SetExpr::closed_disc(Complex64::from_polar(0.4, angle), 0.2), h);
        assert!((moved - base).abs() <= 2.0 * h, "angle {angle}: {moved} vs {base}");
    }
    let boxed = SetExpr::Box { lo: c(0.1, -0.2), hi: c(0.4, 0.2) };
    let turned = SetExpr::Box { lo: c(-0.2, 0.1), hi: c(0.2, 0.4) };
    assert!((cap(&boxed, h) - cap(&turned, h)).abs() <= 2.0 * h);
}

/// Points on every grid used, so refinement never changes which nodes they
/// pin. A discrete point obstacle decays like `1 / log(1/h)`, far above
/// the count-times-cell-mass figure, which is printed for comparison.
#[test]
fn finite_sets_vanish_under_refinement() {
    let pts = SetExpr::FinitePoints {
        points: [0.25, -0.5].iter().map(|&x| ComplexPoint::real(x)).chain([ComplexPoint::one(c(0.125, 0.625))]).collect(),
    };
    let mut values = Vec::new();
    for k in 4..=8 {
        let h = (-(k as f64)).exp2();
        let grid = GridSpec::new(&DomainSpec::UnitDisc, h, DEFAULT_NODE_CAP).unwrap();
        let cell = 3.0 * ChartMeasure::new(Arc::new(grid)).unwrap().max_weight();
        let v = cap(&pts, h);
        eprintln!("h = {h}: c = {v}, c log(1/h) = {}, point cells = {cell}", v * (1.0 / h).ln());
        values.push(v);
    }
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
}

#[test]
fn axiom_suite_examples() {
    let families = [
        AxiomFamily::nested_discs("nested", &[0.3, 0.5]),
        AxiomFamily::decreasing_discs("down", 0.5, &[4, 16, 64, 256]),
        AxiomFamily::increasing_discs("up", 0.5, &[4, 16, 64, 256]),
    ];
    let r = axiom_suite(&DomainSpec::UnitDisc, &families, &SolverParams::with_h(1.0 / 64.0), 0.02).unwrap();
    assert!(r.pass, "{:?}", r.entries.iter().filter(|e| !e.pass).collect::<Vec<_>>());
    let nested: Vec<f64> = r.entries.iter().filter(|e| e.family == "nested").map(|e| e.value).collect();
    assert!(nested[0] <= nested[1]);
    let mut csv = Vec::new();
    r.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("family,kind,index,value,gap,reference,check,pass\n"));
    assert!(text.lines().any(|l| l.ends_with(",limit,true")));
}

#[test]
fn finite_sets_and_shrinking_discs() {
    let params = PolarParams {
        batch: 24,
        shrinking: (2..=5).collect(),
        solver: SolverParams::with_h(1.0 / 128.0),
        exhaustion: None,
        ..PolarParams::default()
    };
    let r = polar_disc_test(&params).unwrap();
    assert!(r.finite.pass && r.finite.max_sigma == 0.0);
    assert!(r.shrinking.windows(2).all(|w| w[1].capacity < w[0].capacity));
    for s in r.shrinking.iter().skip(1) {
        let want = (s.j as f64 - 1.0) / s.j as f64;
        assert!((s.ratio.unwrap() / want - 1.0).abs() < 0.1, "j = {}: {:?}", s.j, s.ratio);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn capacity_is_monotone(r in 0.05f64..0.6, grow in 0.0f64..0.3, cx in -0.2f64..0.2, arg in 0.0f64..TAU) {
        let centre = c(cx, 0.0);
        let small = SetExpr::closed_disc(centre, r);
        let big = SetExpr::union(vec![
            SetExpr::closed_disc(centre, r + grow),
            SetExpr::closed_disc(Complex64::from_polar(0.6, arg), 0.1),
        ]);
        prop_assert!(cap(&small, 1.0 / 32.0) <= cap(&big, 1.0 / 32.0));
    }
}

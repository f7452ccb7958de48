use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use extremal_core::boundary::{
    blaschke_sigma, omega_boundary, poisson, probe_ray, random_blaschke, verify_monotone_union, verify_th43,
    weak_regularity_probe, BlaschkeDisc, ProbeParams, Th43Params,
};
use extremal_core::geometry::{arc_measure, ArcSet, SetExpr, TAU};
use extremal_core::rng;

mod common;
use common::poisson_quadrature;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Preimage measure of `set` under `b` by midpoint sampling.
fn blaschke_sampled(b: &BlaschkeDisc, set: &SetExpr, m: usize) -> f64 {
    let arcs = set.to_arcs().unwrap();
    let hits = (0..m)
        .filter(|&k| {
            let w = b.eval(Complex64::from_polar(1.0, TAU * (k as f64 + 0.5) / m as f64));
            arcs.contains_turn(w.arg().rem_euclid(TAU) / TAU)
        })
        .count();
    hits as f64 / m as f64
}

#[test]
fn poisson_examples() {
    assert_eq!(poisson(c(0.0, 0.0), &SetExpr::arc(0.0, PI)).unwrap(), -0.5);
    let cantor = poisson(c(0.0, 0.0), &SetExpr::cantor(8, 1.0 / 3.0)).unwrap();
    assert!((cantor + (2.0f64 / 3.0).powi(8)).abs() < 1e-14);
    let z = c(0.5, 0.0);
    let v = poisson(z, &SetExpr::arc(PI / 2.0, 1.5 * PI)).unwrap();
    let q = poisson_quadrature(z, &[(PI / 2.0, 1.5 * PI)], 200_000);
    assert!((v + q).abs() < 1e-9, "{v} vs {q}");
    for z in [c(1.0, 0.0), c(0.0, -1.2)] {
        assert!(poisson(z, &SetExpr::arc(0.0, 1.0)).is_err());
    }
}

#[test]
fn poisson_of_arc_unions_matches_quadrature() {
    let pieces = [(0.2, 0.9), (2.0, 2.1), (4.0, 6.0)];
    let set = SetExpr::union(pieces.iter().map(|&(a, b)| SetExpr::arc(a, b)).collect());
    for z in [c(0.3, -0.2), c(-0.6, 0.5), c(0.0, 0.9)] {
        let v = poisson(z, &set).unwrap();
        let q = poisson_quadrature(z, &pieces, 200_000);
        assert!((v + q).abs() < 1e-8, "z = {z}: {v} vs {q}");
    }
}

#[test]
fn enlargement_limits() {
    let arc = omega_boundary(&SetExpr::arc(0.0, PI), c(0.0, 0.0)).unwrap();
    assert!((arc.value + 0.5).abs() < 1e-11 && arc.gap < 1e-11);
    let point = omega_boundary(&SetExpr::circle_points(&[1.0]), c(0.0, 0.0)).unwrap();
    assert!(point.value.abs() < 1e-11);
    assert!(point.trace.windows(2).all(|w| w[1].1 >= w[0].1));
    let mut last = -1.0;
    for m in [4, 8, 12, 16] {
        let v = omega_boundary(&SetExpr::cantor(m, 1.0 / 3.0), c(0.0, 0.0)).unwrap().value;
        // each of the 2^m pieces grows by 2^-40 turns at both ends
        let slack = (m as f64 + 1.0 - 40.0).exp2();
        assert!((v + (2.0f64 / 3.0).powi(m as i32)).abs() <= slack + 1e-12, "m = {m}: {v}");
        assert!(v > last);
        last = v;
    }
}

#[test]
fn blaschke_examples() {
    let half = SetExpr::arc(0.0, PI);
    let id = BlaschkeDisc::new(0.0, vec![c(0.0, 0.0)]).unwrap();
    let sq = BlaschkeDisc::new(0.0, vec![c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
    assert!((blaschke_sigma(&id, &half).unwrap() - 0.5).abs() < 1e-12);
    assert!((blaschke_sigma(&sq, &half).unwrap() - 0.5).abs() < 1e-12);
    let m = BlaschkeDisc::mobius(c(0.5, 0.0)).unwrap();
    let u = SetExpr::arc(PI / 2.0, 1.5 * PI);
    assert!((m.center() - c(0.5, 0.0)).norm() < 1e-15);
    let s = blaschke_sigma(&m, &u).unwrap();
    assert!((s + poisson(c(0.5, 0.0), &u).unwrap()).abs() < 1e-9);
    assert!((s - poisson_quadrature(c(0.5, 0.0), &[(PI / 2.0, 1.5 * PI)], 200_000)).abs() < 1e-9);
}

#[test]
fn equality_checks() {
    let p = Th43Params::default();
    let centre = verify_th43(c(0.0, 0.0), &SetExpr::arc(0.0, PI), &p).unwrap();
    assert!(centre.pass && (centre.sigma_mobius - 0.5).abs() < 1e-12);
    let off = verify_th43(c(0.5, 0.0), &SetExpr::arc(PI / 2.0, 1.5 * PI), &p).unwrap();
    assert!(off.pass && off.equality_gap < 1e-9 && off.searched == p.batch);
    let empty = verify_th43(c(0.3, 0.1), &SetExpr::empty(1), &p).unwrap();
    assert!(empty.pass && empty.poisson == 0.0 && empty.best_searched_sigma == 0.0);
}

#[test]
fn monotone_union_examples() {
    let x = c(0.0, 0.0);
    let seq: Vec<SetExpr> = (1..=2000).step_by(37).map(|j| SetExpr::arc(0.0, PI - 1.0 / j as f64)).collect();
    let r = verify_monotone_union(x, &seq, &SetExpr::arc(0.0, PI), 1e-3).unwrap();
    assert!(r.pass && r.nested && r.monotone && (r.limit + 0.5).abs() < 1e-12);
    let same = vec![SetExpr::arc(1.0, 2.0); 5];
    let r = verify_monotone_union(c(0.2, 0.3), &same, &SetExpr::arc(1.0, 2.0), 1e-12).unwrap();
    assert!(r.pass && r.final_gap == 0.0);
    let gaps = |j: u32| SetExpr::not(SetExpr::cantor(j, 1.0 / 3.0));
    let cantor: Vec<SetExpr> = (1..=19).map(gaps).collect();
    let r = verify_monotone_union(x, &cantor, &gaps(20), 1e-3).unwrap();
    assert!(r.pass && r.monotone);
    for (j, v) in (1..=19).zip(&r.values) {
        assert!((v + 1.0 - (2.0f64 / 3.0).powi(j)).abs() < 1e-10, "j = {j}: {}", v + 1.0 - (2.0f64 / 3.0).powi(j));
    }
    let shrinking = vec![SetExpr::arc(0.0, 2.0), SetExpr::arc(0.0, 1.0)];
    assert!(!verify_monotone_union(x, &shrinking, &SetExpr::arc(0.0, 2.0), 1e-3).unwrap().nested);
}

#[test]
fn radial_limits_on_rays() {
    let arcs = SetExpr::arc(0.0, PI).to_arcs().unwrap();
    let radii: Vec<f64> = (1..=20).map(|j| 1.0 - (-(j as f64)).exp2()).collect();
    let inside = probe_ray(&arcs, PI / 2.0, &radii).unwrap();
    assert!((inside.limit + 1.0).abs() < 1e-3 && inside.target == -1.0);
    let outside = probe_ray(&arcs, 1.5 * PI, &radii).unwrap();
    assert!(outside.limit.abs() < 1e-3 && outside.target == 0.0);
    let edge = probe_ray(&arcs, 0.0, &radii).unwrap();
    assert!((edge.limit + 0.5).abs() < 1e-2 && edge.target == -0.5);
    let q = poisson_quadrature(c(radii[19], 0.0), &[(0.0, PI)], 4_000_000);
    assert!((edge.limit + q).abs() < 1e-3);
    let report = weak_regularity_probe(&SetExpr::arc(0.5, 4.0), &ProbeParams::default()).unwrap();
    assert!(report.pass && report.scored > 0 && report.max_defect <= 1e-3);
}

fn arc_union() -> impl Strategy<Value = SetExpr> {
    prop::collection::vec((0.0f64..TAU, 0.0f64..1.5), 0..5).prop_map(|v| {
        SetExpr::union(
            v.into_iter()
                .map(|(s, len)| {
                    let e = s + len;
                    if e <= TAU {
                        SetExpr::arc(s, e)
                    } else {
                        SetExpr::union(vec![SetExpr::arc(s, TAU), SetExpr::arc(0.0, e - TAU)])
                    }
                })
                .collect(),
        )
    })
}

fn point() -> impl Strategy<Value = Complex64> {
    (0.0f64..0.97, 0.0f64..TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn centre_value_is_minus_measure(set in arc_union()) {
        prop_assert!((poisson(c(0.0, 0.0), &set).unwrap() + arc_measure(&set).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn blaschke_discs_respect_the_envelope(set in arc_union(), x in point(), m in 1usize..6, seed: u64) {
        let b = random_blaschke(x, m, &mut rng::stream(seed, 0)).unwrap();
        prop_assert!((b.center() - x).norm() < 1e-12);
        let s = blaschke_sigma(&b, &set).unwrap();
        prop_assert!(poisson(x, &set).unwrap() <= -s + 1e-9);
        prop_assert!((s - blaschke_sampled(&b, &set, 1 << 16)).abs() < 2e-3 * m as f64);
    }

    #[test]
    fn automorphism_attains_the_envelope(set in arc_union(), x in point()) {
        let s = blaschke_sigma(&BlaschkeDisc::mobius(x).unwrap(), &set).unwrap();
        prop_assert!((s + poisson(x, &set).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn envelope_is_monotone_in_the_set(a in arc_union(), b in arc_union(), x in point()) {
        let big = SetExpr::union(vec![a.clone(), b]);
        prop_assert!(poisson(x, &a).unwrap() >= poisson(x, &big).unwrap() - 1e-12);
        let small: ArcSet = a.to_arcs().unwrap();
        prop_assert!(small.union(&big.to_arcs().unwrap()).measure() <= big.to_arcs().unwrap().measure() + 1e-15);
    }
}

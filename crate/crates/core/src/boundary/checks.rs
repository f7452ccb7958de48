use std::io::Write;

use num_complex::Complex64;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{blaschke_sigma_arcs, omega_boundary_arcs, poisson_arcs, BlaschkeDisc};
use crate::error::{Error, Result};
use crate::geometry::{ArcSet, SetExpr, TAU};
use crate::rng;

/// Random Blaschke product of degree `m >= 1` with `B(0) = x`.
///
/// Zeros `a_2..a_m` have modulus above `|x|^{1/(m-1)}`, which leaves room
/// for `|a_1| = |x| / prod |a_j| < 1`; the phase fixes `arg B(0)`.
pub fn random_blaschke(x: Complex64, m: usize, rng: &mut rng::Rng) -> Result<BlaschkeDisc> {
    if m == 0 {
        return Err(Error::invalid("Blaschke degree must be at least 1"));
    }
    let r = x.norm();
    if !(r < 1.0) {
        return Err(Error::OutsideDomain);
    }
    let floor = if m > 1 { r.powf(1.0 / (m - 1) as f64) } else { 0.0 };
    let mut zeros = Vec::with_capacity(m);
    let mut prod = 1.0;
    for _ in 1..m {
        let rho = floor + (1.0 - floor) * rng.gen_range(0.02..0.98);
        prod *= rho;
        zeros.push(Complex64::from_polar(rho, rng.gen_range(0.0..TAU)));
    }
    zeros.insert(0, Complex64::from_polar(r / prod, rng.gen_range(0.0..TAU)));
    let partial = zeros.iter().fold(Complex64::new(1.0, 0.0), |acc, a| acc * -a);
    let phase = if r == 0.0 { 0.0 } else { x.arg() - partial.arg() };
    BlaschkeDisc::new(phase, zeros)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Th43Params {
    pub degree_cap: usize,
    pub batch: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for Th43Params {
    fn default() -> Self {
        Self {
            degree_cap: 6,
            batch: 64,
            seed: 0,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Th43Report {
    pub x: Complex64,
    pub poisson: f64,
    pub sigma_mobius: f64,
    /// `|poisson + sigma_mobius|`.
    pub equality_gap: f64,
    pub best_searched_sigma: f64,
    /// `max_B sigma_B(U) + poisson`, positive when a searched disc beats the envelope.
    pub worst_excess: f64,
    pub searched: usize,
    pub pass: bool,
}

/// Checks `omega(x, U, D) = Omega(x, U, D)` on the disc: the automorphism
/// `phi_x` attains `-poisson(x, U)` and no random Blaschke disc centred at
/// `x` exceeds it.
pub fn verify_th43(x: Complex64, set: &SetExpr, params: &Th43Params) -> Result<Th43Report> {
    let arcs = set.to_arcs()?;
    let p = poisson_arcs(x, &arcs)?;
    let mobius = BlaschkeDisc::mobius(x)?;
    let sigma_mobius = blaschke_sigma_arcs(&mobius, &arcs);
    let mut best = sigma_mobius;
    let mut searched = 0;
    for k in 0..params.batch {
        let mut r = rng::stream(params.seed, k as u64);
        let m = 1 + k % params.degree_cap.max(1);
        let b = random_blaschke(x, m, &mut r)?;
        best = best.max(blaschke_sigma_arcs(&b, &arcs));
        searched += 1;
    }
    let equality_gap = (p + sigma_mobius).abs();
    let worst_excess = best + p;
    Ok(Th43Report {
        x,
        poisson: p,
        sigma_mobius,
        equality_gap,
        best_searched_sigma: best,
        worst_excess,
        searched,
        pass: equality_gap <= params.tol && worst_excess <= params.tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneUnionReport {
    pub values: Vec<f64>,
    pub limit: f64,
    pub nested: bool,
    pub monotone: bool,
    pub final_gap: f64,
    pub pass: bool,
}

/// `poisson(x, U_j)` along a nested sequence against `poisson(x, union U_j)`.
pub fn verify_monotone_union(
    x: Complex64,
    sets: &[SetExpr],
    limit: &SetExpr,
    tol: f64,
) -> Result<MonotoneUnionReport> {
    if sets.is_empty() {
        return Err(Error::invalid("need at least one set"));
    }
    let arcs = sets.iter().map(SetExpr::to_arcs).collect::<Result<Vec<_>>>()?;
    let limit_arcs = limit.to_arcs()?;
    let values = arcs.iter().map(|a| poisson_arcs(x, a)).collect::<Result<Vec<_>>>()?;
    let nested = arcs
        .windows(2)
        .chain(std::iter::once([arcs[arcs.len() - 1].clone(), limit_arcs.clone()].as_slice()))
        .all(|w| w[0].union(&w[1]).measure() <= w[1].measure() + 1e-15);
    let monotone = values.windows(2).all(|w| w[1] <= w[0] + 1e-15);
    let lim = poisson_arcs(x, &limit_arcs)?;
    let final_gap = (values[values.len() - 1] - lim).abs();
    Ok(MonotoneUnionReport {
        values,
        limit: lim,
        nested,
        monotone,
        final_gap,
        pass: nested && monotone && final_gap <= tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayTrace {
    pub angle: f64,
    /// `-1` inside `U`, `0` outside its closure, `-1/2` at an endpoint.
    pub target: f64,
    /// Distance in turns from the ray to the boundary of `U`.
    pub edge_distance: f64,
    pub values: Vec<(f64, f64)>,
    pub limit: f64,
}

/// `poisson` along the ray at `angle` (radians).
pub fn probe_ray(arcs: &ArcSet, angle: f64, radii: &[f64]) -> Result<RayTrace> {
    let values = radii
        .iter()
        .map(|&r| Ok((r, poisson_arcs(Complex64::from_polar(r, angle), arcs)?)))
        .collect::<Result<Vec<_>>>()?;
    let turn = angle.rem_euclid(TAU) / TAU;
    let edge_distance = edge_distance(arcs, turn);
    let target = if edge_distance == 0.0 {
        -0.5
    } else if arcs.contains_turn(turn) {
        -1.0
    } else {
        0.0
    };
    Ok(RayTrace {
        angle,
        target,
        edge_distance,
        limit: values.last().map_or(0.0, |v| v.1),
        values,
    })
}

fn edge_distance(arcs: &ArcSet, t: f64) -> f64 {
    if arcs.measure() >= 1.0 || arcs.is_empty() {
        return f64::INFINITY;
    }
    arcs.intervals()
        .iter()
        .flat_map(|&(s, e)| [s, e])
        .filter(|&p| !(p == 0.0 && arcs.contains_turn(1.0)) && !(p == 1.0 && arcs.contains_turn(0.0)))
        .map(|p| {
            let d = (t - p).rem_euclid(1.0);
            d.min(1.0 - d)
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeParams {
    pub rays: usize,
    pub radii: Vec<f64>,
    /// Rays closer than this (turns) to an endpoint are traced but not scored.
    pub edge_margin: f64,
    pub tol: f64,
}

impl Default for ProbeParams {
    fn default() -> Self {
        Self {
            rays: 64,
            radii: (1..=20).map(|j| 1.0 - (-(j as f64)).exp2()).collect(),
            edge_margin: (-10f64).exp2(),
            tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakRegularityReport {
    pub traces: Vec<RayTrace>,
    /// Largest `limit + 1` over scored rays inside `U`.
    pub max_defect: f64,
    pub scored: usize,
    pub pass: bool,
}

/// Radial limits of `u_{-chi_U}` at boundary points interior to `U`.
pub fn weak_regularity_probe(set: &SetExpr, params: &ProbeParams) -> Result<WeakRegularityReport> {
    let arcs = set.to_arcs()?;
    let traces = (0..params.rays)
        .map(|k| probe_ray(&arcs, TAU * (k as f64 + 0.5) / params.rays as f64, &params.radii))
        .collect::<Result<Vec<_>>>()?;
    let scored: Vec<&RayTrace> = traces
        .iter()
        .filter(|t| t.target == -1.0 && t.edge_distance >= params.edge_margin)
        .collect();
    let max_defect = scored.iter().map(|t| t.limit + 1.0).fold(0.0, f64::max);
    Ok(WeakRegularityReport {
        scored: scored.len(),
        pass: max_defect <= params.tol,
        max_defect,
        traces,
    })
}

/// Columns `ray,angle,radius,value`.
pub fn write_probe_csv<W: Write>(traces: &[RayTrace], mut w: W) -> Result<()> {
    writeln!(w, "ray,angle,radius,value")?;
    for (k, t) in traces.iter().enumerate() {
        for (r, v) in &t.values {
            writeln!(w, "{k},{},{r},{v}", t.angle)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Lemma49Params {
    pub terms: usize,
    /// Half-widths of the neighbourhoods `U_n`, in turns, decreasing
    /// geometrically from `eps_max` to `eps_min`.
    pub eps_max: f64,
    pub eps_min: f64,
    pub probe_radius: f64,
    pub threshold: f64,
}

impl Default for Lemma49Params {
    fn default() -> Self {
        Self {
            terms: 1100,
            eps_max: (-12f64).exp2(),
            eps_min: (-24f64).exp2(),
            probe_radius: 1.0 - (-30f64).exp2(),
            threshold: -1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma49Report {
    pub x0: Complex64,
    pub u_x0: f64,
    /// `(angle, u)` at `probe_radius` on rays through points of `A`.
    pub probes: Vec<(f64, f64)>,
    pub max_probe: f64,
    pub pass: bool,
}

/// Builds `u = sum_n omega(., U_n, D)` for a null set `A` and neighbourhoods
/// `U_n = A_{eps_n}`, then reports `u(x0)` and `u` near `A`.
pub fn lemma49_witness(set: &SetExpr, x0: Complex64, params: &Lemma49Params) -> Result<Lemma49Report> {
    let arcs = set.to_arcs()?;
    if arcs.measure() > 0.0 {
        return Err(Error::invalid("the witness needs a set of measure zero"));
    }
    if params.terms < 2 || !(0.0 < params.eps_min && params.eps_min <= params.eps_max) {
        return Err(Error::invalid("need at least two terms and 0 < eps_min <= eps_max"));
    }
    let q = (params.eps_min / params.eps_max).powf(1.0 / (params.terms - 1) as f64);
    let nbhds: Vec<ArcSet> = (0..params.terms)
        .map(|n| arcs.enlarged(params.eps_max * q.powi(n as i32)))
        .collect();
    let u = |z: Complex64| -> Result<f64> {
        Ok(crate::numeric::fsum(
            nbhds.iter().map(|a| poisson_arcs(z, a)).collect::<Result<Vec<_>>>()?,
        ))
    };
    let u_x0 = u(x0)?;
    let probes = arcs
        .intervals()
        .iter()
        .map(|&(s, e)| {
            let angle = 0.5 * (s + e) * TAU;
            Ok((angle, u(Complex64::from_polar(params.probe_radius, angle))?))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_probe = probes.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(Lemma49Report {
        x0,
        u_x0,
        pass: u_x0 > -1.0 && !probes.is_empty() && max_probe < params.threshold,
        probes,
        max_probe,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Th410Params {
    pub search: Th43Params,
    pub tol: f64,
}

impl Default for Th410Params {
    fn default() -> Self {
        Self {
            search: Th43Params::default(),
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Th410Report {
    pub x: Complex64,
    /// `omega(x, closure A, D)` by enlargement.
    pub omega_closure: f64,
    /// `-sigma_phi(closure A)` for the automorphism `phi_x`.
    pub disc_value: f64,
    /// Smallest `-sigma_B(closure A)` over the searched batch.
    pub searched_min: f64,
    /// `omega*(x, A, D)` with the finite set dropped.
    pub omega_star: f64,
    /// `sum_k log(|z - p_k| / 2) / K` at `x`; `-inf` on the points.
    pub pole_witness_x: f64,
    pub pass: bool,
}

/// `A = arcs + points` with `points` a finite set on the circle (radians).
pub fn verify_th410(x: Complex64, arcs: &SetExpr, points: &[f64], params: &Th410Params) -> Result<Th410Report> {
    let arc_part = arcs.to_arcs()?;
    let closure = arc_part.union(&SetExpr::circle_points(points).to_arcs()?);
    let omega_closure = omega_boundary_arcs(&closure, x)?.value;
    let disc_value = -blaschke_sigma_arcs(&BlaschkeDisc::mobius(x)?, &closure);
    let mut searched_min = disc_value;
    for k in 0..params.search.batch {
        let mut r = rng::stream(params.search.seed, k as u64);
        let b = random_blaschke(x, 1 + k % params.search.degree_cap.max(1), &mut r)?;
        searched_min = searched_min.min(-blaschke_sigma_arcs(&b, &closure));
    }
    let omega_star = poisson_arcs(x, &arc_part)?;
    let pole_witness_x = if points.is_empty() {
        0.0
    } else {
        points
            .iter()
            .map(|&t| ((x - Complex64::from_polar(1.0, t)).norm() / 2.0).ln())
            .sum::<f64>()
            / points.len() as f64
    };
    let tol = params.tol;
    Ok(Th410Report {
        x,
        omega_closure,
        disc_value,
        searched_min,
        omega_star,
        pole_witness_x,
        pass: omega_closure <= searched_min + tol && disc_value <= omega_star + tol && pole_witness_x.is_finite(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn random_blaschke_hits_the_centre() {
        for (k, x) in [c(0.0, 0.0), c(0.7, 0.0), c(-0.3, 0.6), c(0.0, -0.95)].into_iter().enumerate() {
            for m in 1..6 {
                let mut r = rng::stream(k as u64, m as u64);
                let b = random_blaschke(x, m, &mut r).unwrap();
                assert_eq!(b.degree(), m);
                assert!((b.center() - x).norm() < 1e-12);
                assert!((b.eval(c(0.0, 0.0)) - x).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn th43_examples() {
        let p = Th43Params::default();
        let r = verify_th43(c(0.0, 0.0), &SetExpr::arc(0.0, PI), &p).unwrap();
        assert_eq!(r.sigma_mobius, 0.5);
        assert_eq!(r.poisson, -0.5);
        assert!(r.pass);
        let r = verify_th43(c(0.5, 0.0), &SetExpr::arc(PI / 2.0, 1.5 * PI), &p).unwrap();
        assert!(r.pass, "{r:?}");
        let r = verify_th43(c(0.2, 0.1), &SetExpr::empty(1), &p).unwrap();
        assert_eq!((r.poisson, r.sigma_mobius), (0.0, 0.0));
    }

    #[test]
    fn monotone_union_examples() {
        let x = c(0.0, 0.0);
        let seq: Vec<SetExpr> = (1..=30).map(|j| SetExpr::arc(0.0, PI - (-(j as f64)).exp2())).collect();
        let r = verify_monotone_union(x, &seq, &SetExpr::arc(0.0, PI), 1e-6).unwrap();
        assert!(r.pass, "{r:?}");
        let same = vec![SetExpr::arc(1.0, 2.0); 4];
        let r = verify_monotone_union(c(0.3, 0.3), &same, &SetExpr::arc(1.0, 2.0), 1e-12).unwrap();
        assert!(r.pass && r.final_gap == 0.0);
        let bad = vec![SetExpr::arc(0.0, 2.0), SetExpr::arc(0.0, 1.0)];
        assert!(!verify_monotone_union(x, &bad, &SetExpr::arc(0.0, 2.0), 1e-6).unwrap().nested);
    }

    #[test]
    fn ray_limits() {
        let arcs = ArcSet::from_radians(0.0, PI);
        let radii = ProbeParams::default().radii;
        assert!((probe_ray(&arcs, PI / 2.0, &radii).unwrap().limit + 1.0).abs() < 1e-3);
        assert!(probe_ray(&arcs, 1.5 * PI, &radii).unwrap().limit.abs() < 1e-3);
        let edge = probe_ray(&arcs, 0.0, &radii).unwrap();
        assert_eq!(edge.target, -0.5);
        assert!((edge.limit + 0.5).abs() < 1e-2);
        let rep = weak_regularity_probe(&SetExpr::arc(0.0, PI), &ProbeParams::default()).unwrap();
        assert!(rep.pass && rep.scored > 20, "{}", rep.max_defect);
        let mut buf = Vec::new();
        write_probe_csv(&rep.traces[..1], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 21);
    }

    #[test]
    fn lemma49_for_points() {
        let pts = SetExpr::circle_points(&[0.0, 2.0, 4.0]);
        let r = lemma49_witness(&pts, c(0.0, 0.0), &Lemma49Params::default()).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(lemma49_witness(&SetExpr::arc(0.0, 1.0), c(0.0, 0.0), &Lemma49Params::default()).is_err());
    }

    #[test]
    fn th410_chain() {
        let r = verify_th410(
            c(0.4, -0.2),
            &SetExpr::union(vec![SetExpr::arc(0.1, 1.2), SetExpr::arc(3.0, 4.0)]),
            &[2.0, 5.5],
            &Th410Params::default(),
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.omega_closure - r.omega_star).abs() < 1e-9);
    }
}

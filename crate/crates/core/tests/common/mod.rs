//! Oracles shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;

/// Largest function of `t = log r` that is convex, non-decreasing and lies
/// below the radial obstacle (-1 for `r <= r0`, 0 at `r = 1`), found as the
/// lower convex hull of obstacle samples on a fine mesh.
pub fn radial_oracle(r0: f64) -> impl Fn(f64) -> f64 {
    let t_min = (1e-3f64).ln();
    let n = 20_000;
    let mut ts: Vec<f64> = (0..=n).map(|k| t_min * (1.0 - k as f64 / n as f64)).collect();
    ts.push(r0.ln());
    ts.sort_by(f64::total_cmp);
    let pts: Vec<(f64, f64)> = ts
        .into_iter()
        .map(|t| (t, if t <= r0.ln() { -1.0 } else { 0.0 }))
        .collect();
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    move |r: f64| {
        let t = r.ln();
        if t <= hull[0].0 {
            return hull[0].1;
        }
        let k = hull.partition_point(|p| p.0 < t).min(hull.len() - 1).max(1);
        let (a, b) = (hull[k - 1], hull[k]);
        a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
    }
}

/// Capacity of `ClosedDisc(0, r)` in the unit disc for the normalised area
/// measure: `-integral of max(-1, log|z| / log(1/r))`.
pub fn disc_capacity(r: f64) -> f64 {
    (1.0 - r * r) / (2.0 * (1.0 / r).ln())
}

/// `sum_k c_k z^k` by Horner's rule.
pub fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
}

/// Harmonic measure of an arc union at `z` by midpoint quadrature of the
/// Poisson kernel with `n` nodes per arc.
pub fn poisson_quadrature(z: Complex64, arcs: &[(f64, f64)], n: usize) -> f64 {
    let mut total = 0.0;
    for &(a, b) in arcs {
        let h = (b - a) / n as f64;
        for k in 0..n {
            let t = a + (k as f64 + 0.5) * h;
            let e = Complex64::from_polar(1.0, t);
            total += (1.0 - z.norm_sqr()) / (e - z).norm_sqr() * h;
        }
    }
    total / std::f64::consts::TAU
}

/// `((x0, x1), (y0, y1))`.
pub type Rect = ((f64, f64), (f64, f64));

/// Area of a union of axis-parallel rectangles by coordinate compression.
pub fn union_area(rects: &[Rect]) -> f64 {
    let mut xs: Vec<f64> = rects.iter().flat_map(|r| [r.0 .0, r.0 .1]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut area = 0.0;
    for w in xs.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let mut ys: Vec<(f64, f64)> = rects.iter().filter(|r| r.0 .0 <= mid && mid <= r.0 .1).map(|r| r.1).collect();
        ys.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mut cover, mut end) = (0.0, f64::NEG_INFINITY);
        for (lo, hi) in ys {
            if hi > end {
                cover += hi - lo.max(end);
                end = hi;
            }
        }
        area += cover * (w[1] - w[0]);
    }
    area
}

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::disc::{AnalyticDisc, BivariateDisc};
use crate::error::{Error, Result};
use crate::geometry::{TorusSet, TAU};
use crate::numeric::fsum;

/// `g(w) = F(e^{i theta} w^(k+1), w)`.
pub fn radial_twist(f: &BivariateDisc, k: u32, theta: f64) -> Result<AnalyticDisc> {
    let m = k as i32 + 1;
    let (lo, hi) = f.w_range();
    let dz = f.z_degree() as i32;
    let top = (dz * m + hi).max(0) as usize;
    let mut out = Vec::with_capacity(f.dim());
    for i in 0..f.dim() {
        let mut c = vec![Complex64::new(0.0, 0.0); top + 1];
        for a in 0..=dz {
            let rot = Complex64::from_polar(1.0, a as f64 * theta);
            for e in lo..=hi {
                let v = f.coeff(i, a as usize, e);
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let p = a * m + e;
                if p < 0 {
                    return Err(Error::invalid(format!(
                        "twist with k = {k} leaves the term z^{a} w^{e} at negative degree {p}"
                    )));
                }
                c[p as usize] += v * rot;
            }
        }
        out.push(c);
    }
    AnalyticDisc::new(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaChoice {
    /// Selected angle in radians.
    pub theta: f64,
    /// `sigma(C'(theta))`.
    pub value: f64,
    /// Mean of `sigma(C'(theta))` over the uniform grid of `T` angles.
    pub grid_mean: f64,
    /// Largest value over the uniform grid alone.
    pub grid_max: f64,
    pub sigma2: f64,
    /// `sigma2 - grid_max` when positive: what a pure grid search would
    /// have lost.
    pub grid_slack: f64,
}

pub const MIN_THETA_GRID: usize = 256;

/// Angle maximising `sigma({w : (e^{i theta} w^(k+1), w) in C})`.
///
/// The slice measure is piecewise linear in `theta`, with kinks where a
/// slice endpoint meets a side endpoint; the maximum is taken over the
/// uniform grid together with every kink, so it is exact.
pub fn choose_theta(c: &TorusSet, k: u32, t: usize) -> Result<ThetaChoice> {
    if t < MIN_THETA_GRID {
        return Err(Error::invalid(format!("theta grid needs at least {MIN_THETA_GRID} points")));
    }
    let sigma2 = c.measure();
    if sigma2 == 0.0 {
        return Ok(ThetaChoice {
            theta: 0.0,
            value: 0.0,
            grid_mean: 0.0,
            grid_max: 0.0,
            sigma2,
            grid_slack: 0.0,
        });
    }
    let m = k + 1;
    let slice = |phase: f64| c.diagonal_slice(phase, m).measure();
    let grid: Vec<f64> = (0..t).map(|j| slice(j as f64 / t as f64)).collect();
    let grid_mean = fsum(grid.iter().copied()) / t as f64;
    let (mut best_phase, mut best) = (0.0, f64::NEG_INFINITY);
    let mut grid_max = f64::NEG_INFINITY;
    for (j, v) in grid.iter().enumerate() {
        grid_max = grid_max.max(*v);
        if *v > best {
            best = *v;
            best_phase = j as f64 / t as f64;
        }
    }
    let mf = m as f64;
    for r in c.rects() {
        for a in [r.i.0, r.i.1] {
            for y in [r.j.0, r.j.1] {
                let phase = (a - mf * y).rem_euclid(1.0);
                let v = slice(phase);
                if v > best {
                    best = v;
                    best_phase = phase;
                }
            }
        }
    }
    Ok(ThetaChoice {
        theta: best_phase * TAU,
        value: best,
        grid_mean,
        grid_max,
        sigma2,
        grid_slack: (sigma2 - grid_max).max(0.0),
    })
}

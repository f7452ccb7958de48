use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArcSet, TAU};
use crate::numeric::fsum;

/// Finite Blaschke product `e^{i phase} prod (z - a_j) / (1 - conj(a_j) z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeDisc {
    phase: f64,
    zeros: Vec<Complex64>,
}

impl BlaschkeDisc {
    pub fn new(phase: f64, zeros: Vec<Complex64>) -> Result<Self> {
        if !phase.is_finite() {
            return Err(Error::invalid("phase must be finite"));
        }
        if zeros.iter().any(|a| !(a.norm() < 1.0)) {
            return Err(Error::invalid("Blaschke zeros must lie in the open unit disc"));
        }
        Ok(Self { phase, zeros })
    }

    /// Disc automorphism `z -> (z + x) / (1 + conj(x) z)`, sending 0 to `x`.
    pub fn mobius(x: Complex64) -> Result<Self> {
        Self::new(0.0, vec![-x])
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.zeros
            .iter()
            .fold(Complex64::from_polar(1.0, self.phase), |acc, a| acc * (z - a) / (1.0 - a.conj() * z))
    }

    /// `B(0) = e^{i phase} prod(-a_j)`.
    pub fn center(&self) -> Complex64 {
        self.zeros
            .iter()
            .fold(Complex64::from_polar(1.0, self.phase), |acc, a| acc * -a)
    }

    /// Continuous boundary argument `Phi(t)` with `B(e^{it}) = e^{i Phi(t)}`:
    /// each factor contributes `t + 2 arg(1 - a e^{-it})`, and the second
    /// term never leaves `(-pi/2, pi/2)`. `Phi` increases by `2 pi m` over
    /// a turn.
    pub fn lifted_arg(&self, t: f64) -> f64 {
        let e = Complex64::from_polar(1.0, -t);
        let m = self.zeros.len() as f64;
        self.phase
            + m * t
            + 2.0
                * self
                    .zeros
                    .iter()
                    .map(|a| {
                        let w = 1.0 - a * e;
                        w.im.atan2(w.re)
                    })
                    .sum::<f64>()
    }

    /// Largest `| |B| - 1 |` over `m` boundary samples.
    pub fn unimodularity_defect(&self, m: usize) -> f64 {
        (0..m)
            .map(|k| (self.eval(Complex64::from_polar(1.0, TAU * k as f64 / m as f64)).norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// `t` in `[0, 2 pi]` with `Phi(t) = target`, for `Phi(0) <= target <= Phi(2 pi)`.
fn solve_increasing(b: &BlaschkeDisc, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, TAU);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if b.lifted_arg(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Normalised measure of `{t : B(e^{it}) in A}` for an arc set `A`,
/// solving for the preimage endpoints on the monotone lifted argument.
pub fn blaschke_sigma_arcs(b: &BlaschkeDisc, arcs: &ArcSet) -> f64 {
    if b.degree() == 0 {
        let t = b.phase.rem_euclid(TAU) / TAU;
        return if arcs.contains_turn(t) { 1.0 } else { 0.0 };
    }
    let p0 = b.lifted_arg(0.0);
    let p1 = p0 + TAU * b.degree() as f64;
    let mut pieces = Vec::new();
    for &(s, e) in arcs.intervals() {
        if e <= s {
            continue;
        }
        let (alpha, beta) = (s * TAU, e * TAU);
        let n_lo = ((p0 - beta) / TAU).floor() as i64;
        let n_hi = ((p1 - alpha) / TAU).ceil() as i64;
        for n in n_lo..=n_hi {
            let lo = alpha + TAU * n as f64;
            let hi = beta + TAU * n as f64;
            let lo = lo.max(p0);
            let hi = hi.min(p1);
            if lo >= hi {
                continue;
            }
            let t_lo = if lo <= p0 { 0.0 } else { solve_increasing(b, lo) };
            let t_hi = if hi >= p1 { TAU } else { solve_increasing(b, hi) };
            pieces.push((t_hi - t_lo) / TAU);
        }
    }
    fsum(pieces).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn examples() {
        let id = BlaschkeDisc::new(0.0, vec![c(0.0, 0.0)]).unwrap();
        let half = ArcSet::from_intervals(vec![(0.0, 0.5)]);
        assert!((blaschke_sigma_arcs(&id, &half) - 0.5).abs() < 1e-12);
        let sq = BlaschkeDisc::new(0.0, vec![c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((blaschke_sigma_arcs(&sq, &half) - 0.5).abs() < 1e-12);
        let m = BlaschkeDisc::mobius(c(0.5, 0.0)).unwrap();
        assert!((m.center() - c(0.5, 0.0)).norm() < 1e-15);
        assert!(m.unimodularity_defect(1024) < 1e-12);
        assert!(BlaschkeDisc::new(0.0, vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn lifted_argument_tracks_the_boundary_value() {
        let b = BlaschkeDisc::new(0.3, vec![c(0.5, 0.2), c(-0.7, 0.1), c(0.0, -0.9)]).unwrap();
        let mut prev = b.lifted_arg(0.0);
        for k in 1..=4096 {
            let t = TAU * k as f64 / 4096.0;
            let p = b.lifted_arg(t);
            assert!(p > prev);
            prev = p;
            let v = b.eval(Complex64::from_polar(1.0, t));
            assert!((v - Complex64::from_polar(1.0, p)).norm() < 1e-12);
        }
        assert!((b.lifted_arg(TAU) - b.lifted_arg(0.0) - 3.0 * TAU).abs() < 1e-12);
    }

    #[test]
    fn sigma_matches_sampling() {
        let b = BlaschkeDisc::new(1.1, vec![c(0.3, 0.4), c(-0.6, 0.0)]).unwrap();
        let arcs = ArcSet::from_intervals(vec![(0.1, 0.35), (0.6, 0.62), (0.9, 1.0)]);
        let n = 1 << 20;
        let hits = (0..n)
            .filter(|&k| {
                let v = b.eval(Complex64::from_polar(1.0, TAU * (k as f64 + 0.5) / n as f64));
                arcs.contains_turn(v.arg().rem_euclid(TAU) / TAU)
            })
            .count();
        assert!((blaschke_sigma_arcs(&b, &arcs) - hits as f64 / n as f64).abs() < 1e-5);
    }
}

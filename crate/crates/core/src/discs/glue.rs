use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::disc::{AnalyticDisc, BivariateDisc};
use crate::error::{Error, Result};
use crate::geometry::TAU;

/// Smooth profile on the circle: 1 on `plateau`, 0 off `support`, with
/// `exp(-1/x)` transitions in between. Arcs are `(start, end)` in turns
/// and may wrap past 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub support: (f64, f64),
    pub plateau: (f64, f64),
}

fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

impl Bump {
    pub fn full() -> Self {
        Self {
            support: (0.0, 1.0),
            plateau: (0.0, 1.0),
        }
    }

    fn is_full(&self) -> bool {
        self.plateau.1 - self.plateau.0 >= 1.0
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.support;
        let (c, d) = self.plateau;
        if !(a <= c && c <= d && d <= b && b - a <= 1.0) {
            return Err(Error::invalid("plateau must lie inside the support arc"));
        }
        Ok(())
    }

    /// Offset of `t` past the support start, in `[0, 1)`.
    fn local(&self, t: f64) -> f64 {
        (t - self.support.0).rem_euclid(1.0)
    }

    pub fn in_support(&self, t: f64) -> bool {
        self.is_full() || self.local(t) <= self.support.1 - self.support.0
    }

    pub fn value(&self, t: f64) -> f64 {
        if self.is_full() {
            return 1.0;
        }
        let s = self.local(t);
        let len = self.support.1 - self.support.0;
        if s > len {
            return 0.0;
        }
        let (c, d) = (self.plateau.0 - self.support.0, self.plateau.1 - self.support.0);
        if s < c {
            smooth_step(s / c)
        } else if s <= d {
            1.0
        } else {
            smooth_step((len - s) / (len - d))
        }
    }
}

/// Local map `F_j` used on the arc `J_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluePiece {
    pub profile: Bump,
    pub map: BivariateDisc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluingSpec {
    pub base: AnalyticDisc,
    pub pieces: Vec<GluePiece>,
    /// Laurent fit keeps `w` exponents in `[-degree, degree]`.
    pub degree: usize,
    /// Allowed `sup |F_j(0, w) - h(w)|` on each arc.
    pub slice_tol: f64,
    /// Allowed fit residual relative to the coefficient scale.
    pub fit_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlueResult {
    pub disc: BivariateDisc,
    /// Sup distance between the fitted and target circle maps over the
    /// sample grid, with `z` on the closed unit circle.
    pub residual: f64,
    /// Largest modulus of any target `z`-coefficient on the circle.
    pub scale: f64,
    pub within_tolerance: bool,
}

const Z_PROBES: usize = 16;

impl GluingSpec {
    pub fn validate(&self) -> Result<()> {
        if self.degree == 0 {
            return Err(Error::invalid("truncation degree must be positive"));
        }
        for p in &self.pieces {
            p.profile.validate()?;
            if p.map.dim() != self.base.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.base.dim(),
                    found: p.map.dim(),
                });
            }
        }
        for (x, p) in self.pieces.iter().enumerate() {
            for q in &self.pieces[x + 1..] {
                let n = 4096;
                if (0..n).any(|k| {
                    let t = (k as f64 + 0.5) / n as f64;
                    p.profile.in_support(t) && q.profile.in_support(t)
                }) {
                    return Err(Error::invalid("gluing arcs overlap"));
                }
            }
        }
        let n = 1024;
        for p in &self.pieces {
            for k in 0..n {
                let t = k as f64 / n as f64;
                if !p.profile.in_support(t) {
                    continue;
                }
                let w = Complex64::from_polar(1.0, t * TAU);
                let a = p.map.eval(Complex64::new(0.0, 0.0), w);
                let b = self.base.eval(w);
                let d = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                if d > self.slice_tol {
                    return Err(Error::invalid(format!("F_j(0, w) differs from h(w) by {d:.3e} on its arc")));
                }
            }
        }
        Ok(())
    }

    fn piece_at(&self, t: f64) -> Option<&GluePiece> {
        self.pieces.iter().find(|p| p.profile.in_support(t))
    }

    /// Target `z^a` coefficient of coordinate `i` at circle angle `t`.
    fn target(&self, i: usize, a: usize, t: f64) -> Complex64 {
        let w = Complex64::from_polar(1.0, t * TAU);
        if a == 0 {
            return self.base.eval(w)[i];
        }
        match self.piece_at(t) {
            Some(p) => {
                let (lo, hi) = p.map.w_range();
                let c: Complex64 = (lo..=hi).map(|e| p.map.coeff(i, a, e) * w.powi(e)).sum();
                c * p.profile.value(t).powi(a as i32)
            }
            None => Complex64::new(0.0, 0.0),
        }
    }

    fn z_degree(&self) -> usize {
        self.pieces.iter().map(|p| p.map.z_degree()).max().unwrap_or(0)
    }
}

/// Glued circle map `F(z, w) = F_j(rho(w) z, w)` on each arc and `h(w)`
/// elsewhere, fitted by truncated Laurent series in `w`, with the slice
/// `F(0, .)` re-pinned to `h`.
pub fn glue(spec: &GluingSpec) -> Result<GlueResult> {
    spec.validate()?;
    let dim = spec.base.dim();
    let dz = spec.z_degree();
    let t = spec.degree;
    let n = (8 * (t + 1)).next_power_of_two().max(256);
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut coeffs = vec![vec![vec![Complex64::new(0.0, 0.0); 2 * t + 1]; dz + 1]; dim];
    let mut scale = 0.0f64;
    for (i, ci) in coeffs.iter_mut().enumerate() {
        for (a, row) in ci.iter_mut().enumerate().skip(1) {
            let mut buf: Vec<Complex64> = (0..n).map(|k| spec.target(i, a, k as f64 / n as f64)).collect();
            scale = buf.iter().map(|z| z.norm()).fold(scale, f64::max);
            fft.process(&mut buf);
            for e in -(t as i64)..=(t as i64) {
                row[(e + t as i64) as usize] = buf[e.rem_euclid(n as i64) as usize] / n as f64;
            }
        }
    }
    for k in 0..n {
        let w = Complex64::from_polar(1.0, k as f64 / n as f64 * TAU);
        for z in spec.base.eval(w) {
            scale = scale.max(z.norm());
        }
    }
    let disc = BivariateDisc::new(coeffs, -(t as i32))?.pinned(&spec.base)?;
    let residual = fit_residual(spec, &disc, n);
    Ok(GlueResult {
        within_tolerance: residual <= spec.fit_tol * scale.max(f64::MIN_POSITIVE),
        disc,
        residual,
        scale,
    })
}

fn fit_residual(spec: &GluingSpec, disc: &BivariateDisc, n: usize) -> f64 {
    let dz = spec.z_degree();
    let m = 2 * n;
    let mut worst = 0.0f64;
    for k in 0..m {
        let t = (k as f64 + 0.25) / m as f64;
        let w = Complex64::from_polar(1.0, t * TAU);
        for q in 0..=Z_PROBES {
            let z = if q == Z_PROBES {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar(1.0, q as f64 / Z_PROBES as f64 * TAU)
            };
            let fit = disc.eval(z, w);
            for (i, f) in fit.iter().enumerate() {
                let want: Complex64 = (0..=dz).rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + spec.target(i, a, t));
                worst = worst.max((f - want).norm());
            }
        }
    }
    worst
}

use num_complex::Complex64;
use rand::Rng as _;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::disc::AnalyticDisc;
use super::sigma::{exact_measure_flags, sigma_unchecked, SigmaMode, DEFAULT_SAMPLES};
use crate::error::{Error, Result};
use crate::geometry::{ComplexPoint, DomainSpec, SetExpr, TAU};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerParams {
    pub degree: usize,
    pub restarts: usize,
    /// Objective evaluations allowed per restart.
    pub budget: usize,
    pub seed: u64,
    /// Boundary samples `M` for both feasibility and `sigma_f`.
    pub samples: usize,
    pub mode: SigmaMode,
    pub initial_step: f64,
    pub min_step: f64,
    /// Optional starting disc, tried as restart 0 after shrinking.
    pub warm_start: Option<AnalyticDisc>,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        Self {
            degree: 12,
            restarts: 20,
            budget: 20_000,
            seed: 0,
            samples: DEFAULT_SAMPLES,
            mode: SigmaMode::Exact,
            initial_step: 0.5,
            min_step: 1e-4,
            warm_start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartLog {
    pub index: usize,
    pub start: String,
    pub sigma: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscOptResult {
    pub best: AnalyticDisc,
    pub sigma: f64,
    /// `-sigma`: an upper bound for the disc functional at the centre.
    pub omega_upper: f64,
    pub restarts: Vec<RestartLog>,
    pub seed: u64,
    pub samples: usize,
    pub mode: SigmaMode,
    pub degree: usize,
    pub budget: usize,
}

/// Gauge ceiling enforced on boundary samples. `|f|^2` (and the ball's
/// `|f_1|^2 + |f_2|^2`) is a real trigonometric polynomial of degree `d`,
/// whose sup is at most its sampled max over `cos(pi d / M)`; shrinking to
/// this ceiling keeps the whole boundary inside `1 - 1e-6`.
pub fn gauge_ceiling(degree: usize, samples: usize) -> f64 {
    let c = (std::f64::consts::PI * degree as f64 / samples as f64).cos().max(0.0);
    (1.0 - 1e-6) * c.sqrt()
}

struct Problem<'a> {
    domain: &'a DomainSpec,
    set: &'a SetExpr,
    x: &'a ComplexPoint,
    degree: usize,
    samples: usize,
    mode: SigmaMode,
    ceiling: f64,
    /// `e^{2 pi i j k / M}` at `k * (degree + 1) + j`.
    powers: Vec<Complex64>,
}

impl<'a> Problem<'a> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        domain: &'a DomainSpec,
        set: &'a SetExpr,
        x: &'a ComplexPoint,
        degree: usize,
        samples: usize,
        mode: SigmaMode,
    ) -> Self {
        let powers = (0..samples)
            .flat_map(|k| {
                (0..=degree).map(move |j| Complex64::from_polar(1.0, TAU * ((j * k) % samples) as f64 / samples as f64))
            })
            .collect();
        Self {
            domain,
            set,
            x,
            degree,
            samples,
            mode,
            ceiling: gauge_ceiling(degree, samples),
            powers,
        }
    }

    fn disc(&self, v: &[f64]) -> AnalyticDisc {
        let n = self.x.dim();
        let d = self.degree;
        let coeffs = (0..n)
            .map(|i| {
                std::iter::once(self.x.coords()[i])
                    .chain((0..d).map(|k| {
                        let o = 2 * (i * d + k);
                        Complex64::new(v[o], v[o + 1])
                    }))
                    .collect()
            })
            .collect();
        AnalyticDisc::new(coeffs).expect("finite coefficients")
    }

    fn vector(&self, f: &AnalyticDisc) -> Vec<f64> {
        let d = self.degree;
        let mut v = vec![0.0; 2 * self.x.dim() * d];
        for (i, c) in f.coeffs().iter().enumerate() {
            for k in 0..d {
                let z = c.get(k + 1).copied().unwrap_or_default();
                v[2 * (i * d + k)] = z.re;
                v[2 * (i * d + k) + 1] = z.im;
            }
        }
        v
    }

    /// Boundary values at `k / M`, flattened by sample then coordinate.
    fn boundary_samples(&self, f: &AnalyticDisc) -> Vec<Complex64> {
        let w = self.degree + 1;
        let n = f.dim();
        let mut out = Vec::with_capacity(self.samples * n);
        for k in 0..self.samples {
            let row = &self.powers[k * w..(k + 1) * w];
            for c in f.coeffs() {
                out.push(c.iter().zip(row).map(|(a, b)| a * b).sum());
            }
        }
        out
    }

    /// Shrinks `v` to feasibility and returns the objective with the
    /// feasible disc.
    fn evaluate(&self, v: &[f64]) -> Option<(f64, AnalyticDisc)> {
        let f = self.disc(v);
        let fast = !matches!(self.domain, DomainSpec::Annulus { .. });
        if !fast {
            let s = super::disc::shrink_factor(&f, self.domain, self.samples, self.ceiling)?;
            let f = if s >= 1.0 - 8.0 * f64::EPSILON { f } else { f.shrunk(s) };
            let val = sigma_unchecked(&f, self.set, self.samples, self.mode).ok()?;
            return Some((val, f));
        }
        let n = f.dim();
        let c0 = f.center();
        let c0 = c0.coords().to_vec();
        let mut samples = self.boundary_samples(&f);
        let s = super::disc::norm_shrink(&c0, samples.chunks(n), self.domain, self.ceiling)?;
        let f = if s >= 1.0 - 8.0 * f64::EPSILON {
            f
        } else {
            for (k, p) in samples.iter_mut().enumerate() {
                *p = c0[k % n] + s * (*p - c0[k % n]);
            }
            f.shrunk(s)
        };
        let shortcut = f.is_constant() || matches!(self.set, SetExpr::FinitePoints { .. });
        let val = if self.mode == SigmaMode::Exact && !shortcut {
            let flags: Vec<bool> = samples.chunks(n).map(|p| self.set.contains(p)).collect();
            exact_measure_flags(&flags, &|t: f64| self.set.contains(&f.boundary(t)))
        } else {
            sigma_unchecked(&f, self.set, self.samples, self.mode).ok()?
        };
        Some((val, f))
    }
}

/// Compass search on the stacked real and imaginary coefficient parts with
/// step halving.
fn pattern_search(p: &Problem, start: AnalyticDisc, params: &OptimizerParams) -> (f64, AnalyticDisc, usize) {
    let mut evals = 1;
    let (mut best, mut disc) = p
        .evaluate(&p.vector(&start))
        .unwrap_or_else(|| (0.0, AnalyticDisc::constant(p.x)));
    let mut x = p.vector(&disc);
    let mut step = params.initial_step;
    while step >= params.min_step && evals < params.budget {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                if evals >= params.budget {
                    break;
                }
                let mut y = x.clone();
                y[i] += dir * step;
                evals += 1;
                if let Some((v, f)) = p.evaluate(&y) {
                    if v > best {
                        best = v;
                        x = p.vector(&f);
                        disc = f;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, disc, evals)
}

/// Smooth bump on the circle: plateau of fraction `frac` centred at angle
/// pi, C-infinity transitions of half-width `width` radians, at `n` midpoints.
fn bump_profile(frac: f64, width: f64, n: usize) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    (0..n)
        .map(|k| {
            let t = TAU * (k as f64 + 0.5) / n as f64;
            let d = (t - pi).abs();
            let s = ((pi * frac + width - d) / (2.0 * width)).clamp(0.0, 1.0);
            if s <= 0.0 {
                0.0
            } else if s >= 1.0 {
                1.0
            } else {
                let a = (-1.0 / s).exp();
                let b = (-1.0 / (1.0 - s)).exp();
                a / (a + b)
            }
        })
        .collect()
}

const OUTER_GRID: usize = 4096;

/// Truncated Taylor series of the outer function with log-modulus
/// `log(level) * rho`, normalised to take the value `x` at 0.
fn outer_coefficients(planner: &mut FftPlanner<f64>, rho: &[f64], level: f64, x: Complex64, degree: usize) -> Vec<Complex64> {
    let n = rho.len();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = rho.iter().map(|v| Complex64::new(level.ln() * v, 0.0)).collect();
    fwd.process(&mut buf);
    // analytic completion u + i u~ has coefficients c_0, 2 c_k (k > 0)
    for (k, c) in buf.iter_mut().enumerate() {
        if k > 0 && k < n / 2 {
            *c *= 2.0;
        } else if k > 0 {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    inv.process(&mut buf);
    let mut vals: Vec<Complex64> = buf.iter().map(|c| (c / n as f64).exp()).collect();
    fwd.process(&mut vals);
    let mut out: Vec<Complex64> = (0..=degree)
        .map(|k| {
            // samples sit at half-step offsets
            let shift = Complex64::from_polar(1.0, -std::f64::consts::PI * k as f64 / n as f64);
            vals[k] / n as f64 * shift
        })
        .collect();
    let scale = x / out[0];
    for c in &mut out {
        *c *= scale;
    }
    out[0] = x;
    out
}

const SEED_FRACS: [f64; 19] = [
    0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95,
];
const SEED_WIDTHS: [f64; 7] = [0.05, 0.1, 0.2, 0.4, 0.7, 1.0, 1.5];
const SEED_LEVELS: [f64; 10] = [0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.85];

/// Outer-function seeds for one-variable disc-frame domains, best first by
/// sampled objective after shrinking. Seeds that miss `A` entirely are
/// dropped.
fn seed_pool(p: &Problem, keep: usize) -> Vec<(AnalyticDisc, String)> {
    let (1, Some((c, radius))) = (p.x.dim(), disc_frame(p.domain)) else {
        return Vec::new();
    };
    let xn = (p.x.coords()[0] - c) / radius;
    if keep == 0 || xn.norm() == 0.0 {
        return Vec::new();
    }
    let shapes: Vec<(f64, f64)> = SEED_FRACS
        .iter()
        .flat_map(|&f| SEED_WIDTHS.iter().map(move |&w| (f, w)))
        .collect();
    let scored: Vec<(f64, usize, AnalyticDisc, String)> = shapes
        .par_iter()
        .enumerate()
        .flat_map_iter(|(si, &(frac, width))| {
            let rho = bump_profile(frac, width, OUTER_GRID);
            let mut planner = FftPlanner::<f64>::new();
            SEED_LEVELS
                .iter()
                .enumerate()
                .filter_map(|(li, &level)| {
                    let co = outer_coefficients(&mut planner, &rho, level, xn, p.degree);
                    let coeffs = co
                        .iter()
                        .enumerate()
                        .map(|(k, z)| if k == 0 { p.x.coords()[0] } else { z * radius })
                        .collect();
                    let f = AnalyticDisc::univariate(coeffs).ok()?;
                    let (v, f) = p.evaluate(&p.vector(&f))?;
                    (v > 0.0).then(|| (v, si * SEED_LEVELS.len() + li, f, format!("outer({frac},{width},{level})")))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mut scored = scored;
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.into_iter().take(keep).map(|(_, _, f, l)| (f, l)).collect()
}

/// Starting disc for restart `r`: the `r`-th pooled seed if there is one,
/// else random coefficients from the restart's stream.
fn start_disc(pool: &[(AnalyticDisc, String)], x: &ComplexPoint, degree: usize, r: usize, root: u64) -> (AnalyticDisc, String) {
    if let Some(s) = pool.get(r) {
        return s.clone();
    }
    let mut g = rng::stream(root, r as u64);
    (random_coeffs(x, degree, &mut g), "random".to_string())
}

fn random_coeffs(x: &ComplexPoint, degree: usize, g: &mut rng::Rng) -> AnalyticDisc {
    let coeffs = x
        .coords()
        .iter()
        .map(|&c0| {
            std::iter::once(c0)
                .chain((1..=degree).map(|k| {
                    let rad = 0.6 * g.gen::<f64>() / k as f64;
                    Complex64::from_polar(rad, TAU * g.gen::<f64>())
                }))
                .collect()
        })
        .collect();
    AnalyticDisc::new(coeffs).expect("finite")
}

/// Random polynomial disc centred at `x`, shrunk under the gauge ceiling
/// for `samples` boundary points.
pub fn random_feasible_disc(
    domain: &DomainSpec,
    x: &ComplexPoint,
    degree: usize,
    samples: usize,
    g: &mut rng::Rng,
) -> Result<AnalyticDisc> {
    if !domain.contains(x)? {
        return Err(Error::OutsideDomain);
    }
    let f = random_coeffs(x, degree, g);
    let s = super::disc::shrink_factor(&f, domain, samples, gauge_ceiling(degree, samples)).ok_or(Error::OutsideDomain)?;
    Ok(f.shrunk(s))
}

fn disc_frame(domain: &DomainSpec) -> Option<(Complex64, f64)> {
    match domain {
        DomainSpec::UnitDisc => Some((Complex64::new(0.0, 0.0), 1.0)),
        DomainSpec::Disc { center, radius } => Some((*center, *radius)),
        DomainSpec::Polydisc { radii } if radii.len() == 1 => Some((Complex64::new(0.0, 0.0), radii[0])),
        DomainSpec::UnitBall { n: 1 } => Some((Complex64::new(0.0, 0.0), 1.0)),
        _ => None,
    }
}

/// Best feasible polynomial disc centred at `x` for the disc functional.
pub fn optimize_discs(
    domain: &DomainSpec,
    set: &SetExpr,
    x: &ComplexPoint,
    params: &OptimizerParams,
) -> Result<DiscOptResult> {
    if params.degree == 0 {
        return Err(Error::invalid("disc degree must be at least 1"));
    }
    if params.samples < super::disc::MIN_FEASIBILITY_SAMPLES || params.samples <= 2 * params.degree {
        return Err(Error::invalid("too few boundary samples for the disc degree"));
    }
    if !domain.contains(x)? {
        return Err(Error::OutsideDomain);
    }
    let d = set.dim()?;
    if d != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: d,
        });
    }
    let problem = Problem::new(domain, set, x, params.degree, params.samples, params.mode);
    let scout = Problem::new(domain, set, x, params.degree, params.samples, SigmaMode::Sampled);
    let pool = seed_pool(&scout, params.restarts.max(1).div_ceil(2));
    let constant = AnalyticDisc::constant(x);
    let baseline = sigma_unchecked(&constant, set, params.samples, params.mode)?;
    let runs: Vec<(f64, AnalyticDisc, RestartLog)> = (0..params.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let (start, label) = match (&params.warm_start, r) {
                (Some(w), 0) => (w.clone(), "warm".to_string()),
                _ => start_disc(&pool, x, params.degree, r, params.seed),
            };
            let (v, f, evals) = pattern_search(&problem, pad(&start, x, params.degree), params);
            let log = RestartLog {
                index: r,
                start: label,
                sigma: v,
                evaluations: evals,
            };
            (v, f, log)
        })
        .collect();
    let mut best = (baseline, constant);
    for (v, f, _) in &runs {
        if *v > best.0 {
            best = (*v, f.clone());
        }
    }
    Ok(DiscOptResult {
        omega_upper: -best.0,
        sigma: best.0,
        best: best.1,
        restarts: runs.into_iter().map(|r| r.2).collect(),
        seed: params.seed,
        samples: params.samples,
        mode: params.mode,
        degree: params.degree,
        budget: params.budget,
    })
}

/// Re-centres `f` at `x` and pads or truncates it to `degree`.
fn pad(f: &AnalyticDisc, x: &ComplexPoint, degree: usize) -> AnalyticDisc {
    let coeffs = f
        .coeffs()
        .iter()
        .zip(x.coords())
        .map(|(c, x0)| {
            let mut c = c.clone();
            c.resize(degree + 1, Complex64::new(0.0, 0.0));
            c[0] = *x0;
            c
        })
        .collect();
    AnalyticDisc::new(coeffs).expect("finite")
}

#[cfg(test)]
mod tests {
    use super::super::disc::max_gauge;
    use super::*;

    fn quick() -> OptimizerParams {
        OptimizerParams {
            degree: 4,
            restarts: 3,
            budget: 400,
            samples: 512,
            ..OptimizerParams::default()
        }
    }

    #[test]
    fn point_in_set_uses_constant_disc() {
        let r = optimize_discs(&DomainSpec::UnitDisc, &SetExpr::open_disc0(0.5), &ComplexPoint::real(0.1), &quick()).unwrap();
        assert_eq!(r.sigma, 1.0);
        assert_eq!(r.omega_upper, -1.0);
    }

    #[test]
    fn unreachable_set_gives_zero() {
        let far = SetExpr::closed_disc(Complex64::new(5.0, 0.0), 0.5);
        let r = optimize_discs(&DomainSpec::UnitDisc, &far, &ComplexPoint::real(0.3), &quick()).unwrap();
        assert_eq!(r.sigma, 0.0);
        assert!(r.best.is_constant());
    }

    #[test]
    fn results_are_feasible_and_reproducible() {
        let x = ComplexPoint::real(0.7);
        let a = optimize_discs(&DomainSpec::UnitDisc, &SetExpr::open_disc0(0.5), &x, &quick()).unwrap();
        let b = optimize_discs(&DomainSpec::UnitDisc, &SetExpr::open_disc0(0.5), &x, &quick()).unwrap();
        assert_eq!(a, b);
        assert!(a.sigma > 0.2);
        assert_eq!(a.best.center(), x);
        let g = max_gauge(&a.best, &DomainSpec::UnitDisc, 1 << 16);
        assert!(g < 1.0 - 1e-6, "{g}");
        let direct = sigma_unchecked(&a.best, &SetExpr::open_disc0(0.5), 512, SigmaMode::Exact).unwrap();
        assert!((direct - a.sigma).abs() < 1e-9);
    }

    #[test]
    fn seeds_reach_the_set_from_near_the_boundary() {
        let p = OptimizerParams {
            degree: 12,
            restarts: 2,
            budget: 200,
            ..OptimizerParams::default()
        };
        let r = optimize_discs(&DomainSpec::UnitDisc, &SetExpr::closed_disc0(0.5), &ComplexPoint::real(0.9), &p).unwrap();
        assert!(r.sigma > 0.05, "{}", r.sigma);
        assert!(r.restarts[0].start.starts_with("outer"));
    }

    #[test]
    fn outside_point_is_an_error() {
        let r = optimize_discs(&DomainSpec::UnitDisc, &SetExpr::open_disc0(0.5), &ComplexPoint::real(1.2), &quick());
        assert!(matches!(r, Err(Error::OutsideDomain)));
    }
}

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::capacity;
use crate::discs::{optimize_discs, random_feasible_disc, sigma_f, AnalyticDisc, OptimizerParams, SigmaMode};
use crate::envelope::SolverParams;
use crate::error::{Error, Result};
use crate::geometry::{ComplexPoint, DomainSpec, SetExpr};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExhaustionParams {
    pub set: SetExpr,
    pub x: ComplexPoint,
    pub radii: Vec<f64>,
    pub optimizer: OptimizerParams,
}

impl Default for ExhaustionParams {
    fn default() -> Self {
        Self {
            set: SetExpr::closed_disc0(0.5),
            x: ComplexPoint::real(0.7),
            radii: vec![1.0, 2.0, 4.0],
            optimizer: OptimizerParams {
                degree: 8,
                restarts: 6,
                budget: 3000,
                ..OptimizerParams::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolarParams {
    /// Centre of the random disc batch.
    pub x: ComplexPoint,
    pub points: Vec<ComplexPoint>,
    pub batch: usize,
    pub degree: usize,
    pub samples: usize,
    pub seed: u64,
    pub shrinking: Vec<u32>,
    pub solver: SolverParams,
    pub ratio_tol: f64,
    pub exhaustion: Option<ExhaustionParams>,
}

impl Default for PolarParams {
    fn default() -> Self {
        Self {
            x: ComplexPoint::real(0.1),
            points: vec![ComplexPoint::real(0.3)],
            batch: 100,
            degree: 6,
            samples: 4096,
            seed: 0,
            shrinking: (2..=8).collect(),
            solver: SolverParams::with_h(1.0 / 256.0),
            ratio_tol: 0.1,
            exhaustion: Some(ExhaustionParams::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSetCheck {
    pub discs: usize,
    /// Image points of each disc added to `E` before measuring.
    pub points_per_disc: usize,
    pub max_sigma: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkingStep {
    pub j: u32,
    pub capacity: f64,
    /// `c(E_j) / c(E_{j-1})`, absent for the first step.
    pub ratio: Option<f64>,
    pub expected: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionStep {
    pub radius: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarReport {
    pub finite: FiniteSetCheck,
    pub shrinking: Vec<ShrinkingStep>,
    pub exhaustion: Vec<ExhaustionStep>,
    pub exhaustion_monotone: bool,
    pub pass: bool,
}

const IMAGE_POINTS: usize = 5;

/// Disc and capacity evidence that finite sets are negligible and that
/// non-polar sets are seen from ever larger domains.
///
/// (a) exact-mode `sigma_f(E) = 0` on a batch of random feasible discs in
/// the unit disc, with `E` enlarged by points on each disc's own boundary
/// image; (b) `c(ClosedDisc(0, 2^-j))` ratios against `(j-1)/j`;
/// (c) best `sigma_f(A)` over the radii, each run warm-started from the
/// previous optimum.
pub fn polar_disc_test(params: &PolarParams) -> Result<PolarReport> {
    let domain = DomainSpec::UnitDisc;
    if params.points.iter().any(|p| p == &params.x) {
        return Err(Error::invalid("probe point lies in E"));
    }
    let mut max_sigma: f64 = 0.0;
    for k in 0..params.batch {
        let mut g = rng::stream(params.seed, k as u64);
        let f = random_feasible_disc(&domain, &params.x, params.degree, params.samples, &mut g)?;
        let mut pts = params.points.clone();
        pts.extend((0..IMAGE_POINTS).map(|i| ComplexPoint::new(f.boundary(i as f64 / IMAGE_POINTS as f64)).expect("finite")));
        let e = SetExpr::FinitePoints { points: pts };
        max_sigma = max_sigma.max(sigma_f(&f, &domain, &e, params.samples, SigmaMode::Exact)?);
    }
    let finite = FiniteSetCheck {
        discs: params.batch,
        points_per_disc: params.points.len() + IMAGE_POINTS,
        max_sigma,
        pass: max_sigma == 0.0,
    };

    let mut shrinking: Vec<ShrinkingStep> = Vec::new();
    for &j in &params.shrinking {
        let set = SetExpr::closed_disc0((-(j as f64)).exp2());
        let c = capacity(&domain, &set, &params.solver)?.value;
        let (ratio, expected) = match shrinking.last() {
            Some(prev) if prev.j + 1 == j && prev.capacity > 0.0 => {
                (Some(c / prev.capacity), Some((j - 1) as f64 / j as f64))
            }
            _ => (None, None),
        };
        let pass = match (ratio, expected) {
            (Some(r), Some(e)) => (r / e - 1.0).abs() <= params.ratio_tol,
            _ => true,
        };
        shrinking.push(ShrinkingStep {
            j,
            capacity: c,
            ratio,
            expected,
            pass,
        });
    }

    let mut exhaustion = Vec::new();
    if let Some(ex) = &params.exhaustion {
        let mut warm: Option<AnalyticDisc> = None;
        for &r in &ex.radii {
            let dom = DomainSpec::Disc {
                center: Complex64::new(0.0, 0.0),
                radius: r,
            };
            let mut op = ex.optimizer.clone();
            op.warm_start = warm.take();
            let res = optimize_discs(&dom, &ex.set, &ex.x, &op)?;
            exhaustion.push(ExhaustionStep {
                radius: r,
                sigma: res.sigma,
            });
            warm = Some(res.best);
        }
    }
    let exhaustion_monotone = exhaustion.windows(2).all(|w| w[1].sigma >= w[0].sigma);
    let pass = finite.pass && shrinking.iter().all(|s| s.pass) && exhaustion_monotone;
    Ok(PolarReport {
        finite,
        shrinking,
        exhaustion,
        exhaustion_monotone,
        pass,
    })
}

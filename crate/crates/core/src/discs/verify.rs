use serde::{Deserialize, Serialize};

use super::optimize::{optimize_discs, DiscOptResult, OptimizerParams};
use crate::envelope::{solve_extremal, SolverParams};
use crate::error::{Error, Result};
use crate::geometry::{ComplexPoint, DomainSpec, SetExpr};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Th21Params {
    pub solver: SolverParams,
    pub optimizer: OptimizerParams,
    /// Allowed excess of the disc bound over the envelope estimate.
    pub upper_tol: f64,
    /// Allowed excess of the envelope estimate over the disc bound.
    pub lower_tol: f64,
}

impl Default for Th21Params {
    fn default() -> Self {
        Self {
            solver: SolverParams::default(),
            optimizer: OptimizerParams::default(),
            upper_tol: 0.08,
            lower_tol: 0.03,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Th21Report {
    pub x: ComplexPoint,
    pub omega_est: f64,
    pub omega_upper: f64,
    /// `omega_upper <= omega_est + upper_tol`.
    pub upper_ok: bool,
    /// `omega_upper >= omega_est - lower_tol`.
    pub lower_ok: bool,
    pub pass: bool,
    pub discs: DiscOptResult,
}

fn closed_algebra(set: &SetExpr) -> bool {
    match set {
        SetExpr::Empty { .. } | SetExpr::ClosedDisc { .. } | SetExpr::Box { .. } => true,
        SetExpr::Union { sets } => sets.iter().all(closed_algebra),
        SetExpr::Product { left, right } => closed_algebra(left) && closed_algebra(right),
        _ => false,
    }
}

/// Compares the disc bound with the envelope estimate at `x` for a closed
/// set built from discs and boxes.
pub fn verify_th21(domain: &DomainSpec, set: &SetExpr, x: &ComplexPoint, params: &Th21Params) -> Result<Th21Report> {
    if !closed_algebra(set) {
        return Err(Error::invalid(format!("{} is outside the closed disc/box algebra", set.kind())));
    }
    Ok(disc_vs_envelope(domain, set, std::slice::from_ref(x), params)?.remove(0))
}

/// Disc bound against the envelope estimate at each point, from one grid
/// solve. Any set the rasteriser accepts.
pub fn disc_vs_envelope(
    domain: &DomainSpec,
    set: &SetExpr,
    xs: &[ComplexPoint],
    params: &Th21Params,
) -> Result<Vec<Th21Report>> {
    for x in xs {
        if !domain.contains(x)? {
            return Err(Error::OutsideDomain);
        }
    }
    let (_, env) = solve_extremal(domain, set, &params.solver)?;
    xs.iter()
        .map(|x| {
            let omega_est = env.field.interpolate(&x.to_real())?;
            let discs = optimize_discs(domain, set, x, &params.optimizer)?;
            let upper_ok = discs.omega_upper <= omega_est + params.upper_tol;
            let lower_ok = discs.omega_upper >= omega_est - params.lower_tol;
            Ok(Th21Report {
                x: x.clone(),
                omega_est,
                omega_upper: discs.omega_upper,
                upper_ok,
                lower_ok,
                pass: upper_ok && lower_ok,
                discs,
            })
        })
        .collect()
}

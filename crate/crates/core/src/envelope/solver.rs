use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{ComplexLine, GridSpec, NodeClass, DEFAULT_NODE_CAP, STENCIL_DIVISOR};
use super::linalg::{bicgstab, cg, LinearOperator};
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, SetExpr};

/// A sampled function on a grid. Exterior nodes hold `NaN` and are never read.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: Arc<GridSpec>,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Arc<GridSpec>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "field has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Constant on interior and boundary nodes.
    pub fn constant(grid: Arc<GridSpec>, c: f64) -> Self {
        let values = grid
            .classes()
            .iter()
            .map(|k| if *k == NodeClass::Exterior { f64::NAN } else { c })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Iterator over `(index, value)` of non-exterior nodes.
    pub fn live(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.class(*i) != NodeClass::Exterior)
            .map(|(i, v)| (i, *v))
    }

    /// Multilinear interpolation at a point given by real coordinates.
    /// Exterior corners count as boundary zeros.
    pub fn interpolate(&self, x: &[f64]) -> Result<f64> {
        let axes = self.grid.shape().len();
        if x.len() != axes {
            return Err(Error::DimensionMismatch {
                expected: axes / 2,
                found: x.len() / 2,
            });
        }
        let h = self.grid.h();
        let base: Vec<i64> = x.iter().map(|&c| (c / h).floor() as i64).collect();
        let frac: Vec<f64> = x.iter().zip(&base).map(|(&c, &k)| c / h - k as f64).collect();
        let mut acc = 0.0;
        for corner in 0..(1usize << axes) {
            let mut weight = 1.0;
            let mut idx = Vec::with_capacity(axes);
            for a in 0..axes {
                let bit = (corner >> a) & 1;
                weight *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                idx.push(base[a] + bit as i64);
            }
            if weight == 0.0 {
                continue;
            }
            let node = self.grid.index_of(&idx).ok_or(Error::OutsideDomain)?;
            let v = self.values[node];
            acc += weight * if v.is_nan() { 0.0 } else { v };
        }
        Ok(acc)
    }

    /// Largest absolute difference over non-exterior nodes.
    pub fn sup_distance(&self, other: &GridField) -> f64 {
        self.live()
            .map(|(i, v)| (v - other.values[i]).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Policy iteration (exact linear solves per policy) followed by
    /// monotone sweeps to certify the fixed point.
    #[default]
    Policy,
    /// Monotone two-phase sweeps from zero only.
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    /// Grid spacing; `None` picks 1/256 for n = 1 and 1/16 for n = 2.
    pub h: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub method: Method,
    pub node_cap: usize,
    pub directions: Option<Vec<ComplexLine>>,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            h: None,
            tol: 1e-8,
            max_iter: 200_000,
            method: Method::Policy,
            node_cap: DEFAULT_NODE_CAP,
            directions: None,
        }
    }
}

impl SolverParams {
    pub fn with_h(h: f64) -> Self {
        Self {
            h: Some(h),
            ..Self::default()
        }
    }

    pub fn h_for(&self, dim: usize) -> f64 {
        self.h.unwrap_or(if dim == 1 { 1.0 / 256.0 } else { 1.0 / 16.0 })
    }

    pub fn directions_for(&self, dim: usize) -> Vec<ComplexLine> {
        self.directions.clone().unwrap_or_else(|| ComplexLine::defaults(dim))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol must be positive"));
        }
        if let Some(h) = self.h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::invalid("grid h must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EnvelopeResult {
    pub field: GridField,
    pub converged: bool,
    /// Monotone sweeps performed.
    pub sweeps: usize,
    pub policy_iterations: usize,
    /// Sup-norm change of the last sweep.
    pub final_change: f64,
    pub directions: Vec<ComplexLine>,
    pub method: Method,
}

/// Obstacle `-chi_A` rasterised at the nodes: closed parts of `A` capture
/// nodes within `h/2`, open parts use strict membership.
pub fn build_obstacle(domain: &DomainSpec, set: &SetExpr, grid: &Arc<GridSpec>) -> Result<GridField> {
    set.validate()?;
    let d = set.dim()?;
    if d != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            found: d,
        });
    }
    let eps = 0.5 * grid.h();
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| match grid.class(i) {
            NodeClass::Exterior => f64::NAN,
            _ => {
                if set.contains_fattened(&grid.point(i), eps) {
                    -1.0
                } else {
                    0.0
                }
            }
        })
        .collect();
    GridField::new(Arc::clone(grid), values)
}

struct Stencils {
    /// Per direction: (flat offset, weight).
    taps: Vec<Vec<(isize, f64)>>,
}

impl Stencils {
    fn new(grid: &GridSpec, directions: &[ComplexLine]) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::invalid("at least one direction is required"));
        }
        let mut taps = Vec::with_capacity(directions.len());
        for d in directions {
            if d.0.len() != grid.dim() {
                return Err(Error::DimensionMismatch {
                    expected: grid.dim(),
                    found: d.0.len(),
                });
            }
            taps.push(
                d.stencil()?
                    .into_iter()
                    .map(|(off, w)| (grid.flat_offset(&off), w))
                    .collect(),
            );
        }
        Ok(Self { taps })
    }

    #[inline]
    fn mean(&self, d: usize, i: usize, v: &[f64]) -> f64 {
        self.taps[d]
            .iter()
            .map(|&(o, w)| w * v[(i as isize + o) as usize])
            .sum::<f64>()
            / STENCIL_DIVISOR
    }

    #[inline]
    fn min_mean(&self, i: usize, v: &[f64]) -> f64 {
        (0..self.taps.len())
            .map(|d| self.mean(d, i, v))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Largest discrete sub-mean-value minorant of the obstacle, zero on the
/// boundary nodes.
pub fn psh_envelope(obstacle: &GridField, directions: &[ComplexLine], params: &SolverParams) -> Result<EnvelopeResult> {
    params.validate()?;
    let grid = Arc::clone(obstacle.grid());
    for (i, g) in obstacle.live() {
        if g != 0.0 && g != -1.0 {
            return Err(Error::invalid(format!("obstacle value {g} at node {i} is not in {{-1, 0}}")));
        }
    }
    let stencils = Stencils::new(&grid, directions)?;
    let interior: Vec<usize> = (0..grid.len())
        .filter(|&i| grid.class(i) == NodeClass::Interior)
        .collect();
    let g = obstacle.values();
    let mut v: Vec<f64> = g.iter().map(|x| if x.is_nan() { f64::NAN } else { 0.0 }).collect();

    let mut policy_iterations = 0;
    if params.method == Method::Policy {
        policy_iterations = policy_iteration(&grid, &stencils, &interior, g, &mut v)?;
    }

    let phases: [Vec<usize>; 2] = {
        let (even, odd): (Vec<usize>, Vec<usize>) = interior.iter().partition(|&&i| grid.parity(i) == 0);
        [even, odd]
    };
    let mut sweeps = 0;
    let mut change = f64::INFINITY;
    while sweeps < params.max_iter {
        change = 0.0;
        for phase in &phases {
            let updates: Vec<f64> = phase
                .par_iter()
                .map(|&i| g[i].min(stencils.min_mean(i, &v)))
                .collect();
            for (&i, &u) in phase.iter().zip(&updates) {
                change = f64::max(change, (u - v[i]).abs());
                v[i] = u;
            }
        }
        sweeps += 1;
        if change < params.tol {
            break;
        }
    }
    let converged = change < params.tol;
    if !converged {
        log::warn!("envelope did not converge: last change {change:.3e} after {sweeps} sweeps");
    }
    Ok(EnvelopeResult {
        field: GridField::new(grid, v)?,
        converged,
        sweeps,
        policy_iterations,
        final_change: change,
        directions: directions.to_vec(),
        method: params.method,
    })
}

/// Linear system of one policy: unknown nodes satisfy `v = mean_d(v)`, all
/// other nodes are fixed (and held at zero inside the Krylov vectors).
struct PolicyOperator<'a> {
    kind: &'a [u8],
    stencils: &'a Stencils,
}

const FIXED: u8 = u8::MAX;

impl LinearOperator for PolicyOperator<'_> {
    fn len(&self) -> usize {
        self.kind.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.par_chunks_mut(4096).enumerate().for_each(|(c, chunk)| {
            let base = c * 4096;
            for (k, yi) in chunk.iter_mut().enumerate() {
                let i = base + k;
                let d = self.kind[i];
                *yi = if d == FIXED {
                    x[i]
                } else {
                    x[i] - self.stencils.mean(d as usize, i, x)
                };
            }
        });
    }
}

const MAX_POLICY_ITERATIONS: usize = 200;

/// Howard's policy iteration for `min(g - v, min_d (mean_d v - v)) = 0`.
/// Starting from the policy that is greedy at `v = 0`, the values decrease
/// monotonically.
fn policy_iteration(
    grid: &GridSpec,
    stencils: &Stencils,
    interior: &[usize],
    g: &[f64],
    v: &mut [f64],
) -> Result<usize> {
    let n = grid.len();
    // 0 = obstacle, 1 + d = direction d
    let mut policy = vec![0u8; n];
    for &i in interior {
        policy[i] = if g[i] < 0.0 { 0 } else { 1 };
    }
    let ndir = stencils.taps.len();
    let mut x = vec![0.0; n];
    let mut b = vec![0.0; n];
    let mut kind = vec![FIXED; n];
    for it in 1..=MAX_POLICY_ITERATIONS {
        // assemble
        kind.iter_mut().for_each(|k| *k = FIXED);
        let mut fixed = vec![0.0; n];
        let mut dirs_used = vec![false; ndir];
        for &i in interior {
            if policy[i] == 0 {
                fixed[i] = g[i];
            } else {
                kind[i] = policy[i] - 1;
                dirs_used[kind[i] as usize] = true;
            }
        }
        for i in 0..n {
            if kind[i] == FIXED {
                x[i] = 0.0;
                b[i] = 0.0;
            } else {
                x[i] = v[i];
                b[i] = stencils.mean(kind[i] as usize, i, &fixed);
            }
        }
        let op = PolicyOperator {
            kind: &kind,
            stencils,
        };
        let max_krylov = 20 * n.max(1000);
        let out = if dirs_used.iter().filter(|u| **u).count() <= 1 {
            cg(&op, &b, &mut x, 1e-13, max_krylov)
        } else {
            bicgstab(&op, &b, &mut x, 1e-13, max_krylov)
        };
        if !out.converged {
            log::warn!("policy solve stalled at relative residual {:.3e}", out.residual);
        }
        log::debug!("policy round {it}: {} Krylov iterations", out.iterations);
        for i in 0..n {
            if grid.class(i) == NodeClass::Exterior {
                continue;
            }
            v[i] = if kind[i] == FIXED { fixed[i] } else { x[i] };
        }
        // improve
        let changes: Vec<(usize, u8)> = interior
            .par_iter()
            .filter_map(|&i| {
                let current = if policy[i] == 0 {
                    g[i]
                } else {
                    stencils.mean(policy[i] as usize - 1, i, v)
                };
                let mut best = (g[i], 0u8);
                for d in 0..ndir {
                    let m = stencils.mean(d, i, v);
                    if m < best.0 {
                        best = (m, d as u8 + 1);
                    }
                }
                (current > best.0 + 1e-12).then_some((i, best.1))
            })
            .collect();
        if changes.is_empty() {
            return Ok(it);
        }
        for (i, p) in changes {
            policy[i] = p;
        }
    }
    log::warn!("policy iteration hit {MAX_POLICY_ITERATIONS} rounds");
    Ok(MAX_POLICY_ITERATIONS)
}

/// Grid stand-in for the upper semicontinuous regularisation: every
/// interior node takes the maximum over itself and its interior unit-box
/// neighbours (boundary nodes carry Dirichlet data, not values on `X`).
pub fn usc_regularize(field: &GridField) -> GridField {
    let grid = field.grid();
    let offsets = grid.box_offsets();
    let v = field.values();
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            if grid.class(i) != NodeClass::Interior {
                return v[i];
            }
            offsets
                .iter()
                .map(|&o| (i as isize + o) as usize)
                .filter(|&j| grid.class(j) == NodeClass::Interior)
                .map(|j| v[j])
                .fold(v[i], f64::max)
        })
        .collect();
    GridField {
        grid: Arc::clone(grid),
        values,
    }
}

/// Largest violation `v - mean_d(v)` over interior nodes and directions.
pub fn sub_mean_violation(field: &GridField, directions: &[ComplexLine]) -> Result<f64> {
    let grid = field.grid();
    let st = Stencils::new(grid, directions)?;
    let v = field.values();
    Ok((0..grid.len())
        .into_par_iter()
        .filter(|&i| grid.class(i) == NodeClass::Interior)
        .map(|i| {
            (0..st.taps.len())
                .map(|d| v[i] - st.mean(d, i, v))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max))
}

/// Discrete maximality gap `|v - min_d mean_d(v)|` at interior nodes where
/// neither the node nor any unit-box neighbour is an obstacle node.
pub fn maximality_gap(field: &GridField, obstacle: &GridField, directions: &[ComplexLine]) -> Result<f64> {
    let grid = field.grid();
    let st = Stencils::new(grid, directions)?;
    let offsets = grid.box_offsets();
    let v = field.values();
    let g = obstacle.values();
    Ok((0..grid.len())
        .into_par_iter()
        .filter(|&i| {
            grid.class(i) == NodeClass::Interior
                && g[i] == 0.0
                && offsets.iter().all(|&o| {
                    let j = (i as isize + o) as usize;
                    g[j].is_nan() || g[j] == 0.0 || grid.class(j) != NodeClass::Interior
                })
        })
        .map(|i| (v[i] - st.min_mean(i, v)).abs())
        .reduce(|| 0.0, f64::max))
}

/// Grid, obstacle and envelope for `omega(., A, X)`.
pub fn solve_extremal(domain: &DomainSpec, set: &SetExpr, params: &SolverParams) -> Result<(GridField, EnvelopeResult)> {
    params.validate()?;
    let grid = Arc::new(GridSpec::new(domain, params.h_for(domain.dim()), params.node_cap)?);
    let obstacle = build_obstacle(domain, set, &grid)?;
    let env = psh_envelope(&obstacle, &params.directions_for(domain.dim()), params)?;
    Ok((obstacle, env))
}

/// `omega(x, A, X)` by multilinear interpolation of the grid envelope.
pub fn omega_at(
    domain: &DomainSpec,
    set: &SetExpr,
    x: &crate::geometry::ComplexPoint,
    params: &SolverParams,
) -> Result<f64> {
    if !domain.contains(x)? {
        return Err(Error::OutsideDomain);
    }
    let (_, env) = solve_extremal(domain, set, params)?;
    env.field.interpolate(&x.to_real())
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::disc::{max_gauge, AnalyticDisc};
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, SetExpr};
use crate::numeric::fsum;

pub const DEFAULT_SAMPLES: usize = 4096;
/// Transition points are located to this accuracy (in turns) in exact mode.
pub const TRANSITION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMode {
    /// Fraction of `M` equispaced midpoint samples mapped into `A`.
    #[default]
    Sampled,
    /// Membership transitions between samples located by bisection.
    Exact,
}

/// `sigma(f^{-1}(A) on the circle)` for a disc that must be feasible in
/// `domain`.
pub fn sigma_f(f: &AnalyticDisc, domain: &DomainSpec, set: &SetExpr, m: usize, mode: SigmaMode) -> Result<f64> {
    let g = max_gauge(f, domain, m.max(super::disc::MIN_FEASIBILITY_SAMPLES));
    if !(g <= 1.0) {
        return Err(Error::InfeasibleDisc { margin: 1.0 - g });
    }
    sigma_unchecked(f, set, m, mode)
}

/// As [`sigma_f`] without the feasibility check.
pub fn sigma_unchecked(f: &AnalyticDisc, set: &SetExpr, m: usize, mode: SigmaMode) -> Result<f64> {
    let d = set.dim()?;
    if d != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: d,
        });
    }
    if m == 0 {
        return Err(Error::invalid("sample count must be positive"));
    }
    // a non-constant polynomial has finite fibres
    if let SetExpr::FinitePoints { points } = set {
        let hit = f.is_constant() && points.iter().any(|p| *p == f.center());
        return Ok(if hit { 1.0 } else { 0.0 });
    }
    if f.is_constant() {
        return Ok(if set.contains(f.center().coords()) { 1.0 } else { 0.0 });
    }
    let inside = |t: f64| set.contains(&f.boundary(t));
    Ok(match mode {
        SigmaMode::Sampled => {
            let hits = (0..m)
                .into_par_iter()
                .filter(|&k| inside((k as f64 + 0.5) / m as f64))
                .count();
            hits as f64 / m as f64
        }
        SigmaMode::Exact => exact_measure(&inside, m),
    })
}

/// Measure of `{t in [0, 1) : inside(t)}` assuming at most one transition
/// between neighbouring samples.
pub(crate) fn exact_measure<F: Fn(f64) -> bool + Sync>(inside: &F, m: usize) -> f64 {
    let flags: Vec<bool> = (0..m).into_par_iter().map(|k| inside(k as f64 / m as f64)).collect();
    exact_measure_flags(&flags, inside)
}

/// [`exact_measure`] given `flags[k] = inside(k / m)`.
pub(crate) fn exact_measure_flags<F: Fn(f64) -> bool + Sync>(flags: &[bool], inside: &F) -> f64 {
    let m = flags.len();
    if flags.iter().all(|&b| b) {
        return 1.0;
    }
    if flags.iter().all(|&b| !b) {
        return 0.0;
    }
    // transitions (position, entering) in increasing order
    let transitions: Vec<(f64, bool)> = (0..m)
        .filter_map(|k| {
            let a = flags[k];
            let b = flags[(k + 1) % m];
            (a != b).then(|| {
                let (mut lo, mut hi) = (k as f64 / m as f64, (k + 1) as f64 / m as f64);
                while hi - lo > TRANSITION_TOL {
                    let mid = 0.5 * (lo + hi);
                    if inside(mid) == a {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                (0.5 * (lo + hi), b)
            })
        })
        .collect();
    let first_enter = transitions.iter().position(|t| t.1).expect("mixed flags have an entry");
    let n = transitions.len();
    let mut pieces = Vec::with_capacity(n / 2 + 1);
    for s in 0..n {
        let (start, enter) = transitions[(first_enter + s) % n];
        if !enter {
            continue;
        }
        let (end, _) = transitions[(first_enter + s + 1) % n];
        pieces.push((end - start).rem_euclid(1.0));
    }
    fsum(pieces)
}

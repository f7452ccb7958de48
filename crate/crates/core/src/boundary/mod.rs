//! Boundary extremal functions on the unit disc.
//!
//! On the disc the Perron-Bremermann envelope of `-chi_U` is minus the
//! harmonic measure of `U`, which has a closed form per arc.

mod blaschke;
mod checks;

pub use blaschke::{blaschke_sigma_arcs, BlaschkeDisc};
pub use checks::{
    lemma49_witness, probe_ray, random_blaschke, verify_monotone_union, verify_th410, verify_th43,
    weak_regularity_probe, write_probe_csv, Lemma49Params, Lemma49Report, MonotoneUnionReport,
    ProbeParams, RayTrace, Th410Params, Th410Report, Th43Params, Th43Report, WeakRegularityReport,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArcSet, SetExpr, TAU};
use crate::numeric::fsum;

/// Finest enlargement used by [`omega_boundary`], in turns.
pub const MIN_ENLARGEMENT_EXP: u32 = 40;

/// Boundary set `U` together with its arc decomposition; the data is `-chi_U`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetExpr", into = "SetExpr")]
pub struct BoundaryData {
    set: SetExpr,
    #[serde(skip)]
    arcs: ArcSet,
}

impl TryFrom<SetExpr> for BoundaryData {
    type Error = Error;

    fn try_from(set: SetExpr) -> Result<Self> {
        Self::new(set)
    }
}

impl From<BoundaryData> for SetExpr {
    fn from(b: BoundaryData) -> Self {
        b.set
    }
}

impl BoundaryData {
    pub fn new(set: SetExpr) -> Result<Self> {
        let arcs = set.to_arcs()?;
        Ok(Self { set, arcs })
    }

    pub fn set(&self) -> &SetExpr {
        &self.set
    }

    pub fn arcs(&self) -> &ArcSet {
        &self.arcs
    }

    /// `u_{-chi_U, D}(z)`.
    pub fn envelope(&self, z: Complex64) -> Result<f64> {
        poisson_arcs(z, &self.arcs)
    }
}

/// Harmonic measure of the closed arc `[alpha, beta]` (radians, increasing)
/// at `z`: `psi / pi - (beta - alpha) / 2pi`, where `psi` is the angle under
/// which `z` sees the arc.
fn arc_harmonic_measure(z: Complex64, alpha: f64, beta: f64) -> f64 {
    let len = beta - alpha;
    if len <= 0.0 {
        return 0.0;
    }
    if len >= TAU {
        return 1.0;
    }
    let p = Complex64::from_polar(1.0, alpha) - z;
    let q = Complex64::from_polar(1.0, beta) - z;
    let w = q * p.conj();
    let psi = w.im.atan2(w.re).rem_euclid(TAU);
    (psi / std::f64::consts::PI - len / TAU).clamp(0.0, 1.0)
}

/// `-` harmonic measure of an arc set at `z`.
pub fn poisson_arcs(z: Complex64, arcs: &ArcSet) -> Result<f64> {
    if !(z.norm() < 1.0) {
        return Err(Error::OutsideDomain);
    }
    if z == Complex64::new(0.0, 0.0) {
        return Ok(-arcs.measure());
    }
    let h = fsum(
        arcs.intervals()
            .iter()
            .map(|&(s, e)| arc_harmonic_measure(z, s * TAU, e * TAU)),
    );
    Ok(-h.min(1.0))
}

/// Envelope of `-chi_U` on the unit disc, `U` any arc-algebra set.
pub fn poisson(z: Complex64, set: &SetExpr) -> Result<f64> {
    poisson_arcs(z, &set.to_arcs()?)
}

/// Enlargement limit defining `omega(z, A, D)` for compact `A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaBoundary {
    pub value: f64,
    /// Last two iterates apart.
    pub gap: f64,
    /// `(eps, poisson(z, A_eps))`, eps in turns.
    pub trace: Vec<(f64, f64)>,
}

/// `sup` over open neighbourhoods of `A`, realised as `poisson(z, A_eps)`
/// for `eps = 2^-1, ..., 2^-40` turns.
pub fn omega_boundary(set: &SetExpr, z: Complex64) -> Result<OmegaBoundary> {
    omega_boundary_arcs(&set.to_arcs()?, z)
}

pub fn omega_boundary_arcs(arcs: &ArcSet, z: Complex64) -> Result<OmegaBoundary> {
    let mut trace = Vec::with_capacity(MIN_ENLARGEMENT_EXP as usize);
    for j in 1..=MIN_ENLARGEMENT_EXP {
        let eps = (-(j as f64)).exp2();
        trace.push((eps, poisson_arcs(z, &arcs.enlarged(eps))?));
    }
    let n = trace.len();
    Ok(OmegaBoundary {
        value: trace[n - 1].1,
        gap: (trace[n - 1].1 - trace[n - 2].1).abs(),
        trace,
    })
}

/// `sigma_B(A)` for an arc-algebra set.
pub fn blaschke_sigma(b: &BlaschkeDisc, set: &SetExpr) -> Result<f64> {
    Ok(blaschke_sigma_arcs(b, &set.to_arcs()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn center_values() {
        assert_eq!(poisson(c(0.0, 0.0), &SetExpr::arc(0.0, PI)).unwrap(), -0.5);
        let v = poisson(c(0.0, 0.0), &SetExpr::cantor(8, 1.0 / 3.0)).unwrap();
        assert!((v + (2.0f64 / 3.0).powi(8)).abs() < 1e-14);
        assert!(poisson(c(1.0, 0.0), &SetExpr::arc(0.0, PI)).is_err());
    }

    #[test]
    fn off_center_matches_rotated_center_formula() {
        let full = poisson(c(0.3, -0.4), &SetExpr::arc(0.0, TAU)).unwrap();
        assert_eq!(full, -1.0);
        let a = poisson(c(0.5, 0.1), &SetExpr::arc(0.2, 1.0)).unwrap();
        let b = poisson(c(0.5, 0.1), &SetExpr::arc(1.0, 2.5)).unwrap();
        let ab = poisson(c(0.5, 0.1), &SetExpr::arc(0.2, 2.5)).unwrap();
        assert!((a + b - ab).abs() < 1e-14);
        let arc = SetExpr::arc(0.5, 2.0);
        let comp = SetExpr::not(arc.clone());
        let z = c(-0.2, 0.7);
        assert!((poisson(z, &arc).unwrap() + poisson(z, &comp).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn omega_boundary_examples() {
        let arc = omega_boundary(&SetExpr::arc(0.0, PI), c(0.0, 0.0)).unwrap();
        assert!((arc.value + 0.5).abs() < 1e-11);
        let pt = omega_boundary(&SetExpr::circle_points(&[0.3]), c(0.0, 0.0)).unwrap();
        assert!(pt.value.abs() < 1e-11);
        assert!(pt.trace.windows(2).all(|w| w[1].1 >= w[0].1));
    }

    #[test]
    fn boundary_data_rejects_interior_sets() {
        assert!(BoundaryData::new(SetExpr::closed_disc0(0.5)).is_err());
        let d = BoundaryData::new(SetExpr::arc(0.0, PI)).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<BoundaryData>(&s).unwrap(), d);
        assert_eq!(d.envelope(c(0.0, 0.0)).unwrap(), -0.5);
    }
}

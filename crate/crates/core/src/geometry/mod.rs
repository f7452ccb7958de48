//! Domains in C^n, symbolic Borel sets and measurable subsets of the torus.

mod arcs;
mod set;
mod torus;

pub use arcs::{ArcSet, TAU};
pub use set::{arc_measure, SetExpr, MAX_CANTOR_LEVEL};
pub use torus::{Rect, TorusSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of C^1 or C^2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexPoint {
    coords: Vec<Complex64>,
}

impl ComplexPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() || coords.len() > 2 {
            return Err(Error::invalid(format!(
                "points must have 1 or 2 coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("point has a non-finite coordinate"));
        }
        Ok(Self { coords })
    }

    pub fn one(z: Complex64) -> Self {
        Self { coords: vec![z] }
    }

    pub fn two(z: Complex64, w: Complex64) -> Self {
        Self { coords: vec![z, w] }
    }

    pub fn real(x: f64) -> Self {
        Self::one(Complex64::new(x, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    /// Coordinates as interleaved (re, im) pairs.
    pub fn to_real(&self) -> Vec<f64> {
        self.coords.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    pub fn from_real(xs: &[f64]) -> Self {
        Self {
            coords: xs
                .chunks_exact(2)
                .map(|p| Complex64::new(p[0], p[1]))
                .collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

impl From<Complex64> for ComplexPoint {
    fn from(z: Complex64) -> Self {
        Self::one(z)
    }
}

/// Bounded model domains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    UnitDisc,
    Disc { center: Complex64, radius: f64 },
    Annulus { r_in: f64, r_out: f64 },
    Polydisc { radii: Vec<f64> },
    UnitBall { n: usize },
}

impl DomainSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::UnitDisc => Ok(()),
            DomainSpec::Disc { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) || !center.re.is_finite() || !center.im.is_finite() {
                    return Err(Error::invalid("disc radius must be positive and finite"));
                }
                Ok(())
            }
            DomainSpec::Annulus { r_in, r_out } => {
                if !(*r_in > 0.0 && r_in < r_out && r_out.is_finite()) {
                    return Err(Error::invalid("annulus needs 0 < r_in < r_out < inf"));
                }
                Ok(())
            }
            DomainSpec::Polydisc { radii } => {
                if radii.is_empty() || radii.len() > 2 {
                    return Err(Error::invalid("polydisc dimension must be 1 or 2"));
                }
                if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
                    return Err(Error::invalid("polydisc radii must be positive"));
                }
                Ok(())
            }
            DomainSpec::UnitBall { n } => {
                if !(1..=2).contains(n) {
                    return Err(Error::invalid("unit ball dimension must be 1 or 2"));
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::UnitDisc | DomainSpec::Disc { .. } | DomainSpec::Annulus { .. } => 1,
            DomainSpec::Polydisc { radii } => radii.len(),
            DomainSpec::UnitBall { n } => *n,
        }
    }

    /// Gauge of the domain at a point: strictly below 1 exactly on the domain.
    pub fn gauge(&self, p: &[Complex64]) -> f64 {
        match self {
            DomainSpec::UnitDisc => p[0].norm(),
            DomainSpec::Disc { center, radius } => (p[0] - center).norm() / radius,
            DomainSpec::Annulus { r_in, r_out } => {
                let r = p[0].norm();
                if r == 0.0 {
                    f64::INFINITY
                } else {
                    (r / r_out).max(r_in / r)
                }
            }
            DomainSpec::Polydisc { radii } => p
                .iter()
                .zip(radii)
                .map(|(z, r)| z.norm() / r)
                .fold(0.0, f64::max),
            DomainSpec::UnitBall { .. } => p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        }
    }

    pub fn contains(&self, p: &ComplexPoint) -> Result<bool> {
        p.check_dim(self.dim())?;
        Ok(self.gauge(p.coords()) < 1.0)
    }

    /// Axis-aligned bounding box, one `(lo, hi)` pair per real axis.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        match self {
            DomainSpec::UnitDisc => vec![(-1.0, 1.0); 2],
            DomainSpec::Disc { center, radius } => vec![
                (center.re - radius, center.re + radius),
                (center.im - radius, center.im + radius),
            ],
            DomainSpec::Annulus { r_out, .. } => vec![(-r_out, *r_out); 2],
            DomainSpec::Polydisc { radii } => radii.iter().flat_map(|r| [(-r, *r), (-r, *r)]).collect(),
            DomainSpec::UnitBall { n } => vec![(-1.0, 1.0); 2 * n],
        }
    }

    /// Copy of the domain dilated about the origin by `factor`.
    pub fn scaled(&self, factor: f64) -> DomainSpec {
        match self {
            DomainSpec::UnitDisc => DomainSpec::Disc {
                center: Complex64::new(0.0, 0.0),
                radius: factor,
            },
            DomainSpec::Disc { center, radius } => DomainSpec::Disc {
                center: center * factor,
                radius: radius * factor,
            },
            DomainSpec::Annulus { r_in, r_out } => DomainSpec::Annulus {
                r_in: r_in * factor,
                r_out: r_out * factor,
            },
            DomainSpec::Polydisc { radii } => DomainSpec::Polydisc {
                radii: radii.iter().map(|r| r * factor).collect(),
            },
            DomainSpec::UnitBall { n } => {
                if *n == 1 {
                    DomainSpec::Disc {
                        center: Complex64::new(0.0, 0.0),
                        radius: factor,
                    }
                } else {
                    // no scaled ball variant; the polydisc of the same radius contains it
                    DomainSpec::Polydisc {
                        radii: vec![factor; *n],
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gauges() {
        assert!(DomainSpec::UnitDisc.contains(&ComplexPoint::real(0.99)).unwrap());
        assert!(!DomainSpec::UnitDisc.contains(&ComplexPoint::real(1.0)).unwrap());
        let ann = DomainSpec::Annulus { r_in: 0.5, r_out: 1.0 };
        assert!(!ann.contains(&ComplexPoint::real(0.25)).unwrap());
        assert!(ann.contains(&ComplexPoint::real(0.75)).unwrap());
        let ball = DomainSpec::UnitBall { n: 2 };
        assert!(ball.contains(&ComplexPoint::two(c(0.5, 0.0), c(0.0, 0.5))).unwrap());
        assert!(!ball.contains(&ComplexPoint::two(c(0.8, 0.0), c(0.0, 0.8))).unwrap());
        let poly = DomainSpec::Polydisc { radii: vec![1.0, 2.0] };
        assert!(poly.contains(&ComplexPoint::two(c(0.8, 0.0), c(0.0, 1.8))).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = DomainSpec::UnitDisc
            .contains(&ComplexPoint::two(c(0.0, 0.0), c(0.0, 0.0)))
            .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 1, found: 2 }));
    }

    #[test]
    fn invalid_domains_rejected() {
        assert!(DomainSpec::Annulus { r_in: 1.0, r_out: 0.5 }.validate().is_err());
        assert!(DomainSpec::Polydisc { radii: vec![1.0, -1.0] }.validate().is_err());
        assert!(DomainSpec::UnitBall { n: 3 }.validate().is_err());
        assert!(ComplexPoint::new(vec![c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn domain_serde_is_tagged() {
        let d = DomainSpec::Polydisc { radii: vec![1.0, 1.0] };
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"kind":"polydisc","radii":[1.0,1.0]}"#);
        assert_eq!(serde_json::from_str::<DomainSpec>(&s).unwrap(), d);
    }
}

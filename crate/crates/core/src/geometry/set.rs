use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::arcs::{cantor_contains, turn_of, ArcSet, TAU};
use super::ComplexPoint;
use crate::error::{Error, Result};

/// Deepest Cantor iterate we are willing to store.
pub const MAX_CANTOR_LEVEL: u32 = 20;

/// Symbolic Borel set built from primitives with exact membership.
///
/// Disc and box primitives live in one complex coordinate; arc-type
/// primitives (`Arc`, `CantorIterate`, points of modulus one) are subsets of
/// the unit circle of that coordinate. `Product` stacks coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SetExpr {
    Empty { dim: usize },
    ClosedDisc { center: Complex64, radius: f64 },
    OpenDisc { center: Complex64, radius: f64 },
    /// Closed rectangle with opposite corners `lo` and `hi`.
    Box { lo: Complex64, hi: Complex64 },
    /// Closed arc `{e^{it} : start <= t <= end}`, radians.
    Arc { start: f64, end: f64 },
    CantorIterate { level: u32, ratio: f64 },
    FinitePoints { points: Vec<ComplexPoint> },
    Product { left: Box<SetExpr>, right: Box<SetExpr> },
    Union { sets: Vec<SetExpr> },
    Intersection { sets: Vec<SetExpr> },
    Complement { set: Box<SetExpr> },
}

/// Circle points produced by `exp(i t)` have modulus one only up to rounding.
const CIRCLE_SLACK: f64 = 8.0 * f64::EPSILON;

impl SetExpr {
    pub fn closed_disc(center: Complex64, radius: f64) -> Self {
        SetExpr::ClosedDisc { center, radius }
    }

    pub fn closed_disc0(radius: f64) -> Self {
        SetExpr::ClosedDisc {
            center: Complex64::new(0.0, 0.0),
            radius,
        }
    }

    pub fn open_disc0(radius: f64) -> Self {
        SetExpr::OpenDisc {
            center: Complex64::new(0.0, 0.0),
            radius,
        }
    }

    pub fn arc(start: f64, end: f64) -> Self {
        SetExpr::Arc { start, end }
    }

    pub fn cantor(level: u32, ratio: f64) -> Self {
        SetExpr::CantorIterate { level, ratio }
    }

    pub fn empty(dim: usize) -> Self {
        SetExpr::Empty { dim }
    }

    /// Everything in C^dim.
    pub fn everything(dim: usize) -> Self {
        SetExpr::Complement {
            set: Box::new(SetExpr::Empty { dim }),
        }
    }

    pub fn product(left: SetExpr, right: SetExpr) -> Self {
        SetExpr::Product {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn union(sets: Vec<SetExpr>) -> Self {
        SetExpr::Union { sets }
    }

    pub fn intersection(sets: Vec<SetExpr>) -> Self {
        SetExpr::Intersection { sets }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(set: SetExpr) -> Self {
        SetExpr::Complement { set: Box::new(set) }
    }

    /// Points on the unit circle at the given angles (radians).
    pub fn circle_points(angles: &[f64]) -> Self {
        SetExpr::FinitePoints {
            points: angles
                .iter()
                .map(|t| ComplexPoint::one(Complex64::from_polar(1.0, *t)))
                .collect(),
        }
    }

    pub fn dim(&self) -> Result<usize> {
        match self {
            SetExpr::Empty { dim } => Ok(*dim),
            SetExpr::ClosedDisc { .. }
            | SetExpr::OpenDisc { .. }
            | SetExpr::Box { .. }
            | SetExpr::Arc { .. }
            | SetExpr::CantorIterate { .. } => Ok(1),
            SetExpr::FinitePoints { points } => match points.first() {
                None => Ok(1),
                Some(p) => {
                    let d = p.dim();
                    for q in points {
                        q.check_dim(d)?;
                    }
                    Ok(d)
                }
            },
            SetExpr::Product { left, right } => Ok(left.dim()? + right.dim()?),
            SetExpr::Union { sets } | SetExpr::Intersection { sets } => {
                let first = sets
                    .first()
                    .ok_or_else(|| Error::invalid("union/intersection needs at least one operand"))?
                    .dim()?;
                for s in &sets[1..] {
                    let d = s.dim()?;
                    if d != first {
                        return Err(Error::DimensionMismatch {
                            expected: first,
                            found: d,
                        });
                    }
                }
                Ok(first)
            }
            SetExpr::Complement { set } => set.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SetExpr::Empty { dim } if !(1..=2).contains(dim) => {
                Err(Error::invalid("empty set dimension must be 1 or 2"))
            }
            SetExpr::ClosedDisc { radius, .. } | SetExpr::OpenDisc { radius, .. }
                if !(radius.is_finite() && *radius > 0.0) =>
            {
                Err(Error::invalid("disc radius must be positive"))
            }
            SetExpr::Box { lo, hi } if !(lo.re <= hi.re && lo.im <= hi.im) => {
                Err(Error::invalid("box corners must satisfy lo <= hi"))
            }
            SetExpr::Arc { start, end } if !(0.0 <= *start && start < end && *end <= TAU) => {
                Err(Error::invalid(format!(
                    "arc needs 0 <= start < end <= 2pi, got [{start}, {end}]"
                )))
            }
            SetExpr::CantorIterate { level, ratio } => {
                if *level > MAX_CANTOR_LEVEL {
                    return Err(Error::invalid(format!(
                        "cantor level {level} exceeds {MAX_CANTOR_LEVEL}"
                    )));
                }
                if !(*ratio > 0.0 && *ratio < 1.0) {
                    return Err(Error::invalid("cantor ratio must lie in (0, 1)"));
                }
                Ok(())
            }
            SetExpr::Product { left, right } => {
                left.validate()?;
                right.validate()?;
                self.dim().map(|_| ())
            }
            SetExpr::Union { sets } | SetExpr::Intersection { sets } => {
                for s in sets {
                    s.validate()?;
                }
                self.dim().map(|_| ())
            }
            SetExpr::Complement { set } => set.validate(),
            _ => self.dim().map(|_| ()),
        }
    }

    /// Exact membership.
    pub fn member(&self, p: &ComplexPoint) -> Result<bool> {
        p.check_dim(self.dim()?)?;
        Ok(self.contains(p.coords()))
    }

    /// Membership without the dimension check; `p` must have `self.dim()`
    /// coordinates.
    pub fn contains(&self, p: &[Complex64]) -> bool {
        match self {
            SetExpr::Empty { .. } => false,
            SetExpr::ClosedDisc { center, radius } => (p[0] - center).norm() <= *radius,
            SetExpr::OpenDisc { center, radius } => (p[0] - center).norm() < *radius,
            SetExpr::Box { lo, hi } => {
                lo.re <= p[0].re && p[0].re <= hi.re && lo.im <= p[0].im && p[0].im <= hi.im
            }
            SetExpr::Arc { start, end } => {
                on_circle(p[0]) && {
                    let t = turn_of(p[0]) * TAU;
                    (*start <= t && t <= *end) || (t == 0.0 && *end == TAU)
                }
            }
            SetExpr::CantorIterate { level, ratio } => {
                on_circle(p[0]) && {
                    let t = turn_of(p[0]);
                    cantor_contains(*level, *ratio, t) || (t == 0.0 && cantor_contains(*level, *ratio, 1.0))
                }
            }
            SetExpr::FinitePoints { points } => points.iter().any(|q| q.coords() == p),
            SetExpr::Product { left, right } => {
                let k = left.dim().unwrap_or(1);
                left.contains(&p[..k]) && right.contains(&p[k..])
            }
            SetExpr::Union { sets } => sets.iter().any(|s| s.contains(p)),
            SetExpr::Intersection { sets } => sets.iter().all(|s| s.contains(p)),
            SetExpr::Complement { set } => !set.contains(p),
        }
    }

    /// Membership of the circle point at angle `turn` (in turns) for sets in
    /// one coordinate.
    pub fn contains_turn(&self, turn: f64) -> bool {
        match self {
            SetExpr::Arc { start, end } => {
                let t = turn * TAU;
                (*start <= t && t <= *end) || (turn == 0.0 && *end == TAU)
            }
            SetExpr::CantorIterate { level, ratio } => {
                cantor_contains(*level, *ratio, turn) || (turn == 0.0 && cantor_contains(*level, *ratio, 1.0))
            }
            SetExpr::Union { sets } => sets.iter().any(|s| s.contains_turn(turn)),
            SetExpr::Intersection { sets } => sets.iter().all(|s| s.contains_turn(turn)),
            SetExpr::Complement { set } => !set.contains_turn(turn),
            _ => self.contains(&[Complex64::from_polar(1.0, turn * TAU)]),
        }
    }

    /// Euclidean distance from `p` to the set, for trees built only from
    /// closed primitives, unions and products. `None` elsewhere.
    pub fn distance(&self, p: &[Complex64]) -> Option<f64> {
        match self {
            SetExpr::Empty { .. } => Some(f64::INFINITY),
            SetExpr::ClosedDisc { center, radius } => Some(((p[0] - center).norm() - radius).max(0.0)),
            SetExpr::Box { lo, hi } => {
                let dx = (lo.re - p[0].re).max(p[0].re - hi.re).max(0.0);
                let dy = (lo.im - p[0].im).max(p[0].im - hi.im).max(0.0);
                Some(dx.hypot(dy))
            }
            SetExpr::FinitePoints { points } => Some(
                points
                    .iter()
                    .map(|q| {
                        q.coords()
                            .iter()
                            .zip(p)
                            .map(|(a, b)| (a - b).norm_sqr())
                            .sum::<f64>()
                            .sqrt()
                    })
                    .fold(f64::INFINITY, f64::min),
            ),
            SetExpr::Product { left, right } => {
                let k = left.dim().ok()?;
                let a = left.distance(&p[..k])?;
                let b = right.distance(&p[k..])?;
                Some(a.hypot(b))
            }
            SetExpr::Union { sets } => sets
                .iter()
                .map(|s| s.distance(p))
                .try_fold(f64::INFINITY, |acc, d| d.map(|d| acc.min(d))),
            _ => None,
        }
    }

    /// Rasterisation predicate: closed parts capture points within `eps`,
    /// open parts use exact membership.
    pub fn contains_fattened(&self, p: &[Complex64], eps: f64) -> bool {
        if let Some(d) = self.distance(p) {
            return d <= eps;
        }
        match self {
            SetExpr::Product { left, right } => {
                let k = left.dim().unwrap_or(1);
                left.contains_fattened(&p[..k], eps) && right.contains_fattened(&p[k..], eps)
            }
            SetExpr::Union { sets } => sets.iter().any(|s| s.contains_fattened(p, eps)),
            SetExpr::Intersection { sets } => sets.iter().all(|s| s.contains_fattened(p, eps)),
            _ => self.contains(p),
        }
    }

    /// The set as a union of circle arcs, if it is an element of the arc
    /// algebra.
    pub fn to_arcs(&self) -> Result<ArcSet> {
        match self {
            SetExpr::Empty { dim: 1 } => Ok(ArcSet::empty()),
            SetExpr::Arc { start, end } => {
                self.validate()?;
                Ok(ArcSet::from_radians(*start, *end))
            }
            SetExpr::CantorIterate { level, ratio } => {
                self.validate()?;
                Ok(ArcSet::cantor(*level, *ratio))
            }
            SetExpr::FinitePoints { points } => {
                let mut out = Vec::with_capacity(points.len());
                for q in points {
                    q.check_dim(1)?;
                    let z = q.coords()[0];
                    if !on_circle(z) {
                        return Err(Error::NotArcAlgebra(format!("point {z} is not on the unit circle")));
                    }
                    let t = turn_of(z);
                    out.push((t, t));
                }
                Ok(ArcSet::from_intervals(out))
            }
            SetExpr::Union { sets } => sets
                .iter()
                .try_fold(ArcSet::empty(), |acc, s| Ok(acc.union(&s.to_arcs()?))),
            SetExpr::Intersection { sets } => {
                let mut it = sets.iter();
                let first = it
                    .next()
                    .ok_or_else(|| Error::invalid("intersection needs at least one operand"))?
                    .to_arcs()?;
                it.try_fold(first, |acc, s| Ok(acc.intersection(&s.to_arcs()?)))
            }
            SetExpr::Complement { set } => Ok(set.to_arcs()?.complement()),
            other => Err(Error::NotArcAlgebra(other.kind().to_string())),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SetExpr::Empty { .. } => "empty",
            SetExpr::ClosedDisc { .. } => "closed_disc",
            SetExpr::OpenDisc { .. } => "open_disc",
            SetExpr::Box { .. } => "box",
            SetExpr::Arc { .. } => "arc",
            SetExpr::CantorIterate { .. } => "cantor_iterate",
            SetExpr::FinitePoints { .. } => "finite_points",
            SetExpr::Product { .. } => "product",
            SetExpr::Union { .. } => "union",
            SetExpr::Intersection { .. } => "intersection",
            SetExpr::Complement { .. } => "complement",
        }
    }
}

/// Normalised arc length of a boundary set.
pub fn arc_measure(set: &SetExpr) -> Result<f64> {
    Ok(set.to_arcs()?.measure())
}

fn on_circle(z: Complex64) -> bool {
    (z.norm() - 1.0).abs() <= CIRCLE_SLACK
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn pt(x: f64) -> ComplexPoint {
        ComplexPoint::real(x)
    }

    #[test]
    fn disc_membership() {
        assert!(SetExpr::closed_disc0(0.5).member(&pt(0.3)).unwrap());
        assert!(SetExpr::closed_disc0(0.5).member(&pt(0.5)).unwrap());
        assert!(!SetExpr::open_disc0(0.5).member(&pt(0.5)).unwrap());
        assert!(!SetExpr::not(SetExpr::open_disc0(0.5)).member(&pt(0.3)).unwrap());
    }

    #[test]
    fn product_membership_and_dim() {
        let a = SetExpr::product(SetExpr::closed_disc0(0.5), SetExpr::closed_disc0(0.5));
        assert_eq!(a.dim().unwrap(), 2);
        let z = Complex64::new(0.3, 0.0);
        let w = Complex64::new(0.7, 0.0);
        assert!(a.member(&ComplexPoint::two(z, z)).unwrap());
        assert!(!a.member(&ComplexPoint::two(z, w)).unwrap());
        assert!(matches!(
            a.member(&pt(0.1)),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn arc_measures() {
        assert_eq!(arc_measure(&SetExpr::arc(0.0, PI)).unwrap(), 0.5);
        let c1 = arc_measure(&SetExpr::cantor(1, 1.0 / 3.0)).unwrap();
        assert!((c1 - 2.0 / 3.0).abs() < 1e-15);
        let u = SetExpr::union(vec![SetExpr::arc(0.0, PI / 2.0), SetExpr::arc(PI, 3.0 * PI / 2.0)]);
        assert_eq!(arc_measure(&u).unwrap(), 0.5);
        assert_eq!(arc_measure(&SetExpr::circle_points(&[0.3, 1.0])).unwrap(), 0.0);
        assert!(matches!(
            arc_measure(&SetExpr::closed_disc0(0.5)),
            Err(Error::NotArcAlgebra(_))
        ));
    }

    #[test]
    fn cantor_iterate_measure_is_power() {
        for m in 1..=12 {
            let v = arc_measure(&SetExpr::cantor(m, 1.0 / 3.0)).unwrap();
            assert!((v - (2.0f64 / 3.0).powi(m as i32)).abs() < 1e-13);
        }
    }

    #[test]
    fn arc_membership_on_circle() {
        let a = SetExpr::arc(0.0, PI);
        assert!(a.member(&ComplexPoint::one(Complex64::from_polar(1.0, 1.0))).unwrap());
        assert!(!a.member(&ComplexPoint::one(Complex64::from_polar(1.0, 4.0))).unwrap());
        assert!(!a.member(&ComplexPoint::one(Complex64::from_polar(0.5, 1.0))).unwrap());
        assert!(SetExpr::arc(PI, TAU).contains_turn(0.0));
        assert!(SetExpr::cantor(3, 1.0 / 3.0).contains_turn(0.0));
    }

    #[test]
    fn validation() {
        assert!(SetExpr::arc(1.0, 0.5).validate().is_err());
        assert!(SetExpr::arc(0.0, 7.0).validate().is_err());
        assert!(SetExpr::cantor(21, 1.0 / 3.0).validate().is_err());
        assert!(SetExpr::union(vec![]).validate().is_err());
        let mixed = SetExpr::union(vec![
            SetExpr::closed_disc0(0.5),
            SetExpr::product(SetExpr::closed_disc0(0.5), SetExpr::closed_disc0(0.5)),
        ]);
        assert!(matches!(mixed.validate(), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn fattening_captures_nearby_nodes_of_closed_sets_only() {
        let z = [Complex64::new(0.51, 0.0)];
        assert!(SetExpr::closed_disc0(0.5).contains_fattened(&z, 0.02));
        assert!(!SetExpr::open_disc0(0.5).contains_fattened(&z, 0.02));
        let prod = SetExpr::product(SetExpr::closed_disc0(0.5), SetExpr::closed_disc0(0.5));
        let p = [Complex64::new(0.51, 0.0), Complex64::new(0.51, 0.0)];
        assert!(prod.contains_fattened(&p, 0.015));
        assert!(!prod.contains_fattened(&p, 0.014));
    }

    #[test]
    fn serde_roundtrip() {
        let s = SetExpr::union(vec![
            SetExpr::arc(0.0, 1.0),
            SetExpr::not(SetExpr::cantor(3, 0.5)),
            SetExpr::product(SetExpr::closed_disc0(0.5), SetExpr::open_disc0(0.25)),
        ]);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<SetExpr>(&j).unwrap(), s);
    }

    fn leaf() -> impl Strategy<Value = SetExpr> {
        prop_oneof![
            (-0.5f64..0.5, -0.5f64..0.5, 0.05f64..0.8).prop_map(|(x, y, r)| SetExpr::ClosedDisc {
                center: Complex64::new(x, y),
                radius: r
            }),
            (-0.5f64..0.5, -0.5f64..0.5, 0.05f64..0.8).prop_map(|(x, y, r)| SetExpr::OpenDisc {
                center: Complex64::new(x, y),
                radius: r
            }),
            (-0.9f64..0.0, -0.9f64..0.0, 0.1f64..1.0, 0.1f64..1.0).prop_map(|(x, y, w, h)| SetExpr::Box {
                lo: Complex64::new(x, y),
                hi: Complex64::new(x + w, y + h)
            }),
        ]
    }

    fn tree() -> impl Strategy<Value = SetExpr> {
        leaf().prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 1..3).prop_map(SetExpr::union),
                prop::collection::vec(inner.clone(), 1..3).prop_map(SetExpr::intersection),
                inner.prop_map(SetExpr::not),
            ]
        })
    }

    proptest! {
        #[test]
        fn de_morgan(a in tree(), b in tree(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
            let p = [Complex64::new(x, y)];
            let lhs = SetExpr::not(SetExpr::union(vec![a.clone(), b.clone()]));
            let rhs = SetExpr::intersection(vec![SetExpr::not(a.clone()), SetExpr::not(b.clone())]);
            prop_assert_eq!(lhs.contains(&p), rhs.contains(&p));
            let lhs = SetExpr::not(SetExpr::intersection(vec![a.clone(), b.clone()]));
            let rhs = SetExpr::union(vec![SetExpr::not(a), SetExpr::not(b)]);
            prop_assert_eq!(lhs.contains(&p), rhs.contains(&p));
        }
    }
}

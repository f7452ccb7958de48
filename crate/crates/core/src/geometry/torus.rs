use serde::{Deserialize, Serialize};

use super::arcs::{ArcSet, TAU};
use crate::error::{Error, Result};
use crate::numeric::fsum;

/// Rectangle `I x J` on the torus; both sides are intervals of `[0, 1]` in
/// turns, `I` in the first coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub i: (f64, f64),
    pub j: (f64, f64),
}

impl Rect {
    pub fn new(i: (f64, f64), j: (f64, f64)) -> Result<Self> {
        for (lo, hi) in [i, j] {
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(Error::invalid(format!("rectangle side [{lo}, {hi}] is not inside [0, 1]")));
            }
        }
        Ok(Self { i, j })
    }

    /// Sides given as arcs in radians.
    pub fn from_radians(i: (f64, f64), j: (f64, f64)) -> Result<Self> {
        Self::new((i.0 / TAU, i.1 / TAU), (j.0 / TAU, j.1 / TAU))
    }

    pub fn area(&self) -> f64 {
        (self.i.1 - self.i.0) * (self.j.1 - self.j.0)
    }
}

/// Finite union of rectangles on the torus, normalised to pairwise disjoint
/// pieces on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Rect>", into = "Vec<Rect>")]
pub struct TorusSet {
    rects: Vec<Rect>,
}

impl TryFrom<Vec<Rect>> for TorusSet {
    type Error = Error;

    fn try_from(v: Vec<Rect>) -> Result<Self> {
        for r in &v {
            Rect::new(r.i, r.j)?;
        }
        Ok(TorusSet::new(v))
    }
}

impl From<TorusSet> for Vec<Rect> {
    fn from(t: TorusSet) -> Self {
        t.rects
    }
}

impl TorusSet {
    pub fn empty() -> Self {
        Self { rects: Vec::new() }
    }

    /// Normalises overlapping rectangles into disjoint cells of the grid
    /// spanned by all side endpoints, merged along the second coordinate.
    pub fn new(raw: Vec<Rect>) -> Self {
        let raw: Vec<Rect> = raw.into_iter().filter(|r| r.area() > 0.0).collect();
        if raw.len() <= 1 {
            return Self { rects: raw };
        }
        let xs = breakpoints(raw.iter().flat_map(|r| [r.i.0, r.i.1]));
        let ys = breakpoints(raw.iter().flat_map(|r| [r.j.0, r.j.1]));
        let mut rects = Vec::new();
        for xw in xs.windows(2) {
            let xm = 0.5 * (xw[0] + xw[1]);
            let mut open: Option<(f64, f64)> = None;
            for yw in ys.windows(2) {
                let ym = 0.5 * (yw[0] + yw[1]);
                let covered = raw
                    .iter()
                    .any(|r| r.i.0 <= xm && xm <= r.i.1 && r.j.0 <= ym && ym <= r.j.1);
                match (covered, open.as_mut()) {
                    (true, Some(run)) => run.1 = yw[1],
                    (true, None) => open = Some((yw[0], yw[1])),
                    (false, Some(_)) => {
                        rects.push(Rect {
                            i: (xw[0], xw[1]),
                            j: open.take().unwrap(),
                        });
                    }
                    (false, None) => {}
                }
            }
            if let Some(run) = open {
                rects.push(Rect {
                    i: (xw[0], xw[1]),
                    j: run,
                });
            }
        }
        Self { rects }
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    /// Product measure of the set.
    pub fn measure(&self) -> f64 {
        fsum(self.rects.iter().map(Rect::area))
    }

    /// Image under `(z, w) -> (w, z)`.
    pub fn swapped(&self) -> TorusSet {
        TorusSet::new(self.rects.iter().map(|r| Rect { i: r.j, j: r.i }).collect())
    }

    /// `{t : (phase + m t mod 1, t) in C}` computed by cutting each second
    /// side into the sub-arcs on which the first condition holds.
    pub fn diagonal_slice(&self, phase: f64, m: u32) -> ArcSet {
        let m = m.max(1) as f64;
        let mut out = Vec::new();
        for r in &self.rects {
            let (a, b) = r.i;
            let (c, d) = r.j;
            let n_lo = (phase + m * c - b).floor() as i64;
            let n_hi = (phase + m * d - a).ceil() as i64;
            for n in n_lo..=n_hi {
                let lo = ((a + n as f64 - phase) / m).max(c);
                let hi = ((b + n as f64 - phase) / m).min(d);
                if lo < hi {
                    out.push((lo, hi));
                }
            }
        }
        ArcSet::from_intervals(out)
    }

    /// First-coordinate fibre of `{(s, t) : (s + shear t mod 1, t) in C}`
    /// over `t`.
    pub fn sheared_fibre(&self, shear: u32, t: f64) -> ArcSet {
        self.rects
            .iter()
            .filter(|r| r.j.0 <= t && t <= r.j.1)
            .fold(ArcSet::empty(), |acc, r| {
                let side = ArcSet::from_intervals(vec![r.i]);
                acc.union(&side.rotated(-(shear as f64) * t))
            })
    }

    /// Measure of the preimage of `C` under `(z, w) -> (z w^shear, w)`,
    /// integrating fibre measures over the cells between second-side
    /// endpoints (fibres are constant on each cell).
    pub fn sheared_measure(&self, shear: u32) -> f64 {
        let ys = breakpoints(self.rects.iter().flat_map(|r| [r.j.0, r.j.1]));
        fsum(ys.windows(2).map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            self.sheared_fibre(shear, mid).measure() * (w[1] - w[0])
        }))
    }
}

fn breakpoints(it: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = it.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ComplexPoint, DomainSpec, TAU};

/// Complex number stored as an `[re, im]` pair so JSON stays readable and
/// round-trips bit-exactly.
mod pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<Complex64>], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<Vec<[f64; 2]>> = v.iter().map(|c| c.iter().map(|z| [z.re, z.im]).collect()).collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Complex64>>, D::Error> {
        let raw: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|c| c.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .collect())
    }
}

/// Polynomial disc `f: D -> C^n`, one coefficient list per coordinate,
/// all padded to the same degree. `f(0)` is the list of constant terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticDisc {
    #[serde(with = "pairs")]
    coeffs: Vec<Vec<Complex64>>,
}

impl AnalyticDisc {
    pub fn new(mut coeffs: Vec<Vec<Complex64>>) -> Result<Self> {
        if !(1..=2).contains(&coeffs.len()) {
            return Err(Error::invalid("a disc needs one or two coordinates"));
        }
        let len = coeffs.iter().map(Vec::len).max().unwrap_or(0).max(1);
        for c in &mut coeffs {
            if c.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::invalid("disc coefficients must be finite"));
            }
            c.resize(len, Complex64::new(0.0, 0.0));
        }
        Ok(Self { coeffs })
    }

    /// Constant disc at `x`.
    pub fn constant(x: &ComplexPoint) -> Self {
        Self {
            coeffs: x.coords().iter().map(|z| vec![*z]).collect(),
        }
    }

    /// One-variable disc from its coefficients.
    pub fn univariate(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::new(vec![coeffs])
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn degree(&self) -> usize {
        self.coeffs[0].len() - 1
    }

    pub fn coeffs(&self) -> &[Vec<Complex64>] {
        &self.coeffs
    }

    pub fn center(&self) -> ComplexPoint {
        ComplexPoint::new(self.coeffs.iter().map(|c| c[0]).collect()).expect("coefficients are finite")
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|c| c[1..].iter().all(|z| *z == Complex64::new(0.0, 0.0)))
    }

    /// Horner evaluation per coordinate.
    pub fn eval(&self, z: Complex64) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| horner(c, z)).collect()
    }

    /// Boundary value at angle `turn` (in turns).
    pub fn boundary(&self, turn: f64) -> Vec<Complex64> {
        self.eval(Complex64::from_polar(1.0, turn * TAU))
    }

    /// Copy with every non-constant coefficient multiplied by `s`.
    pub fn shrunk(&self, s: f64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| c.iter().enumerate().map(|(k, z)| if k == 0 { *z } else { z * s }).collect())
                .collect(),
        }
    }
}

pub(crate) fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
}

/// `f(z)` with `|z| <= 1`.
pub fn eval_disc(f: &AnalyticDisc, z: Complex64) -> Result<ComplexPoint> {
    if !(z.norm() <= 1.0) {
        return Err(Error::invalid(format!("evaluation point {z} is outside the closed unit disc")));
    }
    ComplexPoint::new(f.eval(z))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub feasible: bool,
    /// `1 - max gauge` over the boundary samples.
    pub margin: f64,
}

pub const MIN_FEASIBILITY_SAMPLES: usize = 64;

/// Largest domain gauge over `m` equispaced boundary samples, starting at
/// angle 0. For the annulus the image must also avoid the origin, which is
/// checked by the winding number of the boundary curve.
pub(crate) fn max_gauge(f: &AnalyticDisc, domain: &DomainSpec, m: usize) -> f64 {
    let mut worst = 0.0f64;
    let mut winding = 0.0;
    let mut prev: Option<Complex64> = None;
    for k in 0..=m {
        let p = f.boundary(k as f64 / m as f64);
        if k < m {
            worst = worst.max(domain.gauge(&p));
        }
        if matches!(domain, DomainSpec::Annulus { .. }) {
            if let Some(q) = prev {
                winding += (p[0] / q).arg();
            }
            prev = Some(p[0]);
        }
    }
    if (winding / TAU).round() != 0.0 {
        return f64::INFINITY;
    }
    worst
}

/// Boundary-sample feasibility of `f` as a closed disc in `domain`.
pub fn feasible(f: &AnalyticDisc, domain: &DomainSpec, m: usize) -> Result<Feasibility> {
    if m < MIN_FEASIBILITY_SAMPLES {
        return Err(Error::invalid(format!("need at least {MIN_FEASIBILITY_SAMPLES} boundary samples")));
    }
    if f.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            found: f.dim(),
        });
    }
    let g = max_gauge(f, domain, m);
    Ok(Feasibility {
        feasible: g <= 1.0,
        margin: 1.0 - g,
    })
}

/// Largest `s` in `[0, 1]` (to bisection accuracy) such that the shrunk
/// disc has gauge at most `limit`; `None` if even the constant disc fails.
pub(crate) fn shrink_factor(f: &AnalyticDisc, domain: &DomainSpec, m: usize, limit: f64) -> Option<f64> {
    if !matches!(domain, DomainSpec::Annulus { .. }) {
        return quadratic_shrink(f, domain, m, limit);
    }
    bisect_shrink(f, domain, m, limit)
}

fn bisect_shrink(f: &AnalyticDisc, domain: &DomainSpec, m: usize, limit: f64) -> Option<f64> {
    if max_gauge(f, domain, m) <= limit {
        return Some(1.0);
    }
    if domain.gauge(f.center().coords()) > limit {
        return None;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..48 {
        let mid = 0.5 * (lo + hi);
        if max_gauge(&f.shrunk(mid), domain, m) <= limit {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Largest `s >= 0` with `q(s) = a s^2 + 2 b s + c <= 0`, given `c <= 0`.
fn upper_root(a: f64, b: f64, c: f64) -> f64 {
    if a <= 0.0 {
        return f64::INFINITY;
    }
    let disc = (b * b - a * c).max(0.0);
    // stable form of (-b + sqrt(disc)) / a
    if b <= 0.0 {
        (-b + disc.sqrt()) / a
    } else {
        -c / (b + disc.sqrt())
    }
}

/// Shrink factor for gauges that are norms about a centre: at each sample
/// the squared gauge of `f(0) + s (f - f(0))` is a quadratic in `s`.
fn quadratic_shrink(f: &AnalyticDisc, domain: &DomainSpec, m: usize, limit: f64) -> Option<f64> {
    let samples: Vec<Vec<Complex64>> = (0..m).map(|k| f.boundary(k as f64 / m as f64)).collect();
    norm_shrink(f.center().coords(), samples.iter().map(Vec::as_slice), domain, limit)
}

/// [`quadratic_shrink`] on precomputed boundary samples of `f` with
/// `f(0) = c0`. Not for the annulus.
pub(crate) fn norm_shrink<'a, I>(c0: &[Complex64], samples: I, domain: &DomainSpec, limit: f64) -> Option<f64>
where
    I: IntoIterator<Item = &'a [Complex64]>,
{
    if domain.gauge(c0) > limit {
        return None;
    }
    // per coordinate group: (coordinates, offset of f(0) from the centre, scale)
    let frames: Vec<(Vec<usize>, Vec<Complex64>, f64)> = match domain {
        DomainSpec::UnitDisc => vec![(vec![0], vec![c0[0]], limit)],
        DomainSpec::Disc { center, radius } => vec![(vec![0], vec![c0[0] - center], limit * radius)],
        DomainSpec::Polydisc { radii } => radii
            .iter()
            .enumerate()
            .map(|(i, r)| (vec![i], vec![c0[i]], limit * r))
            .collect(),
        DomainSpec::UnitBall { n } => vec![((0..*n).collect(), c0.to_vec(), limit)],
        DomainSpec::Annulus { .. } => return None,
    };
    let mut s = 1.0f64;
    for p in samples {
        for (idx, a, l) in &frames {
            let (mut qa, mut qb, mut qc) = (0.0, 0.0, -l * l);
            for (j, &i) in idx.iter().enumerate() {
                let b = p[i] - c0[i];
                qa += b.norm_sqr();
                qb += (a[j] * b.conj()).re;
                qc += a[j].norm_sqr();
            }
            s = s.min(upper_root(qa, qb, qc.min(0.0)));
        }
    }
    Some(s * (1.0 - 4.0 * f64::EPSILON))
}

/// Two-variable map `F(z, w) = sum_{a, b} c[i][a][b] z^a w^(b + w_offset)`.
/// A negative `w_offset` holds Laurent terms produced by circle fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariateDisc {
    coeffs: Vec<Vec<Vec<[f64; 2]>>>,
    w_offset: i32,
}

impl BivariateDisc {
    /// `coeffs[i][a][b]` is the coefficient of `z^a w^(b + w_offset)` in
    /// coordinate `i`.
    pub fn new(coeffs: Vec<Vec<Vec<Complex64>>>, w_offset: i32) -> Result<Self> {
        if !(1..=2).contains(&coeffs.len()) {
            return Err(Error::invalid("a disc needs one or two coordinates"));
        }
        let dz = coeffs.iter().map(Vec::len).max().unwrap_or(0).max(1);
        let dw = coeffs.iter().flatten().map(Vec::len).max().unwrap_or(0).max(1);
        let mut out = Vec::with_capacity(coeffs.len());
        for c in coeffs {
            let mut rows: Vec<Vec<[f64; 2]>> = c
                .into_iter()
                .map(|row| {
                    let mut r: Vec<[f64; 2]> = row.into_iter().map(|z| [z.re, z.im]).collect();
                    r.resize(dw, [0.0, 0.0]);
                    r
                })
                .collect();
            rows.resize(dz, vec![[0.0, 0.0]; dw]);
            if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
                return Err(Error::invalid("disc coefficients must be finite"));
            }
            out.push(rows);
        }
        Ok(Self { coeffs: out, w_offset })
    }

    /// `F(z, w) = h(w)`.
    pub fn from_slice(h: &AnalyticDisc) -> Self {
        Self::new(h.coeffs().iter().map(|c| vec![c.clone()]).collect(), 0).expect("valid disc")
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn z_degree(&self) -> usize {
        self.coeffs[0].len() - 1
    }

    /// Lowest and highest `w` exponent.
    pub fn w_range(&self) -> (i32, i32) {
        (self.w_offset, self.w_offset + self.coeffs[0][0].len() as i32 - 1)
    }

    pub fn coeff(&self, i: usize, a: usize, e: i32) -> Complex64 {
        let b = e - self.w_offset;
        if b < 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[i]
            .get(a)
            .and_then(|row| row.get(b as usize))
            .map(|p| Complex64::new(p[0], p[1]))
            .unwrap_or_default()
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> Vec<Complex64> {
        let wo = w.powi(self.w_offset);
        self.coeffs
            .iter()
            .map(|rows| {
                let by_a: Vec<Complex64> = rows
                    .iter()
                    .map(|row| {
                        let c: Vec<Complex64> = row.iter().map(|p| Complex64::new(p[0], p[1])).collect();
                        horner(&c, w) * wo
                    })
                    .collect();
                horner(&by_a, z)
            })
            .collect()
    }

    /// The slice `w -> F(0, w)` when it is a polynomial.
    pub fn zero_slice(&self) -> Option<AnalyticDisc> {
        let (lo, hi) = self.w_range();
        let mut out = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            if (lo..0).any(|e| self.coeff(i, 0, e) != Complex64::new(0.0, 0.0)) {
                return None;
            }
            out.push((0..=hi.max(0)).map(|e| self.coeff(i, 0, e)).collect());
        }
        AnalyticDisc::new(out).ok()
    }

    /// Copy with the `z`-constant slice replaced by `h` exactly.
    pub fn pinned(&self, h: &AnalyticDisc) -> Result<Self> {
        if h.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: h.dim(),
            });
        }
        let (lo, hi) = self.w_range();
        let hi = hi.max(h.degree() as i32);
        let lo = lo.min(0);
        let coeffs = (0..self.dim())
            .map(|i| {
                (0..=self.z_degree())
                    .map(|a| {
                        (lo..=hi)
                            .map(|e| {
                                if a == 0 {
                                    if e >= 0 {
                                        h.coeffs()[i].get(e as usize).copied().unwrap_or_default()
                                    } else {
                                        Complex64::new(0.0, 0.0)
                                    }
                                } else {
                                    self.coeff(i, a, e)
                                }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self::new(coeffs, lo)
    }
}

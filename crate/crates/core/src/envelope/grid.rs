use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[repr(u8)]
pub enum NodeClass {
    Exterior = 0,
    Boundary = 1,
    Interior = 2,
}

/// Complex line direction with Gaussian-integer coefficients, one per
/// coordinate. Stencils move along `x + zeta * dir` for `zeta` in the
/// eight unit lattice steps, so each coefficient times each of
/// `1, i, 1+i, 1-i` must stay within one grid step per real axis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexLine(pub Vec<(i32, i32)>);

impl ComplexLine {
    pub fn axis(dim: usize, k: usize) -> Self {
        let mut v = vec![(0, 0); dim];
        v[k] = (1, 0);
        ComplexLine(v)
    }

    /// One line for n = 1; the two coordinate lines and the two diagonals
    /// `z1 = z2`, `z1 = -z2` for n = 2.
    pub fn defaults(dim: usize) -> Vec<ComplexLine> {
        match dim {
            1 => vec![ComplexLine(vec![(1, 0)])],
            _ => vec![
                ComplexLine::axis(2, 0),
                ComplexLine::axis(2, 1),
                ComplexLine(vec![(1, 0), (1, 0)]),
                ComplexLine(vec![(1, 0), (-1, 0)]),
            ],
        }
    }

    /// Real-coordinate offsets and integer weights of the 9-point mean along
    /// the line; the mean is the weighted sum divided by [`STENCIL_DIVISOR`].
    pub(crate) fn stencil(&self) -> Result<Vec<(Vec<i32>, f64)>> {
        if self.0.iter().all(|&c| c == (0, 0)) {
            return Err(Error::invalid("direction must be non-zero"));
        }
        const STEPS: [((i32, i32), f64); 8] = [
            ((1, 0), 4.0),
            ((-1, 0), 4.0),
            ((0, 1), 4.0),
            ((0, -1), 4.0),
            ((1, 1), 1.0),
            ((1, -1), 1.0),
            ((-1, 1), 1.0),
            ((-1, -1), 1.0),
        ];
        let mut out = Vec::with_capacity(8);
        for ((zr, zi), w) in STEPS {
            let mut off = Vec::with_capacity(2 * self.0.len());
            for &(a, b) in &self.0 {
                let re = zr * a - zi * b;
                let im = zr * b + zi * a;
                if re.abs() > 1 || im.abs() > 1 {
                    return Err(Error::invalid(format!(
                        "direction {:?} leaves the one-step neighbourhood",
                        self.0
                    )));
                }
                off.push(re);
                off.push(im);
            }
            out.push((off, w));
        }
        Ok(out)
    }
}

/// Sum of the 9-point stencil weights. Integer weights keep the mean of a
/// constant field exact.
pub const STENCIL_DIVISOR: f64 = 20.0;

/// Rectangular lattice `h * Z^{2n}` clipped to the domain's bounding box
/// plus one padding layer, with per-node classification.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    dim: usize,
    h: f64,
    /// Lattice index of the first node along each real axis.
    first: Vec<i64>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    class: Vec<NodeClass>,
}

pub const DEFAULT_NODE_CAP: usize = 8_000_000;

impl GridSpec {
    /// Interior nodes lie strictly inside the domain; boundary nodes are the
    /// remaining nodes within one step (in every real axis) of an interior
    /// node.
    pub fn new(domain: &DomainSpec, h: f64, node_cap: usize) -> Result<Self> {
        domain.validate()?;
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::invalid("grid spacing must be positive"));
        }
        let dim = domain.dim();
        let bbox = domain.bounding_box();
        let mut first = Vec::with_capacity(2 * dim);
        let mut shape = Vec::with_capacity(2 * dim);
        for (lo, hi) in &bbox {
            let a = (lo / h).floor() as i64 - 1;
            let b = (hi / h).ceil() as i64 + 1;
            first.push(a);
            shape.push((b - a + 1) as usize);
        }
        let nodes = shape.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s));
        let nodes = match nodes {
            Some(n) if n <= node_cap => n,
            Some(n) => return Err(Error::NodeCap { nodes: n, cap: node_cap }),
            None => return Err(Error::NodeCap { nodes: usize::MAX, cap: node_cap }),
        };
        let mut strides = vec![1usize; shape.len()];
        for a in (0..shape.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * shape[a + 1];
        }
        let mut grid = GridSpec {
            dim,
            h,
            first,
            shape,
            strides,
            class: vec![NodeClass::Exterior; nodes],
        };
        let inside: Vec<bool> = (0..nodes)
            .into_par_iter()
            .map(|i| {
                let p = grid.point(i);
                domain.gauge(&p) < 1.0
            })
            .collect();
        let offsets = grid.box_offsets();
        let class: Vec<NodeClass> = (0..nodes)
            .into_par_iter()
            .map(|i| {
                if inside[i] {
                    NodeClass::Interior
                } else if !grid.on_edge(i) && offsets.iter().any(|&o| inside[(i as isize + o) as usize]) {
                    NodeClass::Boundary
                } else {
                    NodeClass::Exterior
                }
            })
            .collect();
        grid.class = class;
        Ok(grid)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.class.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class.is_empty()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn first_index(&self) -> &[i64] {
        &self.first
    }

    pub fn class(&self, i: usize) -> NodeClass {
        self.class[i]
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.class
    }

    pub fn count(&self, c: NodeClass) -> usize {
        self.class.iter().filter(|&&k| k == c).count()
    }

    /// Lattice multi-index of a flat node index.
    pub fn lattice(&self, i: usize) -> Vec<i64> {
        self.strides
            .iter()
            .zip(&self.shape)
            .zip(&self.first)
            .map(|((&s, &n), &f)| ((i / s) % n) as i64 + f)
            .collect()
    }

    pub fn index_of(&self, lattice: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for ((&k, &f), (&n, &s)) in lattice.iter().zip(&self.first).zip(self.shape.iter().zip(&self.strides)) {
            let local = k - f;
            if local < 0 || local as usize >= n {
                return None;
            }
            idx += local as usize * s;
        }
        Some(idx)
    }

    /// Real coordinates of a node.
    pub fn coords(&self, i: usize) -> Vec<f64> {
        self.lattice(i).into_iter().map(|k| k as f64 * self.h).collect()
    }

    pub fn point(&self, i: usize) -> Vec<Complex64> {
        self.coords(i)
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect()
    }

    fn on_edge(&self, i: usize) -> bool {
        self.strides
            .iter()
            .zip(&self.shape)
            .any(|(&s, &n)| {
                let k = (i / s) % n;
                k == 0 || k + 1 == n
            })
    }

    pub(crate) fn flat_offset(&self, off: &[i32]) -> isize {
        off.iter()
            .zip(&self.strides)
            .map(|(&o, &s)| o as isize * s as isize)
            .sum()
    }

    /// Flat offsets of all `3^{2n} - 1` neighbours in the unit box.
    pub(crate) fn box_offsets(&self) -> Vec<isize> {
        let axes = self.shape.len();
        let mut out = Vec::new();
        let total = 3usize.pow(axes as u32);
        for code in 0..total {
            let mut c = code;
            let mut off = Vec::with_capacity(axes);
            for _ in 0..axes {
                off.push((c % 3) as i32 - 1);
                c /= 3;
            }
            if off.iter().any(|&o| o != 0) {
                out.push(self.flat_offset(&off));
            }
        }
        out
    }

    /// Parity of the lattice index sum, used for two-phase sweeps.
    pub(crate) fn parity(&self, i: usize) -> usize {
        (self.lattice(i).iter().sum::<i64>().rem_euclid(2)) as usize
    }
}

use crate::numeric::fsum;

pub const TAU: f64 = std::f64::consts::TAU;

/// A finite union of closed arcs on the unit circle, stored as sorted,
/// pairwise disjoint intervals of `[0, 1]` measured in turns (angle / 2pi).
///
/// Degenerate intervals `[t, t]` are kept so that finite point sets survive
/// enlargement; they carry zero measure. An arc through angle 0 is held as
/// two intervals, one ending at 1 and one starting at 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArcSet {
    intervals: Vec<(f64, f64)>,
}

impl ArcSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        Self {
            intervals: vec![(0.0, 1.0)],
        }
    }

    /// Closed arc from `start` to `end` radians, `0 <= start <= end <= 2pi`.
    pub fn from_radians(start: f64, end: f64) -> Self {
        Self::from_intervals(vec![(start / TAU, end / TAU)])
    }

    pub fn point(turn: f64) -> Self {
        Self::from_intervals(vec![(turn, turn)])
    }

    /// Normalises arbitrary intervals: clipped to `[0, 1]`, sorted, and
    /// overlapping or touching intervals merged.
    pub fn from_intervals(mut raw: Vec<(f64, f64)>) -> Self {
        raw.retain(|(a, b)| a <= b && *b >= 0.0 && *a <= 1.0);
        for iv in raw.iter_mut() {
            iv.0 = iv.0.max(0.0);
            iv.1 = iv.1.min(1.0);
        }
        raw.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        Self { intervals: out }
    }

    /// The `level`-th iterate of the symmetric Cantor construction on the
    /// whole circle: each interval keeps its two outer pieces, of relative
    /// length `(1 - ratio) / 2`, and loses the middle `ratio`.
    pub fn cantor(level: u32, ratio: f64) -> Self {
        let mut cur = vec![(0.0f64, 1.0f64)];
        for _ in 0..level {
            let mut next = Vec::with_capacity(cur.len() * 2);
            for (a, b) in cur {
                let (l, r) = cantor_children(a, b, ratio);
                next.push(l);
                next.push(r);
            }
            cur = next;
        }
        Self { intervals: cur }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Normalised arc length.
    pub fn measure(&self) -> f64 {
        fsum(self.intervals.iter().map(|(a, b)| b - a))
    }

    pub fn contains_turn(&self, t: f64) -> bool {
        let idx = self.intervals.partition_point(|iv| iv.1 < t);
        self.intervals.get(idx).is_some_and(|iv| iv.0 <= t)
    }

    pub fn union(&self, other: &ArcSet) -> ArcSet {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        ArcSet::from_intervals(all)
    }

    pub fn intersection(&self, other: &ArcSet) -> ArcSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let (a0, a1) = self.intervals[i];
            let (b0, b1) = other.intervals[j];
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo <= hi {
                out.push((lo, hi));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        ArcSet::from_intervals(out)
    }

    /// Closure of the complement (endpoints are shared, which does not
    /// affect any measure).
    pub fn complement(&self) -> ArcSet {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut cursor = 0.0;
        for &(a, b) in &self.intervals {
            if a > cursor {
                out.push((cursor, a));
            }
            cursor = cursor.max(b);
        }
        if cursor < 1.0 {
            out.push((cursor, 1.0));
        }
        ArcSet::from_intervals(out)
    }

    /// Every interval widened by `eps` turns on both sides, wrapping
    /// around angle 0.
    pub fn enlarged(&self, eps: f64) -> ArcSet {
        let mut out = Vec::with_capacity(self.intervals.len() + 2);
        for &(a, b) in &self.intervals {
            let (lo, hi) = (a - eps, b + eps);
            if hi - lo >= 1.0 {
                return ArcSet::full();
            }
            out.push((lo.max(0.0), hi.min(1.0)));
            if lo < 0.0 {
                out.push((1.0 + lo, 1.0));
            }
            if hi > 1.0 {
                out.push((0.0, hi - 1.0));
            }
        }
        ArcSet::from_intervals(out)
    }

    /// Image under the rotation `t -> t + shift (mod 1)`.
    pub fn rotated(&self, shift: f64) -> ArcSet {
        let s = shift - shift.floor();
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        for &(a, b) in &self.intervals {
            let (lo, hi) = (a + s, b + s);
            if hi <= 1.0 {
                out.push((lo, hi));
            } else if lo >= 1.0 {
                out.push((lo - 1.0, hi - 1.0));
            } else {
                out.push((lo, 1.0));
                out.push((0.0, hi - 1.0));
            }
        }
        ArcSet::from_intervals(out)
    }
}

pub(crate) fn cantor_children(a: f64, b: f64, ratio: f64) -> ((f64, f64), (f64, f64)) {
    let keep = (b - a) * (1.0 - ratio) * 0.5;
    ((a, a + keep), (b - keep, b))
}

/// Membership of `t` (turns) in the Cantor iterate, by descent through the
/// same interval arithmetic that [`ArcSet::cantor`] uses.
pub(crate) fn cantor_contains(level: u32, ratio: f64, t: f64) -> bool {
    let (mut a, mut b) = (0.0, 1.0);
    if !(a..=b).contains(&t) {
        return false;
    }
    for _ in 0..level {
        let (l, r) = cantor_children(a, b, ratio);
        if t <= l.1 {
            (a, b) = l;
        } else if t >= r.0 {
            (a, b) = r;
        } else {
            return false;
        }
    }
    true
}

/// Angle of `z` in turns, in `[0, 1)`.
pub(crate) fn turn_of(z: num_complex::Complex64) -> f64 {
    let t = z.im.atan2(z.re) / TAU;
    if t < 0.0 {
        let u = t + 1.0;
        if u >= 1.0 {
            0.0
        } else {
            u
        }
    } else {
        t
    }
}

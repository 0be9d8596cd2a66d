//! Closed and oriented intervals, partitions and their refinements.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::stieltjes::Integrator;

/// Breakpoints closer than this fraction of the base length are merged.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// A closed finite interval `[a, b]` with `a <= b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedInterval {
    a: f64,
    b: f64,
}

impl ClosedInterval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Argument(format!("interval endpoints must be finite, got [{a}, {b}]")));
        }
        if a > b {
            return Err(Error::Argument(format!("interval [{a}, {b}] has a > b")));
        }
        Ok(ClosedInterval { a, b })
    }

    /// The degenerate interval `[c, c]`.
    pub fn point(c: f64) -> Self {
        ClosedInterval { a: c, b: c }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }

    pub fn contains_interval(&self, other: &ClosedInterval) -> bool {
        self.a <= other.a && other.b <= self.b
    }

    pub fn midpoint(&self) -> f64 {
        self.a + 0.5 * (self.b - self.a)
    }
}

/// An interval traversed from `start` to `end`; the integral over it carries
/// the sign of the traversal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrientedInterval {
    pub start: f64,
    pub end: f64,
}

impl OrientedInterval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::Argument("oriented interval endpoints must be finite".into()));
        }
        Ok(OrientedInterval { start, end })
    }

    /// `+1` when traversed left to right (including the degenerate case), `-1` otherwise.
    pub fn sign(&self) -> f64 {
        if self.start <= self.end {
            1.0
        } else {
            -1.0
        }
    }

    pub fn carrier(&self) -> ClosedInterval {
        ClosedInterval {
            a: self.start.min(self.end),
            b: self.start.max(self.end),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.start == self.end
    }
}

/// Strictly increasing breakpoints `x_0 < x_1 < ... < x_n` of a base
/// interval. A degenerate base has a single breakpoint and no cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    points: Vec<f64>,
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.points.serialize(serializer)
    }
}

fn merge_sorted(points: &[f64]) -> Vec<f64> {
    let a = points[0];
    let b = points[points.len() - 1];
    if a == b {
        return vec![a];
    }
    let tol = MERGE_TOLERANCE * (b - a);
    let mut out = Vec::with_capacity(points.len());
    out.push(a);
    for &p in &points[1..points.len() - 1] {
        let last = *out.last().unwrap();
        if p - last > tol && b - p > tol {
            out.push(p);
        }
    }
    out.push(b);
    out
}

impl Partition {
    /// Builds a partition from nondecreasing breakpoints; near-duplicates are merged.
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Argument("a partition needs at least one breakpoint".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::Argument("breakpoints must be finite".into()));
        }
        if points.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Argument("breakpoints must be nondecreasing".into()));
        }
        Ok(Partition {
            points: merge_sorted(&points),
        })
    }

    /// The one-cell partition `{a, b}`.
    pub fn trivial(base: ClosedInterval) -> Self {
        if base.is_degenerate() {
            Partition { points: vec![base.a] }
        } else {
            Partition {
                points: vec![base.a, base.b],
            }
        }
    }

    pub fn uniform(base: ClosedInterval, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("uniform partition needs n >= 1".into()));
        }
        if base.is_degenerate() {
            return Ok(Partition::trivial(base));
        }
        let h = base.length() / n as f64;
        let mut points: Vec<f64> = (0..n).map(|k| base.a + k as f64 * h).collect();
        points.push(base.b);
        Partition::new(points)
    }

    pub fn base(&self) -> ClosedInterval {
        ClosedInterval {
            a: self.points[0],
            b: self.points[self.points.len() - 1],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.points
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell(&self, k: usize) -> ClosedInterval {
        ClosedInterval {
            a: self.points[k],
            b: self.points[k + 1],
        }
    }

    pub fn cells(&self) -> impl ExactSizeIterator<Item = ClosedInterval> + '_ {
        self.points.windows(2).map(|w| ClosedInterval { a: w[0], b: w[1] })
    }

    /// Largest cell length (zero for a degenerate partition).
    pub fn mesh(&self) -> f64 {
        self.cells().map(|c| c.length()).fold(0.0, f64::max)
    }

    /// Inserts `points` as new breakpoints. Existing breakpoints always survive
    /// merging; new points within the merge tolerance of them are dropped.
    pub fn refine(&self, points: &[f64]) -> Result<Self> {
        let base = self.base();
        for &p in points {
            if !base.contains(p) {
                return Err(Error::domain("partition", p, p, base));
            }
        }
        if base.is_degenerate() {
            return Ok(self.clone());
        }
        let tol = MERGE_TOLERANCE * base.length();
        let mut fresh: Vec<f64> = points
            .iter()
            .copied()
            .filter(|&p| {
                let i = self.points.partition_point(|&q| q < p);
                let near_right = i < self.points.len() && self.points[i] - p <= tol;
                let near_left = i > 0 && p - self.points[i - 1] <= tol;
                !(near_left || near_right)
            })
            .collect();
        if fresh.is_empty() {
            return Ok(self.clone());
        }
        fresh.sort_by(f64::total_cmp);
        fresh.dedup_by(|x, y| *x - *y <= tol);
        let mut merged = Vec::with_capacity(self.points.len() + fresh.len());
        let (mut i, mut j) = (0, 0);
        while i < self.points.len() || j < fresh.len() {
            if j == fresh.len() || (i < self.points.len() && self.points[i] <= fresh[j]) {
                merged.push(self.points[i]);
                i += 1;
            } else {
                merged.push(fresh[j]);
                j += 1;
            }
        }
        Ok(Partition { points: merged })
    }

    pub fn common_refinement(&self, other: &Partition) -> Result<Self> {
        let (p, q) = (self.base(), other.base());
        if p != q {
            return Err(Error::BaseMismatch(p.a, p.b, q.a, q.b));
        }
        self.refine(&other.points)
    }

    /// True when every breakpoint of `coarse` is (up to the merge tolerance)
    /// a breakpoint of `self`.
    pub fn refines(&self, coarse: &Partition) -> bool {
        if self.base() != coarse.base() {
            return false;
        }
        let tol = MERGE_TOLERANCE * self.base().length();
        coarse.points.iter().all(|&p| {
            let i = self.points.partition_point(|&q| q < p - tol);
            i < self.points.len() && (self.points[i] - p).abs() <= tol
        })
    }

    /// Image of the breakpoints under a nondecreasing integrator, with cells on
    /// which the integrator is flat collapsed away.
    pub fn induced(&self, integrator: &Integrator) -> Result<Partition> {
        let mut values = Vec::with_capacity(self.points.len());
        let mut prev: Option<(f64, crate::RangeEnclosure)> = None;
        for &x in &self.points {
            let enc = integrator.enclose(x)?;
            if let Some((px, pe)) = prev {
                if enc.hi < pe.lo {
                    return Err(Error::Monotonicity {
                        left: px,
                        right: x,
                        drop: pe.lo - enc.hi,
                    });
                }
            }
            prev = Some((x, enc));
            let y = integrator.evaluate(x)?;
            // Enclosure-consistent but midpoint-decreasing values are clamped.
            let y = match values.last() {
                Some(&last) if y < last => last,
                _ => y,
            };
            values.push(y);
        }
        values.dedup();
        Partition::new(values)
    }
}

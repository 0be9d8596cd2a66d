//! Upper and lower Darboux sums with respect to an integrator, oscillation
//! sums, integrability certificates and adaptive integral enclosures.
//!
//! For a partition `P = {I_k}` and a nondecreasing integrator `Φ`,
//!
//! ```text
//! U(f, Φ, P) = Σ_k (sup_{I_k} f) (Φ(x_{k,r}) - Φ(x_{k,l}))
//! L(f, Φ, P) = Σ_k (inf_{I_k} f) (Φ(x_{k,r}) - Φ(x_{k,l}))
//! U - L      = Σ_k osc(f, I_k)   (Φ(x_{k,r}) - Φ(x_{k,l}))
//! ```
//!
//! The plain sums use the integrator's point increments. Enclosures instead use
//! the certified bracket of each increment and pick its worse end for every
//! term, then widen by the accumulated rounding slack, so a certified
//! enclosure contains the integral even though `Φ` itself is only bracketed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::{RangeEnclosure, RealFunction};
use crate::numeric::{pairwise_sum, pairwise_sum_by, sum_slack};
use crate::partition::{ClosedInterval, Partition, MERGE_TOLERANCE};
use crate::stieltjes::Integrator;

/// Default total cell budget of the adaptive drivers.
pub const DEFAULT_BUDGET: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Rigor {
    /// Every range query came from a sound oracle.
    Certified,
    /// At least one range query came from a sampled oracle.
    Heuristic,
}

impl Rigor {
    pub fn of(f: &RealFunction) -> Rigor {
        if f.oracle_kind().is_sound() {
            Rigor::Certified
        } else {
            Rigor::Heuristic
        }
    }

    pub fn and(self, other: Rigor) -> Rigor {
        if self == Rigor::Certified && other == Rigor::Certified {
            Rigor::Certified
        } else {
            Rigor::Heuristic
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DarbouxSums {
    pub upper: f64,
    pub lower: f64,
    pub partition_size: usize,
}

/// Two-sided bracket `[lo, hi]` of an integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
    pub cells: usize,
    pub osc_sum: f64,
    pub rigor: Rigor,
}

impl Enclosure {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn overlaps(&self, other: &Enclosure) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn midpoint(&self) -> f64 {
        self.lo + 0.5 * (self.hi - self.lo)
    }

    /// Multiplies by `±1`.
    pub fn oriented(self, sign: f64) -> Enclosure {
        if sign < 0.0 {
            Enclosure {
                lo: -self.hi,
                hi: -self.lo,
                ..self
            }
        } else {
            self
        }
    }

    /// Widens both ends by `by >= 0`.
    pub fn widen(self, by: f64) -> Enclosure {
        Enclosure {
            lo: self.lo - by,
            hi: self.hi + by,
            ..self
        }
    }

    pub(crate) fn zero(rigor: Rigor) -> Enclosure {
        Enclosure {
            lo: 0.0,
            hi: 0.0,
            cells: 0,
            osc_sum: 0.0,
            rigor,
        }
    }
}

/// Partition whose oscillation sum is at most `epsilon`.
#[derive(Debug, Clone, Serialize)]
pub struct IntegrabilityCertificate {
    pub partition: Partition,
    pub osc_sum: f64,
    pub epsilon: f64,
    pub rigor: Rigor,
}

/// Budget ran out before the oscillation sum dropped below `epsilon`. This is
/// not a claim of non-integrability.
#[derive(Debug, Clone, Serialize)]
pub struct Inconclusive {
    pub best_osc_sum: f64,
    pub epsilon: f64,
    pub cells: usize,
    pub rigor: Rigor,
    #[serde(skip)]
    pub partition: Partition,
}

#[derive(Debug, Clone)]
pub enum Certification {
    Certified(IntegrabilityCertificate),
    Inconclusive(Inconclusive),
}

impl Certification {
    pub fn certificate(&self) -> Option<&IntegrabilityCertificate> {
        match self {
            Certification::Certified(c) => Some(c),
            Certification::Inconclusive(_) => None,
        }
    }

    pub fn osc_sum(&self) -> f64 {
        match self {
            Certification::Certified(c) => c.osc_sum,
            Certification::Inconclusive(i) => i.best_osc_sum,
        }
    }

    pub fn partition(&self) -> &Partition {
        match self {
            Certification::Certified(c) => &c.partition,
            Certification::Inconclusive(i) => &i.partition,
        }
    }
}

fn check_domains(f: &RealFunction, phi: &Integrator, base: ClosedInterval) -> Result<()> {
    if !f.domain().contains_interval(&base) {
        return Err(Error::domain(f.name(), base.a(), base.b(), f.domain()));
    }
    if !phi.domain().contains_interval(&base) {
        return Err(Error::domain(phi.name(), base.a(), base.b(), phi.domain()));
    }
    Ok(())
}

struct CellTerms {
    range: RangeEnclosure,
    delta: f64,
}

fn cell_terms(f: &RealFunction, phi: &Integrator, partition: &Partition) -> Result<Vec<CellTerms>> {
    check_domains(f, phi, partition.base())?;
    Ok(partition
        .cells()
        .map(|c| CellTerms {
            range: f.range_unchecked(c.a(), c.b()),
            delta: phi.increment_unchecked(c.a(), c.b()).1,
        })
        .collect())
}

/// `U(f, Φ, P)`.
pub fn upper_sum(f: &RealFunction, phi: &Integrator, partition: &Partition) -> Result<f64> {
    let t = cell_terms(f, phi, partition)?;
    Ok(pairwise_sum_by(t.len(), &mut |k| t[k].range.hi * t[k].delta))
}

/// `L(f, Φ, P)`.
pub fn lower_sum(f: &RealFunction, phi: &Integrator, partition: &Partition) -> Result<f64> {
    let t = cell_terms(f, phi, partition)?;
    Ok(pairwise_sum_by(t.len(), &mut |k| t[k].range.lo * t[k].delta))
}

/// `Σ_k osc(f, I_k) ΔΦ_k`.
pub fn oscillation_sum(f: &RealFunction, phi: &Integrator, partition: &Partition) -> Result<f64> {
    let t = cell_terms(f, phi, partition)?;
    Ok(pairwise_sum_by(t.len(), &mut |k| t[k].range.width() * t[k].delta))
}

/// Upper and lower sums from one pass of range queries.
pub fn darboux_sums(f: &RealFunction, phi: &Integrator, partition: &Partition) -> Result<DarbouxSums> {
    let t = cell_terms(f, phi, partition)?;
    Ok(DarbouxSums {
        upper: pairwise_sum_by(t.len(), &mut |k| t[k].range.hi * t[k].delta),
        lower: pairwise_sum_by(t.len(), &mut |k| t[k].range.lo * t[k].delta),
        partition_size: t.len(),
    })
}

/// Rounding slack charged to sums over `partition`.
pub fn partition_slack(f: &RealFunction, phi: &Integrator, partition: &Partition) -> Result<f64> {
    let t = cell_terms(f, phi, partition)?;
    let abs = pairwise_sum_by(t.len(), &mut |k| t[k].range.magnitude() * t[k].delta.abs());
    Ok(sum_slack(2.0 * abs, t.len()))
}

/// Certified enclosure `[L - slack, U + slack]` on a fixed partition.
pub fn enclosure_on(f: &RealFunction, phi: &Integrator, partition: &Partition) -> Result<Enclosure> {
    let base = partition.base();
    check_domains(f, phi, base)?;
    let cells: Vec<Cell> = partition.cells().map(|c| Cell::evaluate(f, phi, c.a(), c.b())).collect();
    Ok(enclosure_from_cells(&cells, Rigor::of(f).and(phi.rigor())))
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    l: f64,
    r: f64,
    term_lo: f64,
    term_hi: f64,
    osc: f64,
}

impl Cell {
    fn evaluate(f: &RealFunction, phi: &Integrator, l: f64, r: f64) -> Cell {
        let range = f.range_unchecked(l, r);
        let (inc, delta) = phi.increment_unchecked(l, r);
        let term_hi = (range.hi * inc.lo).max(range.hi * inc.hi);
        let term_lo = (range.lo * inc.lo).min(range.lo * inc.hi);
        Cell {
            l,
            r,
            term_lo,
            term_hi,
            osc: range.width() * delta,
        }
    }

    fn contribution(&self) -> f64 {
        self.term_hi - self.term_lo
    }
}

fn enclosure_from_cells(cells: &[Cell], rigor: Rigor) -> Enclosure {
    let n = cells.len();
    let upper = pairwise_sum_by(n, &mut |k| cells[k].term_hi);
    let lower = pairwise_sum_by(n, &mut |k| cells[k].term_lo);
    let osc = pairwise_sum_by(n, &mut |k| cells[k].osc);
    let abs = pairwise_sum_by(n, &mut |k| cells[k].term_hi.abs() + cells[k].term_lo.abs());
    let slack = sum_slack(abs, n);
    Enclosure {
        lo: lower - slack,
        hi: upper + slack,
        cells: n,
        osc_sum: osc,
        rigor,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    priority: f64,
    index: u32,
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// Greedy bisection driver: repeatedly halves the cell with the largest
/// certified contribution `sup·ΔΦ - inf·ΔΦ`.
///
/// The refiner is exposed so that callers can observe every stage of the
/// iterate sequence, not only the final bracket.
pub struct AdaptiveRefiner {
    f: RealFunction,
    phi: Integrator,
    base: ClosedInterval,
    cells: Vec<Cell>,
    heap: BinaryHeap<Entry>,
    min_width: f64,
    rigor: Rigor,
    running_width: f64,
    running_osc: f64,
    running_abs: f64,
    best: Option<(f64, f64)>,
}

impl AdaptiveRefiner {
    pub fn new(f: &RealFunction, phi: &Integrator, base: ClosedInterval) -> Result<Self> {
        check_domains(f, phi, base)?;
        let scale = base.a().abs().max(base.b().abs());
        let min_width = (4.0 * MERGE_TOLERANCE * base.length()).max(16.0 * f64::EPSILON * scale);
        let mut refiner = AdaptiveRefiner {
            f: f.clone(),
            phi: phi.clone(),
            base,
            cells: Vec::new(),
            heap: BinaryHeap::new(),
            min_width,
            rigor: Rigor::of(f).and(phi.rigor()),
            running_width: 0.0,
            running_osc: 0.0,
            running_abs: 0.0,
            best: None,
        };
        if !base.is_degenerate() {
            let cell = Cell::evaluate(f, phi, base.a(), base.b());
            refiner.push(cell, None);
        }
        Ok(refiner)
    }

    fn push(&mut self, cell: Cell, slot: Option<usize>) {
        let index = match slot {
            Some(i) => {
                self.cells[i] = cell;
                i
            }
            None => {
                self.cells.push(cell);
                self.cells.len() - 1
            }
        };
        self.running_width += cell.contribution();
        self.running_osc += cell.osc;
        self.running_abs += cell.term_hi.abs() + cell.term_lo.abs();
        let priority = cell.contribution();
        if priority > 0.0 && cell.r - cell.l > self.min_width {
            self.heap.push(Entry {
                priority,
                index: index as u32,
            });
        }
    }

    /// Bisects the worst cell. Returns `false` when no cell can be split.
    pub fn split_next(&mut self) -> bool {
        let Some(Entry { index, .. }) = self.heap.pop() else {
            return false;
        };
        let i = index as usize;
        let old = self.cells[i];
        self.running_width -= old.contribution();
        self.running_osc -= old.osc;
        self.running_abs -= old.term_hi.abs() + old.term_lo.abs();
        let mid = old.l + 0.5 * (old.r - old.l);
        let left = Cell::evaluate(&self.f, &self.phi, old.l, mid);
        let right = Cell::evaluate(&self.f, &self.phi, mid, old.r);
        self.push(left, Some(i));
        self.push(right, None);
        true
    }

    pub fn cells(&self) -> usize {
        self.cells.len()
    }

    pub fn rigor(&self) -> Rigor {
        self.rigor
    }

    fn resync(&mut self) {
        let n = self.cells.len();
        let cells = &self.cells;
        self.running_width = pairwise_sum_by(n, &mut |k| cells[k].contribution());
        self.running_osc = pairwise_sum_by(n, &mut |k| cells[k].osc);
        self.running_abs = pairwise_sum_by(n, &mut |k| cells[k].term_hi.abs() + cells[k].term_lo.abs());
    }

    fn running_slack(&self) -> f64 {
        sum_slack(self.running_abs.max(0.0), self.cells.len())
    }

    /// Refines until `done(width_with_slack, osc_sum_with_slack)` holds or the
    /// cell count reaches `max_cells`. Returns whether `done` was met.
    fn refine_until(&mut self, max_cells: usize, done: impl Fn(f64, f64) -> bool) -> bool {
        loop {
            let slack = self.running_slack();
            if done(self.running_width + 2.0 * slack, self.running_osc + slack) {
                self.resync();
                let slack = self.running_slack();
                if done(self.running_width + 2.0 * slack, self.running_osc + slack) {
                    return true;
                }
            }
            if self.cells.len() >= max_cells || !self.split_next() {
                self.resync();
                let slack = self.running_slack();
                return done(self.running_width + 2.0 * slack, self.running_osc + slack);
            }
        }
    }

    /// Refines until the cell count reaches `cells` (or nothing is left to split).
    pub fn refine_to(&mut self, cells: usize) {
        while self.cells.len() < cells && self.split_next() {}
    }

    /// Refines until the certified width is at most `tol`.
    pub fn refine_to_width(&mut self, tol: f64, max_cells: usize) -> bool {
        self.refine_until(max_cells, |width, _| width <= tol)
    }

    /// Refines until the oscillation sum (plus slack) is at most `epsilon`.
    pub fn refine_to_oscillation(&mut self, epsilon: f64, max_cells: usize) -> bool {
        self.refine_until(max_cells, |_, osc| osc <= epsilon)
    }

    /// Current certified bracket, intersected with every bracket reported so far.
    pub fn enclosure(&mut self) -> Enclosure {
        if self.base.is_degenerate() {
            return Enclosure::zero(self.rigor);
        }
        let mut e = enclosure_from_cells(&self.cells, self.rigor);
        if let Some((lo, hi)) = self.best {
            let (nlo, nhi) = (e.lo.max(lo), e.hi.min(hi));
            if nlo <= nhi {
                e.lo = nlo;
                e.hi = nhi;
            }
        }
        self.best = Some((e.lo, e.hi));
        e
    }

    /// Oscillation sum of the current partition, without slack.
    pub fn osc_sum(&self) -> f64 {
        let cells = &self.cells;
        pairwise_sum_by(cells.len(), &mut |k| cells[k].osc)
    }

    pub fn partition(&self) -> Partition {
        if self.base.is_degenerate() {
            return Partition::trivial(self.base);
        }
        let mut points: Vec<f64> = self.cells.iter().map(|c| c.l).collect();
        points.push(self.base.b());
        points.sort_by(f64::total_cmp);
        Partition::new(points).expect("refiner breakpoints are sorted and finite")
    }
}

/// Searches for a partition with `Σ osc(f, I_k) ΔΦ_k <= epsilon` by greedy
/// bisection, using at most `budget` cells.
pub fn certify_integrable(
    f: &RealFunction,
    phi: &Integrator,
    base: ClosedInterval,
    epsilon: f64,
    budget: usize,
) -> Result<Certification> {
    if !(epsilon > 0.0) {
        return Err(Error::Argument(format!("epsilon must be positive, got {epsilon}")));
    }
    if budget == 0 {
        return Err(Error::Argument("budget must be at least one cell".into()));
    }
    let mut refiner = AdaptiveRefiner::new(f, phi, base)?;
    let ok = refiner.refine_to_oscillation(epsilon, budget);
    let osc_sum = refiner.osc_sum();
    let partition = refiner.partition();
    let rigor = refiner.rigor();
    Ok(if ok {
        Certification::Certified(IntegrabilityCertificate {
            partition,
            osc_sum,
            epsilon,
            rigor,
        })
    } else {
        Certification::Inconclusive(Inconclusive {
            best_osc_sum: osc_sum,
            epsilon,
            cells: refiner.cells(),
            rigor,
            partition,
        })
    })
}

/// Adaptive enclosure of `∫_I f dΦ` with width at most `tol`.
pub fn integral_enclosure(
    f: &RealFunction,
    phi: &Integrator,
    base: ClosedInterval,
    tol: f64,
    budget: usize,
) -> Result<Enclosure> {
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    if budget == 0 {
        return Err(Error::Argument("budget must be at least one cell".into()));
    }
    let mut refiner = AdaptiveRefiner::new(f, phi, base)?;
    refiner.refine_to_width(tol, budget);
    let e = refiner.enclosure();
    if e.width() <= tol {
        Ok(e)
    } else {
        Err(Error::WidthExceeded {
            tol,
            width: e.width(),
            cells: e.cells,
            best: Box::new(e),
        })
    }
}

/// Splits an enclosure error into the best bracket found, if any.
pub fn best_effort(result: Result<Enclosure>) -> Result<(Enclosure, bool)> {
    match result {
        Ok(e) => Ok((e, true)),
        Err(Error::WidthExceeded { best, .. }) => Ok((*best, false)),
        Err(e) => Err(e),
    }
}

/// Sum of the values, in index order, with the pairwise tree.
pub fn ordered_sum(values: &[f64]) -> f64 {
    pairwise_sum(values)
}

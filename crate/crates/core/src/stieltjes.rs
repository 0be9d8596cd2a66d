//! Integrators `Φ` for Riemann–Stieltjes sums, the transfer identity between
//! `∫ f dΦ`-style sums and plain Riemann sums over the image partition, and
//! the reduction `∫ g dΦ = ∫ g φ` for `Φ' = φ`.
//!
//! An integrator is one of
//!
//! * the identity `Φ(x) = x`;
//! * an explicit nondecreasing function from the gallery;
//! * `Φ(x) = c + F(x) - F(a)` for a density `φ` with closed-form primitive `F`;
//! * a tabulated indefinite integral `Φ(x) = c + ∫_a^x φ` built numerically
//!   on a grid, with certified brackets at the grid points.
//!
//! Every point value comes with a bracket ([`Integrator::enclose`]) and every
//! increment `Φ(r) - Φ(l)` has its own bracket ([`Integrator::increment`]) that
//! is at least as tight as the difference of the point brackets.

use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::darboux::{
    darboux_sums, integral_enclosure, oscillation_sum, partition_slack, Enclosure, Rigor, DEFAULT_BUDGET,
};
use crate::error::{Error, Result};
use crate::functions::{OracleKind, Primitive, RangeEnclosure, RealFunction};
use crate::numeric::{next_down, next_up, pairwise_sum_by, sum_slack, ulps};
use crate::partition::{ClosedInterval, Partition};

/// Grid cells used by [`Integrator::indefinite`] when it falls back to a table.
pub const DEFAULT_GRID_CELLS: usize = 1024;

/// Target width of `Φ(b)` for [`Integrator::indefinite`] tables, relative to
/// `max(1, M_φ |I|)`.
pub const DEFAULT_INDEFINITE_TOL: f64 = 1e-6;

/// Cells scanned when computing the image of a non-monotone integrator.
const IMAGE_SCAN_CELLS: usize = 4096;

#[derive(Clone)]
pub struct Integrator {
    inner: Arc<Inner>,
}

struct Inner {
    name: String,
    domain: ClosedInterval,
    density: Option<RealFunction>,
    repr: Repr,
    nondecreasing: bool,
    image: OnceLock<RangeEnclosure>,
}

enum Repr {
    Identity,
    Explicit(RealFunction),
    Primitive {
        anchor: f64,
        primitive: Primitive,
        at_start: (f64, f64),
    },
    Table(Table),
}

struct Table {
    a: f64,
    h: f64,
    points: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl std::fmt::Debug for Integrator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Integrator")
            .field("name", &self.inner.name)
            .field("domain", &self.inner.domain)
            .finish()
    }
}

fn sub_exact(r: f64, l: f64) -> RangeEnclosure {
    let s = r - l;
    let bb = s - r;
    let err = (r - (s - bb)) + (-l - bb);
    if err == 0.0 {
        RangeEnclosure::point(s)
    } else {
        RangeEnclosure::new(next_down(s), next_up(s))
    }
}

impl Integrator {
    fn build(name: String, domain: ClosedInterval, density: Option<RealFunction>, repr: Repr, nondecreasing: bool) -> Self {
        Integrator {
            inner: Arc::new(Inner {
                name,
                domain,
                density,
                repr,
                nondecreasing,
                image: OnceLock::new(),
            }),
        }
    }

    /// `Φ(x) = x`.
    pub fn identity(domain: ClosedInterval) -> Self {
        Self::build("x".into(), domain, None, Repr::Identity, true)
    }

    /// A nondecreasing function with an exact range oracle used directly as
    /// the integrator. Monotonicity is checked cell by cell on a fine grid.
    pub fn explicit(g: RealFunction) -> Result<Self> {
        if g.oracle_kind() != OracleKind::Exact {
            return Err(Error::Argument(format!(
                "explicit integrator '{}' needs an exact range oracle",
                g.name()
            )));
        }
        let d = g.domain();
        let n = IMAGE_SCAN_CELLS;
        let tol = 1e-12 * (1.0 + g.declared_bound());
        let mut prev = g.evaluate(d.a());
        for k in 0..n {
            let l = if k == 0 { d.a() } else { d.a() + d.length() * k as f64 / n as f64 };
            let r = if k + 1 == n { d.b() } else { d.a() + d.length() * (k + 1) as f64 / n as f64 };
            let (gl, gr) = (prev, g.evaluate(r));
            let range = g.range_unchecked(l, r);
            if gr < gl - tol || range.lo < gl - tol || range.hi > gr + tol {
                return Err(Error::Monotonicity {
                    left: l,
                    right: r,
                    drop: (gl - gr).max(gl - range.lo).max(range.hi - gr),
                });
            }
            prev = gr;
        }
        Ok(Self::build(g.name().to_string(), d, None, Repr::Explicit(g), true))
    }

    /// `Φ(x) = anchor + F(x) - F(a)` from the closed-form primitive of `φ`.
    pub fn from_primitive(phi: &RealFunction, interval: ClosedInterval, anchor: f64) -> Result<Self> {
        check_density(phi, interval, anchor)?;
        let primitive = phi
            .primitive()
            .cloned()
            .ok_or_else(|| Error::Argument(format!("'{}' has no closed-form primitive", phi.name())))?;
        let at_start = primitive(interval.a());
        let nondecreasing = phi.eval_range(interval)?.lo >= 0.0;
        Ok(Self::build(
            format!("∫{}", phi.name()),
            interval,
            Some(phi.clone()),
            Repr::Primitive {
                anchor,
                primitive,
                at_start,
            },
            nondecreasing,
        ))
    }

    /// `Φ(x) = anchor + ∫_a^x φ`, from the closed form when `φ` has one and
    /// from a numeric table otherwise.
    pub fn indefinite(phi: &RealFunction, interval: ClosedInterval, anchor: f64) -> Result<Self> {
        if phi.primitive().is_some() {
            return Self::from_primitive(phi, interval, anchor);
        }
        let scale = (phi.declared_bound() * interval.length()).max(1.0);
        build_indefinite_integral(phi, interval, anchor, DEFAULT_GRID_CELLS, DEFAULT_INDEFINITE_TOL * scale)
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    pub fn domain(&self) -> ClosedInterval {
        self.inner.domain
    }

    /// The density `φ` with `Φ' = φ`, when the integrator was built from one.
    pub fn density(&self) -> Option<&RealFunction> {
        self.inner.density.as_ref()
    }

    /// Whether `Φ` is known to be nondecreasing on its domain.
    pub fn is_nondecreasing(&self) -> bool {
        self.inner.nondecreasing
    }

    /// Nondecreasing with point brackets of rounding width, so that `f ∘ Φ`
    /// inherits an exact oracle from `f`.
    pub fn is_explicit_monotone(&self) -> bool {
        self.inner.nondecreasing && !matches!(self.inner.repr, Repr::Table(_))
    }

    pub fn rigor(&self) -> Rigor {
        match &self.inner.density {
            Some(phi) => Rigor::of(phi),
            None => Rigor::Certified,
        }
    }

    fn check(&self, x: f64) -> Result<()> {
        if !self.inner.domain.contains(x) {
            return Err(Error::domain(&self.inner.name, x, x, self.inner.domain));
        }
        Ok(())
    }

    /// Bracket of `Φ(x)`.
    pub fn enclose(&self, x: f64) -> Result<RangeEnclosure> {
        self.check(x)?;
        Ok(self.enclose_unchecked(x))
    }

    /// Best point estimate of `Φ(x)`, always inside [`Integrator::enclose`].
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.evaluate_unchecked(x))
    }

    pub(crate) fn evaluate_unchecked(&self, x: f64) -> f64 {
        match &self.inner.repr {
            Repr::Identity => x,
            Repr::Explicit(g) => g.evaluate(x),
            Repr::Primitive {
                anchor,
                primitive,
                at_start,
            } => anchor + (primitive(x).0 - at_start.0),
            Repr::Table(_) => self.enclose_unchecked(x).mid(),
        }
    }

    pub(crate) fn enclose_unchecked(&self, x: f64) -> RangeEnclosure {
        match &self.inner.repr {
            Repr::Identity => RangeEnclosure::point(x),
            Repr::Explicit(g) => g.range_unchecked(x, x),
            Repr::Primitive {
                anchor,
                primitive,
                at_start,
            } => {
                let (v, e) = primitive(x);
                let d = v - at_start.0;
                let val = anchor + d;
                let err = e + at_start.1 + ulps(d, 1.0) + ulps(val, 1.0);
                RangeEnclosure::new(val - err, val + err)
            }
            Repr::Table(t) => {
                let phi = self.inner.density.as_ref().expect("tables carry their density");
                t.enclose(phi, x)
            }
        }
    }

    /// Bracket of `Φ(r) - Φ(l)` for `l <= r` inside the domain.
    pub fn increment(&self, l: f64, r: f64) -> Result<RangeEnclosure> {
        self.check(l)?;
        self.check(r)?;
        if l > r {
            return Err(Error::Argument(format!("increment needs l <= r, got [{l}, {r}]")));
        }
        Ok(self.increment_unchecked(l, r).0)
    }

    /// Increment bracket together with the point increment used by the plain
    /// Darboux sums (clamped into the bracket).
    pub(crate) fn increment_unchecked(&self, l: f64, r: f64) -> (RangeEnclosure, f64) {
        let (bracket, point) = match &self.inner.repr {
            Repr::Identity => {
                let b = sub_exact(r, l);
                (b, r - l)
            }
            Repr::Explicit(g) => {
                let (el, er) = (g.range_unchecked(l, l), g.range_unchecked(r, r));
                let lo = (er.lo - el.hi).max(0.0);
                let hi = (er.hi - el.lo).max(lo);
                (
                    RangeEnclosure::new(next_down(lo).max(0.0), next_up(hi)),
                    g.evaluate(r) - g.evaluate(l),
                )
            }
            Repr::Primitive { primitive, .. } => {
                let ((vr, er), (vl, el)) = (primitive(r), primitive(l));
                let d = vr - vl;
                let err = er + el + ulps(d, 1.0);
                let diff = RangeEnclosure::new(d - err, d + err);
                (self.with_density_rectangle(diff, l, r), d)
            }
            Repr::Table(_) => {
                let (el, er) = (self.enclose_unchecked(l), self.enclose_unchecked(r));
                let diff = RangeEnclosure::new(er.lo - el.hi, er.hi - el.lo);
                (self.with_density_rectangle(diff, l, r), er.mid() - el.mid())
            }
        };
        (bracket, point.max(bracket.lo).min(bracket.hi))
    }

    fn density_rectangle(&self, l: f64, r: f64) -> Option<RangeEnclosure> {
        let phi = self.inner.density.as_ref()?;
        let w = sub_exact(r, l);
        let range = phi.range_unchecked(l, r);
        Some(range.mul(w))
    }

    fn with_density_rectangle(&self, diff: RangeEnclosure, l: f64, r: f64) -> RangeEnclosure {
        match self.density_rectangle(l, r) {
            Some(rect) => diff.intersect(rect).unwrap_or(rect),
            None => diff,
        }
    }

    /// Bracket of `Φ([lo, hi])`.
    pub fn range_over(&self, j: ClosedInterval) -> Result<RangeEnclosure> {
        self.check(j.a())?;
        self.check(j.b())?;
        Ok(self.range_over_unchecked(j.a(), j.b()))
    }

    pub(crate) fn range_over_unchecked(&self, lo: f64, hi: f64) -> RangeEnclosure {
        match &self.inner.repr {
            Repr::Identity => RangeEnclosure::new(lo, hi),
            Repr::Explicit(g) => g.range_unchecked(lo, hi),
            _ => {
                let (el, er) = (self.enclose_unchecked(lo), self.enclose_unchecked(hi));
                if self.inner.nondecreasing {
                    return RangeEnclosure::new(el.lo, er.hi.max(el.lo));
                }
                let Some(rect) = self.density_rectangle(lo, hi) else {
                    return el.hull(er);
                };
                let up = rect.hi.max(0.0);
                let down = rect.lo.min(0.0);
                let from_left = RangeEnclosure::new(el.lo + down, el.hi + up);
                let from_right = RangeEnclosure::new(er.lo - up, er.hi - down);
                from_left.intersect(from_right).unwrap_or(from_left)
            }
        }
    }

    /// Bracket of `Φ(I)` over the whole domain.
    pub fn image(&self) -> Result<RangeEnclosure> {
        Ok(*self.inner.image.get_or_init(|| {
            let d = self.inner.domain;
            if self.inner.nondecreasing || d.is_degenerate() {
                return self.range_over_unchecked(d.a(), d.b());
            }
            let n = IMAGE_SCAN_CELLS;
            let mut acc = self.enclose_unchecked(d.a());
            let mut l = d.a();
            for k in 1..=n {
                let r = if k == n { d.b() } else { d.a() + d.length() * k as f64 / n as f64 };
                acc = acc.hull(self.range_over_unchecked(l, r));
                l = r;
            }
            acc
        }))
    }
}

fn check_density(phi: &RealFunction, interval: ClosedInterval, anchor: f64) -> Result<()> {
    if !phi.domain().contains_interval(&interval) {
        return Err(Error::domain(phi.name(), interval.a(), interval.b(), phi.domain()));
    }
    if !anchor.is_finite() {
        return Err(Error::Argument(format!("anchor must be finite, got {anchor}")));
    }
    Ok(())
}

impl Table {
    fn locate(&self, x: f64) -> usize {
        let n = self.points.len() - 1;
        let mut i = (((x - self.a) / self.h).floor().max(0.0) as usize).min(n - 1);
        while i > 0 && self.points[i] > x {
            i -= 1;
        }
        while i + 1 < n && self.points[i + 1] < x {
            i += 1;
        }
        i
    }

    fn enclose(&self, phi: &RealFunction, x: f64) -> RangeEnclosure {
        let i = self.locate(x);
        let (xl, xr) = (self.points[i], self.points[i + 1]);
        if x == xl {
            return RangeEnclosure::new(self.lo[i], self.hi[i]);
        }
        if x == xr {
            return RangeEnclosure::new(self.lo[i + 1], self.hi[i + 1]);
        }
        let left = phi.range_unchecked(xl, x).mul(sub_exact(x, xl));
        let from_left = RangeEnclosure::new(self.lo[i] + left.lo, self.hi[i] + left.hi);
        let right = phi.range_unchecked(x, xr).mul(sub_exact(xr, x));
        let from_right = RangeEnclosure::new(self.lo[i + 1] - right.hi, self.hi[i + 1] - right.lo);
        let e = from_left.intersect(from_right).unwrap_or(from_left);
        let pad = ulps(e.magnitude(), 2.0);
        RangeEnclosure::new(e.lo - pad, e.hi + pad)
    }
}

/// Tabulates `Φ(x) = anchor + ∫_a^x φ` on a uniform grid of `grid_cells`
/// cells. Each grid increment is a certified Darboux enclosure, and the grid
/// brackets are chosen so that the bracket of `Φ(b)` is at most `tol` wide.
/// Off-grid points are bracketed from both neighbouring grid points using the
/// local range of `φ`.
pub fn build_indefinite_integral(
    phi: &RealFunction,
    interval: ClosedInterval,
    anchor: f64,
    grid_cells: usize,
    tol: f64,
) -> Result<Integrator> {
    check_density(phi, interval, anchor)?;
    if grid_cells == 0 {
        return Err(Error::Argument("grid needs at least one cell".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    let (a, b) = (interval.a(), interval.b());
    let n = if interval.is_degenerate() { 1 } else { grid_cells };
    let h = interval.length() / n as f64;
    let mut points: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
    points.push(b);
    let id = Integrator::identity(interval);
    let cell_tol = 0.5 * tol / n as f64;
    let cell_budget = (8 * DEFAULT_BUDGET / n).max(64);

    let mut lo = Vec::with_capacity(n + 1);
    let mut hi = Vec::with_capacity(n + 1);
    lo.push(anchor);
    hi.push(anchor);
    let (mut acc_lo, mut acc_hi) = (anchor, anchor);
    let (mut err_lo, mut err_hi) = (0.0f64, 0.0f64);
    let mut cells = 0usize;
    let mut rigor = Rigor::of(phi);
    for w in points.windows(2) {
        let cell = ClosedInterval::new(w[0], w[1])?;
        let e = match integral_enclosure(phi, &id, cell, cell_tol, cell_budget) {
            Ok(e) => e,
            Err(Error::WidthExceeded { best, .. }) => *best,
            Err(e) => return Err(e),
        };
        cells += e.cells;
        rigor = rigor.and(e.rigor);
        acc_lo += e.lo;
        acc_hi += e.hi;
        err_lo += ulps(acc_lo, 1.0);
        err_hi += ulps(acc_hi, 1.0);
        lo.push(acc_lo - err_lo);
        hi.push(acc_hi + err_hi);
    }
    let table = Table { a, h, points, lo, hi };
    let width = table.hi[n] - table.lo[n];
    if width > tol {
        let best = Enclosure {
            lo: table.lo[n] - anchor,
            hi: table.hi[n] - anchor,
            cells,
            osc_sum: f64::NAN,
            rigor,
        };
        return Err(Error::WidthExceeded {
            tol,
            width,
            cells,
            best: Box::new(best),
        });
    }
    let nondecreasing = phi.eval_range(interval)?.lo >= 0.0;
    Ok(Integrator::build(
        format!("∫{} (tabulated)", phi.name()),
        interval,
        Some(phi.clone()),
        Repr::Table(table),
        nondecreasing,
    ))
}

/// Upper and lower sums of `f` over the induced partition against those of
/// `f ∘ Φ` against `Φ` over `P`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransferReport {
    pub lhs_upper: f64,
    pub rhs_upper: f64,
    pub lhs_lower: f64,
    pub rhs_lower: f64,
    pub max_abs_gap: f64,
    pub slack: f64,
    pub within_slack: bool,
}

/// Compares `U(f, Φ(P))`, `L(f, Φ(P))` (plain sums over the induced
/// partition) with `U(f ∘ Φ, Φ, P)`, `L(f ∘ Φ, Φ, P)`.
pub fn transfer_check(f: &RealFunction, phi: &Integrator, partition: &Partition) -> Result<TransferReport> {
    if f.oracle_kind() != OracleKind::Exact {
        return Err(Error::Argument(format!(
            "transfer check needs an exact oracle for '{}'",
            f.name()
        )));
    }
    let induced = partition.induced(phi)?;
    let id = Integrator::identity(induced.base());
    let lhs = darboux_sums(f, &id, &induced)?;
    let composed = f.compose_with(phi)?;
    let rhs = darboux_sums(&composed, phi, partition)?;
    let slack = partition_slack(f, &id, &induced)? + partition_slack(&composed, phi, partition)?;
    let max_abs_gap = (lhs.upper - rhs.upper).abs().max((lhs.lower - rhs.lower).abs());
    Ok(TransferReport {
        lhs_upper: lhs.upper,
        rhs_upper: rhs.upper,
        lhs_lower: lhs.lower,
        rhs_lower: rhs.lower,
        max_abs_gap,
        slack,
        within_slack: max_abs_gap <= slack,
    })
}

/// Oscillation sums of `g` against `Φ` and of `g φ` against `x`, with the
/// bound linking them in both directions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReductionReport {
    /// `U(g, Φ, P) - L(g, Φ, P)`.
    pub stieltjes_gap: f64,
    /// `U(g φ, P) - L(g φ, P)`.
    pub riemann_gap: f64,
    /// `Σ osc(φ, I_k) |I_k|`.
    pub osc_term: f64,
    /// Declared bound `M_g`.
    pub bound_g: f64,
    /// `riemann_gap <= 2 M_g osc_term + stieltjes_gap`.
    pub bound_ok: bool,
    /// `stieltjes_gap <= 2 M_g osc_term + riemann_gap`.
    pub converse_ok: bool,
    pub slack: f64,
}

/// Checks the reduction bound for `Φ' = φ >= 0` on `P`. Oracle suprema and
/// infima replace sample points, which keeps the bound valid cell by cell.
pub fn reduce_check(g: &RealFunction, phi: &RealFunction, integrator: &Integrator, partition: &Partition) -> Result<ReductionReport> {
    let base = partition.base();
    let inf = phi.eval_range(base)?.lo;
    if inf < 0.0 {
        return Err(Error::Positivity { inf });
    }
    if integrator.density().map(|d| d.name()) != Some(phi.name()) {
        return Err(Error::Argument(format!(
            "integrator '{}' is not the indefinite integral of '{}'",
            integrator.name(),
            phi.name()
        )));
    }
    let stieltjes_gap = oscillation_sum(g, integrator, partition)?;
    let g_phi = g.product(phi)?;
    let id = Integrator::identity(base);
    let riemann_gap = oscillation_sum(&g_phi, &id, partition)?;
    let osc_term = oscillation_sum(phi, &id, partition)?;
    let bound_g = g.declared_bound();
    let n = partition.len();
    let slack = partition_slack(g, integrator, partition)?
        + partition_slack(&g_phi, &id, partition)?
        + sum_slack(
            2.0 * bound_g * pairwise_sum_by(n, &mut |k| {
                let c = partition.cell(k);
                phi.range_unchecked(c.a(), c.b()).magnitude() * c.length()
            }),
            n,
        );
    let bridge = 2.0 * bound_g * osc_term;
    Ok(ReductionReport {
        stieltjes_gap,
        riemann_gap,
        osc_term,
        bound_g,
        bound_ok: riemann_gap <= bridge + stieltjes_gap + slack,
        converse_ok: stieltjes_gap <= bridge + riemann_gap + slack,
        slack,
    })
}

/// Certified enclosure of `∫_I g dΦ` with the default cell budget.
pub fn stieltjes_enclosure(g: &RealFunction, integrator: &Integrator, interval: ClosedInterval, tol: f64) -> Result<Enclosure> {
    integral_enclosure(g, integrator, interval, tol, DEFAULT_BUDGET)
}

//! Change of variable `∫_{Φ(a)}^{Φ(b)} f = ∫_a^b f(Φ) φ` for a Riemann
//! integrable density `φ` that may change sign.
//!
//! The verdict computes both sides independently: the left side as an oriented
//! Darboux enclosure of `f`, the right side as a Darboux enclosure of
//! `f(Φ) φ`. Alongside it, the η-machinery of the proof is replayed:
//!
//! 1. an η-partition with `Σ osc(φ, I_k) |I_k| <= η² |I|`;
//! 2. a classification of its cells into good (`φ` sign-definite), bounded
//!    (`|φ| <= η`) and undulating (everything else);
//! 3. a verification partition refining every good cell until the oscillation
//!    sum of `f(Φ) φ` on it is at most `η |I_k|`;
//! 4. a ledger of the inequalities bounding each class, one row per inequality.

use serde::Serialize;

use crate::darboux::{
    best_effort, certify_integrable, enclosure_on, integral_enclosure, Certification, Enclosure, Rigor, DEFAULT_BUDGET,
};
use crate::error::{Error, Result};
use crate::functions::{RangeEnclosure, RealFunction};
use crate::numeric::{pairwise_sum, sum_slack};
use crate::partition::{ClosedInterval, OrientedInterval, Partition};
use crate::stieltjes::Integrator;

/// Smallest default η. The bound recipe `(1 + 3M_f + 3M_f M_φ) η |I| <= tol`
/// yields η values whose η-partitions need about `1/η²` cells, so the default
/// is clamped here and a smaller η must be requested explicitly.
pub const MIN_DEFAULT_ETA: f64 = 0.01;

/// Searches for a partition with `Σ osc(φ, I_k) |I_k| <= η² |I|`.
pub fn eta_partition(phi: &RealFunction, interval: ClosedInterval, eta: f64, budget: usize) -> Result<Partition> {
    if !(eta > 0.0) {
        return Err(Error::Argument(format!("eta must be positive, got {eta}")));
    }
    if interval.is_degenerate() {
        return Ok(Partition::trivial(interval));
    }
    let target = eta * eta * interval.length();
    match certify_integrable(phi, &Integrator::identity(interval), interval, target, budget)? {
        Certification::Certified(c) => Ok(c.partition),
        Certification::Inconclusive(i) => Err(Error::BudgetExceeded {
            budget,
            best: i.best_osc_sum,
            target,
            cell: None,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CellClass {
    /// `φ` is strictly positive or strictly negative on the cell.
    Good,
    /// Not good and `|φ| <= η` on the cell.
    Bounded,
    /// Neither good nor bounded.
    Undulating,
}

/// Cells of a partition sorted by [`CellClass`].
/// Indices are zero-based.
#[derive(Debug, Clone, Serialize)]
pub struct ClassifiedPartition {
    pub partition: Partition,
    pub eta: f64,
    pub classes: Vec<CellClass>,
    pub ranges: Vec<RangeEnclosure>,
    pub rigor: Rigor,
}

impl ClassifiedPartition {
    fn indices(&self, class: CellClass) -> Vec<usize> {
        (0..self.classes.len()).filter(|&k| self.classes[k] == class).collect()
    }

    pub fn good(&self) -> Vec<usize> {
        self.indices(CellClass::Good)
    }

    pub fn bounded(&self) -> Vec<usize> {
        self.indices(CellClass::Bounded)
    }

    pub fn undulating(&self) -> Vec<usize> {
        self.indices(CellClass::Undulating)
    }

    /// `Σ_{k in class} |I_k|`.
    pub fn measure(&self, class: CellClass) -> f64 {
        let lengths: Vec<f64> = self
            .indices(class)
            .into_iter()
            .map(|k| self.partition.cell(k).length())
            .collect();
        pairwise_sum(&lengths)
    }
}

fn class_of(range: RangeEnclosure, eta: f64) -> CellClass {
    if range.lo > 0.0 || range.hi < 0.0 {
        CellClass::Good
    } else if range.lo.abs().max(range.hi.abs()) <= eta {
        CellClass::Bounded
    } else {
        CellClass::Undulating
    }
}

/// Sorts the cells of `P` by the range of `φ` on each.
pub fn classify(partition: &Partition, phi: &RealFunction, eta: f64) -> Result<ClassifiedPartition> {
    let base = partition.base();
    if !phi.domain().contains_interval(&base) {
        return Err(Error::domain(phi.name(), base.a(), base.b(), phi.domain()));
    }
    let ranges: Vec<RangeEnclosure> = partition.cells().map(|c| phi.range_unchecked(c.a(), c.b())).collect();
    Ok(ClassifiedPartition {
        partition: partition.clone(),
        eta,
        classes: ranges.iter().map(|r| class_of(*r, eta)).collect(),
        ranges,
        rigor: Rigor::of(phi),
    })
}

/// Refinement of a classified partition: every good cell carries its own
/// sub-partition, bounded and undulating cells stay whole.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationPartition {
    pub partition: Partition,
    pub sub_partitions: Vec<Partition>,
    pub cells: usize,
}

/// `f(Φ) φ` on the integrator's domain.
pub fn substituted_integrand(f: &RealFunction, phi: &RealFunction, integrator: &Integrator) -> Result<RealFunction> {
    f.compose_with(integrator)?.product(phi)
}

/// Refines every good cell `I_k` until the oscillation sum of `f(Φ) φ` on it
/// is at most `η |I_k|`, using at most `budget` cells in total.
pub fn build_verification_partition(
    f: &RealFunction,
    phi: &RealFunction,
    integrator: &Integrator,
    classified: &ClassifiedPartition,
    eta: f64,
    budget: usize,
) -> Result<VerificationPartition> {
    let g = substituted_integrand(f, phi, integrator)?;
    let p = &classified.partition;
    let mut subs = Vec::with_capacity(p.len());
    let mut used = 0usize;
    for (k, cell) in p.cells().enumerate() {
        if classified.classes[k] != CellClass::Good || cell.is_degenerate() {
            subs.push(Partition::trivial(cell));
            used += 1;
            continue;
        }
        let target = eta * cell.length();
        let range = g.range_unchecked(cell.a(), cell.b());
        if range.width() * cell.length() <= target {
            subs.push(Partition::trivial(cell));
            used += 1;
            continue;
        }
        let remaining = budget.saturating_sub(used).max(1);
        match certify_integrable(&g, &Integrator::identity(cell), cell, target, remaining)? {
            Certification::Certified(c) => {
                used += c.partition.len();
                subs.push(c.partition);
            }
            Certification::Inconclusive(i) => {
                return Err(Error::BudgetExceeded {
                    budget,
                    best: i.best_osc_sum,
                    target,
                    cell: Some(k),
                })
            }
        }
    }
    let mut points: Vec<f64> = Vec::with_capacity(used + 1);
    for s in &subs {
        let bp = s.breakpoints();
        points.extend_from_slice(&bp[..bp.len() - 1]);
    }
    points.push(p.base().b());
    Ok(VerificationPartition {
        partition: Partition::new(points)?,
        sub_partitions: subs,
        cells: used,
    })
}

/// One inequality `lhs <= rhs` of the ledger.
#[derive(Debug, Clone, Serialize)]
pub struct LedgerRow {
    pub eq: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Quantitative bounds of the proof, evaluated on concrete partitions.
///
/// | row | inequality |
/// |-----|------------|
/// | 18  | `Σ_k osc(φ, I_k)|I_k| <= η²|I|` |
/// | 19  | `Σ_{k∈G} osc-sum of f(Φ)φ over P^k <= η Σ_G |I_k|` |
/// | 20  | `Σ_{k∈G} |∫_{𝓘_k} f - U(f(Φ)φ, P^k)| <= η Σ_G |I_k|` |
/// | 21  | `max_k |Φ(x_{k,r}) - Φ(x_{k,l})| / |I_k| <= M_φ` |
/// | 26  | `Σ_{k∈B} osc(f(Φ)φ, I_k)|I_k| <= 2 M_f η Σ_B |I_k|` |
/// | 27  | `Σ_{k∈B} |∫_{𝓘_k} f - U(f(Φ)φ, {I_k})| <= 3 M_f η Σ_B |I_k|` |
/// | 28  | `Σ_{k∈U} |I_k| <= η|I|` |
/// | 29  | `Σ_{k∈U} osc(f(Φ)φ, I_k)|I_k| <= 2 M_f M_φ η|I|` |
/// | 30  | `Σ_{k∈U} |∫_{𝓘_k} f - U(f(Φ)φ, {I_k})| <= 3 M_f M_φ η|I|` |
/// | 31  | `osc-sum of f(Φ)φ over P' <= (1 + 2M_f + 2M_f M_φ) η|I|` |
#[derive(Debug, Clone, Serialize)]
pub struct BoundLedger {
    pub eta: f64,
    pub rows: Vec<LedgerRow>,
    pub all_ok: bool,
    pub rigor: Rigor,
}

impl BoundLedger {
    pub fn row(&self, eq: &str) -> Option<&LedgerRow> {
        self.rows.iter().find(|r| r.eq == eq)
    }
}

/// Ulps of the relevant bound, per unit of base length, allowed for the
/// outward widening of range oracles when comparing a ledger row.
const ORACLE_ULPS: f64 = 32.0;

fn row(eq: &str, lhs: f64, rhs: f64, terms: usize, allowance: f64) -> LedgerRow {
    let slack = sum_slack(lhs.abs() + rhs.abs(), terms.max(1)) + allowance + f64::MIN_POSITIVE;
    LedgerRow {
        eq: eq.to_string(),
        lhs,
        rhs,
        ok: lhs <= rhs + slack,
    }
}

/// Upper bound on `|v - u|` over all `v` in the enclosure.
fn gap_bound(e: &Enclosure, u: f64) -> f64 {
    (e.lo - u).abs().max((e.hi - u).abs())
}

/// Single-cell bracket of `∫_{𝓘} f` over an oriented interval.
fn coarse_oriented(f: &RealFunction, j: OrientedInterval) -> Result<Enclosure> {
    let carrier = clip_to_domain(f, j.carrier());
    Ok(enclosure_on(f, &Integrator::identity(carrier), &Partition::trivial(carrier))?.oriented(j.sign()))
}

fn clip_to_domain(f: &RealFunction, j: ClosedInterval) -> ClosedInterval {
    let d = f.domain();
    let a = j.a().max(d.a()).min(d.b());
    let b = j.b().min(d.b()).max(a);
    ClosedInterval::new(a, b).expect("clipped interval")
}

fn induced_interval(integrator: &Integrator, cell: ClosedInterval) -> Result<OrientedInterval> {
    OrientedInterval::new(integrator.evaluate(cell.a())?, integrator.evaluate(cell.b())?)
}

/// Evaluates every ledger row on the classified partition and its
/// verification refinement.
pub fn verify_ledger(
    f: &RealFunction,
    phi: &RealFunction,
    integrator: &Integrator,
    classified: &ClassifiedPartition,
    verification: &VerificationPartition,
) -> Result<BoundLedger> {
    let g = substituted_integrand(f, phi, integrator)?;
    let id_base = Integrator::identity(classified.partition.base());
    let p = &classified.partition;
    let eta = classified.eta;
    let length = p.base().length();
    let m_f = f.declared_bound();
    let m_phi = phi.declared_bound();
    let n = p.len();

    let osc_phi: Vec<f64> = (0..n).map(|k| classified.ranges[k].width() * p.cell(k).length()).collect();

    let mut g_osc = vec![Vec::new(); 3];
    let mut gaps = vec![Vec::new(); 3];
    let mut lengths = vec![Vec::new(); 3];
    let mut max_slope: f64 = 0.0;
    let mut rigor = Rigor::of(f).and(Rigor::of(phi));
    for k in 0..n {
        let cell = p.cell(k);
        let class = classified.classes[k] as usize;
        lengths[class].push(cell.length());
        let inc = integrator.increment(cell.a(), cell.b())?;
        if cell.length() > 0.0 {
            max_slope = max_slope.max(inc.lo.abs().max(inc.hi.abs()) / cell.length());
        }
        let sub = &verification.sub_partitions[k];
        let e = enclosure_on(&g, &id_base, sub)?;
        let upper = crate::darboux::upper_sum(&g, &id_base, sub)?;
        let lower = crate::darboux::lower_sum(&g, &id_base, sub)?;
        g_osc[class].push(upper - lower);
        rigor = rigor.and(e.rigor);

        let j = induced_interval(integrator, cell)?;
        let mut lhs = coarse_oriented(f, j)?;
        if classified.classes[k] == CellClass::Good {
            let budget_tol = 0.5 * (eta * cell.length() - (upper - lower));
            if gap_bound(&lhs, upper) > eta * cell.length() && budget_tol > 0.0 {
                let (fine, _) = best_effort(oriented_integral_with_budget(f, j, budget_tol, DEFAULT_BUDGET))?;
                lhs = fine;
            }
        }
        gaps[class].push(gap_bound(&lhs, upper));
    }
    let (gi, bi, ui) = (
        CellClass::Good as usize,
        CellClass::Bounded as usize,
        CellClass::Undulating as usize,
    );
    let measure = |c: usize| pairwise_sum(&lengths[c]);
    let total = |v: &Vec<f64>| pairwise_sum(v);
    let all_osc: Vec<f64> = g_osc.iter().flatten().copied().collect();

    let phi_allow = ORACLE_ULPS * f64::EPSILON * m_phi * length;
    let g_allow = ORACLE_ULPS * f64::EPSILON * m_f * m_phi.max(1.0) * length;
    let rows = vec![
        row("18", pairwise_sum(&osc_phi), eta * eta * length, n, phi_allow),
        row("19", total(&g_osc[gi]), eta * measure(gi), g_osc[gi].len(), g_allow),
        row("20", total(&gaps[gi]), eta * measure(gi), gaps[gi].len(), g_allow),
        row("21", max_slope, m_phi, 1, ORACLE_ULPS * f64::EPSILON * m_phi),
        row("26", total(&g_osc[bi]), 2.0 * m_f * eta * measure(bi), g_osc[bi].len(), g_allow),
        row("27", total(&gaps[bi]), 3.0 * m_f * eta * measure(bi), gaps[bi].len(), g_allow),
        row("28", measure(ui), eta * length, lengths[ui].len(), 0.0),
        row("29", total(&g_osc[ui]), 2.0 * m_f * m_phi * eta * length, g_osc[ui].len(), g_allow),
        row("30", total(&gaps[ui]), 3.0 * m_f * m_phi * eta * length, gaps[ui].len(), g_allow),
        row(
            "31",
            pairwise_sum(&all_osc),
            (1.0 + 2.0 * m_f + 2.0 * m_f * m_phi) * eta * length,
            verification.cells,
            g_allow,
        ),
    ];
    let all_ok = rows.iter().all(|r| r.ok);
    Ok(BoundLedger {
        eta,
        rows,
        all_ok,
        rigor,
    })
}

/// Enclosure of the oriented integral `∫_J f`, negated when `J` runs right to
/// left.
pub fn oriented_integral(f: &RealFunction, j: OrientedInterval, tol: f64) -> Result<Enclosure> {
    oriented_integral_with_budget(f, j, tol, DEFAULT_BUDGET)
}

/// [`oriented_integral`] with an explicit cell budget.
pub fn oriented_integral_with_budget(f: &RealFunction, j: OrientedInterval, tol: f64, budget: usize) -> Result<Enclosure> {
    let carrier = j.carrier();
    let sign = j.sign();
    match integral_enclosure(f, &Integrator::identity(carrier), carrier, tol, budget) {
        Ok(e) => Ok(e.oriented(sign)),
        Err(Error::WidthExceeded { tol, width, cells, best }) => Err(Error::WidthExceeded {
            tol,
            width,
            cells,
            best: Box::new(best.oriented(sign)),
        }),
        Err(e) => Err(e),
    }
}

/// Both sides of the change-of-variable formula and the ledger replaying its
/// proof.
#[derive(Debug, Clone, Serialize)]
pub struct SubstitutionVerdict {
    /// Oriented `∫_{Φ(a)}^{Φ(b)} f`.
    pub lhs: Enclosure,
    /// `∫_a^b f(Φ) φ`.
    pub rhs: Enclosure,
    pub overlap: bool,
    pub max_width: f64,
    pub eta: f64,
    pub rigor: Rigor,
    pub ledger: BoundLedger,
}

/// The default η for a target width `tol`.
pub fn default_eta(f: &RealFunction, phi: &RealFunction, interval: ClosedInterval, tol: f64) -> f64 {
    let m_f = f.declared_bound();
    let m_phi = phi.declared_bound();
    let recipe = tol / ((1.0 + 3.0 * m_f + 3.0 * m_f * m_phi) * interval.length().max(f64::MIN_POSITIVE));
    recipe.max(MIN_DEFAULT_ETA)
}

/// Builds `Φ(x) = anchor + ∫_a^x φ`, then encloses both sides of the
/// change-of-variable formula to width `tol` and evaluates the ledger.
pub fn change_of_variable(
    f: &RealFunction,
    phi: &RealFunction,
    interval: ClosedInterval,
    anchor: f64,
    eta: Option<f64>,
    tol: f64,
    budget: usize,
) -> Result<SubstitutionVerdict> {
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    let integrator = Integrator::indefinite(phi, interval, anchor)?;
    let g = substituted_integrand(f, phi, &integrator)?;
    let eta = eta.unwrap_or_else(|| default_eta(f, phi, interval, tol));

    let lhs = lhs_enclosure(f, &integrator, tol, budget)?;
    let rhs = integral_enclosure(&g, &Integrator::identity(interval), interval, tol, budget)?;

    let p = eta_partition(phi, interval, eta, budget)?;
    let classified = classify(&p, phi, eta)?;
    let verification = build_verification_partition(f, phi, &integrator, &classified, eta, budget)?;
    let ledger = verify_ledger(f, phi, &integrator, &classified, &verification)?;

    Ok(SubstitutionVerdict {
        overlap: lhs.overlaps(&rhs),
        max_width: lhs.width().max(rhs.width()),
        eta,
        rigor: lhs.rigor.and(rhs.rigor).and(ledger.rigor),
        lhs,
        rhs,
        ledger,
    })
}

/// Oriented `∫_{Φ(a)}^{Φ(b)} f`, widened to absorb the uncertainty of the
/// endpoints `Φ(a)`, `Φ(b)` and any clipping into the domain of `f`.
pub fn lhs_enclosure(f: &RealFunction, integrator: &Integrator, tol: f64, budget: usize) -> Result<Enclosure> {
    let d = integrator.domain();
    let (ea, eb) = (integrator.enclose(d.a())?, integrator.enclose(d.b())?);
    let j = OrientedInterval::new(integrator.evaluate(d.a())?, integrator.evaluate(d.b())?)?;
    let carrier = clip_to_domain(f, j.carrier());
    let clipped = (carrier.a() - j.carrier().a()).abs() + (j.carrier().b() - carrier.b()).abs();
    let m_f = f.declared_bound();
    let pad = m_f * (ea.width() + eb.width() + clipped);
    let inner_tol = if tol > 2.0 * pad { tol - 2.0 * pad } else { tol };
    let clipped_j = if j.sign() < 0.0 {
        OrientedInterval::new(carrier.b(), carrier.a())?
    } else {
        OrientedInterval::new(carrier.a(), carrier.b())?
    };
    if clipped_j.is_degenerate() {
        return Ok(Enclosure::zero(Rigor::of(f)).widen(pad));
    }
    match oriented_integral_with_budget(f, clipped_j, inner_tol, budget) {
        Ok(e) => Ok(e.widen(pad)),
        Err(Error::WidthExceeded { best, cells, .. }) => {
            let best = best.widen(pad);
            Err(Error::WidthExceeded {
                tol,
                width: best.width(),
                cells,
                best: Box::new(best),
            })
        }
        Err(e) => Err(e),
    }
}

/// One mesh of the matched Riemann-sum comparison.
#[derive(Debug, Clone, Serialize)]
pub struct MonotoneRow {
    pub cells: usize,
    pub mesh: f64,
    /// `Σ f(Φ(ξ_k)) (Φ(x_{k,r}) - Φ(x_{k,l}))`, a Riemann sum of `f` over the
    /// induced partition with sample points `Φ(ξ_k)`.
    pub lhs: f64,
    /// `Σ f(Φ(ξ_k)) φ(ξ_k) |I_k|`.
    pub rhs: f64,
    pub gap: f64,
    /// Cells whose mean-value point was not bracketed and fell back to the
    /// midpoint.
    pub fallback_cells: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotoneReport {
    pub rows: Vec<MonotoneRow>,
    pub converged_gap: f64,
    pub rigor: Rigor,
}

impl MonotoneReport {
    pub fn riemann_sums_lhs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.lhs).collect()
    }

    pub fn riemann_sums_rhs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.rhs).collect()
    }
}

/// Point `ξ` in `[l, r]` with `φ(ξ) |I_k| = Φ(r) - Φ(l)`, by bisection to
/// `1e-12 |I_k|`.
pub fn mean_value_point(phi: &dyn Fn(f64) -> f64, l: f64, r: f64, increment: f64) -> Result<f64> {
    let w = r - l;
    let slope = increment / w;
    let h = |x: f64| phi(x) - slope;
    let (hl, hr) = (h(l), h(r));
    if hl == 0.0 {
        return Ok(l);
    }
    if hr == 0.0 {
        return Ok(r);
    }
    let (mut lo, mut hi, mut hlo) = if hl.signum() != hr.signum() {
        (l, r, hl)
    } else {
        let m = l + 0.5 * w;
        let hm = h(m);
        if hm == 0.0 {
            return Ok(m);
        }
        if hm.signum() == hl.signum() {
            return Err(Error::RootNotBracketed { lo: l, hi: r });
        }
        (l, m, hl)
    };
    let tol = 1e-12 * w;
    while hi - lo > tol {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let hm = h(mid);
        if hm == 0.0 {
            return Ok(mid);
        }
        if hm.signum() == hlo.signum() {
            lo = mid;
            hlo = hm;
        } else {
            hi = mid;
        }
    }
    Ok(lo + 0.5 * (hi - lo))
}

/// Matched Riemann sums for a continuous nondecreasing `Φ` whose derivative
/// `φ` may be unbounded, evaluated at mean-value points on uniform meshes of
/// `meshes[i]` cells.
pub fn monotone_unbounded_check(
    f: &RealFunction,
    big_phi: &dyn Fn(f64) -> f64,
    phi: &dyn Fn(f64) -> f64,
    interval: ClosedInterval,
    meshes: &[usize],
) -> Result<MonotoneReport> {
    let mut rows = Vec::with_capacity(meshes.len());
    let mut rigor = Rigor::Certified;
    for &n in meshes {
        let p = Partition::uniform(interval, n)?;
        let mut lhs_terms = Vec::with_capacity(n);
        let mut rhs_terms = Vec::with_capacity(n);
        let mut fallback = Vec::new();
        for (k, cell) in p.cells().enumerate() {
            let (l, r) = (cell.a(), cell.b());
            let inc = big_phi(r) - big_phi(l);
            let xi = match mean_value_point(phi, l, r, inc) {
                Ok(x) => x,
                Err(Error::RootNotBracketed { .. }) => {
                    fallback.push(k);
                    rigor = Rigor::Heuristic;
                    cell.midpoint()
                }
                Err(e) => return Err(e),
            };
            let fy = f.evaluate(big_phi(xi));
            lhs_terms.push(fy * inc);
            rhs_terms.push(fy * phi(xi) * cell.length());
        }
        let lhs = pairwise_sum(&lhs_terms);
        let rhs = pairwise_sum(&rhs_terms);
        rows.push(MonotoneRow {
            cells: n,
            mesh: p.mesh(),
            lhs,
            rhs,
            gap: (lhs - rhs).abs(),
            fallback_cells: fallback,
        });
    }
    Ok(MonotoneReport {
        converged_gap: rows.last().map_or(0.0, |r| r.gap),
        rows,
        rigor,
    })
}

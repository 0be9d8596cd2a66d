//! Bounded real functions with per-interval range oracles.
//!
//! Every function carries a domain, a declared bound `M` with `|f| <= M` on the
//! domain, and an oracle that answers "what are `inf_J f` and `sup_J f`?" for a
//! subinterval `J`. The oracle's [`OracleKind`] decides how far downstream
//! results can be trusted:
//!
//! * [`OracleKind::Exact`] returns the true hull (up to a few ulps of outward
//!   widening) from piecewise-monotonicity metadata.
//! * [`OracleKind::Enclosing`] returns a sound but possibly wider bracket; this
//!   is what compositions with non-monotone integrators and products produce.
//! * [`OracleKind::Sampled`] takes the hull of finitely many samples. It may
//!   miss the true extremes, so anything derived from it is heuristic.

mod gallery;
mod poly;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

pub use gallery::{entries as gallery_entries, resolve, GalleryEntry, DEFAULT_SAMPLES, DEFAULT_THOMAE_DENOMINATOR};
pub use poly::Polynomial;

use crate::error::{Error, Result};
use crate::numeric::ulps;
use crate::partition::ClosedInterval;
use crate::stieltjes::Integrator;

/// Antiderivative returning `(value, absolute error bound)`.
pub type Primitive = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;
type Callable = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `[lo, hi]` bracketing the values of a function on an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeEnclosure {
    pub lo: f64,
    pub hi: f64,
}

impl RangeEnclosure {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(!(lo > hi), "inverted range [{lo}, {hi}]");
        RangeEnclosure { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        RangeEnclosure { lo: v, hi: v }
    }

    /// `sup - inf`, the oscillation when the oracle is exact.
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        self.lo + 0.5 * (self.hi - self.lo)
    }

    pub fn magnitude(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn negate(self) -> Self {
        RangeEnclosure {
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    /// Interval product.
    pub fn mul(self, other: RangeEnclosure) -> Self {
        let c = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pad = ulps(lo.abs().max(hi.abs()), 1.0);
        RangeEnclosure { lo: lo - pad, hi: hi + pad }
    }

    pub fn hull(self, other: RangeEnclosure) -> Self {
        RangeEnclosure {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn intersect(self, other: RangeEnclosure) -> Option<Self> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(RangeEnclosure { lo, hi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum OracleKind {
    Exact,
    Enclosing,
    Sampled { samples: usize },
}

impl OracleKind {
    /// Sound oracles never under-report the hull.
    pub fn is_sound(&self) -> bool {
        !matches!(self, OracleKind::Sampled { .. })
    }
}

#[derive(Clone)]
enum Body {
    Poly(Polynomial),
    Power(f64),
    Cos,
    Sin,
    Step(f64),
    Abs(f64),
    Thomae(u32),
    Sampled { eval: Callable, samples: usize },
    Negate(RealFunction),
    Reflect(RealFunction),
    Compose(RealFunction, Integrator),
    Product(RealFunction, RealFunction),
}

struct Inner {
    name: String,
    domain: ClosedInterval,
    bound: f64,
    body: Body,
    primitive: Option<Primitive>,
}

/// A bounded function on a closed interval together with its range oracle.
///
/// Cloning is cheap; evaluation and range queries take `&self` and never
/// mutate, so a function can be shared freely across threads.
#[derive(Clone)]
pub struct RealFunction {
    inner: Arc<Inner>,
}

impl fmt::Debug for RealFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealFunction")
            .field("name", &self.inner.name)
            .field("domain", &self.inner.domain)
            .field("bound", &self.inner.bound)
            .field("kind", &self.oracle_kind())
            .finish()
    }
}

const PI: f64 = std::f64::consts::PI;

/// Is there an integer `k` with `offset + k*period` in `[lo, hi]`, allowing for
/// the rounding in `k*period`?
fn hits_lattice(lo: f64, hi: f64, offset: f64, period: f64) -> bool {
    let slack = 8.0 * f64::EPSILON * (lo.abs().max(hi.abs()) + period);
    let k = ((lo - slack - offset) / period).ceil();
    offset + k * period <= hi + slack
}

fn dirichlet_eval(x: f64) -> f64 {
    // Floats are all rational; dyadic rationals with at most 40 fractional
    // bits play the role of the rationals.
    if x.is_finite() && (x * 1_099_511_627_776.0).fract() == 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Sample abscissae for sampled oracles: the endpoints, a dyadic lattice and a
/// golden-ratio Weyl sequence.
fn sample_points(lo: f64, hi: f64, n: usize, mut visit: impl FnMut(f64)) {
    visit(lo);
    if hi == lo {
        return;
    }
    visit(hi);
    let w = hi - lo;
    let n = n.max(2) - 2;
    let lattice = n / 2;
    let mut used = 0;
    if lattice > 0 {
        let m = ((lattice as f64 + 1.0) / w).log2().ceil();
        if m.abs() < 60.0 {
            let scale = 2f64.powi(m as i32);
            let mut k = (lo * scale).ceil();
            while used < lattice {
                let x = k / scale;
                if x > hi {
                    break;
                }
                if x > lo && x < hi {
                    visit(x);
                    used += 1;
                }
                k += 1.0;
            }
        }
    }
    const ALPHA: f64 = 0.618_033_988_749_894_9;
    for i in 1..=(n - used) {
        let t = (i as f64 * ALPHA).fract();
        visit(lo + w * t);
    }
}

impl RealFunction {
    fn build(name: String, domain: ClosedInterval, bound: Option<f64>, body: Body, primitive: Option<Primitive>) -> Self {
        let mut f = RealFunction {
            inner: Arc::new(Inner {
                name,
                domain,
                bound: 0.0,
                body,
                primitive,
            }),
        };
        let bound = bound.unwrap_or_else(|| f.range_unchecked(domain.a(), domain.b()).magnitude());
        Arc::get_mut(&mut f.inner).expect("fresh").bound = bound;
        f
    }

    pub(crate) fn polynomial(name: String, domain: ClosedInterval, p: Polynomial) -> Self {
        let anti = p.antiderivative();
        let primitive: Primitive = Arc::new(move |x| anti.eval_with_error(x));
        Self::build(name, domain, None, Body::Poly(p), Some(primitive))
    }

    pub(crate) fn power(name: String, domain: ClosedInterval, p: f64) -> Result<Self> {
        if !(p > 0.0) || domain.a() < 0.0 {
            return Err(Error::Argument(format!("x^p needs p > 0 on a nonnegative domain (p = {p})")));
        }
        let primitive: Primitive = Arc::new(move |x: f64| {
            let v = x.powf(p + 1.0) / (p + 1.0);
            (v, ulps(v, 4.0))
        });
        Ok(Self::build(name, domain, None, Body::Power(p), Some(primitive)))
    }

    pub(crate) fn cosine(name: String, domain: ClosedInterval) -> Self {
        Self::build(name, domain, None, Body::Cos, Some(Arc::new(|x: f64| {
            let v = x.sin();
            (v, ulps(v, 2.0))
        })))
    }

    pub(crate) fn sine(name: String, domain: ClosedInterval) -> Self {
        Self::build(name, domain, None, Body::Sin, Some(Arc::new(|x: f64| {
            let v = -x.cos();
            (v, ulps(v, 2.0))
        })))
    }

    pub(crate) fn step(name: String, domain: ClosedInterval, at: f64) -> Self {
        let primitive: Primitive = Arc::new(move |x: f64| {
            let v = (x - at).max(0.0);
            (v, ulps(v, 1.0))
        });
        Self::build(name, domain, None, Body::Step(at), Some(primitive))
    }

    pub(crate) fn abs_shift(name: String, domain: ClosedInterval, c: f64) -> Self {
        let primitive: Primitive = Arc::new(move |x: f64| {
            let v = 0.5 * (x - c) * (x - c).abs();
            (v, ulps(v, 4.0))
        });
        Self::build(name, domain, None, Body::Abs(c), Some(primitive))
    }

    pub(crate) fn thomae(name: String, domain: ClosedInterval, q_max: u32) -> Result<Self> {
        if q_max == 0 {
            return Err(Error::Argument("thomae needs a denominator cap >= 1".into()));
        }
        let primitive: Primitive = Arc::new(|_| (0.0, 0.0));
        Ok(Self::build(name, domain, None, Body::Thomae(q_max), Some(primitive)))
    }

    pub(crate) fn dirichlet(name: String, domain: ClosedInterval, samples: usize) -> Self {
        Self::build(
            name,
            domain,
            Some(1.0),
            Body::Sampled {
                eval: Arc::new(dirichlet_eval),
                samples,
            },
            None,
        )
    }

    /// Wraps an arbitrary callable. Its oracle takes the hull of `samples`
    /// evaluations per interval, so every result derived from it is heuristic.
    pub fn sampled(
        name: impl Into<String>,
        domain: ClosedInterval,
        declared_bound: f64,
        samples: usize,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(declared_bound >= 0.0) {
            return Err(Error::Argument("declared bound must be nonnegative".into()));
        }
        if samples < 2 {
            return Err(Error::Argument("sampled oracles need at least two samples".into()));
        }
        Ok(Self::build(
            name.into(),
            domain,
            Some(declared_bound),
            Body::Sampled {
                eval: Arc::new(eval),
                samples,
            },
            None,
        ))
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    pub fn domain(&self) -> ClosedInterval {
        self.inner.domain
    }

    /// `M` with `|f(x)| <= M` on the domain.
    pub fn declared_bound(&self) -> f64 {
        self.inner.bound
    }

    pub fn oracle_kind(&self) -> OracleKind {
        match &self.inner.body {
            Body::Sampled { samples, .. } => OracleKind::Sampled { samples: *samples },
            Body::Negate(f) | Body::Reflect(f) => f.oracle_kind(),
            Body::Compose(f, phi) => match f.oracle_kind() {
                k @ OracleKind::Sampled { .. } => k,
                OracleKind::Exact if phi.is_explicit_monotone() => OracleKind::Exact,
                _ => OracleKind::Enclosing,
            },
            Body::Product(a, b) => match (a.oracle_kind(), b.oracle_kind()) {
                (k @ OracleKind::Sampled { .. }, _) | (_, k @ OracleKind::Sampled { .. }) => k,
                _ => OracleKind::Enclosing,
            },
            _ => OracleKind::Exact,
        }
    }

    /// Point evaluation. The argument is not checked against the domain.
    pub fn evaluate(&self, x: f64) -> f64 {
        match &self.inner.body {
            Body::Poly(p) => p.eval(x),
            Body::Power(p) => x.powf(*p),
            Body::Cos => x.cos(),
            Body::Sin => x.sin(),
            Body::Step(c) => {
                if x > *c {
                    1.0
                } else {
                    0.0
                }
            }
            Body::Abs(c) => (x - c).abs(),
            Body::Thomae(q_max) => thomae_eval(x, *q_max),
            Body::Sampled { eval, .. } => eval(x),
            Body::Negate(f) => -f.evaluate(x),
            Body::Reflect(f) => f.evaluate(-x),
            Body::Compose(f, phi) => {
                let y = phi.evaluate_unchecked(x);
                f.evaluate(f.inner.domain.a().max(y.min(f.inner.domain.b())))
            }
            Body::Product(a, b) => a.evaluate(x) * b.evaluate(x),
        }
    }

    /// Range oracle on `J`, which must lie inside the domain.
    pub fn eval_range(&self, j: ClosedInterval) -> Result<RangeEnclosure> {
        if !self.inner.domain.contains_interval(&j) {
            return Err(Error::domain(&self.inner.name, j.a(), j.b(), self.inner.domain));
        }
        Ok(self.range_unchecked(j.a(), j.b()))
    }

    /// Range oracle on `[lo, hi]` without the domain check.
    pub(crate) fn range_unchecked(&self, lo: f64, hi: f64) -> RangeEnclosure {
        match &self.inner.body {
            Body::Poly(p) => {
                let (a, b) = p.range(lo, hi);
                RangeEnclosure::new(a, b)
            }
            Body::Power(p) => {
                let (a, b) = (lo.max(0.0).powf(*p), hi.max(0.0).powf(*p));
                RangeEnclosure::new((a - ulps(a, 2.0)).max(0.0), b + ulps(b, 2.0))
            }
            Body::Cos => trig_range(lo, hi, f64::cos, 0.0),
            Body::Sin => trig_range(lo, hi, f64::sin, 0.5 * PI),
            Body::Step(c) => {
                if hi <= *c {
                    RangeEnclosure::point(0.0)
                } else if lo > *c {
                    RangeEnclosure::point(1.0)
                } else {
                    RangeEnclosure::new(0.0, 1.0)
                }
            }
            Body::Abs(c) => {
                let (a, b) = ((lo - c).abs(), (hi - c).abs());
                let top = a.max(b);
                let bottom = if lo <= *c && *c <= hi { 0.0 } else { a.min(b) };
                RangeEnclosure::new((bottom - ulps(bottom, 1.0)).max(0.0), top + ulps(top, 1.0))
            }
            Body::Thomae(q_max) => thomae_range(lo, hi, *q_max),
            Body::Sampled { eval, samples } => {
                let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
                sample_points(lo, hi, *samples, |x| {
                    let v = eval(x);
                    min = min.min(v);
                    max = max.max(v);
                });
                RangeEnclosure::new(min, max)
            }
            Body::Negate(f) => f.range_unchecked(lo, hi).negate(),
            Body::Reflect(f) => f.range_unchecked(-hi, -lo),
            Body::Compose(f, phi) => {
                let image = phi.range_over_unchecked(lo, hi);
                let d = f.inner.domain;
                let a = image.lo.max(d.a()).min(d.b());
                let b = image.hi.min(d.b()).max(a);
                f.range_unchecked(a, b)
            }
            Body::Product(a, b) => a.range_unchecked(lo, hi).mul(b.range_unchecked(lo, hi)),
        }
    }

    /// Closed-form `∫_J f` when the function carries an exact primitive.
    pub fn closed_form_integral(&self, j: ClosedInterval) -> Option<f64> {
        self.inner.primitive.as_ref().map(|p| p(j.b()).0 - p(j.a()).0)
    }

    pub fn primitive(&self) -> Option<&Primitive> {
        self.inner.primitive.as_ref()
    }

    /// `x ↦ -f(x)`.
    pub fn negate(&self) -> RealFunction {
        let primitive = self.inner.primitive.clone().map(|p| -> Primitive { Arc::new(move |x| {
            let (v, e) = p(x);
            (-v, e)
        }) });
        RealFunction {
            inner: Arc::new(Inner {
                name: format!("-({})", self.inner.name),
                domain: self.inner.domain,
                bound: self.inner.bound,
                body: Body::Negate(self.clone()),
                primitive,
            }),
        }
    }

    /// `y ↦ f(-y)` on the reflected domain.
    pub fn reflect(&self) -> RealFunction {
        let d = self.inner.domain;
        let primitive = self.inner.primitive.clone().map(|p| -> Primitive { Arc::new(move |y| {
            let (v, e) = p(-y);
            (-v, e)
        }) });
        RealFunction {
            inner: Arc::new(Inner {
                name: format!("({})(-y)", self.inner.name),
                domain: ClosedInterval::new(-d.b(), -d.a()).expect("reflected domain"),
                bound: self.inner.bound,
                body: Body::Reflect(self.clone()),
                primitive,
            }),
        }
    }

    /// `f ∘ Φ` on the integrator's domain. The range of `Φ` must lie inside the
    /// domain of `f` (up to rounding).
    pub fn compose_with(&self, phi: &Integrator) -> Result<RealFunction> {
        let image = phi.image()?;
        let d = self.inner.domain;
        let tol = 1e-12 * (1.0 + image.lo.abs().max(image.hi.abs()));
        if image.lo < d.a() - tol || image.hi > d.b() + tol {
            return Err(Error::domain(&self.inner.name, image.lo, image.hi, d));
        }
        Ok(RealFunction {
            inner: Arc::new(Inner {
                name: format!("({})∘Φ", self.inner.name),
                domain: phi.domain(),
                bound: self.inner.bound,
                body: Body::Compose(self.clone(), phi.clone()),
                primitive: None,
            }),
        })
    }

    /// Pointwise product on the intersection of the two domains.
    pub fn product(&self, other: &RealFunction) -> Result<RealFunction> {
        let (d, e) = (self.inner.domain, other.inner.domain);
        let domain = ClosedInterval::new(d.a().max(e.a()), d.b().min(e.b()))
            .map_err(|_| Error::domain(&self.inner.name, e.a(), e.b(), d))?;
        Ok(RealFunction {
            inner: Arc::new(Inner {
                name: format!("({})·({})", self.inner.name, other.inner.name),
                domain,
                bound: self.inner.bound * other.inner.bound,
                body: Body::Product(self.clone(), other.clone()),
                primitive: None,
            }),
        })
    }

    /// Strictly positive on `J` according to the oracle.
    pub fn is_positive_on(&self, j: ClosedInterval) -> Result<bool> {
        Ok(self.eval_range(j)?.lo > 0.0)
    }

    /// Nonnegative on `J` according to the oracle.
    pub fn is_nonnegative_on(&self, j: ClosedInterval) -> Result<bool> {
        Ok(self.eval_range(j)?.lo >= 0.0)
    }
}

fn trig_range(lo: f64, hi: f64, f: fn(f64) -> f64, max_offset: f64) -> RangeEnclosure {
    let (a, b) = (f(lo), f(hi));
    let mut min = a.min(b);
    let mut max = a.max(b);
    if hits_lattice(lo, hi, max_offset, 2.0 * PI) {
        max = 1.0;
    }
    if hits_lattice(lo, hi, max_offset + PI, 2.0 * PI) {
        min = -1.0;
    }
    let pad = 2.0 * f64::EPSILON;
    RangeEnclosure::new((min - pad).max(-1.0), (max + pad).min(1.0))
}

fn thomae_eval(x: f64, q_max: u32) -> f64 {
    for q in 1..=q_max {
        let qf = q as f64;
        let p = (x * qf).round();
        if p / qf == x {
            return 1.0 / qf;
        }
    }
    0.0
}

fn thomae_range(lo: f64, hi: f64, q_max: u32) -> RangeEnclosure {
    if lo == hi {
        return RangeEnclosure::point(thomae_eval(lo, q_max));
    }
    let tol = 4.0 * f64::EPSILON * lo.abs().max(hi.abs());
    for q in 1..=q_max {
        let qf = q as f64;
        let p = ((lo - tol) * qf).ceil();
        if p / qf <= hi + tol {
            return RangeEnclosure::new(0.0, 1.0 / qf);
        }
    }
    RangeEnclosure::point(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> ClosedInterval {
        ClosedInterval::new(a, b).unwrap()
    }

    fn close(r: RangeEnclosure, lo: f64, hi: f64) -> bool {
        (r.lo - lo).abs() <= 1e-14 && (r.hi - hi).abs() <= 1e-14 && r.lo <= lo && r.hi >= hi
    }

    #[test]
    fn constant_range() {
        let f = resolve("const:2.5", iv(-3.0, 3.0)).unwrap();
        assert!(close(f.eval_range(iv(-1.0, 0.7)).unwrap(), 2.5, 2.5));
    }

    #[test]
    fn identity_and_shifted_identity() {
        let f = resolve("poly:1,0", iv(0.0, 1.0)).unwrap();
        assert!(close(f.eval_range(iv(0.0, 1.0)).unwrap(), 0.0, 1.0));
        let g = resolve("poly:1,-0.5", iv(0.0, 1.0)).unwrap();
        assert!(close(g.eval_range(iv(0.25, 0.5)).unwrap(), -0.25, 0.0));
    }

    #[test]
    fn outside_domain_is_an_error() {
        let f = resolve("cos", iv(0.0, 1.0)).unwrap();
        assert!(matches!(f.eval_range(iv(0.5, 1.5)), Err(Error::Domain { .. })));
    }

    #[test]
    fn negate_examples() {
        let f = resolve("poly:1,0", iv(0.0, 1.0)).unwrap();
        assert!(close(f.negate().eval_range(iv(0.0, 1.0)).unwrap(), -1.0, 0.0));
        let g = resolve("poly:1,-0.5", iv(0.0, 1.0)).unwrap();
        assert!(close(g.negate().eval_range(iv(0.0, 1.0)).unwrap(), -0.5, 0.5));
        let gg = g.negate().negate();
        for i in 0..=50 {
            let x = i as f64 / 50.0;
            assert_eq!(gg.evaluate(x), g.evaluate(x));
        }
        assert_eq!(g.negate().declared_bound(), g.declared_bound());
    }

    #[test]
    fn trig_ranges() {
        let c = resolve("cos", iv(-10.0, 10.0)).unwrap();
        assert!(close(c.eval_range(iv(0.0, PI)).unwrap(), -1.0, 1.0));
        let r = c.eval_range(iv(0.1, 0.2)).unwrap();
        assert!(r.lo <= 0.2f64.cos() && r.hi >= 0.1f64.cos());
        let s = resolve("sin", iv(-10.0, 10.0)).unwrap();
        let r = s.eval_range(iv(0.0, 2.0)).unwrap();
        assert_eq!(r.hi, 1.0);
        assert!((r.lo - 0.0).abs() < 1e-15);
    }

    #[test]
    fn step_abs_thomae() {
        let s = resolve("step:0.5", iv(0.0, 1.0)).unwrap();
        assert_eq!(s.eval_range(iv(0.0, 0.5)).unwrap(), RangeEnclosure::point(0.0));
        assert_eq!(s.eval_range(iv(0.5, 0.6)).unwrap(), RangeEnclosure::new(0.0, 1.0));
        assert_eq!(s.eval_range(iv(0.6, 0.7)).unwrap(), RangeEnclosure::point(1.0));
        let a = resolve("abs:0.3", iv(0.0, 1.0)).unwrap();
        assert!(close(a.eval_range(iv(0.0, 1.0)).unwrap(), 0.0, 0.7));
        let t = resolve("thomae:50", iv(0.0, 1.0)).unwrap();
        assert_eq!(t.evaluate(0.5), 0.5);
        assert_eq!(t.evaluate(1.0 / 3.0), 1.0 / 3.0);
        assert_eq!(t.evaluate(0.1234567), 0.0);
        assert_eq!(t.eval_range(iv(0.26, 0.34)).unwrap().hi, 1.0 / 3.0);
        assert_eq!(t.eval_range(iv(0.4, 0.6)).unwrap().hi, 0.5);
        assert_eq!(t.declared_bound(), 1.0);
    }

    #[test]
    fn sampled_dirichlet_sees_both_values() {
        let d = resolve("dirichlet", iv(0.0, 1.0)).unwrap();
        assert_eq!(d.oracle_kind(), OracleKind::Sampled { samples: DEFAULT_SAMPLES });
        for (a, b) in [(0.0, 1.0), (1.0 / 3.0, 2.0 / 3.0), (0.123, 0.1231)] {
            assert_eq!(d.eval_range(iv(a, b)).unwrap(), RangeEnclosure::new(0.0, 1.0));
        }
    }

    #[test]
    fn product_and_bounds() {
        let a = resolve("poly:1,0", iv(-1.0, 2.0)).unwrap();
        let b = resolve("poly:1,-1", iv(-1.0, 2.0)).unwrap();
        let p = a.product(&b).unwrap();
        assert_eq!(p.oracle_kind(), OracleKind::Enclosing);
        assert!(p.declared_bound() >= 4.0 && p.declared_bound() - 4.0 < 1e-14);
        let r = p.eval_range(iv(0.0, 1.0)).unwrap();
        assert!(r.lo <= -0.25 && r.hi >= 0.0);
    }

    #[test]
    fn reflect_matches_pointwise() {
        let f = resolve("poly:1,0,0", iv(0.0, 1.0)).unwrap();
        let g = f.reflect();
        assert_eq!(g.domain(), iv(-1.0, 0.0));
        assert_eq!(g.evaluate(-0.5), 0.25);
        assert!(close(g.eval_range(iv(-1.0, -0.5)).unwrap(), 0.25, 1.0));
        assert!((g.closed_form_integral(iv(-1.0, 0.0)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn positivity_predicates() {
        let f = resolve("poly:2,0", iv(0.0, 1.0)).unwrap();
        assert!(f.is_nonnegative_on(iv(0.0, 1.0)).unwrap());
        assert!(!f.is_positive_on(iv(0.0, 1.0)).unwrap());
        assert!(f.is_positive_on(iv(0.1, 1.0)).unwrap());
    }
}

//! Randomized invariants over the function gallery.

use std::f64::consts::PI;

use proptest::prelude::*;

use darboux::functions::resolve;
use darboux::stieltjes::{reduce_check, transfer_check};
use darboux::substitution::{change_of_variable, classify, eta_partition, CellClass};
use darboux::{
    certify_integrable, darboux_sums, lower_sum, oscillation_sum, upper_sum, ClosedInterval, Integrator, OracleKind,
    Partition, RealFunction,
};

const EXACT_IDS: &[&str] = &[
    "const:1",
    "poly:1,0",
    "poly:1,-0.5",
    "poly:1,0,0",
    "poly:4,-6,2,0",
    "cos",
    "sin",
    "step:0.5",
    "abs:0.3",
    "pow:0.5",
    "thomae:50",
];

const NONNEGATIVE_DENSITIES: &[&str] = &["const:1", "poly:2,0", "poly:1,1", "poly:3,0,0", "abs:0.3", "pow:0.5", "step:0.5"];

fn unit() -> ClosedInterval {
    ClosedInterval::new(0.0, 1.0).unwrap()
}

fn gallery(id: &str) -> RealFunction {
    resolve(id, unit()).unwrap()
}

fn integrators() -> Vec<Integrator> {
    vec![
        Integrator::identity(unit()),
        Integrator::explicit(gallery("poly:1,0,0")).unwrap(),
        Integrator::explicit(gallery("poly:1,0,1,0")).unwrap(),
    ]
}

fn slack(scale: f64) -> f64 {
    1e-12 * (1.0 + scale.abs())
}

fn partition_from(mut interior: Vec<f64>) -> Partition {
    interior.retain(|x| *x > 0.0 && *x < 1.0);
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    let mut pts = vec![0.0];
    pts.extend(interior);
    pts.push(1.0);
    Partition::new(pts).unwrap()
}

fn arb_partition(max_points: usize) -> impl Strategy<Value = Partition> {
    prop::collection::vec(0.0..1.0f64, 0..max_points).prop_map(partition_from)
}

fn arb_exact() -> impl Strategy<Value = &'static str> {
    prop::sample::select(EXACT_IDS)
}

fn arb_subinterval() -> impl Strategy<Value = ClosedInterval> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(a, b)| ClosedInterval::new(a.min(b), a.max(b)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn range_oracle_is_sound(id in arb_exact(), j in arb_subinterval(), ts in prop::collection::vec(0.0..=1.0f64, 64)) {
        let f = gallery(id);
        let r = f.eval_range(j).unwrap();
        prop_assert!(r.lo <= r.hi);
        for t in ts {
            let x = j.a() + t * j.length();
            let x = x.clamp(j.a(), j.b());
            let v = f.evaluate(x);
            prop_assert!(r.lo <= v && v <= r.hi, "{id} on {j:?}: f({x}) = {v} not in {r:?}");
        }
        prop_assert!(f.evaluate(j.a()).abs() <= f.declared_bound());
    }

    #[test]
    fn splitting_never_increases_weighted_oscillation(id in arb_exact(), j in arb_subinterval(), t in 0.0..1.0f64) {
        let f = gallery(id);
        prop_assume!(j.length() > 0.0);
        let x = j.a() + t * j.length();
        prop_assume!(j.a() < x && x < j.b());
        let osc = |a: f64, b: f64| {
            let r = f.eval_range(ClosedInterval::new(a, b).unwrap()).unwrap();
            (r.hi - r.lo) * (b - a)
        };
        let whole = osc(j.a(), j.b());
        let split = osc(j.a(), x) + osc(x, j.b());
        prop_assert!(split <= whole + slack(whole), "{id}: {split} > {whole}");
    }

    #[test]
    fn refinement_is_monotone(id in arb_exact(), k in 0usize..3, p in arb_partition(24), extra in prop::collection::vec(0.0..1.0f64, 1..16)) {
        let f = gallery(id);
        let phi = &integrators()[k];
        let q = p.refine(&extra).unwrap();
        prop_assert!(q.refines(&p));
        let (up, uq) = (upper_sum(&f, phi, &p).unwrap(), upper_sum(&f, phi, &q).unwrap());
        let (lp, lq) = (lower_sum(&f, phi, &p).unwrap(), lower_sum(&f, phi, &q).unwrap());
        prop_assert!(uq <= up + slack(up), "{id}: U {uq} > {up}");
        prop_assert!(lq >= lp - slack(lp), "{id}: L {lq} < {lp}");
    }

    #[test]
    fn lower_sums_never_exceed_upper_sums(id in arb_exact(), k in 0usize..3, p in arb_partition(24), q in arb_partition(24)) {
        let f = gallery(id);
        let phi = &integrators()[k];
        let l = lower_sum(&f, phi, &p).unwrap();
        let u = upper_sum(&f, phi, &q).unwrap();
        prop_assert!(l <= u + slack(u), "{id}: {l} > {u}");
    }

    #[test]
    fn gap_equals_oscillation_sum(id in arb_exact(), k in 0usize..3, p in arb_partition(64)) {
        let f = gallery(id);
        let phi = &integrators()[k];
        let s = darboux_sums(&f, phi, &p).unwrap();
        let osc = oscillation_sum(&f, phi, &p).unwrap();
        prop_assert!(s.lower <= s.upper);
        prop_assert!(((s.upper - s.lower) - osc).abs() <= slack(s.upper.abs().max(s.lower.abs())));
    }

    #[test]
    fn certificates_transfer_to_refinements(id in arb_exact(), eps in 0.001..0.5f64, extra in prop::collection::vec(0.0..1.0f64, 1..32)) {
        let f = gallery(id);
        let phi = Integrator::identity(unit());
        let c = certify_integrable(&f, &phi, unit(), eps, 1 << 16).unwrap();
        prop_assume!(c.certificate().is_some());
        let finer = c.partition().refine(&extra).unwrap();
        let osc = oscillation_sum(&f, &phi, &finer).unwrap();
        prop_assert!(osc <= eps + slack(eps), "{id}: {osc} > {eps}");
    }

    #[test]
    fn common_refinement_is_an_upper_bound(p in arb_partition(32), q in arb_partition(32)) {
        let r = p.common_refinement(&q).unwrap();
        prop_assert!(r.refines(&p) && r.refines(&q));
        prop_assert!(r.mesh() <= p.mesh().min(q.mesh()));
        let total: f64 = r.cells().map(|c| c.length()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-15 * r.len() as f64);
    }

    #[test]
    fn induced_partition_commutes_with_refinement(k in 1usize..3, p in arb_partition(24), s in prop::collection::vec(0.0..1.0f64, 1..12)) {
        let phi = &integrators()[k];
        let left = p.refine(&s).unwrap().induced(phi).unwrap();
        let images: Vec<f64> = s.iter().map(|x| phi.evaluate(*x).unwrap()).collect();
        let right = p.induced(phi).unwrap().refine(&images).unwrap();
        prop_assert_eq!(left.len(), right.len());
        for (a, b) in left.breakpoints().iter().zip(right.breakpoints()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn transfer_identity_on_random_partitions(id in prop::sample::select(&EXACT_IDS[..9]), k in 0usize..3, p in arb_partition(48)) {
        let phi = &integrators()[k];
        let image = phi.image().unwrap();
        let f = resolve(id, ClosedInterval::new(image.lo, image.hi).unwrap()).unwrap();
        let r = transfer_check(&f, phi, &p).unwrap();
        prop_assert!((r.lhs_upper - r.rhs_upper).abs() <= slack(r.lhs_upper));
        prop_assert!((r.lhs_lower - r.rhs_lower).abs() <= slack(r.lhs_lower));
    }

    #[test]
    fn integrators_are_nondecreasing_and_bracket_primitives(id in prop::sample::select(NONNEGATIVE_DENSITIES), xs in prop::collection::vec(0.0..=1.0f64, 2..32), anchor in -2.0..2.0f64) {
        let phi = gallery(id);
        let big = Integrator::indefinite(&phi, unit(), anchor).unwrap();
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let mut prev = f64::NEG_INFINITY;
        for x in xs {
            let e = big.enclose(x).unwrap();
            prop_assert!(e.lo >= prev - 1e-15, "{id}: decreasing at {x}");
            prev = e.lo;
            if let Some(exact) = phi.closed_form_integral(ClosedInterval::new(0.0, x).unwrap()) {
                prop_assert!(e.contains(anchor + exact) || (e.mid() - anchor - exact).abs() <= 1e-15, "{id} at {x}: {e:?} vs {}", anchor + exact);
            }
        }
    }

    #[test]
    fn reduction_bound_holds_both_ways(g in prop::sample::select(&EXACT_IDS[..10]), d in prop::sample::select(NONNEGATIVE_DENSITIES), p in arb_partition(48)) {
        let g = gallery(g);
        let phi = gallery(d);
        let big = Integrator::indefinite(&phi, unit(), 0.0).unwrap();
        let r = reduce_check(&g, &phi, &big, &p).unwrap();
        prop_assert!(r.bound_ok, "{r:?}");
        prop_assert!(r.converse_ok, "{r:?}");
    }
}

fn densities_on(domain: ClosedInterval) -> Vec<RealFunction> {
    ["poly:1,-0.5", "cos", "sin", "poly:4,-6,2,0", "abs:0.3", "poly:2,0", "step:0.5"]
        .iter()
        .map(|id| resolve(id, domain).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eta_partitions_satisfy_chebyshev(k in 0usize..7, eta in prop::sample::select(vec![0.3, 0.1, 0.05, 0.01])) {
        let dom = if k == 1 { ClosedInterval::new(0.0, PI).unwrap() } else { unit() };
        let phi = densities_on(dom).swap_remove(k);
        let p = eta_partition(&phi, dom, eta, 1 << 20).unwrap();
        let id = Integrator::identity(dom);
        let osc = oscillation_sum(&phi, &id, &p).unwrap();
        prop_assert!(osc <= eta * eta * dom.length());
        let c = classify(&p, &phi, eta).unwrap();
        let n = p.len();
        prop_assert_eq!(c.good().len() + c.bounded().len() + c.undulating().len(), n);
        prop_assert!(c.measure(CellClass::Undulating) <= eta * dom.length());
        for k in c.undulating() {
            let cell = p.cell(k);
            let r = phi.eval_range(cell).unwrap();
            if r.lo.abs().max(r.hi.abs()) > eta {
                prop_assert!(r.hi - r.lo >= eta, "cell {k}: {r:?}");
            }
        }
    }

    #[test]
    fn induced_lengths_are_bounded_by_density(k in 0usize..7, p in arb_partition(64)) {
        let phi = densities_on(unit()).swap_remove(k);
        let big = Integrator::indefinite(&phi, unit(), 0.0).unwrap();
        let m = phi.declared_bound();
        for cell in p.cells() {
            let inc = big.increment(cell.a(), cell.b()).unwrap();
            let bound = m * cell.length();
            prop_assert!(inc.lo.abs().min(inc.hi.abs()) <= bound * (1.0 + 1e-12) + 1e-15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn sign_flip_covariance(f_id in prop::sample::select(vec!["poly:1,0", "poly:1,0,1", "cos", "abs:0.05"]), eta in prop::sample::select(vec![0.1, 0.05])) {
        let phi = gallery("poly:1,-0.5");
        let f = resolve(f_id, ClosedInterval::new(-0.2, 0.2).unwrap()).unwrap();
        let tol = 1e-4;
        let a = change_of_variable(&f, &phi, unit(), 0.0, Some(eta), tol, 1 << 18).unwrap();
        let b = change_of_variable(&f.reflect(), &phi.negate(), unit(), 0.0, Some(eta), tol, 1 << 18).unwrap();
        prop_assert!(a.overlap && b.overlap);
        prop_assert!(a.lhs.overlaps(&b.lhs.oriented(-1.0)));
        prop_assert!(a.rhs.overlaps(&b.rhs.oriented(-1.0)));
        prop_assert!((a.rhs.midpoint() + b.rhs.midpoint()).abs() <= 2.0 * tol);
    }
}

#[test]
fn exact_gallery_is_exact() {
    for id in EXACT_IDS {
        assert_eq!(gallery(id).oracle_kind(), OracleKind::Exact, "{id}");
    }
}

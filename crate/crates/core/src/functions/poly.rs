use crate::numeric::{next_down, next_up};

/// Real polynomial with precomputed turning points, so that its exact range on
/// any interval is the hull of the values at the endpoints and at the turning
/// points inside.
#[derive(Debug, Clone)]
pub struct Polynomial {
    /// Ascending order: `coeffs[i]` multiplies `x^i`.
    coeffs: Vec<f64>,
    turning: Vec<f64>,
}

impl Polynomial {
    /// From coefficients in descending order, leading coefficient first.
    pub fn from_descending(desc: &[f64]) -> Self {
        let mut coeffs: Vec<f64> = desc.iter().rev().copied().collect();
        trim(&mut coeffs);
        let turning = real_roots(&derivative(&coeffs));
        Polynomial { coeffs, turning }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn turning_points(&self) -> &[f64] {
        &self.turning
    }

    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.coeffs, x)
    }

    /// Value together with a bound on the Horner rounding error.
    pub fn eval_with_error(&self, x: f64) -> (f64, f64) {
        let v = horner(&self.coeffs, x);
        let ax = x.abs();
        let mut mag = 0.0;
        for c in self.coeffs.iter().rev() {
            mag = mag * ax + c.abs();
        }
        (v, horner_error(self.degree(), mag))
    }

    /// `(inf, sup)` over `[lo, hi]`, widened by the evaluation error.
    pub fn range(&self, lo: f64, hi: f64) -> (f64, f64) {
        let (v, e) = self.eval_with_error(lo);
        let mut min = v - e;
        let mut max = v + e;
        let mut visit = |x: f64| {
            let (v, e) = self.eval_with_error(x);
            min = min.min(v - e);
            max = max.max(v + e);
        };
        visit(hi);
        let start = self.turning.partition_point(|&t| t <= lo);
        for &t in &self.turning[start..] {
            if t >= hi {
                break;
            }
            visit(t);
        }
        (min, max)
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> Polynomial {
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(0.0);
        for (i, a) in self.coeffs.iter().enumerate() {
            c.push(a / (i as f64 + 1.0));
        }
        trim(&mut c);
        Polynomial {
            turning: Vec::new(),
            coeffs: c,
        }
    }
}

fn trim(c: &mut Vec<f64>) {
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    if c.is_empty() {
        c.push(0.0);
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for a in c.iter().rev() {
        acc = acc * x + a;
    }
    acc
}

fn derivative(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return vec![0.0];
    }
    let mut d: Vec<f64> = c.iter().enumerate().skip(1).map(|(i, a)| a * i as f64).collect();
    trim(&mut d);
    d
}

fn error_bound(c: &[f64], x: f64) -> f64 {
    let ax = x.abs();
    let mut mag = 0.0;
    for a in c.iter().rev() {
        mag = mag * ax + a.abs();
    }
    horner_error(c.len() - 1, mag)
}

/// Bound `γ_{2n} Σ|a_i||x|^i` on the rounding error of Horner's scheme for a
/// degree-`n` polynomial, with `γ_k = k u / (1 - k u)` and `u = ε/2`. The
/// factor 1.01 absorbs the rounding of `mag` itself.
fn horner_error(degree: usize, mag: f64) -> f64 {
    if degree == 0 {
        return 0.0;
    }
    1.01 * degree as f64 * f64::EPSILON * mag
}

/// Bisects a sign change of `c` on `[lo, hi]` down to adjacent floats.
fn bisect(c: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = horner(c, lo);
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = horner(c, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    if horner(c, lo).abs() <= horner(c, hi).abs() {
        lo
    } else {
        hi
    }
}

/// Sorted real roots, including tangential ones detected at the turning
/// points. Spurious near-roots are harmless for range purposes: evaluating at
/// an extra interior point never widens a range beyond the true hull.
fn real_roots(c: &[f64]) -> Vec<f64> {
    let deg = c.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        return vec![-c[0] / c[1]];
    }
    let lead = c[deg];
    let cauchy = 1.0 + c[..deg].iter().map(|a| (a / lead).abs()).fold(0.0, f64::max);
    let bound = next_up(cauchy);
    let crit = real_roots(&derivative(c));
    let mut knots = vec![next_down(-bound)];
    knots.extend(crit.iter().copied().filter(|t| t.abs() < bound));
    knots.push(next_up(bound));

    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (u, v) = (w[0], w[1]);
        let (fu, fv) = (horner(c, u), horner(c, v));
        if fu == 0.0 {
            roots.push(u);
        } else if fv != 0.0 && (fu > 0.0) != (fv > 0.0) {
            roots.push(bisect(c, u, v));
        }
    }
    for &t in &crit {
        if horner(c, t).abs() <= error_bound(c, t) {
            roots.push(t);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    roots
}

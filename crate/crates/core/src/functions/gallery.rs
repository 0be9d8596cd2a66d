//! Named, analytically controlled functions addressable by string id.
//!
//! | id                  | function                                  |
//! |---------------------|-------------------------------------------|
//! | `poly:c_n,...,c_0`  | polynomial, leading coefficient first     |
//! | `const:c`           | constant `c`                              |
//! | `pow:p`             | `x^p`, `p > 0`, nonnegative domain        |
//! | `cos`, `sin`        | trigonometric functions                   |
//! | `step:c`            | `0` for `x <= c`, `1` for `x > c`         |
//! | `abs:c`             | `abs(x - c)`                              |
//! | `thomae:Q`          | `1/q` at `p/q` in lowest terms with `q <= Q`, else `0` |
//! | `dirichlet`         | rational indicator, sampled oracle        |
//! | `sampled:N:<id>`    | any of the above behind an `N`-point sampled oracle |

use super::{Polynomial, RealFunction};
use crate::error::{Error, Result};
use crate::partition::ClosedInterval;

/// Samples per interval for sampled oracles.
pub const DEFAULT_SAMPLES: usize = 64;

/// Denominator cap for `thomae` without an explicit parameter.
pub const DEFAULT_THOMAE_DENOMINATOR: u32 = 50;

#[derive(Debug, Clone)]
pub struct GalleryEntry {
    pub name: String,
    pub params: Vec<f64>,
    pub function: RealFunction,
    pub notes: String,
}

fn parse_f64(id: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::UnknownFunction(id.to_string()))
}

/// Resolves a gallery id on the given domain.
pub fn resolve(id: &str, domain: ClosedInterval) -> Result<RealFunction> {
    let id = id.trim();
    let (head, rest) = match id.split_once(':') {
        Some((h, r)) => (h, Some(r)),
        None => (id, None),
    };
    let name = id.to_string();
    match (head, rest) {
        ("poly", Some(r)) => {
            let coeffs = r.split(',').map(|s| parse_f64(id, s)).collect::<Result<Vec<_>>>()?;
            Ok(RealFunction::polynomial(name, domain, Polynomial::from_descending(&coeffs)))
        }
        ("const", Some(r)) => {
            let c = parse_f64(id, r)?;
            Ok(RealFunction::polynomial(name, domain, Polynomial::from_descending(&[c])))
        }
        ("identity", None) => Ok(RealFunction::polynomial(name, domain, Polynomial::from_descending(&[1.0, 0.0]))),
        ("pow", Some(r)) => RealFunction::power(name, domain, parse_f64(id, r)?),
        ("cos", None) => Ok(RealFunction::cosine(name, domain)),
        ("sin", None) => Ok(RealFunction::sine(name, domain)),
        ("step", Some(r)) => Ok(RealFunction::step(name, domain, parse_f64(id, r)?)),
        ("abs", Some(r)) => Ok(RealFunction::abs_shift(name, domain, parse_f64(id, r)?)),
        ("thomae", r) => {
            let q = match r {
                Some(r) => r.trim().parse::<u32>().map_err(|_| Error::UnknownFunction(id.to_string()))?,
                None => DEFAULT_THOMAE_DENOMINATOR,
            };
            RealFunction::thomae(name, domain, q)
        }
        ("dirichlet", None) => Ok(RealFunction::dirichlet(name, domain, DEFAULT_SAMPLES)),
        ("sampled", Some(r)) => {
            let (n, inner) = r.split_once(':').ok_or_else(|| Error::UnknownFunction(id.to_string()))?;
            let n: usize = n.trim().parse().map_err(|_| Error::UnknownFunction(id.to_string()))?;
            let inner = resolve(inner, domain)?;
            let bound = inner.declared_bound();
            RealFunction::sampled(name, domain, bound, n, move |x| inner.evaluate(x))
        }
        _ => Err(Error::UnknownFunction(id.to_string())),
    }
}

/// The standard gallery on `domain`. Entries that need a nonnegative domain
/// are skipped when `domain` reaches below zero.
pub fn entries(domain: ClosedInterval) -> Vec<GalleryEntry> {
    let specs: &[(&str, &[f64], &str)] = &[
        ("const:1", &[1.0], "constant; zero oscillation everywhere"),
        ("poly:1,0", &[1.0, 0.0], "identity"),
        ("poly:1,-0.5", &[1.0, -0.5], "changes sign at 1/2"),
        ("poly:1,0,0", &[1.0, 0.0, 0.0], "x^2"),
        ("poly:4,-6,2,0", &[4.0, -6.0, 2.0, 0.0], "cubic with two turning points in [0, 1]"),
        ("cos", &[], "smooth, sign-changing on [0, π]"),
        ("sin", &[], "smooth"),
        ("step:0.5", &[0.5], "one jump of height 1"),
        ("abs:0.3", &[0.3], "kink at 0.3"),
        ("pow:0.5", &[0.5], "square root; infinite slope at 0"),
        ("thomae:50", &[50.0], "dense discontinuities, integral 0"),
    ];
    specs
        .iter()
        .filter_map(|(id, params, notes)| {
            resolve(id, domain).ok().map(|function| GalleryEntry {
                name: id.to_string(),
                params: params.to_vec(),
                function,
                notes: notes.to_string(),
            })
        })
        .collect()
}

use thiserror::Error;

use crate::darboux::Enclosure;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("interval [{lo}, {hi}] is not contained in the domain [{domain_lo}, {domain_hi}] of {name}")]
    Domain {
        name: String,
        lo: f64,
        hi: f64,
        domain_lo: f64,
        domain_hi: f64,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("partitions have different base intervals: [{0}, {1}] vs [{2}, {3}]")]
    BaseMismatch(f64, f64, f64, f64),

    #[error("integrator decreases between x = {left} and x = {right} (by {drop})")]
    Monotonicity { left: f64, right: f64, drop: f64 },

    #[error("density is negative on the interval (inf = {inf})")]
    Positivity { inf: f64 },

    #[error("enclosure width {width} exceeds tolerance {tol} after {cells} cells")]
    WidthExceeded {
        tol: f64,
        width: f64,
        cells: usize,
        best: Box<Enclosure>,
    },

    #[error("cell budget of {budget} exhausted with best oscillation sum {best} (target {target}){}", .cell.map(|k| format!(" in cell {k}")).unwrap_or_default())]
    BudgetExceeded {
        budget: usize,
        best: f64,
        target: f64,
        cell: Option<usize>,
    },

    #[error("mean-value point not bracketed on [{lo}, {hi}]")]
    RootNotBracketed { lo: f64, hi: f64 },

    #[error("unknown gallery id `{0}`")]
    UnknownFunction(String),
}

impl Error {
    pub(crate) fn domain(name: &str, lo: f64, hi: f64, domain: crate::ClosedInterval) -> Self {
        Error::Domain {
            name: name.to_string(),
            lo,
            hi,
            domain_lo: domain.a(),
            domain_hi: domain.b(),
        }
    }
}

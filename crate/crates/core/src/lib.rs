//! Certified Darboux enclosures of Riemann and Riemann–Stieltjes integrals,
//! and a mechanical check of the change-of-variable formula
//! `∫_{Φ(a)}^{Φ(b)} f = ∫_a^b f(Φ(x)) φ(x) dx` for `Φ' = φ` Riemann integrable.
//!
//! ```
//! use darboux::{resolve, integral_enclosure, ClosedInterval, Integrator, DEFAULT_BUDGET};
//!
//! let unit = ClosedInterval::new(0.0, 1.0)?;
//! let f = resolve("poly:1,0,0", unit)?;
//! let e = integral_enclosure(&f, &Integrator::identity(unit), unit, 1e-6, DEFAULT_BUDGET)?;
//! assert!(e.contains(1.0 / 3.0) && e.width() <= 1e-6);
//! # Ok::<(), darboux::Error>(())
//! ```

pub mod cli;
pub mod darboux;
pub mod error;
pub mod functions;
pub mod numeric;
pub mod partition;
pub mod stieltjes;
pub mod substitution;

pub use crate::darboux::{
    certify_integrable, darboux_sums, enclosure_on, integral_enclosure, lower_sum, oscillation_sum, upper_sum,
    AdaptiveRefiner, Certification, DarbouxSums, Enclosure, Inconclusive, IntegrabilityCertificate, Rigor,
    DEFAULT_BUDGET,
};
pub use crate::error::{Error, Result};
pub use crate::functions::{gallery_entries, resolve, GalleryEntry, OracleKind, Polynomial, RangeEnclosure, RealFunction};
pub use crate::partition::{ClosedInterval, OrientedInterval, Partition};
pub use crate::stieltjes::{
    build_indefinite_integral, reduce_check, stieltjes_enclosure, transfer_check, Integrator, ReductionReport,
    TransferReport,
};
pub use crate::substitution::{
    build_verification_partition, change_of_variable, classify, eta_partition, monotone_unbounded_check,
    oriented_integral, verify_ledger, BoundLedger, CellClass, ClassifiedPartition, LedgerRow, MonotoneReport,
    SubstitutionVerdict, VerificationPartition,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/functions.md")]
    mod functions {}
    #[doc = include_str!("../../../book/src/partitions.md")]
    mod partitions {}
    #[doc = include_str!("../../../book/src/darboux.md")]
    mod darboux {}
    #[doc = include_str!("../../../book/src/stieltjes.md")]
    mod stieltjes {}
    #[doc = include_str!("../../../book/src/substitution.md")]
    mod substitution {}
    #[doc = include_str!("../../../book/src/unbounded.md")]
    mod unbounded {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

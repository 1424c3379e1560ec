//! Exact arithmetic in Q_p and small extension towers at finite, tracked
//! absolute precision.
//!
//! An element is stored as `p^(-shift)` times an integral coordinate vector
//! in the power basis of the tower, with every coordinate reduced modulo
//! `p^(aprec + shift)`. Precision is data: every operation propagates the
//! absolute precision `aprec` by the documented rules (min for add/sub,
//! valuation-adjusted for mul/div) and never reports more digits than it
//! can certify. Valuations are exact rationals with denominator dividing
//! the ramification index.

pub(crate) mod element;
pub(crate) mod field;

pub use element::PadicElement;
pub use field::{ExtensionStep, PadicField, StepKind};

use thiserror::Error;

/// Errors from field construction and element arithmetic.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("p = {0} is not an odd prime")]
    CompositeP(u64),
    #[error("bad defining polynomial: {0}")]
    BadDefiningPolynomial(String),
    #[error("elements belong to different fields")]
    FieldMismatch,
    #[error("division by zero at current precision")]
    DivisionByZeroAtPrecision,
    #[error("result precision {0} <= 0")]
    PrecisionUnderflow(i64),
    #[error("element is indistinguishable from 0 at precision {0}")]
    ZeroValuation(i64),
    #[error("not a one-unit: v(x-1) must be positive")]
    NotOneUnit,
    #[error("extension unavailable: {0}")]
    ExtensionUnavailable(String),
}

//! Truncated power series in `X = gamma - 1` over a p-adic field, modeling
//! the Iwasawa algebra of the cyclotomic Galois group and its distribution
//! algebras of finite growth order.
//!
//! [`SeriesGamma1`] is the wild-level object: a dense coefficient list with
//! a per-index precision ledger and an optional declared growth order.
//! [`SeriesGamma`] carries one such series per tame-character index and is
//! what the twist operators and character evaluation act on.

mod character;
mod gamma;
mod gamma1;
mod growth;
pub mod io;

pub use character::CharacterSpec;
pub use gamma::SeriesGamma;
pub use gamma1::SeriesGamma1;
pub use growth::{GrowthProfile, TailModel};

use thiserror::Error;

use crate::padic::PadicError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("series live over different fields")]
    FieldMismatch,
    #[error("result precision {0} <= 0")]
    PrecisionUnderflow(i64),
    #[error("tail not bounded: {0}")]
    TailNotBounded(String),
    #[error("extension unavailable: {0}")]
    ExtensionUnavailable(String),
    #[error("not divisible at current precision: {0}")]
    NotDivisibleAtPrecision(String),
    #[error("precision exhausted during division")]
    PrecisionExhausted,
    #[error("bad character data: {0}")]
    BadCharacter(String),
    #[error("cutoff insufficient: certified only {0} digits, need {1}")]
    CutoffInsufficient(i64, i64),
    #[error("evaluation imprecise: certified only {0} digits")]
    EvaluationImprecise(i64),
    #[error(transparent)]
    Padic(#[from] PadicError),
}


//! Exact arithmetic for Iwasawa-algebra power series over p-adic fields.
//!
//! The crate is organized around the pipeline that turns representation
//! data (a prime, a weight vector and Satake parameters) into a certified
//! factorization of unbounded p-adic L-functions through bounded signed
//! ones:
//!
//! * [`padic`] — elements of Q_p and small extension towers at tracked
//!   absolute precision, with exact rational valuations.
//! * [`series`] — truncated power series in `X = gamma - 1` over a p-adic
//!   field, the Delta-indexed wrapper modeling the full Iwasawa algebra,
//!   twists, evaluation at characters and division with a precision ledger.
//! * [`special`] — the named series: cyclotomic polynomials in `1 + X`,
//!   `log_p(1+X)`, the linear factors `ell_i`, their products, and the
//!   plus/minus half-logarithms.
//! * [`repdata`] — weight/Satake ingestion, Hodge data, Newton and Hodge
//!   polygons, hypothesis checks and the filtration arithmetic.
//! * [`logmatrix`] — the matrices `A`, `Q` and the logarithmic matrix with
//!   its evaluation-contract certificate.
//! * [`factor`] — synthesis and decomposition of unbounded pairs against a
//!   certified logarithmic matrix, audits and the plus/minus dictionary.
//!
//! All values are immutable after construction and safe to share between
//! threads; computations are deterministic given a seed.



pub mod factor;
pub mod logmatrix;
pub mod newton;
pub mod repdata;
pub mod padic;

pub mod series;
pub mod special;

pub use padic::{PadicElement, PadicError, PadicField};
pub use series::{CharacterSpec, GrowthProfile, SeriesError, SeriesGamma, SeriesGamma1};

//! Exact-arithmetic toolkit for asymmetric Rado-Ramsey thresholds on random
//! sets of integers.
//!
//! The pieces, bottom up:
//!
//! - [`linalg`]: exact integer matrices, ranks, rational spans.
//! - [`rado`]: the columns condition, irredundancy, and the densities
//!   `m(A)` and `m(A, B)`.
//! - [`hypergraph`]: ordered solution hypergraphs over `[n]`, projections,
//!   degrees, tameness, the co-degree function and count-exponent audits.
//! - [`weights`]: the additive weight function balancing the projected
//!   counts, found by exact linear programming.
//! - [`ramsey`]: exact decision of `X -> (A_1, ..., A_r)` and finite-n
//!   supersaturation scans.
//! - [`threshold`]: random-set samplers, the concentration check, the
//!   Suen-Janson evaluator and Monte-Carlo threshold scans.

pub mod catalogue;
pub mod error;
pub mod fit;
pub mod hypergraph;
pub mod linalg;
pub mod lp;
pub mod matrix_io;
pub mod rado;
pub mod ramsey;
pub mod random;
pub mod solve;
pub mod threshold;
pub mod weights;

pub use error::{Error, Result};
pub use linalg::{ColumnSet, IntMatrix, Rational};
pub use rado::RadoProfile;

//! Multiple zeta values and their double tails to arbitrary decimal
//! precision, with rigorous error certificates.
//!
//! Two algorithms evaluate `zeta(a_1, ..., a_r)`:
//!
//! * [`dp`]: the descending diagonal recurrence over the admissible-subword
//!   closure of a target set, best when a whole weight range is wanted at
//!   once;
//! * [`series`]: the accelerated central-binomial series, best for a single
//!   value, plus the polylog-at-1/2 baseline it is benchmarked against.
//!
//! [`tails`] provides the double-tail base cases, recurrences, bounds and an
//! independent series oracle; [`relations`] builds the integer recurrence
//! matrix of a weight class and computes its kernel (vanishing integer
//! combinations of diagonal tails). [`words`] and [`fixnum`] carry the
//! underlying combinatorics and fixed-point arithmetic.

pub mod consts;
pub mod dp;
pub mod fixnum;
pub mod relations;
pub mod series;
pub mod tails;
pub mod words;

pub use fixnum::{FixedReal, PrecisionPlan};
pub use words::{Composition, Word};

//! Analysis, construction and learning of approximately modular set functions.
//!
//! Items of an `n`-item universe are numbered from 0 internally and from 1 in
//! every human-facing rendering; item `i` is bit `i` of a mask.

pub mod constructions;
pub mod error;
pub mod expander;
pub mod function;
pub mod io;
pub mod learner;
pub mod lp;
pub mod metrics;
pub mod report;
pub mod sampling;
pub mod set;

pub use error::{Error, Result};
pub use function::{max_distance, LinearFunction, Oracle, SetFunction};
pub use sampling::Mode;
pub use set::{Collection, ItemSet, LargeSet, Members};

//! Joint feature and structure denoising for graph signals with undecimated
//! framelet regularization.

// Negated float comparisons deliberately treat NaN as a violation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ablations;
pub mod cli;
pub mod dot;
pub mod error;
pub mod framelet;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod perturb;
pub mod prox;
pub mod run;
pub mod sparse;

pub use error::{Error, Result};

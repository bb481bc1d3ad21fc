#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

//! Finite models for eigenvalue multiplicity bounds on negatively curved
//! surfaces: graph heat semigroups compressed by net projections, the
//! model-plane heat kernel, and the star-graph construction.

pub mod cdv;
pub mod error;
pub mod formulas;
pub mod graph;
pub mod kernel;
pub mod net;
pub mod pipeline;
pub mod spectral;
pub mod suites;

pub use error::{Error, ErrorClass, Result};

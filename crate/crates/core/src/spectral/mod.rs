//! Dense self-adjoint operator algebra: eigendecomposition, heat
//! semigroup, compression by projections, multiplicity counting.

mod checks;
mod operator;
mod semigroup;
mod spectrum;

pub use checks::{
    interlace_check, trace_power_identity, InterlaceReport, TraceIdentityReport, INTERLACE_TOL,
    TRACE_IDENTITY_TOL,
};
pub use operator::{apply_projection, Projection, SymmetricOperator, ORTHONORMAL_TOL, PSD_REL_TOL};
pub use semigroup::{functional_calculus, heat_semigroup, require_psd};
pub use spectrum::{
    default_group_tol, eigendecompose, eigendecompose_default, eigensystem, Eigensystem, Spectrum,
    DEFAULT_GROUP_REL_TOL,
};

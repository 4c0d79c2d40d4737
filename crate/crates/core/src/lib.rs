//! Numerical toolkit for the stability of the operators attached to the
//! Newton tensors of a Euclidean hypersurface.
//!
//! * [`curvature`]: symmetric functions, mean curvatures, Newton tensors.
//! * [`oscillation`]: the singular radial Cauchy problem and its oscillation criteria.
//! * [`stability`]: radial profiles, hypothesis checks, Rayleigh certificates.
//! * [`models`]: rotation hypersurfaces with their Gauss maps and support functions.
//! * [`io`]: CSV profiles and traces.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature;
pub mod io;
pub mod models;
pub mod oscillation;
pub mod quadrature;
pub mod stability;

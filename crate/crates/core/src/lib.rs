//! Tangent-bundle geometry for charged particles in curved spacetime.
//!
//! Models come from [`spacetime`]; [`base_geom`] computes base tensors from
//! jets, [`bundle_geom`] the spray, connection and curvatures on the tangent
//! bundle, [`tm_metric`] the fiber metric and integration, [`dynamics`]
//! worldlines and deviations, and [`verify`] the residual-check suite.

// Tensor code indexes several arrays with the same loop variables, and
// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod base_geom;
pub mod bundle_geom;
pub mod conventions;
pub mod dynamics;
pub mod error;
pub mod exprlang;
pub mod jets;
pub mod ode;
pub mod spacetime;
pub mod tensor;
pub mod tm_metric;
pub mod verify;

pub use error::{Error, Result};

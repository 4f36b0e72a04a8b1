//! Gradient Yamabe solitons on warped products `(R^n, phi^-2 delta) x_f F^d`
//! whose profiles depend on a single invariant `xi = alpha . x`.

pub mod dsl;
pub mod error;
pub mod families;
pub mod geodesics;
pub mod geometry;
pub mod ode;
pub mod soliton;

pub use error::{Error, Result};

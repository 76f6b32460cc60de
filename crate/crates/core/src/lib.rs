//! Scattering resonances of two-dimensional transmission problems.

pub mod assembly;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod mesh;
pub mod neps;
pub mod oracle;
pub mod quadrature;
pub mod region;
pub mod specfun;
pub mod study;

pub use error::{Error, Result};
pub use region::Rect;

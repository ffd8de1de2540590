//! Bergman kernels, Fubini–Study currents and zeros of random sections for singular
//! Hermitian line bundles on projective toric surfaces and curves.

pub mod bundle;
pub mod current;
pub mod distance;
pub mod error;
pub mod experiments;
pub mod fubini_study;
pub mod homotopy;
pub mod jet;
pub mod manifold;
pub mod poly;
pub mod quadrature;
pub mod roots;
pub mod sections;
pub mod stats;
pub mod testforms;
pub mod zeros;

pub use error::{Error, Result};

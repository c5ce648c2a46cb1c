pub mod error;
pub mod harness;
pub mod legendre;
pub mod multiindex;
pub mod neural;
pub mod operators;
pub mod polyfit;
pub mod probes;
pub mod quadrature;
pub mod sampling;

pub use error::{Error, Result};

pub mod cone;
pub mod cutoff;
pub mod error;
pub mod field;
pub mod harness;
pub mod interval;
pub mod jacobi;
pub mod jet;
pub mod norm;
pub mod sphere;
pub mod surface;

pub use error::{Error, Result};

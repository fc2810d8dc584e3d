pub mod codes;
pub mod coefficients;
pub mod cube;
pub mod delsarte;
mod error;
pub mod model;
pub mod oracle;
pub mod sdpa;

pub use error::{Error, Result};

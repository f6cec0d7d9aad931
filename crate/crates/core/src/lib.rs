pub mod basis;
pub mod error;
pub mod experiment;
pub mod fit;
pub mod fock;
pub mod invariants;
pub mod json;
pub mod linalg;
pub mod optics;
pub mod permanent;
pub mod transfer;

pub use error::{Error, Result};

pub mod algebra;
pub mod checks;
pub mod currents;
pub mod dkp;
pub mod error;
pub mod fields;
pub mod guidance;
pub mod random;
pub mod scenario;

pub use error::{Error, Result};

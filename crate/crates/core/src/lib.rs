pub mod error;
pub mod field;
pub mod green;
pub mod phase;
pub mod oracle;
pub mod potentials;
pub mod quadrature;
pub mod special;
pub mod spectra;

pub use error::{Error, Result};
pub use potentials::{Potential, PotentialKind};

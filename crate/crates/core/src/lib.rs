pub mod error;
pub mod gaudin;
pub mod gl2rep;
pub mod opscheme;
pub mod sov;
pub mod spectral;
pub mod workbench;
pub mod numcore;

pub use error::{Error, Result};

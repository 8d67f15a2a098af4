pub mod error;
pub mod fem;
pub mod geometry;
pub mod harness;
pub mod levelset;
pub mod numeric;
pub mod radial;
pub mod rearrange;
pub mod verify;

pub use error::{Error, Result};

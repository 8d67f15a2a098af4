//! Distribution functions, rearrangements and Lorentz norms.

pub mod distribution;
pub mod norms;
pub mod profile;

pub use distribution::{Distribution, DistributionFunction};
pub use norms::*;
pub use profile::{decreasing_rearrangement, omega, schwarz_value, DecreasingProfile, PROFILE_POINTS};

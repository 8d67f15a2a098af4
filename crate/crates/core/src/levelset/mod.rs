//! Level sets of piecewise-linear fields and the level-set differential inequalities.

pub mod ode;
pub mod sets;

pub use ode::*;
pub use sets::*;

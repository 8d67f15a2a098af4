//! The symmetrized problem on the ball and closed-form disc oracles.

pub mod ball;
pub mod bessel;
pub mod solution;

pub use ball::BallClosedForm;
pub use bessel::{bessel_j0, bessel_j1, robin_disc_eigenvalue, J0_FIRST_ZERO};
pub use solution::{Phi, RadialSolution};

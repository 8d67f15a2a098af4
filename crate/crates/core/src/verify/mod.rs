//! Both sides of the quantitative comparison inequalities, with explicit constants.

pub mod checks;
pub mod constants;
pub mod report;

pub use checks::{
    check_bossel_daners, check_isoperimetric, check_lorentz_2k2, check_lorentz_k1, check_pointwise, check_propagation,
    check_saint_venant, check_theorem, DomainStudy, IsoperimetricReport, PropagationReport, BOSSEL_DANERS_ALPHA_LIMIT,
};
pub use constants::{c1, c2, c3, c4, c5, compute_constants, ConstantsBundle, ConstantsInput};
pub use report::{Extrapolated, Theorem, TheoremReport};

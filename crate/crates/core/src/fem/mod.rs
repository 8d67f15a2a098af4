//! P1 finite elements for the Robin–Poisson problem and the principal Robin eigenpair.

pub mod mesh;
pub mod sparse;
pub mod system;

pub use mesh::{generate_mesh, BoundaryEdge, Mesh, MeshStats};
pub use sparse::{pcg, CgOutcome, CsrMatrix};
pub use system::{
    assemble_boundary_mass, assemble_load, assemble_mass, assemble_robin_operator, assemble_robin_system,
    assemble_stiffness, integrate_field, integrate_product, principal_robin_eigenpair, rayleigh_quotient,
    solve_poisson, solve_robin, EigenPair, Integral, ScalarField, SourceSpec, SparseSystem,
};

//! Planar domains, rasterization and Fraenkel asymmetry.

pub mod asymmetry;
pub mod domain;
pub mod polygon;
pub mod raster;

pub use asymmetry::{asymmetry_of, fraenkel_asymmetry, fraenkel_asymmetry_with, Asymmetry, AsymmetryOptions, DiscOverlap, PolygonSet};
pub use domain::{BallSpec, Domain, Shape};
pub use polygon::{BoundingBox, Point, Polygon};
pub use raster::{symmetric_difference_with_ball, RasterMask, SymmetricDifference};

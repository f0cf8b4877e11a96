//! Tables and the solvers that intersect lines with them.

pub mod line;
pub mod oval;
pub mod polygon;
pub mod quadrature;
pub mod roots;

pub use line::OrientedLine;
pub use oval::{Oval, Shape};
pub use polygon::{BoundaryHit, PolygonTable};

//! Numerical laboratory for billiard-type dynamical systems on planar convex tables.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: ovals, polygons, oriented lines and the line/curve intersection solvers.
//! - [`maps`]: the map families (Birkhoff, puck, outer, symplectic, projective, circle maps,
//!   parabola trap) as pure step functions.
//! - [`analysis`]: rotation numbers, Lyapunov exponents, symplecticity defects, periodic-orbit
//!   searches, length/area spectra and the invariant-curve classifier.
//! - [`caustics`]: envelopes of line families, caustics by reflection, cusp counting, the
//!   string test and symmetry measurements.
//! - [`clicks`]: lattice click trains of translated curves.

pub mod analysis;
pub mod caustics;
pub mod clicks;
pub mod error;
pub mod geometry;
pub mod maps;
pub mod vec2;

pub use error::{Error, Result};
pub use vec2::{Affine2, Vec2};

/// Incidence angles whose sine falls below this value are treated as grazing.
pub const GRAZING_SINE: f64 = 1e-9;

//! Envelopes of line families and the caustics built from them.

pub mod envelope;
pub mod measure;
pub mod reflection;

pub use envelope::{cusp_count, envelope, spectral_derivative, tangent_family, EnvelopeCurve, LineFamily};
pub use measure::{string_defect, string_length, symmetry_defect};
pub use reflection::{caustic_by_reflection, caustic_from_invariant_curve, reflected_family};

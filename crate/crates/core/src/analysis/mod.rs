//! Orbit diagnostics and variational searches.

pub mod invariants;
pub mod lyapunov;
pub mod mobius;
pub mod orbit;
pub mod periodic;
pub mod reflectivity;
pub mod rotation;
pub mod spectra;
pub mod symplecticity;

pub use invariants::{
    confocal_defect, confocal_parameters, homothety_defect, homothety_value, invariant_curve_diagnostic, CurveDiagnostic,
    Verdict,
};
pub use lyapunov::{lyapunov_exponent, LyapunovEstimate, LyapunovOptions};
pub use mobius::{mobius_fixed_point_check, MobiusCheck};
pub use orbit::{iterate_circle, iterate_cylinder, iterate_planar, OrbitRecord, OrbitStep, State, Termination};
pub use periodic::{periodic_orbit_search, PeriodicOrbit, PeriodicSearch, SearchOptions};
pub use reflectivity::{reflectivity_test, ReflectivityReport};
pub use rotation::{rotation_number, RotationEstimate};
pub use spectra::{inscribed_perimeter, variational_area_orbits, variational_length_orbits, SpectrumEntry, SpectrumOptions};
pub use symplecticity::{sample_phase_region, symplecticity_defect, AlphaShear, SymplecticityReport};

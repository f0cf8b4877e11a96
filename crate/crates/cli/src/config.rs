//! Scenario files: strict TOML with an explicit `schema_version`.

use std::path::PathBuf;

use billiard_core::geometry::{Oval, PolygonTable, Shape};
use billiard_core::maps::{CircleMapMode, TransverseField};
use billiard_core::{Affine2, Vec2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub seed: u64,
    /// Output directory; defaults to `out/<name>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub experiment: Vec<Experiment>,
}

/// A convex table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TableSpec {
    Circle {
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    Ellipse {
        a: f64,
        b: f64,
        #[serde(default)]
        center: [f64; 2],
        #[serde(default)]
        rotation: f64,
    },
    Stadium { half_length: f64, radius: f64 },
    SupportFourier { cos: Vec<f64>, sin: Vec<f64> },
    /// Support function with random Fourier modes drawn from the scenario seed.
    RandomOval {
        modes: usize,
        #[serde(default = "default_margin")]
        margin: f64,
    },
    Polygon { vertices: Vec<[f64; 2]> },
}

fn default_margin() -> f64 {
    0.3
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Birkhoff,
    Puck { height: f64 },
    Outer,
    Symplectic,
    CircleMap { mode: CircleMapMode },
}

impl MapSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MapSpec::Birkhoff => "birkhoff",
            MapSpec::Puck { .. } => "puck",
            MapSpec::Outer => "outer",
            MapSpec::Symplectic => "symplectic",
            MapSpec::CircleMap { .. } => "circle_map",
        }
    }

    /// Number of coordinates of a start point.
    pub fn dimension(&self) -> usize {
        match self {
            MapSpec::CircleMap { .. } => 1,
            _ => 2,
        }
    }

    pub fn is_cylinder(&self) -> bool {
        matches!(self, MapSpec::Birkhoff | MapSpec::Puck { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Orbit {
        table: TableSpec,
        map: MapSpec,
        starts: Vec<Vec<f64>>,
        steps: usize,
        /// Steps kept in the orbit artifacts (all of them are analysed).
        #[serde(default = "default_record")]
        record: usize,
    },
    RotationNumber {
        table: TableSpec,
        map: MapSpec,
        starts: Vec<Vec<f64>>,
        steps: usize,
    },
    Lyapunov {
        table: TableSpec,
        map: MapSpec,
        start: Vec<f64>,
        steps: usize,
        #[serde(default)]
        checkpoints: Vec<usize>,
        #[serde(default = "default_renorm")]
        renorm_every: usize,
        #[serde(default = "default_burn_in")]
        burn_in: usize,
    },
    Symplecticity {
        table: TableSpec,
        map: MapSpec,
        samples: usize,
        alpha_range: [f64; 2],
    },
    /// Newton search on ovals; recurrence of random chords on polygons (symplectic map).
    PeriodicSearch {
        table: TableSpec,
        map: MapSpec,
        seeds: usize,
        #[serde(default)]
        period: Option<usize>,
        #[serde(default)]
        class: Option<i64>,
        #[serde(default)]
        max_steps: Option<usize>,
        #[serde(default = "default_tolerance")]
        tolerance: f64,
    },
    LengthSpectrum { table: TableSpec, periods: Vec<usize>, class: usize },
    AreaSpectrum { table: TableSpec, periods: Vec<usize>, class: usize },
    Reflectivity { table: TableSpec, field: TransverseField, k: usize, samples: usize },
    Caustic {
        table: TableSpec,
        source: [f64; 2],
        reflections: Vec<usize>,
        rays: usize,
        /// Recount the cusps on a grid of `2 · rays`.
        #[serde(default = "default_true")]
        doubling: bool,
    },
    StringTest {
        table: TableSpec,
        inner: TableSpec,
        samples: usize,
    },
    Clicks {
        table: TableSpec,
        epsilon: f64,
        direction: [f64; 2],
        /// Defaults to `[0, 2ε)`.
        #[serde(default)]
        window: Option<[f64; 2]>,
        #[serde(default = "default_bins")]
        bins: usize,
        #[serde(default = "default_harmonics")]
        harmonics: usize,
    },
    Trap {
        inner_focal: f64,
        outer_focal: f64,
        aperture: [f64; 2],
        rays: usize,
        reflections: usize,
        #[serde(default = "default_record")]
        record: usize,
    },
    Gutkin { table: TableSpec, deltas: Vec<f64>, samples: usize },
}

fn default_record() -> usize {
    2000
}
fn default_renorm() -> usize {
    16
}
fn default_burn_in() -> usize {
    1000
}
fn default_tolerance() -> f64 {
    1e-9
}
fn default_true() -> bool {
    true
}
fn default_bins() -> usize {
    64
}
fn default_harmonics() -> usize {
    16
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Orbit { .. } => "orbit",
            Experiment::RotationNumber { .. } => "rotation_number",
            Experiment::Lyapunov { .. } => "lyapunov",
            Experiment::Symplecticity { .. } => "symplecticity",
            Experiment::PeriodicSearch { .. } => "periodic_search",
            Experiment::LengthSpectrum { .. } => "length_spectrum",
            Experiment::AreaSpectrum { .. } => "area_spectrum",
            Experiment::Reflectivity { .. } => "reflectivity",
            Experiment::Caustic { .. } => "caustic",
            Experiment::StringTest { .. } => "string_test",
            Experiment::Clicks { .. } => "clicks",
            Experiment::Trap { .. } => "trap",
            Experiment::Gutkin { .. } => "gutkin",
        }
    }

    pub fn table(&self) -> Option<&TableSpec> {
        match self {
            Experiment::Orbit { table, .. }
            | Experiment::RotationNumber { table, .. }
            | Experiment::Lyapunov { table, .. }
            | Experiment::Symplecticity { table, .. }
            | Experiment::PeriodicSearch { table, .. }
            | Experiment::LengthSpectrum { table, .. }
            | Experiment::AreaSpectrum { table, .. }
            | Experiment::Reflectivity { table, .. }
            | Experiment::Caustic { table, .. }
            | Experiment::StringTest { table, .. }
            | Experiment::Clicks { table, .. }
            | Experiment::Gutkin { table, .. } => Some(table),
            Experiment::Trap { .. } => None,
        }
    }
}

/// A built table.
#[derive(Debug, Clone)]
pub enum Table {
    Oval(Oval),
    Polygon(PolygonTable),
}

impl TableSpec {
    pub fn is_polygon(&self) -> bool {
        matches!(self, TableSpec::Polygon { .. })
    }

    /// Build the table; `rng` feeds random ovals.
    pub fn build<R: Rng + ?Sized>(&self, rng: &mut R) -> billiard_core::Result<Table> {
        let oval = match self {
            TableSpec::Circle { radius, center } => Oval::circle(*radius)?.translated(Vec2::from(*center))?,
            TableSpec::Ellipse { a, b, center, rotation } => {
                let place = Affine2::translation(Vec2::from(*center)).compose(&Affine2::rotation(*rotation));
                Oval::new(Shape::Ellipse { a: *a, b: *b }, place)?
            }
            TableSpec::Stadium { half_length, radius } => Oval::stadium(*half_length, *radius)?,
            TableSpec::SupportFourier { cos, sin } => Oval::support_fourier(cos.clone(), sin.clone())?,
            TableSpec::RandomOval { modes, margin } => Oval::new(Shape::random_support_fourier(rng, *modes, *margin), Affine2::IDENTITY)?,
            TableSpec::Polygon { vertices } => return Ok(Table::Polygon(PolygonTable::from_points(vertices)?)),
        };
        Ok(Table::Oval(oval))
    }
}

fn field_err(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Config { field: Some(field.into()), message: message.into() }
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(field_err(field, format!("must be a positive number, got {v}")))
    }
}

fn finite(field: &str, values: &[f64]) -> Result<(), CliError> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(field_err(field, format!("must be finite, got {v}"))),
        None => Ok(()),
    }
}

fn at_least(field: &str, v: usize, min: usize) -> Result<(), CliError> {
    if v >= min {
        Ok(())
    } else {
        Err(field_err(field, format!("must be at least {min}, got {v}")))
    }
}

fn validate_table(field: &str, t: &TableSpec) -> Result<(), CliError> {
    match t {
        TableSpec::Circle { radius, center } => {
            positive(&format!("{field}.radius"), *radius)?;
            finite(&format!("{field}.center"), center)
        }
        TableSpec::Ellipse { a, b, center, rotation } => {
            positive(&format!("{field}.a"), *a)?;
            positive(&format!("{field}.b"), *b)?;
            finite(&format!("{field}.center"), center)?;
            finite(&format!("{field}.rotation"), &[*rotation])
        }
        TableSpec::Stadium { half_length, radius } => {
            positive(&format!("{field}.half_length"), *half_length)?;
            positive(&format!("{field}.radius"), *radius)
        }
        TableSpec::SupportFourier { cos, sin } => {
            if cos.is_empty() || cos[0] <= 0.0 {
                return Err(field_err(format!("{field}.cos"), "needs a positive mean support value cos[0]"));
            }
            finite(&format!("{field}.cos"), cos)?;
            finite(&format!("{field}.sin"), sin)
        }
        TableSpec::RandomOval { modes, margin } => {
            at_least(&format!("{field}.modes"), *modes, 2)?;
            if !(*margin > 0.0 && *margin < 1.0) {
                return Err(field_err(format!("{field}.margin"), format!("must lie in (0, 1), got {margin}")));
            }
            Ok(())
        }
        TableSpec::Polygon { vertices } => {
            if vertices.len() < 3 {
                return Err(field_err(format!("{field}.vertices"), "needs at least 3 vertices"));
            }
            finite(&format!("{field}.vertices"), &vertices.concat())
        }
    }
}

fn validate_starts(field: &str, map: &MapSpec, starts: &[Vec<f64>]) -> Result<(), CliError> {
    if starts.is_empty() {
        return Err(field_err(field, "needs at least one start"));
    }
    for (i, s) in starts.iter().enumerate() {
        if s.len() != map.dimension() {
            return Err(field_err(
                format!("{field}[{i}]"),
                format!("{} starts have {} coordinates, got {}", map.name(), map.dimension(), s.len()),
            ));
        }
        finite(&format!("{field}[{i}]"), s)?;
    }
    Ok(())
}

fn validate_map(field: &str, map: &MapSpec, table: &TableSpec) -> Result<(), CliError> {
    if let MapSpec::Puck { height } = map {
        if !(height.is_finite() && *height >= 0.0) {
            return Err(field_err(format!("{field}.height"), format!("must be a non-negative number, got {height}")));
        }
    }
    if table.is_polygon() && !matches!(map, MapSpec::Symplectic) {
        return Err(field_err(field, format!("{} map needs an oval table", map.name())));
    }
    Ok(())
}

impl Scenario {
    /// Parse and validate.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let s: Scenario = toml::from_str(text).map_err(|e| CliError::Config { field: None, message: e.to_string() })?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(field_err(
                "schema_version",
                format!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(field_err("name", "must be a non-empty ASCII name of letters, digits, '-' or '_'"));
        }
        if self.experiment.is_empty() {
            return Err(field_err("experiment", "needs at least one experiment"));
        }
        for (i, e) in self.experiment.iter().enumerate() {
            validate_experiment(&format!("experiment[{i}]"), e)?;
        }
        Ok(())
    }
}

fn validate_experiment(f: &str, e: &Experiment) -> Result<(), CliError> {
    if let Some(t) = e.table() {
        validate_table(&format!("{f}.table"), t)?;
    }
    let oval_only = |t: &TableSpec| -> Result<(), CliError> {
        if t.is_polygon() {
            Err(field_err(format!("{f}.table"), format!("{} needs an oval table", e.kind())))
        } else {
            Ok(())
        }
    };
    match e {
        Experiment::Orbit { table, map, starts, steps, .. } => {
            validate_map(&format!("{f}.map"), map, table)?;
            if table.is_polygon() {
                return Err(field_err(format!("{f}.table"), "orbit needs an oval table"));
            }
            validate_starts(&format!("{f}.starts"), map, starts)?;
            at_least(&format!("{f}.steps"), *steps, 1)
        }
        Experiment::RotationNumber { table, map, starts, steps } => {
            oval_only(table)?;
            validate_map(&format!("{f}.map"), map, table)?;
            if matches!(map, MapSpec::Outer) {
                return Err(field_err(format!("{f}.map"), "outer billiard orbits have no angle coordinate"));
            }
            validate_starts(&format!("{f}.starts"), map, starts)?;
            at_least(&format!("{f}.steps"), *steps, 100)
        }
        Experiment::Lyapunov { table, map, start, steps, checkpoints, renorm_every, .. } => {
            oval_only(table)?;
            validate_map(&format!("{f}.map"), map, table)?;
            if matches!(map, MapSpec::CircleMap { .. }) {
                return Err(field_err(format!("{f}.map"), "Lyapunov exponents need a two-dimensional map"));
            }
            validate_starts(&format!("{f}.start"), map, std::slice::from_ref(start))?;
            at_least(&format!("{f}.steps"), *steps, 1)?;
            at_least(&format!("{f}.renorm_every"), *renorm_every, 1)?;
            for (i, c) in checkpoints.iter().enumerate() {
                if *c == 0 || c > steps {
                    return Err(field_err(format!("{f}.checkpoints[{i}]"), format!("must lie in [1, steps], got {c}")));
                }
            }
            Ok(())
        }
        Experiment::Symplecticity { table, map, samples, alpha_range } => {
            oval_only(table)?;
            if !map.is_cylinder() {
                return Err(field_err(format!("{f}.map"), "symplecticity is measured for birkhoff and puck maps"));
            }
            validate_map(&format!("{f}.map"), map, table)?;
            at_least(&format!("{f}.samples"), *samples, 1)?;
            let [lo, hi] = *alpha_range;
            if !(lo > 0.0 && lo < hi && hi < std::f64::consts::PI) {
                return Err(field_err(format!("{f}.alpha_range"), "must satisfy 0 < lo < hi < π"));
            }
            Ok(())
        }
        Experiment::PeriodicSearch { table, map, seeds, period, class, max_steps, tolerance } => {
            validate_map(&format!("{f}.map"), map, table)?;
            at_least(&format!("{f}.seeds"), *seeds, 1)?;
            positive(&format!("{f}.tolerance"), *tolerance)?;
            if table.is_polygon() {
                if max_steps.is_none() {
                    return Err(field_err(format!("{f}.max_steps"), "polygon recurrence search needs max_steps"));
                }
            } else {
                if matches!(map, MapSpec::CircleMap { .. }) {
                    return Err(field_err(format!("{f}.map"), "periodic search needs a two-dimensional map"));
                }
                let p = period.ok_or_else(|| field_err(format!("{f}.period"), "Newton search needs a period"))?;
                at_least(&format!("{f}.period"), p, 1)?;
                if class.is_none() {
                    return Err(field_err(format!("{f}.class"), "Newton search needs a rotation class"));
                }
            }
            Ok(())
        }
        Experiment::LengthSpectrum { table, periods, class } | Experiment::AreaSpectrum { table, periods, class } => {
            oval_only(table)?;
            if periods.is_empty() {
                return Err(field_err(format!("{f}.periods"), "needs at least one period"));
            }
            at_least(&format!("{f}.class"), *class, 1)
        }
        Experiment::Reflectivity { k, samples, .. } => {
            at_least(&format!("{f}.k"), *k, 2)?;
            at_least(&format!("{f}.samples"), *samples, 1)
        }
        Experiment::Caustic { table, source, reflections, rays, .. } => {
            oval_only(table)?;
            finite(&format!("{f}.source"), source)?;
            if reflections.is_empty() || reflections.contains(&0) {
                return Err(field_err(format!("{f}.reflections"), "needs reflection counts of at least 1"));
            }
            at_least(&format!("{f}.rays"), *rays, 64)
        }
        Experiment::StringTest { table, inner, samples } => {
            oval_only(table)?;
            validate_table(&format!("{f}.inner"), inner)?;
            if inner.is_polygon() {
                return Err(field_err(format!("{f}.inner"), "string test needs an oval caustic candidate"));
            }
            at_least(&format!("{f}.samples"), *samples, 2)
        }
        Experiment::Clicks { epsilon, direction, window, bins, harmonics, .. } => {
            positive(&format!("{f}.epsilon"), *epsilon)?;
            finite(&format!("{f}.direction"), direction)?;
            if (Vec2::from(*direction).norm() - 1.0).abs() > 1e-12 {
                return Err(field_err(format!("{f}.direction"), "must be a unit vector"));
            }
            if let Some([a, b]) = window {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(field_err(format!("{f}.window"), "must be a finite interval [a, b) with a < b"));
                }
            }
            at_least(&format!("{f}.bins"), *bins, 16)?;
            at_least(&format!("{f}.harmonics"), *harmonics, 1)
        }
        Experiment::Trap { inner_focal, outer_focal, aperture, rays, reflections, .. } => {
            positive(&format!("{f}.inner_focal"), *inner_focal)?;
            positive(&format!("{f}.outer_focal"), *outer_focal)?;
            if outer_focal <= inner_focal {
                return Err(field_err(format!("{f}.outer_focal"), "must exceed inner_focal"));
            }
            if !(aperture[0] > 0.0 && aperture[0] < aperture[1]) {
                return Err(field_err(format!("{f}.aperture"), "must be an interval 0 < x0 < x1"));
            }
            at_least(&format!("{f}.rays"), *rays, 1)?;
            at_least(&format!("{f}.reflections"), *reflections, 1)
        }
        Experiment::Gutkin { table, deltas, samples } => {
            oval_only(table)?;
            for (i, d) in deltas.iter().enumerate() {
                if !(*d > 0.0 && *d < std::f64::consts::FRAC_PI_2) {
                    return Err(field_err(format!("{f}.deltas[{i}]"), format!("must lie in (0, π/2), got {d}")));
                }
            }
            at_least(&format!("{f}.samples"), *samples, 1)
        }
    }
}

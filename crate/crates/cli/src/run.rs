//! Experiment dispatch: every experiment yields metrics, artifacts and an optional figure.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::Path;
use std::time::Instant;

use billiard_core::analysis::{
    confocal_defect, homothety_defect, invariant_curve_diagnostic, iterate_circle, iterate_cylinder, iterate_planar,
    lyapunov_exponent, periodic_orbit_search, reflectivity_test, rotation_number, sample_phase_region,
    symplecticity_defect, variational_area_orbits, variational_length_orbits, LyapunovOptions, OrbitRecord,
    SearchOptions, SpectrumOptions, State, Termination,
};
use billiard_core::caustics::{caustic_by_reflection, cusp_count, string_defect, EnvelopeCurve};
use billiard_core::clicks::{click_events, click_histogram, click_spectrum, ClickCurve};
use billiard_core::geometry::{Oval, PolygonTable};
use billiard_core::maps::{
    gutkin_defect, polygon_period, symplectic_map_polygon, trap_trace, BirkhoffMap, ChordState, CircleMapF, Lifted,
    OuterMap, ParabolaTrap, PhasePoint, PlanarMap, PolygonChord, PolygonPoint, ProjectiveBoundary, ProjectiveTable,
    PuckMap, Ray, SymplecticOvalMap,
};
use billiard_core::{Error, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::artifacts::{self, csv, Artifact, Manifest};
use crate::config::{Experiment, MapSpec, Scenario, Table, TableSpec, SCHEMA_VERSION};
use crate::error::CliError;
use crate::figure::{runs, Figure, Style};

/// Steps drawn in orbit figures.
const FIGURE_STEPS: usize = 400;

/// Reflections framed in trap figures.
const TRAP_ZOOM_STEPS: usize = 40;

/// Random stream purposes within one experiment.
const STREAM_TABLE: u64 = 0;
const STREAM_SAMPLES: u64 = 1;
const STREAM_INNER: u64 = 2;

/// Generator for one task: the scenario seed with a stream chosen by experiment and purpose,
/// so results never depend on execution order.
pub fn task_rng(seed: u64, experiment: usize, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((experiment as u64) << 8) | purpose);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub index: usize,
    pub kind: String,
    pub metrics: Value,
}

/// Content of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub schema_version: u32,
    pub seed: u64,
    pub experiments: Vec<ExperimentSummary>,
}

impl Summary {
    /// Metrics of the first experiment of `kind`.
    pub fn metrics(&self, kind: &str) -> Option<&Value> {
        self.experiments.iter().find(|e| e.kind == kind).map(|e| &e.metrics)
    }
}

/// Wall-clock times; never written to artifacts.
#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub index: usize,
    pub kind: &'static str,
    pub seconds: f64,
    /// Per start or per ray, for experiments with several.
    pub items: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Summary,
    pub artifacts: Vec<Artifact>,
    pub timings: Vec<Timing>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub outcome: Outcome,
    pub manifest: Manifest,
}

struct ExperimentOutput {
    metrics: Value,
    artifacts: Vec<Artifact>,
    figure: Option<Figure>,
    items: Vec<f64>,
}

impl ExperimentOutput {
    fn new(metrics: Value) -> Self {
        ExperimentOutput { metrics, artifacts: Vec::new(), figure: None, items: Vec::new() }
    }
}

/// Run every experiment of a validated scenario in memory.
pub fn execute(scenario: &Scenario) -> Result<Outcome, CliError> {
    scenario.validate()?;
    let mut artifacts = vec![Artifact::json("scenario.json", scenario)];
    let mut experiments = Vec::new();
    let mut timings = Vec::new();
    for (index, exp) in scenario.experiment.iter().enumerate() {
        let started = Instant::now();
        let out = run_experiment(scenario.seed, index, exp)?;
        let seconds = started.elapsed().as_secs_f64();
        let prefix = format!("e{index}-");
        for a in out.artifacts {
            artifacts.push(Artifact { name: format!("{prefix}{}", a.name), bytes: a.bytes });
        }
        if let Some(fig) = out.figure {
            artifacts.push(Artifact::text(format!("{prefix}figure.svg"), fig.to_svg()));
            artifacts.push(Artifact::json(format!("{prefix}figure.json"), &fig));
        }
        experiments.push(ExperimentSummary { index, kind: exp.kind().to_string(), metrics: out.metrics });
        timings.push(Timing { index, kind: exp.kind(), seconds, items: out.items });
    }
    let summary = Summary {
        scenario: scenario.name.clone(),
        schema_version: SCHEMA_VERSION,
        seed: scenario.seed,
        experiments,
    };
    artifacts.push(Artifact::json("summary.json", &summary));
    Ok(Outcome { summary, artifacts, timings })
}

/// Run and write the artifacts plus `manifest.json` into `dir`.
pub fn run_to_dir(scenario: &Scenario, dir: &Path) -> Result<RunReport, CliError> {
    let outcome = execute(scenario)?;
    let manifest = artifacts::write_all(dir, &scenario.name, &outcome.artifacts)?;
    Ok(RunReport { outcome, manifest })
}

type ErrFn = Box<dyn FnOnce(Error) -> CliError>;

fn numerical(index: usize, kind: &str, op: &str) -> ErrFn {
    let operation = format!("experiment[{index}] ({kind}): {op}");
    Box::new(move |source| CliError::Numerical { operation, source })
}

fn oval_of(table: Table) -> Result<Oval, CliError> {
    match table {
        Table::Oval(o) => Ok(o),
        Table::Polygon(_) => Err(CliError::Config { field: None, message: "experiment needs an oval table".into() }),
    }
}

fn run_experiment(seed: u64, index: usize, exp: &Experiment) -> Result<ExperimentOutput, CliError> {
    let kind = exp.kind();
    let err = |op: &str| numerical(index, kind, op);
    let table = match exp.table() {
        Some(spec) => Some(spec.build(&mut task_rng(seed, index, STREAM_TABLE)).map_err(err("table construction"))?),
        None => None,
    };
    let mut rng = task_rng(seed, index, STREAM_SAMPLES);
    match exp {
        Experiment::Orbit { table: spec, map, starts, steps, record } => {
            let oval = oval_of(table.unwrap())?;
            orbit_experiment(&oval, spec, map, starts, *steps, *record, err)
        }
        Experiment::RotationNumber { map, starts, steps, .. } => {
            let oval = oval_of(table.unwrap())?;
            rotation_experiment(&oval, map, starts, *steps, err)
        }
        Experiment::Lyapunov { map, start, steps, checkpoints, renorm_every, burn_in, .. } => {
            let oval = oval_of(table.unwrap())?;
            let record_every = checkpoints.iter().fold(0, |g, &c| gcd(g, c));
            let record_every = if record_every == 0 { (*steps / 100).max(1) } else { record_every };
            let opts = LyapunovOptions { renorm_every: *renorm_every, burn_in: *burn_in, record_every };
            let est = with_planar(&oval, map, |m| lyapunov_exponent(m, [start[0], start[1]], *steps, opts))
                .map_err(err("lyapunov_exponent"))?;
            let checks: Vec<Value> =
                checkpoints.iter().map(|&c| json!({"step": c, "estimate": est.at(c)})).collect();
            let change = match checkpoints.len() {
                n if n >= 2 => {
                    let a = est.at(checkpoints[n - 2]).unwrap_or(f64::NAN);
                    let b = est.at(checkpoints[n - 1]).unwrap_or(f64::NAN);
                    Some(((b - a) / b).abs())
                }
                _ => None,
            };
            let mut out = ExperimentOutput::new(json!({
                "map": map.name(),
                "value": est.value,
                "steps": est.steps,
                "burn_in": burn_in,
                "checkpoints": checks,
                "relative_change": change,
            }));
            out.artifacts.push(Artifact::text(
                "lyapunov.csv",
                csv(&["step", "estimate"], est.running.iter().map(|(k, v)| vec![k.to_string(), v.to_string()])),
            ));
            Ok(out)
        }
        Experiment::Symplecticity { map, samples, alpha_range, .. } => {
            let oval = oval_of(table.unwrap())?;
            let pts = sample_phase_region(&mut rng, oval.total_length(), alpha_range[0], alpha_range[1], *samples);
            let report = match map {
                MapSpec::Birkhoff => symplecticity_defect(&BirkhoffMap { oval: &oval }, &pts),
                MapSpec::Puck { height } => symplecticity_defect(&PuckMap { oval: &oval, height: *height }, &pts),
                _ => unreachable!("validated"),
            }
            .map_err(err("symplecticity_defect"))?;
            Ok(ExperimentOutput::new(json!({
                "map": map.name(),
                "max_defect": report.max_defect,
                "location": [report.location.s, report.location.alpha],
                "samples": report.samples,
            })))
        }
        Experiment::PeriodicSearch { map, seeds, period, class, max_steps, tolerance, .. } => match table.unwrap() {
            Table::Oval(oval) => {
                let (n, k) = (period.unwrap(), class.unwrap());
                let seed_points: Vec<[f64; 2]> = (0..*seeds).map(|_| search_seed(&oval, map, &mut rng)).collect();
                let opts = SearchOptions { tolerance: *tolerance, ..SearchOptions::default() };
                let found = with_planar(&oval, map, |m| periodic_orbit_search(m, n, k, &seed_points, opts))
                    .map_err(err("periodic_orbit_search"))?;
                let mut rows = Vec::new();
                for (i, o) in found.orbits.iter().enumerate() {
                    for (j, s) in o.states.iter().enumerate() {
                        rows.push(vec![i.to_string(), j.to_string(), s[0].to_string(), s[1].to_string()]);
                    }
                }
                let max_residual = found.orbits.iter().map(|o| o.residual).fold(0.0, f64::max);
                let mut out = ExperimentOutput::new(json!({
                    "map": map.name(),
                    "period": n,
                    "class": k,
                    "orbits": found.orbits.len(),
                    "failures": found.failures,
                    "max_residual": max_residual,
                }));
                out.artifacts.push(Artifact::text("orbits.csv", csv(&["orbit", "index", "c0", "c1"], rows)));
                if let Some(o) = found.orbits.first() {
                    let mut fig = Figure::new(format!("periodic orbit ({n}, {k}), {} map", map.name()));
                    fig.push_oval(&oval);
                    fig.push(Style::Orbit, true, o.states.iter().map(|s| planar_position(&oval, map, *s)));
                    out.figure = Some(fig);
                }
                Ok(out)
            }
            Table::Polygon(poly) => polygon_recurrence(&poly, *seeds, max_steps.unwrap(), *tolerance, &mut rng, err),
        },
        Experiment::LengthSpectrum { periods, class, .. } | Experiment::AreaSpectrum { periods, class, .. } => {
            let oval = oval_of(table.unwrap())?;
            let area = matches!(exp, Experiment::AreaSpectrum { .. });
            let mut rows = Vec::new();
            let mut values = serde_json::Map::new();
            let mut max_residual: f64 = 0.0;
            for &n in periods {
                let entries = if area {
                    variational_area_orbits(&oval, n, *class, SpectrumOptions::default())
                        .map_err(err("variational_area_orbits"))?
                } else {
                    variational_length_orbits(&oval, n, *class, SpectrumOptions::default())
                        .map_err(err("variational_length_orbits"))?
                };
                let mut vs: Vec<f64> = Vec::new();
                for e in &entries {
                    rows.push(vec![e.period.to_string(), e.class.to_string(), e.value.to_string(), e.residual.to_string()]);
                    max_residual = max_residual.max(e.residual);
                    vs.push(e.value);
                }
                values.insert(n.to_string(), json!(vs));
            }
            let mut out = ExperimentOutput::new(json!({
                "functional": if area { "area" } else { "length" },
                "class": class,
                "values": values,
                "max_residual": max_residual,
            }));
            out.artifacts.push(Artifact::text("spectrum.csv", csv(&["period", "class", "value", "residual"], rows)));
            Ok(out)
        }
        Experiment::Reflectivity { field, k, samples, .. } => {
            let boundary = match table.unwrap() {
                Table::Oval(o) => ProjectiveBoundary::Oval(o),
                Table::Polygon(p) => ProjectiveBoundary::Polygon(p),
            };
            let pt = ProjectiveTable::new(boundary, field.clone()).map_err(err("projective table"))?;
            let r = reflectivity_test(&pt, *k, *samples, &mut rng).map_err(err("reflectivity_test"))?;
            let closing = (r.fraction_periodic * r.admissible as f64).round() as usize;
            Ok(ExperimentOutput::new(json!({
                "k": k,
                "fraction_periodic": r.fraction_periodic,
                "closing": closing,
                "admissible": r.admissible,
                "attempted": r.attempted,
                "max_closure_error": r.max_closure_error,
            })))
        }
        Experiment::Caustic { source, reflections, rays, doubling, .. } => {
            let oval = oval_of(table.unwrap())?;
            caustic_experiment(&oval, Vec2::from(*source), reflections, *rays, *doubling, err)
        }
        Experiment::StringTest { inner, samples, .. } => {
            let outer = oval_of(table.unwrap())?;
            let inner_oval = oval_of(inner.build(&mut task_rng(seed, index, STREAM_INNER)).map_err(err("inner curve"))?)?;
            let defect = string_defect(&outer, &inner_oval, *samples).map_err(err("string_defect"))?;
            let mut fig = Figure::new("string test");
            fig.push_oval(&outer);
            let pts = (0..512).map(|i| inner_oval.position(TAU * i as f64 / 512.0));
            fig.push(Style::Caustic, true, pts);
            let mut out = ExperimentOutput::new(json!({"string_defect": defect, "samples": samples}));
            out.figure = Some(fig);
            Ok(out)
        }
        Experiment::Clicks { epsilon, direction, window, bins, harmonics, .. } => {
            let curve = match table.unwrap() {
                Table::Oval(o) => ClickCurve::Oval(o),
                Table::Polygon(p) => {
                    ClickCurve::Polyline { points: p.vertices().iter().map(|v| v.to_array()).collect(), closed: true }
                }
            };
            let window = window.unwrap_or([0.0, 2.0 * epsilon]);
            clicks_experiment(&curve, *epsilon, Vec2::from(*direction), window, *bins, *harmonics, err)
        }
        Experiment::Trap { inner_focal, outer_focal, aperture, rays, reflections, record } => {
            let trap = ParabolaTrap::new(*inner_focal, *outer_focal, *aperture).map_err(err("parabola trap"))?;
            trap_experiment(&trap, *rays, *reflections, *record, err)
        }
        Experiment::Gutkin { deltas, samples, .. } => {
            let oval = oval_of(table.unwrap())?;
            let mut rows = Vec::new();
            let mut defects = Vec::new();
            for &d in deltas {
                let g = gutkin_defect(&oval, d, *samples).map_err(err("gutkin_defect"))?;
                rows.push(vec![d.to_string(), g.to_string()]);
                defects.push(json!({"delta": d, "defect": g}));
            }
            let mut out = ExperimentOutput::new(json!({"defects": defects, "samples": samples}));
            out.artifacts.push(Artifact::text("gutkin.csv", csv(&["delta", "defect"], rows)));
            Ok(out)
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Call `f` with the planar form of a two-dimensional map.
fn with_planar<R>(oval: &Oval, map: &MapSpec, f: impl FnOnce(&dyn PlanarMap) -> R) -> R {
    match map {
        MapSpec::Birkhoff => f(&Lifted(&BirkhoffMap { oval })),
        MapSpec::Puck { height } => f(&Lifted(&PuckMap { oval, height: *height })),
        MapSpec::Outer => f(&OuterMap { oval }),
        MapSpec::Symplectic => f(&SymplecticOvalMap { oval }),
        MapSpec::CircleMap { .. } => unreachable!("validated: circle maps are one-dimensional"),
    }
}

fn orbit_of(oval: &Oval, map: &MapSpec, start: &[f64], steps: usize) -> billiard_core::Result<OrbitRecord> {
    match map {
        MapSpec::Birkhoff => iterate_cylinder(&BirkhoffMap { oval }, "birkhoff", PhasePoint::new(start[0], start[1]), steps),
        MapSpec::Puck { height } => {
            let mut rec =
                iterate_cylinder(&PuckMap { oval, height: *height }, "puck", PhasePoint::new(start[0], start[1]), steps)?;
            rec.set_parameter("height", *height);
            Ok(rec)
        }
        MapSpec::Outer => iterate_planar(&OuterMap { oval }, "outer", [start[0], start[1]], steps, |x| State::Point(Vec2::from(x))),
        MapSpec::Symplectic => iterate_planar(&SymplecticOvalMap { oval }, "symplectic", [start[0], start[1]], steps, |x| {
            State::Chord(ChordState::new(x[0], x[1]))
        }),
        MapSpec::CircleMap { mode } => iterate_circle(&CircleMapF::new(oval, *mode)?, start[0], steps),
    }
}

fn state_position(oval: &Oval, state: &State) -> Option<Vec2> {
    match state {
        State::Phase(p) => Some(oval.position(oval.param_of_arclength(p.s.rem_euclid(oval.total_length())))),
        State::Chord(c) => Some(oval.position(c.x)),
        State::Point(p) => Some(*p),
        State::Param { t } => Some(oval.position(*t)),
        State::Ray(r) => Some(r.origin),
        State::PolygonChord(_) => None,
    }
}

fn planar_position(oval: &Oval, map: &MapSpec, x: [f64; 2]) -> Vec2 {
    match map {
        MapSpec::Birkhoff | MapSpec::Puck { .. } => state_position(oval, &State::Phase(PhasePoint::new(x[0], x[1]))),
        MapSpec::Symplectic => state_position(oval, &State::Chord(ChordState::new(x[0], x[1]))),
        _ => Some(Vec2::from(x)),
    }
    .expect("planar states have positions")
}

/// Centred and axis-aligned ellipse or circle, where confocal parameters are defined.
fn is_standard_conic(spec: &TableSpec) -> bool {
    match spec {
        TableSpec::Circle { center, .. } => *center == [0.0, 0.0],
        TableSpec::Ellipse { center, rotation, .. } => *center == [0.0, 0.0] && *rotation == 0.0,
        _ => false,
    }
}

fn is_conic(spec: &TableSpec) -> bool {
    matches!(spec, TableSpec::Circle { .. } | TableSpec::Ellipse { .. })
}

fn termination_name(t: Termination) -> Value {
    serde_json::to_value(t).expect("termination serialises")
}

fn orbit_experiment(
    oval: &Oval,
    spec: &TableSpec,
    map: &MapSpec,
    starts: &[Vec<f64>],
    steps: usize,
    record: usize,
    err: impl Fn(&str) -> ErrFn,
) -> Result<ExperimentOutput, CliError> {
    let mut out = ExperimentOutput::new(Value::Null);
    let mut per_orbit = Vec::new();
    let mut fig = Figure::new(format!("{} map orbits", map.name()));
    fig.push_oval(oval);
    let (mut max_confocal, mut max_homothety): (Option<f64>, Option<f64>) = (None, None);
    for (i, start) in starts.iter().enumerate() {
        let started = Instant::now();
        let rec = orbit_of(oval, map, start, steps).map_err(err("orbit iteration"))?;
        let mut m = serde_json::Map::new();
        m.insert("start".into(), json!(start));
        m.insert("steps".into(), json!(rec.len()));
        m.insert("termination".into(), termination_name(rec.termination));
        if let Some(note) = &rec.note {
            m.insert("note".into(), json!(note));
        }
        if !matches!(map, MapSpec::Outer) && rec.len() >= 100 {
            let r = rotation_number(&rec).map_err(err("rotation_number"))?;
            m.insert("rotation_number".into(), json!(r.value));
            m.insert("rotation_error".into(), json!(r.error));
        }
        if matches!(map, MapSpec::Birkhoff) && is_standard_conic(spec) {
            let d = confocal_defect(oval, &rec).map_err(err("confocal_defect"))?;
            m.insert("confocal_defect".into(), json!(d));
            max_confocal = Some(max_confocal.unwrap_or(0.0).max(d));
        }
        if matches!(map, MapSpec::Outer) && is_conic(spec) {
            let d = homothety_defect(oval, &rec).map_err(err("homothety_defect"))?;
            m.insert("homothety_defect".into(), json!(d));
            max_homothety = Some(max_homothety.unwrap_or(0.0).max(d));
        }
        if map.is_cylinder() && rec.len() >= billiard_core::analysis::invariants::DIAGNOSTIC_MIN_STEPS {
            let d = invariant_curve_diagnostic(&rec).map_err(err("invariant_curve_diagnostic"))?;
            m.insert("graph_thickness".into(), json!(d.graph_thickness));
            m.insert("verdict".into(), serde_json::to_value(d.verdict).expect("verdict serialises"));
        }
        let pts: Vec<Vec2> = rec.states().take(FIGURE_STEPS + 1).filter_map(|s| state_position(oval, s)).collect();
        let style = if matches!(map, MapSpec::CircleMap { .. }) { Style::Points } else { Style::Orbit };
        fig.push(style, false, pts);
        let mut kept = rec;
        kept.steps.truncate(record);
        out.artifacts.push(Artifact::text(format!("orbit{i}.jsonl"), kept.to_jsonl()));
        per_orbit.push(Value::Object(m));
        out.items.push(started.elapsed().as_secs_f64());
    }
    out.metrics = json!({
        "map": map.name(),
        "orbits": per_orbit,
        "max_confocal_defect": max_confocal,
        "max_homothety_defect": max_homothety,
    });
    out.figure = Some(fig);
    Ok(out)
}

fn rotation_experiment(
    oval: &Oval,
    map: &MapSpec,
    starts: &[Vec<f64>],
    steps: usize,
    err: impl Fn(&str) -> ErrFn,
) -> Result<ExperimentOutput, CliError> {
    let mut out = ExperimentOutput::new(Value::Null);
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for start in starts {
        let started = Instant::now();
        let rec = orbit_of(oval, map, start, steps).map_err(err("orbit iteration"))?;
        let r = rotation_number(&rec).map_err(err("rotation_number"))?;
        out.items.push(started.elapsed().as_secs_f64());
        let start_text = start.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        rows.push(vec![start_text, r.value.to_string(), r.error.to_string(), r.steps.to_string()]);
        values.push(json!({
            "start": start,
            "rotation_number": r.value,
            "error": r.error,
            "steps": r.steps,
            "termination": termination_name(rec.termination),
        }));
    }
    out.metrics = json!({"map": map.name(), "rotations": values});
    out.artifacts.push(Artifact::text("rotation.csv", csv(&["start", "rotation_number", "error", "steps"], rows)));
    Ok(out)
}

/// Random seed for a Newton search in the map's planar coordinates.
fn search_seed(oval: &Oval, map: &MapSpec, rng: &mut ChaCha8Rng) -> [f64; 2] {
    match map {
        MapSpec::Birkhoff | MapSpec::Puck { .. } => {
            [rng.random_range(0.0..oval.total_length()), rng.random_range(0.15..PI - 0.15)]
        }
        MapSpec::Symplectic => {
            let x = rng.random_range(0.0..TAU);
            [x, x + rng.random_range(0.3..TAU - 0.3)]
        }
        _ => {
            let center = (0..64).map(|i| oval.position(TAU * i as f64 / 64.0)).fold(Vec2::ZERO, |a, p| a + p) * (1.0 / 64.0);
            let dir = Vec2::from_angle(rng.random_range(0.0..TAU));
            let reach = oval.support(dir) - dir.dot(center);
            (center + dir * (reach * rng.random_range(1.2..3.0))).to_array()
        }
    }
}

fn polygon_recurrence(
    poly: &PolygonTable,
    chords: usize,
    max_steps: usize,
    tol: f64,
    rng: &mut ChaCha8Rng,
    err: impl Fn(&str) -> ErrFn,
) -> Result<ExperimentOutput, CliError> {
    let n = poly.len();
    let mut rows = Vec::new();
    let mut periods = Vec::new();
    let (mut periodic, mut not_returned, mut vertex_hits) = (0, 0, 0);
    let mut max_error: f64 = 0.0;
    let mut first: Option<(PolygonChord, usize)> = None;
    for i in 0..chords {
        let chord = loop {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            let (ea, eb) = (poly.edge_vector(a), poly.edge_vector(b));
            if a != b && ea.cross(eb).abs() > 1e-9 * ea.norm() * eb.norm() {
                break PolygonChord {
                    x: PolygonPoint { edge: a, u: rng.random_range(0.02..0.98) },
                    y: PolygonPoint { edge: b, u: rng.random_range(0.02..0.98) },
                };
            }
        };
        let outcome = match polygon_period(poly, chord, max_steps, tol) {
            Ok(Some(p)) => {
                periodic += 1;
                max_error = max_error.max(p.recurrence_error);
                periods.push(p.period);
                first.get_or_insert((chord, p.period));
                vec![p.period.to_string(), p.recurrence_error.to_string(), "periodic".into()]
            }
            Ok(None) => {
                not_returned += 1;
                vec![String::new(), String::new(), "not_returned".into()]
            }
            Err(Error::VertexHit { .. }) => {
                vertex_hits += 1;
                vec![String::new(), String::new(), "vertex_hit".into()]
            }
            Err(e) => return Err(err("polygon_period")(e)),
        };
        let mut row = vec![
            i.to_string(),
            chord.x.edge.to_string(),
            chord.x.u.to_string(),
            chord.y.edge.to_string(),
            chord.y.u.to_string(),
        ];
        row.extend(outcome);
        rows.push(row);
    }
    let mut out = ExperimentOutput::new(json!({
        "map": "symplectic",
        "chords": chords,
        "periodic": periodic,
        "not_returned": not_returned,
        "vertex_hits": vertex_hits,
        "max_period": periods.iter().max(),
        "max_recurrence_error": max_error,
        "periods": periods,
    }));
    out.artifacts.push(Artifact::text(
        "periods.csv",
        csv(&["chord", "x_edge", "x_u", "y_edge", "y_u", "period", "recurrence_error", "outcome"], rows),
    ));
    let mut fig = Figure::new("symplectic billiard orbit in a polygon");
    fig.push_polygon(poly);
    if let Some((chord, period)) = first {
        let mut c = chord;
        let mut pts = vec![poly.point_on_edge(c.x.edge, c.x.u)];
        for _ in 1..period.min(FIGURE_STEPS) {
            c = symplectic_map_polygon(poly, c).map_err(err("symplectic_map_polygon"))?;
            pts.push(poly.point_on_edge(c.x.edge, c.x.u));
        }
        fig.push(Style::Orbit, true, pts);
    }
    out.figure = Some(fig);
    Ok(out)
}

fn caustic_experiment(
    oval: &Oval,
    source: Vec2,
    reflections: &[usize],
    rays: usize,
    doubling: bool,
    err: impl Fn(&str) -> ErrFn,
) -> Result<ExperimentOutput, CliError> {
    let count = |env: &EnvelopeCurve| -> Result<Option<usize>, CliError> {
        match cusp_count(env) {
            Ok(c) => Ok(Some(c)),
            Err(Error::DegenerateEnvelope) => Ok(None),
            Err(e) => Err(err("cusp_count")(e)),
        }
    };
    let mut out = ExperimentOutput::new(Value::Null);
    let mut fig = Figure::new(format!("caustics by reflection, source ({}, {})", source.x, source.y));
    fig.push_oval(oval);
    let mut rows = Vec::new();
    let mut stable = true;
    let mut min_cusps: Option<usize> = None;
    for &n in reflections {
        let env = caustic_by_reflection(oval, source, n, rays).map_err(err("caustic_by_reflection"))?;
        let cusps = count(&env)?;
        let doubled = if doubling {
            let fine = caustic_by_reflection(oval, source, n, 2 * rays).map_err(err("caustic_by_reflection"))?;
            Some(count(&fine)?)
        } else {
            None
        };
        if let Some(d) = doubled {
            stable &= d == cusps;
        }
        if let Some(c) = cusps {
            min_cusps = Some(min_cusps.map_or(c, |m| m.min(c)));
        }
        rows.push(json!({
            "reflections": n,
            "cusps": cusps,
            "cusps_doubled": doubled.flatten(),
            "collapsed": env.collapsed,
            "defined_share": env.defined_share(),
        }));
        out.artifacts.push(Artifact::text(format!("caustic_n{n}.csv"), env.to_csv()));
        for run in runs(&env.points, 0.25 * oval.diameter()) {
            fig.push(Style::Caustic, false, run);
        }
        let cusp_points = env.points.iter().zip(&env.cusp).filter(|(_, c)| **c).filter_map(|(p, _)| *p);
        fig.push(Style::Cusp, false, cusp_points);
    }
    out.metrics = json!({
        "source": source.to_array(),
        "rays": rays,
        "caustics": rows,
        "min_cusps": min_cusps,
        "stable_under_doubling": if doubling { Some(stable) } else { None },
    });
    out.figure = Some(fig);
    Ok(out)
}

fn clicks_experiment(
    curve: &ClickCurve,
    eps: f64,
    v: Vec2,
    window: [f64; 2],
    bins: usize,
    harmonics: usize,
    err: impl Fn(&str) -> ErrFn,
) -> Result<ExperimentOutput, CliError> {
    let train = click_events(curve, eps, v, window).map_err(err("click_events"))?;
    let hist = click_histogram(&train, bins).map_err(err("click_histogram"))?;
    let spectrum = click_spectrum(&train, harmonics);
    let mut metrics = json!({
        "epsilon": eps,
        "window": window,
        "events": train.clicks.len(),
        "total_clicks": train.total_clicks(),
        "intervals": train.intervals.len(),
    });
    // compare the first two periods of the window after the ε-shift
    if window[1] - window[0] >= 2.0 * eps * (1.0 - 1e-12) {
        let a = window[0];
        let first = train.clicks_in(a, a + eps);
        let second = train.clicks_in(a + eps, a + 2.0 * eps);
        let counts_match = first.len() == second.len()
            && first.iter().zip(&second).all(|(x, y)| x.multiplicity == y.multiplicity);
        let shift_error = counts_match.then(|| {
            first.iter().zip(&second).map(|(x, y)| (y.lambda - eps - x.lambda).abs()).fold(0.0, f64::max)
        });
        metrics["period_counts_match"] = json!(counts_match);
        metrics["period_shift_error"] = json!(shift_error);
        metrics["clicks_per_period"] = json!(first.iter().map(|c| c.multiplicity).sum::<usize>());
    }
    let mut out = ExperimentOutput::new(metrics);
    out.artifacts.push(Artifact::text("clicks.csv", train.to_csv()));
    out.artifacts.push(Artifact::text("intervals.csv", train.intervals_csv()));
    out.artifacts.push(Artifact::json("clicks_header.json", &train.header()));
    let width = eps / bins as f64;
    out.artifacts.push(Artifact::text(
        "histogram.csv",
        csv(
            &["bin", "lo", "hi", "count"],
            hist.counts.iter().enumerate().map(|(i, c)| {
                vec![i.to_string(), (i as f64 * width).to_string(), ((i + 1) as f64 * width).to_string(), c.to_string()]
            }),
        ),
    ));
    out.artifacts.push(Artifact::text(
        "spectrum.csv",
        csv(
            &["harmonic", "re", "im", "abs"],
            spectrum.iter().enumerate().map(|(k, z)| {
                vec![(k + 1).to_string(), z.re.to_string(), z.im.to_string(), z.norm().to_string()]
            }),
        ),
    ));
    Ok(out)
}

fn trap_experiment(
    trap: &ParabolaTrap,
    rays: usize,
    reflections: usize,
    record: usize,
    err: impl Fn(&str) -> ErrFn,
) -> Result<ExperimentOutput, CliError> {
    let mut out = ExperimentOutput::new(Value::Null);
    let [lo, hi] = trap.aperture;
    let side = lo.signum();
    let mut rows = Vec::new();
    let mut trapped = 0;
    let mut min_axis_distance = f64::INFINITY;
    let mut min_reflections = usize::MAX;
    let mut first_trace: Option<OrbitRecord> = None;
    for i in 0..rays {
        let started = Instant::now();
        let x = lo + (hi - lo) * (i + 1) as f64 / (rays + 1) as f64;
        let ray = Ray::new(Vec2::new(x, trap.entry_height()), -FRAC_PI_2);
        let rec = trap_trace(trap, ray, reflections).map_err(err("trap_trace"))?;
        out.items.push(started.elapsed().as_secs_f64());
        let axis = rec.steps.iter().filter_map(|s| state_position_ray(&s.state)).map(|p| side * p.x).fold(f64::INFINITY, f64::min);
        let ok = rec.termination == Termination::Completed && rec.len() == reflections;
        trapped += ok as usize;
        min_axis_distance = min_axis_distance.min(axis);
        min_reflections = min_reflections.min(rec.len());
        rows.push(vec![
            i.to_string(),
            x.to_string(),
            rec.len().to_string(),
            serde_json::to_value(rec.termination).unwrap().as_str().unwrap_or_default().to_string(),
            axis.to_string(),
            rec.note.clone().unwrap_or_default(),
        ]);
        first_trace.get_or_insert(rec);
    }
    out.metrics = json!({
        "rays": rays,
        "reflections": reflections,
        "trapped": trapped,
        "min_reflections": min_reflections,
        "min_axis_distance": min_axis_distance,
    });
    out.artifacts.push(Artifact::text(
        "trap.csv",
        csv(&["ray", "x", "reflections", "termination", "min_axis_distance", "note"], rows),
    ));
    if let Some(mut rec) = first_trace {
        let path: Vec<Vec2> = rec.states().take(FIGURE_STEPS + 1).filter_map(state_position_ray).collect();
        // zoom onto the first reflections: the mirrors are too close to resolve otherwise
        let head = &path[1.min(path.len())..path.len().min(TRAP_ZOOM_STEPS + 1)];
        let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in head {
            (x0, x1, y0, y1) = (x0.min(p.x), x1.max(p.x), y0.min(p.y), y1.max(p.y));
        }
        let pad = 0.1 * (x1 - x0).max(y1 - y0).max(1e-9);
        let (x0, x1) = (x0 - pad, x1 + pad);
        let mut fig = Figure::new("parabolic trap");
        fig.frame = Some([x0, y0 - pad, x1, y1 + pad]);
        let mirror = |f: f64, a: f64, b: f64| -> Vec<Vec2> {
            (0..=200).map(|k| a + (b - a) * k as f64 / 200.0).map(|x| Vec2::new(x, x * x / (4.0 * f) - f)).collect()
        };
        fig.push(Style::Table, false, mirror(trap.outer_focal, x0, x1));
        let (gap_lo, gap_hi) = (lo.min(hi), lo.max(hi));
        if x0 < gap_lo {
            fig.push(Style::Table, false, mirror(trap.inner_focal, x0, gap_lo.min(x1)));
        }
        if x1 > gap_hi {
            fig.push(Style::Table, false, mirror(trap.inner_focal, gap_hi.max(x0), x1));
        }
        fig.push(Style::Orbit, false, path);
        out.figure = Some(fig);
        rec.steps.truncate(record);
        out.artifacts.push(Artifact::text("trace0.jsonl", rec.to_jsonl()));
    }
    Ok(out)
}

fn state_position_ray(state: &State) -> Option<Vec2> {
    match state {
        State::Ray(r) => Some(r.origin),
        _ => None,
    }
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::maps::projective::Ray;
use std::f64::consts::TAU;

use crate::maps::{ChordState, CircleMapF, CylinderMap, PhasePoint, PlanarMap, PolygonChord};
use crate::vec2::{normalize_angle, Vec2};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    VertexHit,
    Grazing,
    Diverged,
}

/// State of any of the supported maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum State {
    Phase(PhasePoint),
    Chord(ChordState),
    Point(Vec2),
    Param { t: f64 },
    Ray(Ray),
    PolygonChord(PolygonChord),
}

impl State {
    pub fn as_phase(&self) -> Option<PhasePoint> {
        match self {
            State::Phase(p) => Some(*p),
            _ => None,
        }
    }

    pub fn as_point(&self) -> Option<Vec2> {
        match self {
            State::Point(p) => Some(*p),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitStep {
    pub index: usize,
    pub state: State,
    pub winding: i64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub diagnostics: BTreeMap<String, f64>,
}

/// Finite orbit of one of the maps with enough provenance to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub map: String,
    pub parameters: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub initial: State,
    pub steps: Vec<OrbitStep>,
    pub termination: Termination,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    map: String,
    parameters: BTreeMap<String, f64>,
    seed: Option<u64>,
    initial: State,
    length: usize,
    termination: Termination,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

impl OrbitRecord {
    pub fn new(map: &str, initial: State) -> Self {
        OrbitRecord {
            map: map.to_string(),
            parameters: BTreeMap::new(),
            seed: None,
            initial,
            steps: Vec::new(),
            termination: Termination::Completed,
            note: None,
        }
    }

    pub fn set_parameter(&mut self, key: &str, value: f64) {
        self.parameters.insert(key.to_string(), value);
    }

    pub fn parameter(&self, key: &str) -> Option<f64> {
        self.parameters.get(key).copied()
    }

    pub fn push(&mut self, step: OrbitStep) {
        self.steps.push(step);
    }

    pub fn finish(&mut self, termination: Termination, note: Option<&str>) {
        self.termination = termination;
        self.note = note.map(str::to_string);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Initial state followed by every step's state.
    pub fn states(&self) -> impl Iterator<Item = &State> {
        std::iter::once(&self.initial).chain(self.steps.iter().map(|s| &s.state))
    }

    /// Header line with the provenance, then one line per step.
    pub fn to_jsonl(&self) -> String {
        let header = Header {
            map: self.map.clone(),
            parameters: self.parameters.clone(),
            seed: self.seed,
            initial: self.initial,
            length: self.steps.len(),
            termination: self.termination,
            note: self.note.clone(),
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for s in &self.steps {
            out.push_str(&serde_json::to_string(s).expect("step serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let bad = |e: serde_json::Error| Error::InvalidArgument(format!("malformed orbit record: {e}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Header = serde_json::from_str(lines.next().unwrap_or("")).map_err(bad)?;
        let steps = lines.map(|l| serde_json::from_str(l).map_err(bad)).collect::<Result<Vec<OrbitStep>>>()?;
        if steps.len() != header.length {
            return Err(Error::InvalidArgument(format!(
                "orbit record announces {} steps but has {}",
                header.length,
                steps.len()
            )));
        }
        Ok(OrbitRecord {
            map: header.map,
            parameters: header.parameters,
            seed: header.seed,
            initial: header.initial,
            steps,
            termination: header.termination,
            note: header.note,
        })
    }
}

/// Termination reason for errors that end an orbit rather than the computation.
fn terminal(e: &Error) -> Option<Termination> {
    match e {
        Error::TangentialRay { .. } | Error::DegenerateChord(_) => Some(Termination::Grazing),
        Error::VertexHit { .. } => Some(Termination::VertexHit),
        Error::PointInside { .. } | Error::NoConvergence { .. } => Some(Termination::Diverged),
        _ => None,
    }
}

/// Orbit of a cylinder map; the record carries `period = L`.
pub fn iterate_cylinder<M: CylinderMap + ?Sized>(map: &M, name: &str, start: PhasePoint, n: usize) -> Result<OrbitRecord> {
    let mut rec = OrbitRecord::new(name, State::Phase(start));
    rec.set_parameter("period", map.total_length());
    rec.steps.reserve(n);
    let mut p = start;
    for index in 1..=n {
        match map.step(p) {
            Ok(step) => {
                p = step.point;
                rec.push(OrbitStep { index, state: State::Phase(p), winding: step.winding, diagnostics: BTreeMap::new() });
            }
            Err(e) => {
                let t = terminal(&e).ok_or(e.clone())?;
                rec.finish(t, Some(&e.to_string()));
                return Ok(rec);
            }
        }
    }
    Ok(rec)
}

/// Orbit of a circle map in `[0, 2π)`; the record carries `period = 2π`.
pub fn iterate_circle(map: &CircleMapF<'_>, start: f64, n: usize) -> Result<OrbitRecord> {
    let start = normalize_angle(start);
    let mut rec = OrbitRecord::new("circle_map", State::Param { t: start });
    rec.set_parameter("period", TAU);
    rec.steps.reserve(n);
    let mut x = start;
    for index in 1..=n {
        match map.lifted(x) {
            Ok(y) => {
                let turns = (y / TAU).floor();
                x = (y - turns * TAU).clamp(0.0, TAU * (1.0 - f64::EPSILON));
                rec.push(OrbitStep { index, state: State::Param { t: x }, winding: turns as i64, diagnostics: BTreeMap::new() });
            }
            Err(e) => {
                let t = terminal(&e).ok_or(e.clone())?;
                rec.finish(t, Some(&e.to_string()));
                return Ok(rec);
            }
        }
    }
    Ok(rec)
}

/// Orbit of a planar map, with states wrapped into the fundamental domain of `period()`
/// along the first coordinate and the number of turns stored as winding.
pub fn iterate_planar<M: PlanarMap + ?Sized>(
    map: &M,
    name: &str,
    start: [f64; 2],
    n: usize,
    to_state: impl Fn([f64; 2]) -> State,
) -> Result<OrbitRecord> {
    let mut rec = OrbitRecord::new(name, to_state(start));
    let period = map.period();
    if period[0] > 0.0 {
        rec.set_parameter("period", period[0]);
    }
    rec.steps.reserve(n);
    let mut x = start;
    for index in 1..=n {
        match map.apply(x) {
            Ok(mut y) => {
                let mut winding = 0;
                if period[0] > 0.0 {
                    let turns = (y[0] / period[0]).floor();
                    y[0] -= turns * period[0];
                    y[1] -= turns * period[1];
                    winding = turns as i64;
                }
                x = y;
                rec.push(OrbitStep { index, state: to_state(x), winding, diagnostics: BTreeMap::new() });
            }
            Err(e) => {
                let t = terminal(&e).ok_or(e.clone())?;
                rec.finish(t, Some(&e.to_string()));
                return Ok(rec);
            }
        }
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Oval;
    use crate::maps::BirkhoffMap;

    #[test]
    fn jsonl_round_trip() {
        let c = Oval::circle(1.0).unwrap();
        let mut rec = iterate_cylinder(&BirkhoffMap { oval: &c }, "birkhoff", PhasePoint::new(0.1, 0.7), 5).unwrap();
        rec.seed = Some(7);
        let text = rec.to_jsonl();
        assert_eq!(text.lines().count(), 6);
        assert!(text.lines().nth(1).unwrap().starts_with("{\"index\":1"));
        let back = OrbitRecord::from_jsonl(&text).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn grazing_terminates_orbit() {
        let c = Oval::circle(1.0).unwrap();
        let rec = iterate_cylinder(&BirkhoffMap { oval: &c }, "birkhoff", PhasePoint::new(0.0, 1e-12), 5).unwrap();
        assert_eq!(rec.termination, Termination::Grazing);
        assert!(rec.is_empty());
    }
}

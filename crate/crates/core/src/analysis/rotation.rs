use serde::{Deserialize, Serialize};

use super::orbit::{OrbitRecord, State};
use crate::{Error, Result};

pub const MIN_ROTATION_STEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationEstimate {
    pub value: f64,
    /// `|ρ_n - ρ_{n/2}|`.
    pub error: f64,
    pub steps: usize,
}

fn coordinate(state: &State) -> Option<f64> {
    match state {
        State::Phase(p) => Some(p.s),
        State::Param { t } => Some(*t),
        State::Chord(c) => Some(c.x),
        _ => None,
    }
}

/// Mean advance per step, in turns: `(Σ winding + Δc / period) / n`.
pub fn rotation_number(orbit: &OrbitRecord) -> Result<RotationEstimate> {
    let n = orbit.len();
    if n < MIN_ROTATION_STEPS {
        return Err(Error::InsufficientData { needed: MIN_ROTATION_STEPS, got: n });
    }
    let period = orbit
        .parameter("period")
        .ok_or_else(|| Error::InvalidArgument("orbit has no period parameter".into()))?;
    let c0 = coordinate(&orbit.initial).ok_or_else(|| Error::InvalidArgument("orbit state has no angle coordinate".into()))?;
    let estimate = |m: usize| -> Result<f64> {
        let wind: i64 = orbit.steps[..m].iter().map(|s| s.winding).sum();
        let cm = coordinate(&orbit.steps[m - 1].state)
            .ok_or_else(|| Error::InvalidArgument("orbit state has no angle coordinate".into()))?;
        Ok((wind as f64 + (cm - c0) / period) / m as f64)
    };
    let value = estimate(n)?;
    let half = estimate(n / 2)?;
    Ok(RotationEstimate { value, error: (value - half).abs(), steps: n })
}

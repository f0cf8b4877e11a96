//! Pass/fail verdicts for the bundled acceptance scenarios.

use std::f64::consts::PI;

use serde_json::Value;

use crate::run::{Summary, Timing};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub scenario: String,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.scenario, self.detail)
    }
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn experiments<'a>(s: &'a Summary, kind: &'a str) -> impl Iterator<Item = &'a Value> + 'a {
    s.experiments.iter().filter(move |e| e.kind == kind).map(|e| &e.metrics)
}

/// Verdict for one bundled acceptance scenario, or `None` for other scenarios.
pub fn evaluate(summary: &Summary, timings: &[Timing]) -> Option<Check> {
    let name = summary.scenario.as_str();
    let (passed, detail) = match name {
        "circle-rotation" => {
            let m = summary.metrics("rotation_number")?;
            let rows = m["rotations"].as_array()?;
            let worst = rows
                .iter()
                .map(|r| (num(&r["rotation_number"]) - num(&r["start"][1]) / PI).abs())
                .fold(0.0, f64::max);
            let slowest = timings.iter().flat_map(|t| t.items.iter().copied()).fold(0.0, f64::max);
            (worst < 1e-9 && slowest < 2.0, format!("max |rho - alpha/pi| = {worst:.3e}, slowest orbit {slowest:.3} s"))
        }
        "ellipse-integrability" => {
            let d = num(&summary.metrics("orbit")?["max_confocal_defect"]);
            (d < 1e-8, format!("confocal parameter spread {d:.3e}"))
        }
        "puck-symplectic" => {
            let d = num(&summary.metrics("symplecticity")?["max_defect"]);
            (d < 5e-6, format!("max |det J - 1| = {d:.3e}"))
        }
        "outer-ellipse" => {
            let d = num(&summary.metrics("orbit")?["max_homothety_defect"]);
            (d < 1e-8, format!("homothety form relative spread {d:.3e}"))
        }
        "fierobe-triangle" | "fierobe-quad" => {
            let m = summary.metrics("reflectivity")?;
            let (closing, admissible, err) = (m["closing"].as_u64()?, m["admissible"].as_u64()?, num(&m["max_closure_error"]));
            (
                admissible >= 100 && closing >= 99 && err < 1e-8,
                format!("{closing}/{admissible} chords close, max closure error {err:.3e}"),
            )
        }
        "trapezoid-periodic" => {
            let m = summary.metrics("periodic_search")?;
            let (periodic, chords) = (m["periodic"].as_u64()?, m["chords"].as_u64()?);
            let max_period = m["max_period"].as_u64().unwrap_or(u64::MAX);
            let err = num(&m["max_recurrence_error"]);
            (
                periodic == chords && chords >= 50 && max_period <= 5000 && err < 1e-9,
                format!("{periodic}/{chords} periodic, max period {max_period}, max recurrence error {err:.3e}"),
            )
        }
        "stadium-chaos" => {
            let m = summary.metrics("lyapunov")?;
            let value = num(&m["value"]);
            let change = num(&m["relative_change"]);
            let secs = timings.iter().map(|t| t.seconds).sum::<f64>();
            (
                value > 0.01 && change < 0.2 && secs < 60.0,
                format!("lambda = {value:.4}, checkpoint change {:.1}%, {secs:.1} s", 100.0 * change),
            )
        }
        "parabola-trap" => {
            let m = summary.metrics("trap")?;
            let (trapped, rays) = (m["trapped"].as_u64()?, m["rays"].as_u64()?);
            let min_axis = num(&m["min_axis_distance"]);
            (
                trapped == rays && rays >= 20 && min_axis > 0.0,
                format!("{trapped}/{rays} rays trapped for all reflections, closest approach to the axis {min_axis:.3e}"),
            )
        }
        "catacaustic-cusps" => {
            let m = summary.metrics("caustic")?;
            let min = m["min_cusps"].as_u64().unwrap_or(0);
            let stable = m["stable_under_doubling"].as_bool().unwrap_or(false);
            let all_counted = m["caustics"].as_array()?.iter().all(|c| c["cusps"].is_u64());
            (all_counted && min >= 4 && stable, format!("min cusps {min}, stable under doubling: {stable}"))
        }
        "spectra-closed-form" => {
            let mut worst: f64 = 0.0;
            let mut complete = true;
            for (kind, closed, lo) in [
                ("length_spectrum", (|n: f64| 2.0 * n * (PI / n).sin()) as fn(f64) -> f64, 2),
                ("area_spectrum", |n: f64| n * (PI / n).tan(), 3),
            ] {
                let values = &summary.metrics(kind)?["values"];
                for n in lo..=8 {
                    match values[n.to_string()].as_array().and_then(|v| v.first()) {
                        Some(v) => worst = worst.max((num(v) - closed(n as f64)).abs()),
                        None => complete = false,
                    }
                }
            }
            (complete && worst < 1e-8, format!("max deviation from regular polygons {worst:.3e}"))
        }
        "string-confocal" => {
            let d: Vec<f64> = experiments(summary, "string_test").map(|m| num(&m["string_defect"])).collect();
            let (pass, control) = (*d.first()?, *d.get(1)?);
            (pass < 1e-8 && control > 1e-3, format!("confocal {pass:.3e}, off-centre control {control:.3e}"))
        }
        "clicks-periodicity" => {
            let m = summary.metrics("clicks")?;
            let matched = m["period_counts_match"].as_bool().unwrap_or(false);
            let err = num(&m["period_shift_error"]);
            (matched && err < 1e-10, format!("multisets match: {matched}, max shift error {err:.3e}"))
        }
        "gutkin-circle" => {
            let max_of = |m: &Value| m["defects"].as_array().map(|a| a.iter().map(|d| num(&d["defect"])).fold(0.0, f64::max));
            let mut it = experiments(summary, "gutkin");
            let (circle, ellipse) = (max_of(it.next()?)?, max_of(it.next()?)?);
            (circle < 1e-12 && ellipse > 0.01, format!("circle {circle:.3e}, ellipse control {ellipse:.3e}"))
        }
        _ => return None,
    };
    Some(Check { scenario: name.to_string(), passed, detail })
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::trace::{Outcome, Trace};

/// Belief level counted as confident in the lead-time metric.
pub const CONFIDENT: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub collision: bool,
    /// Smallest robot–pedestrian clearance; `None` if no pedestrian was ever on the road.
    pub min_gap: Option<f64>,
    pub avg_speed: f64,
    pub peak_decel: f64,
    pub steps_to_goal: Option<usize>,
    /// Steps from the first confident "present" belief to the first direct
    /// sighting (or to the end of the run without one); −1 if never confident.
    pub belief_lead_time: i64,
    pub first_confident_step: Option<usize>,
    pub first_sighting_step: Option<usize>,
    pub steps: usize,
}

pub fn compute_metrics(trace: &Trace) -> Result<Metrics> {
    let recs = &trace.records;
    if recs.is_empty() {
        return Err(Error::Domain(
            "cannot compute metrics of an empty trace".into(),
        ));
    }
    let min_gap = recs
        .iter()
        .filter_map(|r| r.ped_gap)
        .chain(trace.final_ped_gap)
        .fold(None, |acc: Option<f64>, g| {
            Some(acc.map_or(g, |a| a.min(g)))
        });
    let collision = trace.outcome == Outcome::Collision || min_gap == Some(0.0);
    let avg_speed = recs.iter().map(|r| r.robot.speed).sum::<f64>() / recs.len() as f64;
    let peak_decel = recs.iter().map(|r| -r.robot_u.accel).fold(0.0, f64::max);
    let first_confident_step = recs
        .iter()
        .position(|r| r.bel_x.get(trace.present).is_some_and(|p| *p >= CONFIDENT));
    let first_sighting_step = recs.iter().position(|r| r.visible_ped);
    let belief_lead_time = match (first_confident_step, first_sighting_step) {
        (None, _) => -1,
        (Some(c), Some(s)) => s as i64 - c as i64,
        (Some(c), None) => (recs.len() - c) as i64,
    };
    Ok(Metrics {
        collision,
        min_gap,
        avg_speed,
        peak_decel,
        steps_to_goal: (trace.outcome == Outcome::Goal).then_some(recs.len()),
        belief_lead_time,
        first_confident_step,
        first_sighting_step,
        steps: recs.len(),
    })
}

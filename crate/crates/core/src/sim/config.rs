//! Scenario files: TOML with the sections `map`, `agents`, `pedestrian`,
//! `hypotheses`, `social_hypotheses`, `planner`, `inference` and `sim`.
//! Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::costs::{FeatureConfig, RefPath, SocialInfo, Weights, HUMAN_FEATURES, ROBOT_FEATURES};
use crate::error::{Error, Result};
use crate::inference::{
    ActionLattice, Belief, HumanModel, Hypothesis, HypothesisSet, RationalityParams,
    SocialHypothesis, SocialHypothesisSet,
};
use crate::perception::Occluder;
use crate::planner::{PlannerConfig, SafetyRadii};
use crate::world::{
    AgentState, BodyGeometry, EnvironmentState, HumanAgent, Pedestrian, VehicleParams, WorldState,
};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    name: Option<String>,
    map: RawMap,
    agents: RawAgents,
    #[serde(default)]
    pedestrian: Option<PedestrianScript>,
    hypotheses: RawHypotheses,
    social_hypotheses: RawSocial,
    planner: RawPlanner,
    inference: RawInference,
    sim: RawSim,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    lanes: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    robot_lane: usize,
    crosswalk: [[f64; 2]; 2],
    #[serde(default)]
    occluders: Vec<Vec<[f64; 2]>>,
    finish_x: f64,
    #[serde(default)]
    map_id: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgents {
    robot: AgentState,
    #[serde(default)]
    humans: Vec<AgentState>,
    #[serde(default)]
    vehicle: Option<VehicleParams>,
    #[serde(default)]
    geometry: Option<BodyGeometry>,
}

/// Scripted pedestrian: waits unseen until `appear_time`, then walks at
/// constant velocity for `path_length` metres and leaves the scene.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, serde::Serialize)]
#[serde(deny_unknown_fields)]
pub struct PedestrianScript {
    pub start: [f64; 2],
    pub velocity: [f64; 2],
    pub appear_time: f64,
    pub path_length: f64,
}

impl PedestrianScript {
    /// Scripted state at time `t`.
    pub fn at(&self, t: f64) -> Pedestrian {
        let speed = self.velocity[0].hypot(self.velocity[1]);
        let [x0, y0] = self.start;
        let [vx, vy] = self.velocity;
        if t < self.appear_time {
            return Pedestrian {
                x: x0,
                y: y0,
                vx,
                vy,
                remaining: self.path_length,
                active: false,
            };
        }
        let duration = if speed > 0.0 {
            self.path_length / speed
        } else {
            f64::INFINITY
        };
        let tau = (t - self.appear_time).min(duration);
        Pedestrian {
            x: x0 + vx * tau,
            y: y0 + vy * tau,
            vx,
            vy,
            remaining: self.path_length - speed * tau,
            active: tau < duration,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHypotheses {
    prior: Vec<f64>,
    present: String,
    set: Vec<Hypothesis>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSocial {
    prior: Vec<f64>,
    truth: String,
    set: Vec<SocialHypothesis>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlanner {
    horizon: usize,
    dt: f64,
    theta_r: BTreeMap<String, f64>,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default)]
    lattice: Option<ActionLattice>,
    #[serde(default = "default_refine_iters")]
    refine_iters: usize,
    #[serde(default = "default_refine_step")]
    refine_step: f64,
    #[serde(default = "default_beam")]
    beam_width: usize,
    #[serde(default = "default_exhaustive")]
    exhaustive_limit: usize,
    #[serde(default)]
    safety: Option<SafetyRadii>,
    #[serde(default)]
    static_margin: f64,
}

fn default_epsilon() -> f64 {
    0.01
}
fn default_refine_iters() -> usize {
    10
}
fn default_refine_step() -> f64 {
    0.5
}
fn default_beam() -> usize {
    50
}
fn default_exhaustive() -> usize {
    1024
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInference {
    theta_h: BTreeMap<String, f64>,
    #[serde(default)]
    truth_theta_h: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    lattice: Option<ActionLattice>,
    #[serde(default = "default_beta")]
    beta: f64,
    #[serde(default = "default_horizon")]
    horizon: usize,
    dt: f64,
    selection_radius: f64,
    #[serde(default = "default_region_samples")]
    region_samples: usize,
    #[serde(default)]
    noise_sigma: f64,
    #[serde(default = "default_cap")]
    proximity_cap: f64,
}

fn default_beta() -> f64 {
    1.0
}
fn default_horizon() -> usize {
    4
}
fn default_region_samples() -> usize {
    5
}
fn default_cap() -> f64 {
    50.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    dt: f64,
    max_steps: usize,
    #[serde(default)]
    seed: u64,
    sensor_range: f64,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub lanes: Vec<RefPath>,
    pub reference_path: RefPath,
    pub crosswalk: [[f64; 2]; 2],
    /// Points whose visibility decides whether the crosswalk is directly observed.
    pub region: Vec<[f64; 2]>,
    pub occluders: Vec<Occluder>,
    pub finish_x: f64,
    pub initial: WorldState,
    pub pedestrian: Option<PedestrianScript>,
    pub hypotheses: HypothesisSet,
    pub state_prior: Belief,
    /// Index of the pedestrian-present hypothesis.
    pub present: usize,
    /// Index of the hypothesis without pedestrians, used when the crosswalk is seen empty.
    pub absent: usize,
    pub social: SocialHypothesisSet,
    pub social_prior: Belief,
    pub truth_info: SocialInfo,
    pub planner: PlannerConfig,
    pub vehicle: VehicleParams,
    pub features: FeatureConfig,
    /// Model the robot uses for inference and prediction.
    pub human_model: HumanModel,
    /// Model driving the simulated humans.
    pub truth_model: HumanModel,
    pub selection_radius: f64,
    pub noise_sigma: f64,
    pub dt: f64,
    pub max_steps: usize,
    pub seed: u64,
    pub sensor_range: f64,
}

fn named_weights(map: &BTreeMap<String, f64>, names: &[&str], path: &str) -> Result<Weights> {
    Weights::from_named(map, names).map_err(|e| match e {
        Error::Config { path: p, msg } => Error::config(format!("{path}.{p}"), msg),
        other => other,
    })
}

fn prefixed(e: Error, prefix: &str) -> Error {
    match e {
        Error::Config { path, msg } => Error::config(format!("{prefix}.{path}"), msg),
        Error::Domain(msg) => Error::config(prefix, msg),
        other => other,
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawScenario =
            toml::from_str(text).map_err(|e| Error::config("scenario", e.message().to_string()))?;
        Self::from_raw(raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config(
                path.display().to_string(),
                format!("cannot read scenario: {e}"),
            )
        })?;
        let raw: RawScenario = toml::from_str(&text)
            .map_err(|e| Error::config(path.display().to_string(), e.message().to_string()))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawScenario) -> Result<Self> {
        let vehicle = raw.agents.vehicle.unwrap_or_default();
        vehicle.validate().map_err(|e| prefixed(e, "agents"))?;
        let geometry = raw.agents.geometry.unwrap_or_default();
        if !(geometry.vehicle_length > 0.0
            && geometry.vehicle_width > 0.0
            && geometry.vehicle_circle_radius >= 0.0)
        {
            return Err(Error::config(
                "agents.geometry",
                "dimensions must be positive",
            ));
        }

        if raw.map.lanes.is_empty() {
            return Err(Error::config("map.lanes", "at least one lane is required"));
        }
        let lanes = raw
            .map
            .lanes
            .iter()
            .enumerate()
            .map(|(i, l)| {
                RefPath::new(l.clone())
                    .map_err(|_| Error::config(format!("map.lanes[{i}]"), "empty lane"))
            })
            .collect::<Result<Vec<_>>>()?;
        let reference_path = lanes
            .get(raw.map.robot_lane)
            .cloned()
            .ok_or_else(|| Error::config("map.robot_lane", "no such lane"))?;
        let occluders = raw
            .map
            .occluders
            .iter()
            .enumerate()
            .map(|(i, o)| {
                Occluder::new(o.clone()).map_err(|e| prefixed(e, &format!("map.occluders[{i}]")))
            })
            .collect::<Result<Vec<_>>>()?;
        if !raw.map.finish_x.is_finite() {
            return Err(Error::config("map.finish_x", "must be finite"));
        }

        let mut initial = WorldState::new(raw.agents.robot);
        initial.humans = raw
            .agents
            .humans
            .iter()
            .copied()
            .map(HumanAgent::new)
            .collect();
        initial.env = EnvironmentState {
            signal_phase: None,
            map_id: raw.map.map_id.clone(),
        };
        initial
            .validate()
            .map_err(|e| Error::config("agents", e.to_string()))?;

        if let Some(p) = &raw.pedestrian {
            let ok = [
                p.start[0],
                p.start[1],
                p.velocity[0],
                p.velocity[1],
                p.appear_time,
                p.path_length,
            ]
            .iter()
            .all(|v| v.is_finite());
            if !ok || p.path_length < 0.0 || p.appear_time < 0.0 {
                return Err(Error::config(
                    "pedestrian",
                    "script values must be finite and non-negative",
                ));
            }
        }

        let hypotheses = HypothesisSet::new(raw.hypotheses.set.clone())
            .map_err(|e| prefixed(e, "hypotheses"))?;
        let state_prior = Belief::new(raw.hypotheses.prior.clone())
            .map_err(|e| prefixed(e, "hypotheses.prior"))?;
        if state_prior.len() != hypotheses.len() {
            return Err(Error::config(
                "hypotheses.prior",
                "length differs from the hypothesis set",
            ));
        }
        let present = hypotheses
            .index_of(&raw.hypotheses.present)
            .ok_or_else(|| Error::config("hypotheses.present", "unknown hypothesis label"))?;
        let absent = hypotheses
            .0
            .iter()
            .position(|h| h.pedestrians.is_empty())
            .ok_or_else(|| {
                Error::config(
                    "hypotheses.set",
                    "a hypothesis without pedestrians is required",
                )
            })?;

        let social = SocialHypothesisSet::new(raw.social_hypotheses.set.clone(), vehicle.v_lim)
            .map_err(|e| prefixed(e, "social_hypotheses"))?;
        let social_prior = Belief::new(raw.social_hypotheses.prior.clone())
            .map_err(|e| prefixed(e, "social_hypotheses.prior"))?;
        if social_prior.len() != social.len() {
            return Err(Error::config(
                "social_hypotheses.prior",
                "length differs from the candidate set",
            ));
        }
        let truth_info = social
            .0
            .iter()
            .find(|s| s.label == raw.social_hypotheses.truth)
            .map(|s| s.info.clone())
            .ok_or_else(|| Error::config("social_hypotheses.truth", "unknown candidate label"))?;

        let features = FeatureConfig {
            proximity_cap: raw.inference.proximity_cap,
            geometry,
        };
        let p = &raw.planner;
        let lattice = p.lattice.clone().unwrap_or_default();
        lattice
            .check_bounds(vehicle.a_max)
            .map_err(|e| prefixed(e, "planner"))?;
        let planner = PlannerConfig {
            horizon: p.horizon,
            dt: p.dt,
            theta_r: named_weights(&p.theta_r, &ROBOT_FEATURES, "planner.theta_r")?,
            epsilon: p.epsilon,
            lattice,
            refine_iters: p.refine_iters,
            refine_step: p.refine_step,
            beam_width: p.beam_width,
            exhaustive_limit: p.exhaustive_limit,
            safety: p.safety.unwrap_or_default(),
            static_margin: p.static_margin,
        };
        planner.validate()?;

        let inf = &raw.inference;
        let h_lattice = inf.lattice.clone().unwrap_or_default();
        h_lattice
            .check_bounds(vehicle.a_max)
            .map_err(|e| prefixed(e, "inference"))?;
        let theta_h = named_weights(&inf.theta_h, &HUMAN_FEATURES, "inference.theta_h")?;
        let truth_theta = match &inf.truth_theta_h {
            Some(m) => named_weights(m, &HUMAN_FEATURES, "inference.truth_theta_h")?,
            None => theta_h.clone(),
        };
        let human_model = HumanModel {
            theta: theta_h,
            lattice: h_lattice,
            rationality: RationalityParams {
                beta: inf.beta,
                horizon: inf.horizon,
            },
            vehicle,
            features,
            dt: inf.dt,
        };
        human_model.validate()?;
        let truth_model = HumanModel {
            theta: truth_theta,
            ..human_model.clone()
        };
        if !(inf.selection_radius >= 0.0) {
            return Err(Error::config(
                "inference.selection_radius",
                "must be non-negative",
            ));
        }
        if !(inf.noise_sigma.is_finite() && inf.noise_sigma >= 0.0) {
            return Err(Error::config(
                "inference.noise_sigma",
                "must be non-negative",
            ));
        }
        if inf.region_samples == 0 {
            return Err(Error::config(
                "inference.region_samples",
                "must be at least 1",
            ));
        }
        let [a, b] = raw.map.crosswalk;
        let region = (0..inf.region_samples)
            .map(|i| {
                let f = if inf.region_samples == 1 {
                    0.5
                } else {
                    i as f64 / (inf.region_samples - 1) as f64
                };
                [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])]
            })
            .collect();

        let s = &raw.sim;
        if !(s.dt.is_finite() && s.dt > 0.0) {
            return Err(Error::config("sim.dt", "must be positive"));
        }
        if !(s.sensor_range > 0.0) {
            return Err(Error::config("sim.sensor_range", "must be positive"));
        }

        Ok(ScenarioConfig {
            name: raw.name.unwrap_or_else(|| "scenario".into()),
            lanes,
            reference_path,
            crosswalk: raw.map.crosswalk,
            region,
            occluders,
            finish_x: raw.map.finish_x,
            initial,
            pedestrian: raw.pedestrian,
            hypotheses,
            state_prior,
            present,
            absent,
            social,
            social_prior,
            truth_info,
            planner,
            vehicle,
            features,
            human_model,
            truth_model,
            selection_radius: inf.selection_radius,
            noise_sigma: inf.noise_sigma,
            dt: s.dt,
            max_steps: s.max_steps,
            seed: s.seed,
            sensor_range: s.sensor_range,
        })
    }

    /// Ground-truth pedestrians at time `t`.
    pub fn pedestrians_at(&self, t: f64) -> Vec<Pedestrian> {
        self.pedestrian.iter().map(|p| p.at(t)).collect()
    }
}

/// Scenarios shipped with the crate, by name.
pub fn builtin(name: &str) -> Option<&'static str> {
    match name {
        "crossing" => Some(include_str!("../../scenarios/crossing.toml")),
        "non_crossing" | "non-crossing" => Some(include_str!("../../scenarios/non_crossing.toml")),
        "traffic_speed" | "traffic-speed" => {
            Some(include_str!("../../scenarios/traffic_speed.toml"))
        }
        _ => None,
    }
}

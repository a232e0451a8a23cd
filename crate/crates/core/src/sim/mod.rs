//! Closed-loop scenario runner.
//!
//! Each step the robot senses the scene, updates its beliefs (from direct
//! observation where possible, otherwise from the humans' last actions),
//! plans, and executes the first planned action while the simulated humans
//! follow their own best responses.

pub mod config;
pub mod metrics;
pub mod trace;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use config::{builtin, PedestrianScript, ScenarioConfig};
pub use metrics::{compute_metrics, Metrics};
pub use trace::{Outcome, StepRecord, Trace};

use crate::costs::SocialInfo;
use crate::error::{Error, Result};
use crate::inference::{
    human_best_response, select_informative_humans, update_social_belief, update_state_belief,
    Belief, HumanModel, HypothesisSet, ObservedAction,
};
use crate::perception::{observe, AgentId, Verdict};
use crate::planner::{plan, PlanContext};
use crate::world::{step_world, Control, ControlSequence, Pedestrian, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    /// Infers occluded pedestrians and traffic conditions from human behavior.
    Social,
    /// Assumes the crosswalk is empty until a pedestrian is seen.
    Aggressive,
    /// Assumes a pedestrian until the crosswalk is seen empty.
    Conservative,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 3] = [
        PlannerKind::Social,
        PlannerKind::Aggressive,
        PlannerKind::Conservative,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PlannerKind::Social => "social",
            PlannerKind::Aggressive => "aggressive",
            PlannerKind::Conservative => "conservative",
        }
    }
}

impl std::str::FromStr for PlannerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "social" => Ok(PlannerKind::Social),
            "aggressive" => Ok(PlannerKind::Aggressive),
            "conservative" => Ok(PlannerKind::Conservative),
            other => Err(Error::config(
                "planner",
                format!("unknown planner kind `{other}`"),
            )),
        }
    }
}

impl std::fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Action of a simulated human: the first step of its best response to the
/// true scene, plus optional Gaussian noise, clipped to the acceleration limit.
pub fn human_policy_step(
    truth: &WorldState,
    human: usize,
    info: &SocialInfo,
    robot_plan: &ControlSequence,
    model: &HumanModel,
    noise: Option<(&Normal<f64>, &mut ChaCha8Rng)>,
) -> Result<Control> {
    let br = human_best_response(truth, info, human, robot_plan, model)?;
    let mut a = br.at_or_last(0).accel;
    if let Some((dist, rng)) = noise {
        a += dist.sample(rng);
    }
    let a_max = model.vehicle.a_max;
    Ok(Control::accel(a.clamp(-a_max, a_max)))
}

fn ped_gap(cfg: &ScenarioConfig, world: &WorldState) -> Option<f64> {
    world
        .active_pedestrians()
        .map(|p| cfg.features.geometry.pedestrian_gap(&world.robot, p))
        .fold(None, |acc: Option<f64>, g| {
            Some(acc.map_or(g, |a| a.min(g)))
        })
}

/// Runs one closed-loop episode. `steps` overrides the configured maximum.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    kind: PlannerKind,
    steps: Option<usize>,
) -> Result<Trace> {
    let dt = cfg.dt;
    let max_steps = steps.unwrap_or(cfg.max_steps);
    let geom = cfg.features.geometry;
    let n_p = cfg.planner.horizon;
    let n_h = cfg.human_model.rationality.horizon;
    let dt_h = cfg.human_model.dt;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = if cfg.noise_sigma > 0.0 {
        Some(
            Normal::new(0.0, cfg.noise_sigma)
                .map_err(|e| Error::config("inference.noise_sigma", e.to_string()))?,
        )
    } else {
        None
    };

    let mut truth = cfg.initial.clone();
    truth.pedestrians = cfg.pedestrians_at(0.0);
    let mut bel_x = cfg.state_prior.clone();
    let mut bel_i = cfg.social_prior.clone();
    let mut prev_plan = ControlSequence::zeros(n_p);
    let mut prev_control = Control::default();
    let mut track: Option<Pedestrian> = None;
    // world and robot plan the humans responded to in the previous step
    let mut last_context: Option<(WorldState, ControlSequence)> = None;
    let mut records = Vec::new();
    let mut outcome = Outcome::MaxSteps;

    for step in 0..max_steps {
        let t = step as f64 * dt;
        if truth.robot.x >= cfg.finish_x {
            outcome = Outcome::Goal;
            break;
        }

        let obs = observe(
            &truth,
            AgentId::Robot,
            &cfg.occluders,
            &cfg.region,
            cfg.sensor_range,
            &geom,
        )?;
        let seen = truth
            .pedestrians
            .iter()
            .enumerate()
            .find(|(j, _)| obs.sees(AgentId::Pedestrian(*j)))
            .map(|(_, p)| *p);
        let region_visible = obs.queries.iter().all(|v| *v == Verdict::Visible);
        let visible_ped = seen.is_some();
        let mut track_ended = false;
        track = match (seen, track) {
            (Some(p), _) => Some(p),
            (None, Some(p)) => {
                let next = p.step(dt);
                if next.active {
                    Some(next)
                } else {
                    track_ended = true;
                    None
                }
            }
            (None, None) => None,
        };

        let mut selected = Vec::new();
        let mut degenerate = false;
        let mut hyps = cfg.hypotheses.clone();
        if let Some(p) = track {
            hyps.0[cfg.present].pedestrians = vec![p];
            bel_x = Belief::one_hot(hyps.len(), cfg.present);
        } else if region_visible || track_ended {
            bel_x = Belief::one_hot(hyps.len(), cfg.absent);
        } else {
            match kind {
                PlannerKind::Aggressive => bel_x = Belief::one_hot(hyps.len(), cfg.absent),
                PlannerKind::Conservative => bel_x = Belief::one_hot(hyps.len(), cfg.present),
                PlannerKind::Social => {
                    if let Some((prev_world, prev_nominal)) = &last_context {
                        let info = &cfg.social.0[bel_i.argmax()].info;
                        selected = select_informative_humans(
                            prev_world,
                            &cfg.region,
                            &cfg.occluders,
                            cfg.sensor_range,
                            cfg.selection_radius,
                            &geom,
                        );
                        let actions: Vec<ObservedAction> = selected
                            .iter()
                            .map(|&i| ObservedAction {
                                human: i,
                                control: Control::accel(truth.humans[i].last_accel),
                            })
                            .collect();
                        if !actions.is_empty() {
                            let up = update_state_belief(
                                &bel_x,
                                &hyps,
                                prev_world,
                                info,
                                &actions,
                                prev_nominal,
                                &cfg.human_model,
                            )?;
                            degenerate |= up.degenerate;
                            bel_x = up.belief;
                        }
                    }
                }
            }
        }
        if kind == PlannerKind::Social && !truth.humans.is_empty() {
            if let Some((prev_world, prev_nominal)) = &last_context {
                let fused = map_world(&hyps, &bel_x, prev_world, track.is_some());
                let actions: Vec<ObservedAction> = (0..truth.humans.len())
                    .map(|i| ObservedAction {
                        human: i,
                        control: Control::accel(truth.humans[i].last_accel),
                    })
                    .collect();
                let up = update_social_belief(
                    &bel_i,
                    &cfg.social,
                    &fused,
                    &actions,
                    prev_nominal,
                    &cfg.human_model,
                )?;
                degenerate |= up.degenerate;
                bel_i = up.belief;
            }
        }

        // robot intentions as seen by the humans: the previous plan, advanced by one step
        let warm = prev_plan.resample(cfg.planner.dt, cfg.planner.dt, n_p, dt);
        let nominal_h = prev_plan.resample(cfg.planner.dt, dt_h, n_h, dt);
        let observed_world = WorldState {
            pedestrians: Vec::new(),
            ..truth.clone()
        };
        let ctx = PlanContext {
            world: &observed_world,
            vehicle: &cfg.vehicle,
            features: &cfg.features,
            path: &cfg.reference_path,
            statics: &cfg.occluders,
            human_model: Some(&cfg.human_model),
            nominal: &nominal_h,
            prev_control,
            warm_start: Some(&warm),
        };
        let result = plan(&bel_x, &hyps, &bel_i, &cfg.social, &ctx, &cfg.planner)?;
        let robot_u = result.sequence.at_or_last(0);

        let mut human_us = Vec::with_capacity(truth.humans.len());
        for i in 0..truth.humans.len() {
            let nz = noise.as_ref().map(|n| (n, &mut rng));
            human_us.push(human_policy_step(
                &truth,
                i,
                &cfg.truth_info,
                &nominal_h,
                &cfg.truth_model,
                nz,
            )?);
        }

        records.push(StepRecord {
            step,
            t,
            robot: truth.robot,
            robot_u,
            humans: truth.humans.iter().map(|h| h.state).collect(),
            human_us: human_us.clone(),
            pedestrians: truth.pedestrians.clone(),
            visible_ped,
            region_visible,
            tracked: track.is_some(),
            selected,
            bel_x: bel_x.probs().to_vec(),
            bel_i: bel_i.probs().to_vec(),
            degenerate_evidence: degenerate,
            expected_cost: result.expected_cost,
            feasible: result.feasible,
            constraints: result.constraints,
            ped_gap: ped_gap(cfg, &truth),
        });

        last_context = Some((truth.clone(), nominal_h));
        truth = step_world(&truth, &robot_u, &human_us, &cfg.vehicle, dt)?;
        truth.pedestrians = cfg.pedestrians_at((step + 1) as f64 * dt);
        prev_plan = result.sequence;
        prev_control = robot_u;

        if ped_gap(cfg, &truth) == Some(0.0) {
            outcome = Outcome::Collision;
            break;
        }
    }
    if outcome == Outcome::MaxSteps && truth.robot.x >= cfg.finish_x {
        outcome = Outcome::Goal;
    }

    Ok(Trace {
        scenario: cfg.name.clone(),
        kind,
        dt,
        a_max: cfg.vehicle.a_max,
        hypothesis_labels: cfg
            .hypotheses
            .labels()
            .into_iter()
            .map(String::from)
            .collect(),
        social_labels: cfg.social.0.iter().map(|s| s.label.clone()).collect(),
        present: cfg.present,
        final_ped_gap: ped_gap(cfg, &truth),
        final_world: truth,
        records,
        outcome,
    })
}

/// Previous world completed with the most probable state hypothesis.
fn map_world(hyps: &HypothesisSet, bel_x: &Belief, prev: &WorldState, tracked: bool) -> WorldState {
    if tracked {
        return prev.clone();
    }
    hyps.0[bel_x.argmax()].fuse(prev)
}

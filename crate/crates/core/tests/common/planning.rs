//! Planner scenes and helpers shared by the planner suite and the acceptance run.

use occlusim::costs::{FeatureConfig, RefPath};
use occlusim::inference::{
    ActionLattice, Belief, HumanModel, Hypothesis, HypothesisSet, SocialHypothesisSet,
};
use occlusim::perception::Occluder;
use occlusim::planner::{
    check_constraints, expected_cost, plan, predict_scenarios, prune_beliefs, PlanContext,
    PlanResult, PlannerConfig,
};
use occlusim::world::{
    rollout, AgentState, Control, ControlSequence, HumanAgent, Pedestrian, VehicleParams,
    WorldState,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Owns everything a `PlanContext` borrows.
pub struct Scene {
    pub world: WorldState,
    pub hyps: HypothesisSet,
    pub shyps: SocialHypothesisSet,
    pub vehicle: VehicleParams,
    pub features: FeatureConfig,
    pub path: RefPath,
    pub statics: Vec<Occluder>,
    pub model: Option<HumanModel>,
    pub nominal: ControlSequence,
    pub prev: Control,
    pub warm: Option<ControlSequence>,
}

impl Scene {
    pub fn new(world: WorldState, hyps: HypothesisSet, shyps: SocialHypothesisSet) -> Self {
        Scene {
            world,
            hyps,
            shyps,
            vehicle: VehicleParams::default(),
            features: FeatureConfig::default(),
            path: RefPath::new(vec![[-100.0, 0.0], [300.0, 0.0]]).unwrap(),
            statics: Vec::new(),
            model: Some(super::human_model(
                &super::THETA_TRUE,
                &[-2.0, 0.0, 1.0],
                2,
                1.0,
                0.5,
            )),
            nominal: ControlSequence::zeros(2),
            prev: Control::accel(0.0),
            warm: None,
        }
    }

    pub fn ctx(&self) -> PlanContext<'_> {
        PlanContext {
            world: &self.world,
            vehicle: &self.vehicle,
            features: &self.features,
            path: &self.path,
            statics: &self.statics,
            human_model: self.model.as_ref(),
            nominal: &self.nominal,
            prev_control: self.prev,
            warm_start: self.warm.as_ref(),
        }
    }

    pub fn cost(&self, bx: &Belief, bi: &Belief, seq: &[f64], cfg: &PlannerConfig) -> f64 {
        expected_cost(
            bx,
            &self.hyps,
            bi,
            &self.shyps,
            &ControlSequence::from_accels(seq),
            &self.ctx(),
            cfg,
        )
        .unwrap()
    }

    pub fn plan(&self, bx: &Belief, bi: &Belief, cfg: &PlannerConfig) -> PlanResult {
        plan(bx, &self.hyps, bi, &self.shyps, &self.ctx(), cfg).unwrap()
    }

    /// Constraint check of `seq` against the predictions of the pruned beliefs.
    pub fn feasible(&self, bx: &Belief, bi: &Belief, seq: &[f64], cfg: &PlannerConfig) -> bool {
        let (bx, bi) = (
            prune_beliefs(bx, cfg.epsilon),
            prune_beliefs(bi, cfg.epsilon),
        );
        let preds = predict_scenarios(&bx, &self.hyps, &bi, &self.shyps, &self.ctx(), cfg).unwrap();
        let us = ControlSequence::from_accels(seq);
        let traj = rollout(&self.world.robot, &us, &self.vehicle, cfg.dt).unwrap();
        check_constraints(&traj, &us, &preds, &self.ctx(), cfg)
            .unwrap()
            .feasible()
    }
}

pub fn hyps(peds: Vec<Pedestrian>) -> HypothesisSet {
    HypothesisSet::new(vec![
        Hypothesis {
            label: "pedestrian".into(),
            pedestrians: peds,
        },
        Hypothesis {
            label: "none".into(),
            pedestrians: Vec::new(),
        },
    ])
    .unwrap()
}

/// Robot on lane 0, maybe a human on lane 1, and a pedestrian hypothesis ahead.
pub fn random_scene(r: &mut ChaCha8Rng) -> Scene {
    let mut world = WorldState::new(AgentState::new(0.0, 0.0, 0.0, r.random_range(3.0..12.0)));
    if r.random_bool(0.7) {
        let mut h = HumanAgent::new(AgentState::new(
            r.random_range(-15.0..25.0),
            3.5,
            0.0,
            r.random_range(4.0..11.0),
        ));
        h.last_accel = r.random_range(-1.0..1.0);
        world.humans.push(h);
    }
    let ped = Pedestrian::walking(
        r.random_range(12.0..40.0),
        r.random_range(-1.0..6.0),
        0.0,
        -r.random_range(0.0..1.5),
    );
    let speeds: Vec<f64> = (0..r.random_range(1..3))
        .map(|_| r.random_range(6.0..12.0))
        .collect();
    Scene::new(
        world,
        hyps(vec![ped]),
        SocialHypothesisSet::traffic_speeds(&speeds),
    )
}

pub fn random_belief(r: &mut ChaCha8Rng, n: usize) -> Belief {
    let w: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1.0) + 1e-3).collect();
    Belief::from_weights(&w).unwrap()
}

pub fn mix(a: &Belief, b: &Belief, lam: f64) -> Belief {
    let w: Vec<f64> = a
        .probs()
        .iter()
        .zip(b.probs())
        .map(|(x, y)| lam * x + (1.0 - lam) * y)
        .collect();
    Belief::from_weights(&w).unwrap()
}

pub fn small_cfg(horizon: usize, lattice: Vec<f64>) -> PlannerConfig {
    PlannerConfig {
        horizon,
        dt: 0.3,
        lattice: ActionLattice::new(lattice).unwrap(),
        ..PlannerConfig::default()
    }
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

//! Receding-horizon planning over state and social beliefs.
//!
//! The objective is the belief-weighted robot cost over all retained
//! hypothesis pairs. Candidates come from the robot action lattice, searched
//! exhaustively when small and by beam search otherwise, and the best one is
//! polished by coordinate descent on the per-step accelerations.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::costs::{dot5, robot_phi, FeatureConfig, RefPath, SocialInfo, Weights, ROBOT_FEATURES};
use crate::error::{Error, Result};
use crate::inference::{
    human_best_response, ActionLattice, Belief, HumanModel, HypothesisSet, SocialHypothesisSet,
};
use crate::perception::Occluder;
use crate::world::{
    rollout, step_unchecked, AgentState, BodyGeometry, Control, ControlSequence, Pedestrian,
    Trajectory, VehicleParams, WorldState,
};

/// Required clearance to other road users, per class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafetyRadii {
    pub pedestrian: f64,
    pub vehicle: f64,
}

impl Default for SafetyRadii {
    fn default() -> Self {
        SafetyRadii {
            pedestrian: 2.0,
            vehicle: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    pub horizon: usize,
    pub dt: f64,
    pub theta_r: Weights,
    pub epsilon: f64,
    pub lattice: ActionLattice,
    /// Coordinate-descent sweeps after the lattice search.
    pub refine_iters: usize,
    /// Initial coordinate-descent step; halved whenever a sweep fails to improve.
    pub refine_step: f64,
    pub beam_width: usize,
    /// Search exhaustively when `|lattice|^horizon` does not exceed this.
    pub exhaustive_limit: usize,
    pub safety: SafetyRadii,
    /// Required clearance to static polygons.
    pub static_margin: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            horizon: 10,
            dt: 0.2,
            theta_r: Weights(vec![1.0, 10.0, 1.0, 1.0, 1.0]),
            epsilon: 0.01,
            lattice: ActionLattice::default(),
            refine_iters: 10,
            refine_step: 0.5,
            beam_width: 50,
            exhaustive_limit: 1024,
            safety: SafetyRadii::default(),
            static_margin: 0.0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::config("planner.horizon", "must be at least 1"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config("planner.dt", "must be positive"));
        }
        if !(0.0..0.5).contains(&self.epsilon) {
            return Err(Error::config("planner.epsilon", "must lie in [0, 0.5)"));
        }
        if self.theta_r.len() != ROBOT_FEATURES.len() || !self.theta_r.is_finite() {
            return Err(Error::config(
                "planner.theta_r",
                "needs five finite weights",
            ));
        }
        if self.beam_width == 0 {
            return Err(Error::config("planner.beam_width", "must be at least 1"));
        }
        if !(self.refine_step.is_finite() && self.refine_step >= 0.0) {
            return Err(Error::config("planner.refine_step", "must be non-negative"));
        }
        Ok(())
    }
}

/// Zeroes components below `epsilon` and renormalizes; if nothing survives,
/// the largest component is kept with probability one.
pub fn prune_beliefs(belief: &Belief, epsilon: f64) -> Belief {
    let kept: Vec<f64> = belief
        .probs()
        .iter()
        .map(|&p| if p < epsilon { 0.0 } else { p })
        .collect();
    Belief::from_weights(&kept).unwrap_or_else(|| Belief::one_hot(belief.len(), belief.argmax()))
}

/// Scene inputs of one planning cycle.
#[derive(Debug, Clone, Copy)]
pub struct PlanContext<'a> {
    /// Sensed scene; its pedestrians are replaced by each state hypothesis.
    pub world: &'a WorldState,
    pub vehicle: &'a VehicleParams,
    pub features: &'a FeatureConfig,
    pub path: &'a RefPath,
    pub statics: &'a [Occluder],
    /// Model used to predict human responses; humans keep their speed without it.
    pub human_model: Option<&'a HumanModel>,
    /// Robot plan the humans are assumed to respond to.
    pub nominal: &'a ControlSequence,
    /// Control applied in the previous cycle.
    pub prev_control: Control,
    /// Shifted previous solution, always evaluated as a candidate.
    pub warm_start: Option<&'a ControlSequence>,
}

/// Predicted scene over the horizon for one (state, social) hypothesis pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPrediction {
    pub hypothesis: usize,
    pub social: usize,
    pub weight: f64,
    pub info: SocialInfo,
    /// `humans[k][i]`: state of human `i` at step `k`, `k = 0..=N`.
    pub humans: Vec<Vec<AgentState>>,
    pub peds: Vec<Vec<Pedestrian>>,
}

/// Predicts every hypothesis pair with non-zero joint weight.
pub fn predict_scenarios(
    bel_x: &Belief,
    hyps: &HypothesisSet,
    bel_i: &Belief,
    shyps: &SocialHypothesisSet,
    ctx: &PlanContext,
    cfg: &PlannerConfig,
) -> Result<Vec<ScenarioPrediction>> {
    if bel_x.len() != hyps.len() {
        return Err(Error::arity("state belief", hyps.len(), bel_x.len()));
    }
    if bel_i.len() != shyps.len() {
        return Err(Error::arity("social belief", shyps.len(), bel_i.len()));
    }
    let n = cfg.horizon;
    let mut out = Vec::new();
    for (l, &px) in bel_x.probs().iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        let world = hyps.0[l].fuse(ctx.world);
        let mut peds = Vec::with_capacity(n + 1);
        peds.push(world.pedestrians.clone());
        for k in 0..n {
            let next = peds[k]
                .iter()
                .map(|p: &Pedestrian| p.step(cfg.dt))
                .collect();
            peds.push(next);
        }
        for (m, &pi) in bel_i.probs().iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            let info = shyps.0[m].info.clone();
            let responses = world
                .humans
                .iter()
                .enumerate()
                .map(|(i, _)| match ctx.human_model {
                    Some(model) => Ok((
                        human_best_response(&world, &info, i, ctx.nominal, model)?,
                        model.dt,
                    )),
                    None => Ok((ControlSequence::zeros(1), cfg.dt)),
                })
                .collect::<Result<Vec<_>>>()?;
            let mut humans = Vec::with_capacity(n + 1);
            humans.push(world.humans.iter().map(|h| h.state).collect::<Vec<_>>());
            for k in 0..n {
                let t = k as f64 * cfg.dt;
                let next = humans[k]
                    .iter()
                    .zip(&responses)
                    .map(|(s, (seq, dt_h))| {
                        let seg = (t / dt_h + 1e-9).floor() as usize;
                        step_unchecked(
                            s,
                            &Control::accel(seq.at_or_last(seg).accel),
                            ctx.vehicle,
                            cfg.dt,
                        )
                    })
                    .collect();
                humans.push(next);
            }
            out.push(ScenarioPrediction {
                hypothesis: l,
                social: m,
                weight: px * pi,
                info,
                humans,
                peds: peds.clone(),
            });
        }
    }
    Ok(out)
}

/// Smallest margin per constraint family; negative margins are violations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    /// `a_max − |a|`
    pub accel: f64,
    /// `κ_max − |κ|`
    pub curvature: f64,
    /// `v_lim − v`
    pub speed: f64,
    /// Clearance to static polygons minus the static margin, if any polygon exists.
    pub static_clearance: Option<f64>,
    /// Clearance to predicted road users minus their safety radius, if any exist.
    pub dynamic_clearance: Option<f64>,
}

impl ConstraintReport {
    fn empty() -> Self {
        ConstraintReport {
            accel: f64::INFINITY,
            curvature: f64::INFINITY,
            speed: f64::INFINITY,
            static_clearance: None,
            dynamic_clearance: None,
        }
    }

    pub fn feasible(&self) -> bool {
        self.accel >= 0.0
            && self.curvature >= 0.0
            && self.speed >= 0.0
            && self.static_clearance.is_none_or(|m| m >= 0.0)
            && self.dynamic_clearance.is_none_or(|m| m >= 0.0)
    }

    fn merge_opt(slot: &mut Option<f64>, v: Option<f64>) {
        if let Some(v) = v {
            *slot = Some(slot.map_or(v, |s| s.min(v)));
        }
    }

    fn merge(&mut self, o: &ConstraintReport) {
        self.accel = self.accel.min(o.accel);
        self.curvature = self.curvature.min(o.curvature);
        self.speed = self.speed.min(o.speed);
        Self::merge_opt(&mut self.static_clearance, o.static_clearance);
        Self::merge_opt(&mut self.dynamic_clearance, o.dynamic_clearance);
    }
}

fn polygon_clearance(p: [f64; 2], poly: &Occluder) -> f64 {
    let v = poly.vertices();
    let d = (0..v.len())
        .map(|i| crate::costs::point_segment_distance(p, v[i], v[(i + 1) % v.len()]))
        .fold(f64::INFINITY, f64::min);
    if poly.contains_strictly(p) {
        -d
    } else {
        d
    }
}

struct Problem<'a> {
    ctx: &'a PlanContext<'a>,
    cfg: &'a PlannerConfig,
    preds: &'a [ScenarioPrediction],
    geom: BodyGeometry,
}

impl<'a> Problem<'a> {
    fn new(
        ctx: &'a PlanContext<'a>,
        cfg: &'a PlannerConfig,
        preds: &'a [ScenarioPrediction],
    ) -> Self {
        Problem {
            ctx,
            cfg,
            preds,
            geom: ctx.features.geometry,
        }
    }

    fn step(&self, s: &AgentState, a: f64) -> AgentState {
        step_unchecked(s, &Control::accel(a), self.ctx.vehicle, self.cfg.dt)
    }

    /// Expected cost of step `k` taken from robot state `s`.
    fn step_cost(&self, k: usize, s: &AgentState, a: f64, prev: f64) -> f64 {
        let theta = self.cfg.theta_r.values();
        self.preds
            .iter()
            .map(|p| {
                p.weight
                    * dot5(
                        theta,
                        &robot_phi(
                            s,
                            &p.humans[k],
                            &p.peds[k],
                            &p.info,
                            a,
                            prev,
                            self.ctx.path,
                            self.ctx.features,
                        ),
                    )
            })
            .sum()
    }

    /// Margins of the state reached at step `k ≥ 1` after applying `a`.
    fn step_margins(&self, k: usize, s: &AgentState, a: f64, steer: f64) -> ConstraintReport {
        let v = self.ctx.vehicle;
        let mut r = ConstraintReport {
            accel: v.a_max - a.abs(),
            curvature: v.kappa_max - v.curvature(steer).abs(),
            speed: v.v_lim - s.speed,
            static_clearance: None,
            dynamic_clearance: None,
        };
        r.static_clearance = self.static_margin(s);
        r.dynamic_clearance = self.dynamic_margin(k, s);
        r
    }

    fn static_margin(&self, s: &AgentState) -> Option<f64> {
        if self.ctx.statics.is_empty() {
            return None;
        }
        let circles = self.geom.vehicle_circles(s);
        let mut m = f64::INFINITY;
        for poly in self.ctx.statics {
            for c in &circles {
                m = m.min(
                    polygon_clearance(*c, poly)
                        - self.geom.vehicle_circle_radius
                        - self.cfg.static_margin,
                );
            }
        }
        Some(m)
    }

    fn dynamic_margin(&self, k: usize, s: &AgentState) -> Option<f64> {
        let mut m: Option<f64> = None;
        let mut take = |x: f64| m = Some(m.map_or(x, |y: f64| y.min(x)));
        for p in self.preds {
            for h in &p.humans[k] {
                take(self.geom.vehicle_gap(s, h) - self.cfg.safety.vehicle);
            }
            for ped in p.peds[k].iter().filter(|p| p.active) {
                take(self.geom.pedestrian_gap(s, ped) - self.cfg.safety.pedestrian);
            }
        }
        m
    }

    fn step_ok(&self, k: usize, s: &AgentState, a: f64) -> bool {
        self.step_margins(k, s, a, 0.0).feasible()
    }

    /// Whether braking at full deceleration from step `k` keeps every later state feasible.
    fn can_stop(&self, k: usize, s: &AgentState) -> bool {
        let a = -self.ctx.vehicle.a_max;
        let mut cur = *s;
        for j in k..self.cfg.horizon {
            cur = self.step(&cur, a);
            if !self.step_ok(j + 1, &cur, a) {
                return false;
            }
        }
        true
    }

    fn report(&self, traj: &Trajectory, seq: &ControlSequence) -> ConstraintReport {
        let mut r = ConstraintReport::empty();
        for (k, u) in seq.controls().iter().enumerate() {
            r.merge(&self.step_margins(k + 1, &traj.states()[k + 1], u.accel, u.steer));
        }
        r
    }

    /// Expected cost and per-scenario costs of a full sequence.
    fn evaluate(&self, seq: &ControlSequence) -> (f64, Vec<f64>) {
        let theta = self.cfg.theta_r.values();
        let mut per = vec![0.0; self.preds.len()];
        let mut s = self.ctx.world.robot;
        let mut prev = self.ctx.prev_control.accel;
        for (k, u) in seq.controls().iter().enumerate() {
            for (c, p) in per.iter_mut().zip(self.preds) {
                *c += dot5(
                    theta,
                    &robot_phi(
                        &s,
                        &p.humans[k],
                        &p.peds[k],
                        &p.info,
                        u.accel,
                        prev,
                        self.ctx.path,
                        self.ctx.features,
                    ),
                );
            }
            s = step_unchecked(&s, u, self.ctx.vehicle, self.cfg.dt);
            prev = u.accel;
        }
        let total = per.iter().zip(self.preds).map(|(c, p)| p.weight * c).sum();
        (total, per)
    }

    fn feasible(&self, seq: &ControlSequence) -> bool {
        let mut s = self.ctx.world.robot;
        for (k, u) in seq.controls().iter().enumerate() {
            s = step_unchecked(&s, u, self.ctx.vehicle, self.cfg.dt);
            if !self.step_margins(k + 1, &s, u.accel, u.steer).feasible() {
                return false;
            }
        }
        true
    }

    fn sorted_lattice(&self) -> Vec<f64> {
        let mut l = self.cfg.lattice.accels().to_vec();
        l.sort_by(f64::total_cmp);
        l.dedup();
        l
    }

    fn exhaustive(&self) -> Option<(f64, Vec<f64>)> {
        let lattice = self.sorted_lattice();
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut path = Vec::with_capacity(self.cfg.horizon);
        self.dfs(
            0,
            &self.ctx.world.robot,
            self.ctx.prev_control.accel,
            0.0,
            &lattice,
            &mut path,
            &mut best,
        );
        best
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        k: usize,
        s: &AgentState,
        prev: f64,
        prefix: f64,
        lattice: &[f64],
        path: &mut Vec<f64>,
        best: &mut Option<(f64, Vec<f64>)>,
    ) {
        if k == self.cfg.horizon {
            if best.as_ref().is_none_or(|(c, _)| prefix < *c) {
                *best = Some((prefix, path.clone()));
            }
            return;
        }
        for &a in lattice {
            let next = self.step(s, a);
            if !self.step_ok(k + 1, &next, a) {
                continue;
            }
            let cost = prefix + self.step_cost(k, s, a, prev);
            path.push(a);
            self.dfs(k + 1, &next, a, cost, lattice, path, best);
            path.pop();
        }
    }

    fn beam(&self) -> Option<(f64, Vec<f64>)> {
        struct Node {
            cost: f64,
            seq: Vec<f64>,
            state: AgentState,
        }
        let lattice = self.sorted_lattice();
        let mut beam = vec![Node {
            cost: 0.0,
            seq: Vec::new(),
            state: self.ctx.world.robot,
        }];
        for k in 0..self.cfg.horizon {
            let mut next = Vec::with_capacity(beam.len() * lattice.len());
            for node in &beam {
                let prev = node
                    .seq
                    .last()
                    .copied()
                    .unwrap_or(self.ctx.prev_control.accel);
                for &a in &lattice {
                    let s = self.step(&node.state, a);
                    if !self.step_ok(k + 1, &s, a) || !self.can_stop(k + 1, &s) {
                        continue;
                    }
                    let mut seq = node.seq.clone();
                    seq.push(a);
                    next.push(Node {
                        cost: node.cost + self.step_cost(k, &node.state, a, prev),
                        seq,
                        state: s,
                    });
                }
            }
            next.sort_by(|a, b| order(a.cost, &a.seq, b.cost, &b.seq));
            next.truncate(self.cfg.beam_width);
            if next.is_empty() {
                return None;
            }
            beam = next;
        }
        beam.into_iter().next().map(|n| (n.cost, n.seq))
    }

    fn search(&self) -> Option<(f64, Vec<f64>)> {
        let n = self.cfg.lattice.len() as f64;
        let size = n.powi(self.cfg.horizon.min(64) as i32);
        if size <= self.cfg.exhaustive_limit as f64 {
            self.exhaustive()
        } else {
            self.beam()
        }
    }

    /// Coordinate descent over per-step accelerations, keeping feasibility.
    fn refine(&self, mut seq: Vec<f64>, mut cost: f64) -> (Vec<f64>, f64) {
        let a_max = self.ctx.vehicle.a_max;
        let mut delta = self.cfg.refine_step;
        for _ in 0..self.cfg.refine_iters {
            if delta <= 0.0 {
                break;
            }
            let mut improved = false;
            for k in 0..seq.len() {
                for dir in [-1.0, 1.0] {
                    let a = (seq[k] + dir * delta).clamp(-a_max, a_max);
                    if a == seq[k] {
                        continue;
                    }
                    let mut cand = seq.clone();
                    cand[k] = a;
                    let cs = ControlSequence::from_accels(&cand);
                    if !self.feasible(&cs) {
                        continue;
                    }
                    let (c, _) = self.evaluate(&cs);
                    if c < cost - 1e-12 {
                        seq = cand;
                        cost = c;
                        improved = true;
                    }
                }
            }
            if !improved {
                delta /= 2.0;
            }
        }
        (seq, cost)
    }
}

/// Total order on candidates: cost, then the sequence lexicographically.
fn order(ca: f64, a: &[f64], cb: f64, b: &[f64]) -> Ordering {
    ca.total_cmp(&cb).then_with(|| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(a.len().cmp(&b.len()))
    })
}

/// Expected cost of a robot sequence under the given (already pruned) beliefs.
pub fn expected_cost(
    bel_x: &Belief,
    hyps: &HypothesisSet,
    bel_i: &Belief,
    shyps: &SocialHypothesisSet,
    u_r: &ControlSequence,
    ctx: &PlanContext,
    cfg: &PlannerConfig,
) -> Result<f64> {
    if u_r.len() != cfg.horizon {
        return Err(Error::arity("robot sequence", cfg.horizon, u_r.len()));
    }
    let preds = predict_scenarios(bel_x, hyps, bel_i, shyps, ctx, cfg)?;
    Ok(Problem::new(ctx, cfg, &preds).evaluate(u_r).0)
}

/// Constraint margins of `seq` (with rollout `traj`) against the given predictions.
pub fn check_constraints(
    traj: &Trajectory,
    seq: &ControlSequence,
    preds: &[ScenarioPrediction],
    ctx: &PlanContext,
    cfg: &PlannerConfig,
) -> Result<ConstraintReport> {
    if traj.states().len() != seq.len() + 1 {
        return Err(Error::arity(
            "trajectory states",
            seq.len() + 1,
            traj.states().len(),
        ));
    }
    if preds.iter().any(|p| p.humans.len() < seq.len() + 1) {
        return Err(Error::arity(
            "prediction steps",
            seq.len() + 1,
            preds[0].humans.len(),
        ));
    }
    Ok(Problem::new(ctx, cfg, preds).report(traj, seq))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioCost {
    pub hypothesis: usize,
    pub social: usize,
    pub weight: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub sequence: ControlSequence,
    pub expected_cost: f64,
    /// Best lattice cost before refinement, if any lattice sequence was feasible.
    pub search_cost: Option<f64>,
    pub scenario_costs: Vec<ScenarioCost>,
    pub constraints: ConstraintReport,
    pub feasible: bool,
    pub predictions: Vec<ScenarioPrediction>,
}

/// One planning cycle: prune, predict, search, refine.
pub fn plan(
    bel_x: &Belief,
    hyps: &HypothesisSet,
    bel_i: &Belief,
    shyps: &SocialHypothesisSet,
    ctx: &PlanContext,
    cfg: &PlannerConfig,
) -> Result<PlanResult> {
    cfg.validate()?;
    let bx = prune_beliefs(bel_x, cfg.epsilon);
    let bi = prune_beliefs(bel_i, cfg.epsilon);
    let preds = predict_scenarios(&bx, hyps, &bi, shyps, ctx, cfg)?;
    let problem = Problem::new(ctx, cfg, &preds);

    let searched = problem.search();
    let search_cost = searched.as_ref().map(|(c, _)| *c);
    let mut best: Option<(f64, Vec<f64>)> = searched.map(|(_, s)| {
        let c = problem.evaluate(&ControlSequence::from_accels(&s)).0;
        (c, s)
    });
    if let Some(ws) = ctx.warm_start {
        if ws.len() == cfg.horizon && problem.feasible(ws) {
            let c = problem.evaluate(ws).0;
            let seq = ws.accels();
            if best
                .as_ref()
                .is_none_or(|(bc, bs)| order(c, &seq, *bc, bs) == Ordering::Less)
            {
                best = Some((c, seq));
            }
        }
    }

    let (sequence, feasible) = match best {
        Some((c, s)) => {
            let (s, _) = problem.refine(s, c);
            (ControlSequence::from_accels(&s), true)
        }
        None => (
            ControlSequence::from_accels(&vec![-ctx.vehicle.a_max; cfg.horizon]),
            false,
        ),
    };
    let (expected, per) = problem.evaluate(&sequence);
    let traj = rollout(&ctx.world.robot, &sequence, ctx.vehicle, cfg.dt)?;
    let constraints = problem.report(&traj, &sequence);
    let scenario_costs = preds
        .iter()
        .zip(per)
        .map(|(p, cost)| ScenarioCost {
            hypothesis: p.hypothesis,
            social: p.social,
            weight: p.weight,
            cost,
        })
        .collect();
    Ok(PlanResult {
        sequence,
        expected_cost: expected,
        search_cost,
        scenario_costs,
        constraints,
        feasible,
        predictions: preds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pruning_examples() {
        let b = prune_beliefs(&Belief::new(vec![0.005, 0.995]).unwrap(), 0.01);
        assert_eq!(b.probs(), &[0.0, 1.0]);
        let b = prune_beliefs(&Belief::new(vec![0.3, 0.7]).unwrap(), 0.01);
        assert_eq!(b.probs(), &[0.3, 0.7]);
        let b = prune_beliefs(&Belief::new(vec![0.009, 0.011, 0.98]).unwrap(), 0.01);
        assert_eq!(b.probs()[0], 0.0);
        assert!((b.probs()[1] - 0.011 / 0.991).abs() < 1e-15);
        assert!((b.probs()[2] - 0.98 / 0.991).abs() < 1e-15);
        let b = prune_beliefs(&Belief::new(vec![0.25, 0.25, 0.5]).unwrap(), 0.49);
        assert_eq!(b.probs(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn candidate_order_is_total() {
        assert_eq!(order(1.0, &[0.0], 2.0, &[-1.0]), Ordering::Less);
        assert_eq!(
            order(1.0, &[0.0, 1.0], 1.0, &[0.0, -1.0]),
            Ordering::Greater
        );
        assert_eq!(order(1.0, &[0.0], 1.0, &[0.0]), Ordering::Equal);
    }
}

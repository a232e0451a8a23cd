//! Feature vectors, linear costs and the robot's planning cost terms.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ad::Real;
use crate::error::{Error, Result};
use crate::world::{
    step_unchecked, AgentState, BodyGeometry, Control, ControlSequence, Pedestrian, StateT,
    VehicleParams, WorldState,
};

/// Feature names of the human cost, in vector order.
pub const HUMAN_FEATURES: [&str; 5] = ["speed_dev", "accel", "jerk", "prox_ped", "prox_robot"];

/// Feature names of the robot cost, in vector order.
pub const ROBOT_FEATURES: [&str; 5] = ["tracking", "safety", "speed_dev", "accel", "jerk"];

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Cost weights θ.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Weights(pub Vec<f64>);

impl Weights {
    pub fn new(theta: Vec<f64>) -> Self {
        Weights(theta)
    }

    pub fn zeros(n: usize) -> Self {
        Weights(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn scaled(&self, k: f64) -> Weights {
        Weights(self.0.iter().map(|t| t * k).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|t| t.is_finite())
    }

    /// θᵀφ, summed in index order.
    pub fn dot(&self, phi: &FeatureVector) -> Result<f64> {
        if self.len() != phi.len() {
            return Err(Error::arity("feature vector", self.len(), phi.len()));
        }
        Ok(self
            .0
            .iter()
            .zip(&phi.0)
            .fold(0.0, |acc, (t, f)| acc + t * f))
    }

    /// Builds a weight vector from a name → value map in `names` order.
    pub fn from_named(map: &BTreeMap<String, f64>, names: &[&str]) -> Result<Weights> {
        for key in map.keys() {
            if !names.contains(&key.as_str()) {
                return Err(Error::config(key.clone(), "unknown feature name"));
            }
        }
        names
            .iter()
            .map(|n| {
                map.get(*n)
                    .copied()
                    .ok_or_else(|| Error::config(*n, "missing weight"))
            })
            .collect::<Result<Vec<_>>>()
            .map(Weights)
    }

    pub fn to_named(&self, names: &[&str]) -> BTreeMap<String, f64> {
        names
            .iter()
            .zip(&self.0)
            .map(|(n, v)| (n.to_string(), *v))
            .collect()
    }
}

/// Latent social variables; `v_traffic` is the prevailing traffic speed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SocialInfo {
    pub v_traffic: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

impl SocialInfo {
    pub fn with_traffic_speed(v_traffic: f64) -> Self {
        SocialInfo {
            v_traffic,
            extra: BTreeMap::new(),
        }
    }

    pub fn validate(&self, v_lim: f64) -> Result<()> {
        if !(self.v_traffic.is_finite() && self.v_traffic >= 0.0 && self.v_traffic <= v_lim) {
            return Err(Error::config(
                "v_traffic",
                format!("{} outside [0, {v_lim}]", self.v_traffic),
            ));
        }
        Ok(())
    }
}

/// Shared settings of the proximity features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    /// Beyond this clearance a proximity feature is exactly zero.
    pub proximity_cap: f64,
    pub geometry: BodyGeometry,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            proximity_cap: 50.0,
            geometry: BodyGeometry::default(),
        }
    }
}

/// Reference polyline for the tracking term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RefPath(pub Vec<[f64; 2]>);

impl RefPath {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::config(
                "map.reference_path",
                "reference path is empty",
            ));
        }
        Ok(RefPath(points))
    }

    /// Euclidean distance from `p` to the polyline.
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        match self.0.as_slice() {
            [] => f64::INFINITY,
            [q] => crate::world::dist(p, *q),
            pts => pts
                .windows(2)
                .map(|w| point_segment_distance(p, w[0], w[1]))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

pub(crate) fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    crate::world::dist(p, [a[0] + t * dx, a[1] + t * dy])
}

/// exp(−gap) for a clearance below the cap, zero otherwise.
fn proximity<T: Real>(gap: T, cap: f64) -> T {
    if gap.value() > cap {
        gap.constant(0.0)
    } else {
        (-gap).exp()
    }
}

/// Minimum clearance between generic-scalar circle centers and fixed points.
fn min_gap<T: Real>(centers: &[(T, T)], points: &[[f64; 2]], radii: f64) -> Option<T> {
    let mut best: Option<T> = None;
    for (cx, cy) in centers {
        for p in points {
            let d2 = (cx.clone() - p[0]).square() + (cy.clone() - p[1]).square();
            let d = if d2.value() > 0.0 {
                d2.sqrt()
            } else {
                d2.constant(0.0)
            };
            if best.as_ref().is_none_or(|b| d.value() < b.value()) {
                best = Some(d);
            }
        }
    }
    best.map(|d| {
        let g = d - radii;
        if g.value() < 0.0 {
            g.constant(0.0)
        } else {
            g
        }
    })
}

fn centers_generic<T: Real>(s: &StateT<T>, geom: &BodyGeometry) -> Vec<(T, T)> {
    let (c, sn) = (s.heading.cos(), s.heading.sin());
    geom.circle_offsets()
        .into_iter()
        .map(|o| (s.x.clone() + c.clone() * o, s.y.clone() + sn.clone() * o))
        .collect()
}

/// Human features for one step, generic so that derivatives with respect to
/// the human's controls can be taken.
pub(crate) fn human_phi<T: Real>(
    h: &StateT<T>,
    accel: T,
    prev_accel: T,
    info: &SocialInfo,
    robot: &AgentState,
    peds: &[Pedestrian],
    cfg: &FeatureConfig,
) -> [T; 5] {
    let geom = &cfg.geometry;
    let zero = accel.constant(0.0);
    let speed_dev = (h.speed.clone() - info.v_traffic).square();
    let jerk = (accel.clone() - prev_accel).square();
    let acc = accel.square();

    let centers = centers_generic(h, geom);
    let mut prox_ped = zero.clone();
    for p in peds.iter().filter(|p| p.active) {
        if let Some(g) = min_gap(
            &centers,
            &[p.position()],
            geom.vehicle_circle_radius + geom.pedestrian_radius,
        ) {
            prox_ped = prox_ped + proximity(g, cfg.proximity_cap);
        }
    }
    let robot_pts = geom.vehicle_circles(robot);
    let prox_robot = min_gap(&centers, &robot_pts, 2.0 * geom.vehicle_circle_radius)
        .map(|g| proximity(g, cfg.proximity_cap))
        .unwrap_or(zero);
    [speed_dev, acc, jerk, prox_ped, prox_robot]
}

fn human_index(world: &WorldState, human: usize) -> Result<()> {
    if human >= world.humans.len() {
        return Err(Error::Lookup(format!("human {human}")));
    }
    Ok(())
}

/// Human feature vector at `world`; the previous acceleration is the human's
/// recorded `last_accel`.
pub fn human_features(
    world: &WorldState,
    human: usize,
    info: &SocialInfo,
    u_h: &Control,
    cfg: &FeatureConfig,
) -> Result<FeatureVector> {
    human_index(world, human)?;
    let h = &world.humans[human];
    if !h.state.is_finite() || !u_h.is_finite() || !world.robot.is_finite() {
        return Err(Error::InvalidState("non-finite feature input".into()));
    }
    let phi = human_phi(
        &StateT::from_state(&h.state),
        u_h.accel,
        h.last_accel,
        info,
        &world.robot,
        &world.pedestrians,
        cfg,
    );
    Ok(FeatureVector(phi.to_vec()))
}

/// θᵀφ for one human step.
pub fn step_cost(
    world: &WorldState,
    human: usize,
    info: &SocialInfo,
    u_h: &Control,
    theta: &Weights,
    cfg: &FeatureConfig,
) -> Result<f64> {
    theta.dot(&human_features(world, human, info, u_h, cfg)?)
}

/// States of everything the human's cost depends on but does not control:
/// the robot following its plan and the pedestrians.
#[derive(Debug, Clone)]
pub(crate) struct Exogenous {
    pub robot: Vec<AgentState>,
    pub peds: Vec<Vec<Pedestrian>>,
}

impl Exogenous {
    pub fn new(
        world: &WorldState,
        u_r: &ControlSequence,
        steps: usize,
        params: &VehicleParams,
        dt: f64,
    ) -> Exogenous {
        let mut robot = Vec::with_capacity(steps + 1);
        let mut peds = Vec::with_capacity(steps + 1);
        robot.push(world.robot);
        peds.push(world.pedestrians.clone());
        for k in 0..steps {
            let r = step_unchecked(&robot[k], &u_r.at_or_last(k), params, dt);
            let p = peds[k].iter().map(|p| p.step(dt)).collect();
            robot.push(r);
            peds.push(p);
        }
        Exogenous { robot, peds }
    }
}

#[inline]
pub(crate) fn dot5(theta: &[f64], phi: &[f64; 5]) -> f64 {
    theta.iter().zip(phi).fold(0.0, |acc, (t, f)| acc + t * f)
}

/// Human cost at step `k` of an exogenous rollout.
#[inline]
#[allow(clippy::too_many_arguments)]
pub(crate) fn human_cost_at(
    exo: &Exogenous,
    k: usize,
    h: &AgentState,
    accel: f64,
    prev_accel: f64,
    info: &SocialInfo,
    theta: &[f64],
    cfg: &FeatureConfig,
) -> f64 {
    let phi = human_phi(
        &StateT::from_state(h),
        accel,
        prev_accel,
        info,
        &exo.robot[k],
        &exo.peds[k],
        cfg,
    );
    dot5(theta, &phi)
}

/// Σₖ step_cost along the joint rollout of robot and human `human`.
#[allow(clippy::too_many_arguments)]
pub fn cumulative_cost(
    x0: &WorldState,
    human: usize,
    info: &SocialInfo,
    u_r: &ControlSequence,
    u_h: &ControlSequence,
    theta: &Weights,
    params: &VehicleParams,
    dt: f64,
    cfg: &FeatureConfig,
) -> Result<f64> {
    human_index(x0, human)?;
    if u_r.len() != u_h.len() {
        return Err(Error::arity(
            "robot/human sequence length",
            u_r.len(),
            u_h.len(),
        ));
    }
    if theta.len() != HUMAN_FEATURES.len() {
        return Err(Error::arity(
            "human weights",
            HUMAN_FEATURES.len(),
            theta.len(),
        ));
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::Domain(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let exo = Exogenous::new(x0, u_r, u_r.len(), params, dt);
    let mut h = x0.humans[human].state;
    let mut prev = x0.humans[human].last_accel;
    let mut total = 0.0;
    for (k, u) in u_h.controls().iter().enumerate() {
        total += human_cost_at(&exo, k, &h, u.accel, prev, info, theta.values(), cfg);
        h = step_unchecked(&h, u, params, dt);
        prev = u.accel;
    }
    Ok(total)
}

/// Robot features `[tracking, safety, speed_dev, accel², jerk²]`.
#[allow(clippy::too_many_arguments)]
pub fn robot_features(
    robot: &AgentState,
    humans: &[AgentState],
    peds: &[Pedestrian],
    info: &SocialInfo,
    u: &Control,
    u_prev: &Control,
    path: &RefPath,
    cfg: &FeatureConfig,
) -> Result<FeatureVector> {
    if path.0.is_empty() {
        return Err(Error::config(
            "map.reference_path",
            "reference path is empty",
        ));
    }
    Ok(FeatureVector(
        robot_phi(robot, humans, peds, info, u.accel, u_prev.accel, path, cfg).to_vec(),
    ))
}

#[allow(clippy::too_many_arguments)]
#[inline]
pub(crate) fn robot_phi<'a>(
    robot: &AgentState,
    humans: impl IntoIterator<Item = &'a AgentState>,
    peds: &[Pedestrian],
    info: &SocialInfo,
    accel: f64,
    prev_accel: f64,
    path: &RefPath,
    cfg: &FeatureConfig,
) -> [f64; 5] {
    let geom = &cfg.geometry;
    let mut safety = 0.0;
    for h in humans {
        let g = geom.vehicle_gap(robot, h);
        if g <= cfg.proximity_cap {
            safety += (-g).exp();
        }
    }
    for p in peds.iter().filter(|p| p.active) {
        let g = geom.pedestrian_gap(robot, p);
        if g <= cfg.proximity_cap {
            safety += (-g).exp();
        }
    }
    [
        path.distance(robot.position()),
        safety,
        (robot.speed - info.v_traffic).powi(2),
        accel * accel,
        (accel - prev_accel).powi(2),
    ]
}

/// θ_Rᵀφ_R for one robot step in `world`.
pub fn robot_step_cost(
    world: &WorldState,
    info: &SocialInfo,
    u: &Control,
    u_prev: &Control,
    theta_r: &Weights,
    path: &RefPath,
    cfg: &FeatureConfig,
) -> Result<f64> {
    let humans: Vec<AgentState> = world.humans.iter().map(|h| h.state).collect();
    let phi = robot_features(
        &world.robot,
        &humans,
        &world.pedestrians,
        info,
        u,
        u_prev,
        path,
        cfg,
    )?;
    theta_r.dot(&phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{step_bicycle, HumanAgent};

    fn one_circle() -> FeatureConfig {
        FeatureConfig {
            proximity_cap: 50.0,
            geometry: BodyGeometry {
                vehicle_circles: 1,
                vehicle_circle_radius: 0.0,
                pedestrian_radius: 0.0,
                ..Default::default()
            },
        }
    }

    fn world_with_human(v: f64) -> WorldState {
        let mut w = WorldState::new(AgentState::new(-200.0, 0.0, 0.0, 0.0));
        w.humans
            .push(HumanAgent::new(AgentState::new(0.0, 3.5, 0.0, v)));
        w
    }

    #[test]
    fn speed_deviation_feature() {
        let cfg = one_circle();
        let w = world_with_human(10.0);
        let phi = human_features(
            &w,
            0,
            &SocialInfo::with_traffic_speed(10.0),
            &Control::default(),
            &cfg,
        )
        .unwrap();
        assert_eq!(phi.0, vec![0.0; 5]);
        let w = world_with_human(8.0);
        let phi = human_features(
            &w,
            0,
            &SocialInfo::with_traffic_speed(10.0),
            &Control::default(),
            &cfg,
        )
        .unwrap();
        assert_eq!(phi.0[0], 4.0);
    }

    #[test]
    fn pedestrian_proximity_is_exponential() {
        let cfg = one_circle();
        let mut w = world_with_human(0.0);
        w.pedestrians.push(Pedestrian::standing(0.0, 3.5));
        let info = SocialInfo::with_traffic_speed(0.0);
        let phi = human_features(&w, 0, &info, &Control::default(), &cfg).unwrap();
        assert_eq!(phi.0[3], 1.0);
        w.pedestrians[0] = Pedestrian::standing(10.0, 3.5);
        let phi = human_features(&w, 0, &info, &Control::default(), &cfg).unwrap();
        assert!((phi.0[3] - (-10.0f64).exp()).abs() < 1e-18);
        w.pedestrians[0] = Pedestrian::standing(60.0, 3.5);
        let phi = human_features(&w, 0, &info, &Control::default(), &cfg).unwrap();
        assert_eq!(phi.0[3], 0.0);
    }

    #[test]
    fn step_cost_dot_products() {
        let cfg = FeatureConfig::default();
        let mut w = world_with_human(7.0);
        w.robot = AgentState::new(-5.0, 0.0, 0.0, 7.0);
        w.humans[0].last_accel = 0.5;
        w.pedestrians.push(Pedestrian::standing(6.0, 5.0));
        let info = SocialInfo::with_traffic_speed(9.0);
        let u = Control::accel(-1.0);
        let phi = human_features(&w, 0, &info, &u, &cfg).unwrap();
        assert_eq!(
            step_cost(&w, 0, &info, &u, &Weights::zeros(5), &cfg).unwrap(),
            0.0
        );
        for k in 0..5 {
            let mut e = vec![0.0; 5];
            e[k] = 1.0;
            assert_eq!(
                step_cost(&w, 0, &info, &u, &Weights(e), &cfg).unwrap(),
                phi.0[k]
            );
        }
        let theta = Weights(vec![0.3, 1.7, 0.2, 5.0, 0.9]);
        let direct: f64 = phi.0.iter().zip(&theta.0).map(|(f, t)| f * t).sum();
        assert!((step_cost(&w, 0, &info, &u, &theta, &cfg).unwrap() - direct).abs() < 1e-12);
        assert!(matches!(
            theta.dot(&FeatureVector(vec![1.0; 4])),
            Err(Error::Arity { .. })
        ));
    }

    #[test]
    fn cumulative_cost_matches_explicit_loop() {
        let cfg = FeatureConfig::default();
        let p = VehicleParams::default();
        let mut w = world_with_human(8.0);
        w.robot = AgentState::new(-3.0, 0.0, 0.0, 8.0);
        w.pedestrians
            .push(Pedestrian::walking(25.0, 7.0, 0.0, -1.3));
        let info = SocialInfo::with_traffic_speed(9.0);
        let theta = Weights(vec![1.0, 0.5, 0.1, 2.0, 0.3]);
        let ur = ControlSequence::from_accels(&[0.5, -1.0, 0.0, 1.0, 2.0]);
        let uh = ControlSequence::from_accels(&[-2.0, -1.0, 0.0, 0.0, 1.0]);

        let one = cumulative_cost(
            &w,
            0,
            &info,
            &ControlSequence::from_accels(&[0.5]),
            &ControlSequence::from_accels(&[-2.0]),
            &theta,
            &p,
            0.1,
            &cfg,
        )
        .unwrap();
        assert_eq!(
            one,
            step_cost(&w, 0, &info, &Control::accel(-2.0), &theta, &cfg).unwrap()
        );

        let mut expected = 0.0;
        let mut cur = w.clone();
        for k in 0..5 {
            expected += step_cost(&cur, 0, &info, &uh.0[k], &theta, &cfg).unwrap();
            cur.robot = step_bicycle(&cur.robot, &ur.0[k], &p, 0.1).unwrap();
            cur.humans[0].state = step_bicycle(&cur.humans[0].state, &uh.0[k], &p, 0.1).unwrap();
            cur.humans[0].last_accel = uh.0[k].accel;
            for ped in &mut cur.pedestrians {
                *ped = ped.step(0.1);
            }
        }
        let got = cumulative_cost(&w, 0, &info, &ur, &uh, &theta, &p, 0.1, &cfg).unwrap();
        assert_eq!(got, expected);
        assert_eq!(
            cumulative_cost(&w, 0, &info, &ur, &uh, &Weights::zeros(5), &p, 0.1, &cfg).unwrap(),
            0.0
        );
        assert!(matches!(
            cumulative_cost(
                &w,
                0,
                &info,
                &ur,
                &ControlSequence::zeros(4),
                &theta,
                &p,
                0.1,
                &cfg
            ),
            Err(Error::Arity { .. })
        ));
    }

    #[test]
    fn robot_cost_terms() {
        let cfg = one_circle();
        let path = RefPath::new(vec![[0.0, 0.0], [100.0, 0.0]]).unwrap();
        let info = SocialInfo::with_traffic_speed(8.0);
        let w = WorldState::new(AgentState::new(10.0, 0.0, 0.0, 8.0));
        let all = Weights(vec![1.0; 5]);
        let c = robot_step_cost(
            &w,
            &info,
            &Control::default(),
            &Control::default(),
            &all,
            &path,
            &cfg,
        )
        .unwrap();
        assert_eq!(c, 0.0);

        let w = WorldState::new(AgentState::new(10.0, 2.0, 0.0, 8.0));
        let tracking = Weights(vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let c = robot_step_cost(
            &w,
            &info,
            &Control::default(),
            &Control::default(),
            &tracking,
            &path,
            &cfg,
        )
        .unwrap();
        assert_eq!(c, 2.0);

        let mut w = WorldState::new(AgentState::new(0.0, 0.0, 0.0, 8.0));
        w.humans
            .push(HumanAgent::new(AgentState::new(3.0, 0.0, 0.0, 8.0)));
        w.humans
            .push(HumanAgent::new(AgentState::new(0.0, -5.0, 0.0, 8.0)));
        let humans: Vec<_> = w.humans.iter().map(|h| h.state).collect();
        let phi = robot_features(
            &w.robot,
            &humans,
            &[],
            &info,
            &Control::default(),
            &Control::default(),
            &path,
            &cfg,
        )
        .unwrap();
        assert!((phi.0[1] - ((-3.0f64).exp() + (-5.0f64).exp())).abs() < 1e-15);

        assert!(matches!(RefPath::new(vec![]), Err(Error::Config { .. })));
        let empty = RefPath(vec![]);
        assert!(matches!(
            robot_step_cost(
                &w,
                &info,
                &Control::default(),
                &Control::default(),
                &all,
                &empty,
                &cfg
            ),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn polyline_distance_interpolates() {
        let path = RefPath::new(vec![[0.0, 0.0], [10.0, 0.0], [10.0, 10.0]]).unwrap();
        assert_eq!(path.distance([5.0, 3.0]), 3.0);
        assert_eq!(path.distance([12.0, 5.0]), 2.0);
        assert_eq!(path.distance([-3.0, 4.0]), 5.0);
    }

    #[test]
    fn named_weights_round_trip() {
        let w = Weights(vec![1.0, 0.5, 0.1, 2.0, 0.3]);
        let named = w.to_named(&HUMAN_FEATURES);
        assert_eq!(Weights::from_named(&named, &HUMAN_FEATURES).unwrap(), w);
        let mut bad = named.clone();
        bad.insert("bogus".into(), 1.0);
        assert!(Weights::from_named(&bad, &HUMAN_FEATURES).is_err());
    }
}

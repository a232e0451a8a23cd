//! Agent and environment state, kinematic bicycle dynamics and closed-loop
//! world stepping.
//!
//! Vehicle states refer to the center of gravity; the bicycle update uses the
//! slip angle `β = atan(lr·tan δ / (lf + lr))` and advances with explicit Euler
//! in the order position, heading, speed.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ad::Real;
use crate::error::{Error, Result};

/// Pose and longitudinal speed of one vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AgentState {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
}

impl AgentState {
    pub const fn new(x: f64, y: f64, heading: f64, speed: f64) -> Self {
        AgentState {
            x,
            y,
            heading,
            speed,
        }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite()
            && self.y.is_finite()
            && self.heading.is_finite()
            && self.speed.is_finite()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::InvalidState(format!(
                "non-finite agent state {self:?}"
            )));
        }
        if !(self.heading > -PI && self.heading <= PI) {
            return Err(Error::InvalidState(format!(
                "heading {} outside (-pi, pi]",
                self.heading
            )));
        }
        if self.speed < 0.0 {
            return Err(Error::InvalidState(format!(
                "negative speed {}",
                self.speed
            )));
        }
        Ok(())
    }
}

/// Longitudinal acceleration and front-wheel steering angle.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Control {
    pub accel: f64,
    pub steer: f64,
}

impl Control {
    pub const fn new(accel: f64, steer: f64) -> Self {
        Control { accel, steer }
    }

    pub const fn accel(accel: f64) -> Self {
        Control { accel, steer: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.accel.is_finite() && self.steer.is_finite()
    }
}

/// A horizon-length plan of controls.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ControlSequence(pub Vec<Control>);

impl ControlSequence {
    pub fn new(controls: Vec<Control>) -> Self {
        ControlSequence(controls)
    }

    pub fn from_accels(accels: &[f64]) -> Self {
        ControlSequence(accels.iter().map(|&a| Control::accel(a)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        ControlSequence(vec![Control::default(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn controls(&self) -> &[Control] {
        &self.0
    }

    pub fn accels(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.accel).collect()
    }

    /// Control at step `k`; past the end the last control is held, an empty
    /// sequence yields zero control.
    pub fn at_or_last(&self, k: usize) -> Control {
        self.0
            .get(k)
            .or_else(|| self.0.last())
            .copied()
            .unwrap_or_default()
    }

    /// Re-times a plan sampled every `from_dt` onto `n` steps of `to_dt`,
    /// starting `offset` seconds into it; the last control is held.
    pub fn resample(&self, from_dt: f64, to_dt: f64, n: usize, offset: f64) -> ControlSequence {
        ControlSequence(
            (0..n)
                .map(|j| {
                    let k = ((offset + j as f64 * to_dt) / from_dt + 1e-9).floor() as usize;
                    self.at_or_last(k)
                })
                .collect(),
        )
    }

    /// Drops the first control and repeats the last one so the length is kept.
    pub fn shifted(&self) -> ControlSequence {
        if self.0.is_empty() {
            return self.clone();
        }
        let mut v: Vec<Control> = self.0[1..].to_vec();
        v.push(*self.0.last().unwrap());
        ControlSequence(v)
    }
}

/// States `0..=N` produced by rolling a control sequence forward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trajectory(pub Vec<AgentState>);

impl Trajectory {
    pub fn states(&self) -> &[AgentState] {
        &self.0
    }

    pub fn last(&self) -> &AgentState {
        self.0
            .last()
            .expect("trajectory always holds the initial state")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalPhase {
    Red,
    Amber,
    Green,
    ProtectedLeft,
}

/// Non-agent state such as traffic signals.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EnvironmentState {
    #[serde(default)]
    pub signal_phase: Option<SignalPhase>,
    #[serde(default)]
    pub map_id: String,
}

/// A human-driven vehicle together with the acceleration it applied last.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HumanAgent {
    pub state: AgentState,
    #[serde(default)]
    pub last_accel: f64,
}

impl HumanAgent {
    pub fn new(state: AgentState) -> Self {
        HumanAgent {
            state,
            last_accel: 0.0,
        }
    }
}

/// Point-mass pedestrian walking at constant velocity.
///
/// `remaining` is the distance left along its path; on reaching the end the
/// pedestrian stops and becomes inactive. Inactive pedestrians are ignored by
/// sensing, costs and constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pedestrian {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    #[serde(default = "infinite")]
    pub remaining: f64,
    #[serde(default = "active_default")]
    pub active: bool,
}

fn infinite() -> f64 {
    f64::INFINITY
}

fn active_default() -> bool {
    true
}

impl Pedestrian {
    pub fn standing(x: f64, y: f64) -> Self {
        Pedestrian {
            x,
            y,
            vx: 0.0,
            vy: 0.0,
            remaining: f64::INFINITY,
            active: true,
        }
    }

    pub fn walking(x: f64, y: f64, vx: f64, vy: f64) -> Self {
        Pedestrian {
            vx,
            vy,
            ..Pedestrian::standing(x, y)
        }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }

    pub fn step(&self, dt: f64) -> Pedestrian {
        let mut p = *self;
        if !p.active {
            return p;
        }
        let speed = p.speed();
        if speed == 0.0 {
            return p;
        }
        let travel = speed * dt;
        if travel >= p.remaining {
            let f = p.remaining / speed;
            p.x += p.vx * f;
            p.y += p.vy * f;
            p.remaining = 0.0;
            p.active = false;
        } else {
            p.x += p.vx * dt;
            p.y += p.vy * dt;
            p.remaining -= travel;
        }
        p
    }
}

/// Full state of the multi-agent scene.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WorldState {
    pub robot: AgentState,
    #[serde(default)]
    pub humans: Vec<HumanAgent>,
    #[serde(default)]
    pub pedestrians: Vec<Pedestrian>,
    #[serde(default)]
    pub env: EnvironmentState,
}

impl WorldState {
    pub fn new(robot: AgentState) -> Self {
        WorldState {
            robot,
            ..Default::default()
        }
    }

    pub fn active_pedestrians(&self) -> impl Iterator<Item = &Pedestrian> {
        self.pedestrians.iter().filter(|p| p.active)
    }

    pub fn validate(&self) -> Result<()> {
        self.robot.validate()?;
        for h in &self.humans {
            h.state.validate()?;
        }
        for p in &self.pedestrians {
            if !(p.x.is_finite() && p.y.is_finite() && p.vx.is_finite() && p.vy.is_finite()) {
                return Err(Error::InvalidState(format!("non-finite pedestrian {p:?}")));
            }
        }
        Ok(())
    }
}

/// Vehicle geometry and actuation limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleParams {
    pub lf: f64,
    pub lr: f64,
    pub a_max: f64,
    pub kappa_max: f64,
    pub steer_max: f64,
    pub v_lim: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        VehicleParams {
            lf: 1.25,
            lr: 1.25,
            a_max: 4.0,
            kappa_max: 0.2,
            steer_max: 0.5,
            v_lim: 15.0,
        }
    }
}

impl VehicleParams {
    pub fn wheelbase(&self) -> f64 {
        self.lf + self.lr
    }

    /// Path curvature produced by a steering angle.
    pub fn curvature(&self, steer: f64) -> f64 {
        steer.tan() / self.wheelbase()
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("lf", self.lf),
            ("lr", self.lr),
            ("a_max", self.a_max),
            ("kappa_max", self.kappa_max),
            ("steer_max", self.steer_max),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("vehicle.{name}"), "must be positive"));
            }
        }
        if !(self.v_lim.is_finite() && self.v_lim >= 0.0) {
            return Err(Error::config("vehicle.v_lim", "must be non-negative"));
        }
        Ok(())
    }
}

/// Body shapes used for distances (circle covers) and occlusion (footprints).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyGeometry {
    pub vehicle_length: f64,
    pub vehicle_width: f64,
    pub vehicle_circles: usize,
    pub vehicle_circle_radius: f64,
    pub pedestrian_radius: f64,
}

impl Default for BodyGeometry {
    fn default() -> Self {
        BodyGeometry {
            vehicle_length: 4.5,
            vehicle_width: 1.8,
            vehicle_circles: 3,
            vehicle_circle_radius: 1.2,
            pedestrian_radius: 0.3,
        }
    }
}

impl BodyGeometry {
    /// Longitudinal offsets of the covering circles from the vehicle center.
    pub fn circle_offsets(&self) -> Vec<f64> {
        let n = self.vehicle_circles.max(1);
        if n == 1 {
            return vec![0.0];
        }
        let half = (self.vehicle_length - self.vehicle_width).max(0.0) / 2.0;
        (0..n)
            .map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn vehicle_circles(&self, s: &AgentState) -> Vec<[f64; 2]> {
        let (sin, cos) = s.heading.sin_cos();
        self.circle_offsets()
            .into_iter()
            .map(|o| [s.x + o * cos, s.y + o * sin])
            .collect()
    }

    /// Clearance between two vehicles' circle covers, floored at zero.
    pub fn vehicle_gap(&self, a: &AgentState, b: &AgentState) -> f64 {
        let cb = self.vehicle_circles(b);
        let mut best = f64::INFINITY;
        for p in self.vehicle_circles(a) {
            for q in &cb {
                best = best.min(dist(p, *q));
            }
        }
        (best - 2.0 * self.vehicle_circle_radius).max(0.0)
    }

    /// Clearance between a vehicle's circle cover and a point body of radius `radius`.
    pub fn point_gap(&self, a: &AgentState, p: [f64; 2], radius: f64) -> f64 {
        let best = self
            .vehicle_circles(a)
            .into_iter()
            .map(|c| dist(c, p))
            .fold(f64::INFINITY, f64::min);
        (best - self.vehicle_circle_radius - radius).max(0.0)
    }

    pub fn pedestrian_gap(&self, a: &AgentState, p: &Pedestrian) -> f64 {
        self.point_gap(a, p.position(), self.pedestrian_radius)
    }
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Vehicle state over a generic scalar, used to differentiate rollouts.
#[derive(Debug, Clone)]
pub(crate) struct StateT<T> {
    pub x: T,
    pub y: T,
    pub heading: T,
    pub speed: T,
}

impl StateT<f64> {
    pub fn from_state(s: &AgentState) -> Self {
        StateT {
            x: s.x,
            y: s.y,
            heading: s.heading,
            speed: s.speed,
        }
    }

    pub fn to_state(&self) -> AgentState {
        AgentState::new(self.x, self.y, self.heading, self.speed)
    }
}

fn normalize_heading<T: Real>(h: T) -> T {
    let v = h.value();
    if v > -PI && v <= PI {
        return h;
    }
    let k = ((v - PI) / (2.0 * PI)).ceil();
    let mut out = h - 2.0 * PI * k;
    if out.value() <= -PI {
        out = out + 2.0 * PI;
    } else if out.value() > PI {
        out = out - 2.0 * PI;
    }
    out
}

/// One explicit-Euler bicycle step; `accel` may carry derivatives, steering is fixed.
pub(crate) fn step_generic<T: Real>(
    s: &StateT<T>,
    accel: T,
    steer: f64,
    params: &VehicleParams,
    dt: f64,
) -> StateT<T> {
    let beta = (params.lr * steer.tan() / params.wheelbase()).atan();
    let course = s.heading.clone() + beta;
    let x = s.x.clone() + s.speed.clone() * course.cos() * dt;
    let y = s.y.clone() + s.speed.clone() * course.sin() * dt;
    let heading =
        normalize_heading(s.heading.clone() + s.speed.clone() * (beta.sin() / params.lr * dt));
    let mut speed = s.speed.clone() + accel * dt;
    if speed.value() < 0.0 {
        speed = speed.constant(0.0);
    }
    StateT {
        x,
        y,
        heading,
        speed,
    }
}

/// Advances one vehicle by `dt` seconds under a constant control.
pub fn step_bicycle(
    state: &AgentState,
    control: &Control,
    params: &VehicleParams,
    dt: f64,
) -> Result<AgentState> {
    if !state.is_finite() || !control.is_finite() {
        return Err(Error::InvalidState(format!(
            "non-finite input: {state:?}, {control:?}"
        )));
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::Domain(format!(
            "time step must be positive, got {dt}"
        )));
    }
    Ok(step_unchecked(state, control, params, dt))
}

#[inline]
pub(crate) fn step_unchecked(
    state: &AgentState,
    control: &Control,
    params: &VehicleParams,
    dt: f64,
) -> AgentState {
    step_generic(
        &StateT::from_state(state),
        control.accel,
        control.steer,
        params,
        dt,
    )
    .to_state()
}

/// Closed-loop step of the whole scene. Every agent moves independently;
/// pedestrians follow their constant-velocity model and the environment is
/// left untouched.
pub fn step_world(
    world: &WorldState,
    robot_u: &Control,
    human_us: &[Control],
    params: &VehicleParams,
    dt: f64,
) -> Result<WorldState> {
    if human_us.len() != world.humans.len() {
        return Err(Error::arity(
            "human controls",
            world.humans.len(),
            human_us.len(),
        ));
    }
    let robot = step_bicycle(&world.robot, robot_u, params, dt)?;
    let humans = world
        .humans
        .iter()
        .zip(human_us)
        .map(|(h, u)| {
            Ok(HumanAgent {
                state: step_bicycle(&h.state, u, params, dt)?,
                last_accel: u.accel,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pedestrians = world.pedestrians.iter().map(|p| p.step(dt)).collect();
    Ok(WorldState {
        robot,
        humans,
        pedestrians,
        env: world.env.clone(),
    })
}

/// Rolls `seq` forward from `state`, returning the `N + 1` visited states.
pub fn rollout(
    state: &AgentState,
    seq: &ControlSequence,
    params: &VehicleParams,
    dt: f64,
) -> Result<Trajectory> {
    if seq.is_empty() {
        return Err(Error::Domain(
            "cannot roll out an empty control sequence".into(),
        ));
    }
    let mut states = Vec::with_capacity(seq.len() + 1);
    states.push(*state);
    let mut cur = *state;
    for u in seq.controls() {
        cur = step_bicycle(&cur, u, params, dt)?;
        states.push(cur);
    }
    Ok(Trajectory(states))
}

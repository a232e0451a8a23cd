//! Inference of occluded states and social variables from human actions.
//!
//! Humans are modeled as noisily optimal: the probability of an action decays
//! exponentially with its optimal cost-to-go `Q*`, normalized over a finite
//! action lattice.

use serde::{Deserialize, Serialize};

use crate::costs::{human_cost_at, Exogenous, FeatureConfig, SocialInfo, Weights, HUMAN_FEATURES};
use crate::error::{Error, Result};
use crate::world::{
    step_unchecked, AgentState, Control, ControlSequence, Pedestrian, VehicleParams, WorldState,
};

pub use crate::perception::select_informative_humans;

/// Floor applied to every belief component after an update.
pub const BELIEF_FLOOR: f64 = 1e-9;

/// A probability vector over a finite hypothesis set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Belief {
    probs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Belief {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Belief::new(v)
    }
}

impl From<Belief> for Vec<f64> {
    fn from(b: Belief) -> Self {
        b.probs
    }
}

impl Belief {
    /// Accepts components in `[0, 1]` summing to one within 1e-9.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Domain(
                "belief must have at least one component".into(),
            ));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
            return Err(Error::Domain(format!(
                "belief components outside [0, 1]: {probs:?}"
            )));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("belief sums to {s}")));
        }
        Ok(Belief { probs })
    }

    pub fn uniform(n: usize) -> Self {
        Belief {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn one_hot(n: usize, i: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[i] = 1.0;
        Belief { probs }
    }

    /// Normalizes non-negative weights; `None` if they sum to zero.
    pub fn from_weights(w: &[f64]) -> Option<Self> {
        let s: f64 = w.iter().sum();
        if !(s > 0.0 && s.is_finite()) {
            return None;
        }
        Some(Belief {
            probs: w.iter().map(|x| x / s).collect(),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Index of the largest component; the first one wins ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    /// Floors every component at `floor` and renormalizes.
    pub fn floored(&self, floor: f64) -> Belief {
        let w: Vec<f64> = self.probs.iter().map(|p| p.max(floor)).collect();
        Belief::from_weights(&w).unwrap_or_else(|| self.clone())
    }
}

/// One candidate completion of the occluded part of the scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub label: String,
    #[serde(default)]
    pub pedestrians: Vec<Pedestrian>,
}

impl Hypothesis {
    /// Concrete world: observed agents with this hypothesis's pedestrians.
    pub fn fuse(&self, observed: &WorldState) -> WorldState {
        WorldState {
            pedestrians: self.pedestrians.clone(),
            ..observed.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HypothesisSet(pub Vec<Hypothesis>);

impl HypothesisSet {
    pub fn new(h: Vec<Hypothesis>) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::config(
                "hypotheses",
                "at least one hypothesis is required",
            ));
        }
        Ok(HypothesisSet(h))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.0.iter().map(|h| h.label.as_str()).collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.0.iter().position(|h| h.label == label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialHypothesis {
    pub label: String,
    pub info: SocialInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SocialHypothesisSet(pub Vec<SocialHypothesis>);

impl SocialHypothesisSet {
    pub fn new(h: Vec<SocialHypothesis>, v_lim: f64) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::config(
                "social_hypotheses",
                "at least one candidate is required",
            ));
        }
        for s in &h {
            s.info.validate(v_lim)?;
        }
        Ok(SocialHypothesisSet(h))
    }

    /// Candidates `v_traffic ∈ speeds`, labelled by value.
    pub fn traffic_speeds(speeds: &[f64]) -> Self {
        SocialHypothesisSet(
            speeds
                .iter()
                .map(|&v| SocialHypothesis {
                    label: format!("v_traffic={v}"),
                    info: SocialInfo::with_traffic_speed(v),
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Candidate longitudinal accelerations; steering stays on the lane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ActionLattice {
    accels: Vec<f64>,
}

impl TryFrom<Vec<f64>> for ActionLattice {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ActionLattice::new(v)
    }
}

impl From<ActionLattice> for Vec<f64> {
    fn from(l: ActionLattice) -> Self {
        l.accels
    }
}

impl Default for ActionLattice {
    fn default() -> Self {
        ActionLattice {
            accels: vec![-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0],
        }
    }
}

fn tie_key(a: f64) -> (f64, f64) {
    (a.abs(), a)
}

impl ActionLattice {
    pub fn new(accels: Vec<f64>) -> Result<Self> {
        if accels.is_empty() {
            return Err(Error::config("lattice", "action lattice is empty"));
        }
        if accels.iter().any(|a| !a.is_finite()) {
            return Err(Error::config("lattice", "non-finite lattice action"));
        }
        Ok(ActionLattice { accels })
    }

    pub fn accels(&self) -> &[f64] {
        &self.accels
    }

    pub fn len(&self) -> usize {
        self.accels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accels.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.accels.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn check_bounds(&self, a_max: f64) -> Result<()> {
        if self.accels.iter().any(|a| a.abs() > a_max) {
            return Err(Error::config(
                "lattice",
                format!("action outside |a| <= {a_max}"),
            ));
        }
        Ok(())
    }

    /// Index of the nearest lattice action; ties go to the smaller |a|, then smaller a.
    pub fn snap(&self, accel: f64) -> usize {
        let mut best = 0;
        for (i, &a) in self.accels.iter().enumerate() {
            let (d, db) = ((a - accel).abs(), (self.accels[best] - accel).abs());
            if d < db || (d == db && tie_key(a) < tie_key(self.accels[best])) {
                best = i;
            }
        }
        best
    }

    pub fn index_of(&self, accel: f64) -> Option<usize> {
        self.accels.iter().position(|&a| a == accel)
    }

    /// Lattice indices in tie-break order.
    fn tie_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&i, &j| {
            let (a, b) = (tie_key(self.accels[i]), tie_key(self.accels[j]));
            a.0.total_cmp(&b.0)
                .then(a.1.total_cmp(&b.1))
                .then(i.cmp(&j))
        });
        idx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalityParams {
    pub beta: f64,
    pub horizon: usize,
}

impl Default for RationalityParams {
    fn default() -> Self {
        RationalityParams {
            beta: 1.0,
            horizon: 4,
        }
    }
}

impl RationalityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::config(
                "inference.beta",
                "must be finite and non-negative",
            ));
        }
        if self.horizon == 0 {
            return Err(Error::config("inference.horizon", "must be at least 1"));
        }
        Ok(())
    }
}

/// Everything that defines the human decision model.
#[derive(Debug, Clone, PartialEq)]
pub struct HumanModel {
    pub theta: Weights,
    pub lattice: ActionLattice,
    pub rationality: RationalityParams,
    pub vehicle: VehicleParams,
    pub features: FeatureConfig,
    pub dt: f64,
}

impl HumanModel {
    pub fn validate(&self) -> Result<()> {
        if self.theta.len() != HUMAN_FEATURES.len() {
            return Err(Error::arity(
                "human weights",
                HUMAN_FEATURES.len(),
                self.theta.len(),
            ));
        }
        if !self.theta.is_finite() {
            return Err(Error::config("inference.theta_h", "non-finite weight"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config("inference.dt", "must be positive"));
        }
        self.rationality.validate()
    }
}

struct Search<'a> {
    exo: Exogenous,
    info: &'a SocialInfo,
    model: &'a HumanModel,
    order: Vec<usize>,
    n: usize,
}

impl Search<'_> {
    fn new<'a>(
        world: &WorldState,
        info: &'a SocialInfo,
        u_r_plan: &ControlSequence,
        model: &'a HumanModel,
    ) -> Search<'a> {
        let n = model.rationality.horizon;
        Search {
            exo: Exogenous::new(world, u_r_plan, n, &model.vehicle, model.dt),
            info,
            model,
            order: model.lattice.tie_order(),
            n,
        }
    }

    fn cost(&self, k: usize, s: &AgentState, a: f64, prev: f64) -> f64 {
        let m = self.model;
        human_cost_at(
            &self.exo,
            k,
            s,
            a,
            prev,
            self.info,
            m.theta.values(),
            &m.features,
        )
    }

    fn step(&self, s: &AgentState, a: f64) -> AgentState {
        step_unchecked(s, &Control::accel(a), &self.model.vehicle, self.model.dt)
    }

    /// Minimum full-horizon cost below a node at depth `k`.
    fn min_tail(&self, k: usize, s: &AgentState, prev: f64, prefix: f64) -> f64 {
        if k == self.n {
            return prefix;
        }
        let mut best = f64::INFINITY;
        for &i in &self.order {
            let a = self.model.lattice.accels[i];
            let total = prefix + self.cost(k, s, a, prev);
            let v = if k + 1 == self.n {
                total
            } else {
                self.min_tail(k + 1, &self.step(s, a), a, total)
            };
            if v < best {
                best = v;
            }
        }
        best
    }

    /// Argmin sequence below depth `k`; the first minimum in tie-break order wins.
    fn argmin_tail(
        &self,
        k: usize,
        s: &AgentState,
        prev: f64,
        prefix: f64,
        path: &mut Vec<f64>,
    ) -> (f64, Vec<f64>) {
        if k == self.n {
            return (prefix, path.clone());
        }
        let mut best = (f64::INFINITY, Vec::new());
        for &i in &self.order {
            let a = self.model.lattice.accels[i];
            let total = prefix + self.cost(k, s, a, prev);
            path.push(a);
            let cand = self.argmin_tail(k + 1, &self.step(s, a), a, total, path);
            path.pop();
            if cand.0 < best.0 {
                best = cand;
            }
        }
        best
    }

    fn q(&self, s: &AgentState, prev: f64, a0: f64) -> f64 {
        let c0 = 0.0 + self.cost(0, s, a0, prev);
        if self.n == 1 {
            c0
        } else {
            self.min_tail(1, &self.step(s, a0), a0, c0)
        }
    }
}

fn human_of(world: &WorldState, human: usize) -> Result<(AgentState, f64)> {
    world
        .humans
        .get(human)
        .map(|h| (h.state, h.last_accel))
        .ok_or_else(|| Error::Lookup(format!("human {human}")))
}

/// Optimal cost-to-go of first action `u0` for human `human`: its step cost plus
/// the best achievable remaining cost over all lattice tails.
pub fn q_star(
    world: &WorldState,
    info: &SocialInfo,
    human: usize,
    u0: &Control,
    u_r_plan: &ControlSequence,
    model: &HumanModel,
) -> Result<f64> {
    let (s, prev) = human_of(world, human)?;
    if model.lattice.index_of(u0.accel).is_none() {
        return Err(Error::Domain(format!(
            "action {} is not on the lattice",
            u0.accel
        )));
    }
    Ok(Search::new(world, info, u_r_plan, model).q(&s, prev, u0.accel))
}

/// `Q*` for every lattice action, in lattice order.
pub fn q_values(
    world: &WorldState,
    info: &SocialInfo,
    human: usize,
    u_r_plan: &ControlSequence,
    model: &HumanModel,
) -> Result<Vec<f64>> {
    let (s, prev) = human_of(world, human)?;
    let search = Search::new(world, info, u_r_plan, model);
    Ok(model
        .lattice
        .accels
        .iter()
        .map(|&a| search.q(&s, prev, a))
        .collect())
}

/// Boltzmann distribution `exp(−β q) / Σ exp(−β q')`, shifted by the minimum `q`.
pub fn softmax(q: &[f64], beta: f64) -> Vec<f64> {
    let qmin = q.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = q.iter().map(|&x| (-beta * (x - qmin)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Distribution over lattice actions for human `human` in `world`.
pub fn action_distribution(
    world: &WorldState,
    info: &SocialInfo,
    human: usize,
    u_r_plan: &ControlSequence,
    model: &HumanModel,
) -> Result<Vec<f64>> {
    Ok(softmax(
        &q_values(world, info, human, u_r_plan, model)?,
        model.rationality.beta,
    ))
}

/// Probability of lattice action `u` under the Boltzmann model.
pub fn action_likelihood(
    u: &Control,
    world: &WorldState,
    info: &SocialInfo,
    human: usize,
    u_r_plan: &ControlSequence,
    model: &HumanModel,
) -> Result<f64> {
    let i = model
        .lattice
        .index_of(u.accel)
        .ok_or_else(|| Error::Domain(format!("action {} is not on the lattice", u.accel)))?;
    Ok(action_distribution(world, info, human, u_r_plan, model)?[i])
}

/// Argmin lattice sequence of the human's cost over the inference horizon.
pub fn human_best_response(
    world: &WorldState,
    info: &SocialInfo,
    human: usize,
    u_r_plan: &ControlSequence,
    model: &HumanModel,
) -> Result<ControlSequence> {
    let (s, prev) = human_of(world, human)?;
    let search = Search::new(world, info, u_r_plan, model);
    let (_, seq) = search.argmin_tail(0, &s, prev, 0.0, &mut Vec::with_capacity(search.n));
    Ok(ControlSequence::from_accels(&seq))
}

/// Posterior together with the degenerate-evidence flag.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefUpdate {
    pub belief: Belief,
    /// Set when every hypothesis assigned zero probability to the evidence.
    pub degenerate: bool,
}

/// An observed human action, snapped onto the lattice before use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservedAction {
    pub human: usize,
    pub control: Control,
}

fn bayes(prior: &Belief, likelihoods: impl Fn(usize) -> Result<f64>) -> Result<BeliefUpdate> {
    let mut post = Vec::with_capacity(prior.len());
    for (l, p) in prior.probs().iter().enumerate() {
        post.push(p * likelihoods(l)?);
    }
    match Belief::from_weights(&post) {
        Some(b) => Ok(BeliefUpdate {
            belief: b.floored(BELIEF_FLOOR),
            degenerate: false,
        }),
        None => Ok(BeliefUpdate {
            belief: prior.clone(),
            degenerate: true,
        }),
    }
}

fn snapped_likelihood(
    obs: &ObservedAction,
    world: &WorldState,
    info: &SocialInfo,
    u_r_plan: &ControlSequence,
    model: &HumanModel,
) -> Result<f64> {
    let i = model.lattice.snap(obs.control.accel);
    Ok(action_distribution(world, info, obs.human, u_r_plan, model)?[i])
}

fn check_belief(belief: &Belief, n: usize) -> Result<()> {
    if belief.len() != n {
        return Err(Error::Domain(format!(
            "belief has {} components for {n} hypotheses",
            belief.len()
        )));
    }
    Belief::new(belief.probs().to_vec()).map(|_| ())
}

/// Bayes update over state hypotheses from the actions of the observed humans.
///
/// `observed` is the world as sensed (its pedestrians are replaced by each
/// hypothesis). With several humans the likelihoods multiply.
pub fn update_state_belief(
    belief: &Belief,
    hyps: &HypothesisSet,
    observed: &WorldState,
    info: &SocialInfo,
    actions: &[ObservedAction],
    u_r_plan: &ControlSequence,
    model: &HumanModel,
) -> Result<BeliefUpdate> {
    check_belief(belief, hyps.len())?;
    bayes(belief, |l| {
        let world = hyps.0[l].fuse(observed);
        let mut lik = 1.0;
        for a in actions {
            lik *= snapped_likelihood(a, &world, info, u_r_plan, model)?;
        }
        Ok(lik)
    })
}

/// Bayes update over social hypotheses from the joint behavior of all humans.
pub fn update_social_belief(
    belief: &Belief,
    shyps: &SocialHypothesisSet,
    world: &WorldState,
    actions: &[ObservedAction],
    u_r_plan: &ControlSequence,
    model: &HumanModel,
) -> Result<BeliefUpdate> {
    check_belief(belief, shyps.len())?;
    if actions.is_empty() {
        return Err(Error::Domain(
            "social update needs at least one observed action".into(),
        ));
    }
    bayes(belief, |m| {
        let info = &shyps.0[m].info;
        let mut lik = 1.0;
        for a in actions {
            lik *= snapped_likelihood(a, world, info, u_r_plan, model)?;
        }
        Ok(lik)
    })
}

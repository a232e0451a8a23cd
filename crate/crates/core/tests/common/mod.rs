//! Shared fixtures and brute-force oracles for the integration suites.
//!
//! The oracles only use the public single-trajectory cost API and plain
//! enumeration, so they are independent of the search code under test.
#![allow(dead_code)]

pub mod bayes;
pub mod planning;

use occlusim::costs::{cumulative_cost, FeatureConfig, SocialInfo, Weights};
use occlusim::inference::{ActionLattice, HumanModel, RationalityParams};
use occlusim::irl::Demonstration;
use occlusim::world::{
    AgentState, ControlSequence, HumanAgent, Pedestrian, VehicleParams, WorldState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const THETA_TRUE: [f64; 5] = [1.0, 0.5, 0.1, 2.0, 0.3];

pub fn human_model(
    theta: &[f64],
    lattice: &[f64],
    horizon: usize,
    beta: f64,
    dt: f64,
) -> HumanModel {
    HumanModel {
        theta: Weights(theta.to_vec()),
        lattice: ActionLattice::new(lattice.to_vec()).unwrap(),
        rationality: RationalityParams { beta, horizon },
        vehicle: VehicleParams::default(),
        features: FeatureConfig::default(),
        dt,
    }
}

/// Every sequence of length `n` over `lattice`, in odometer order.
pub fn all_sequences(lattice: &[f64], n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|s| {
                lattice.iter().map(move |&a| {
                    let mut t = s.clone();
                    t.push(a);
                    t
                })
            })
            .collect();
    }
    out
}

/// Cost of one full human sequence under `model`, via the public trajectory cost.
pub fn sequence_cost(
    world: &WorldState,
    info: &SocialInfo,
    human: usize,
    u_h: &[f64],
    u_r: &ControlSequence,
    model: &HumanModel,
) -> f64 {
    let n = u_h.len();
    let u_r: Vec<f64> = (0..n).map(|k| u_r.at_or_last(k).accel).collect();
    cumulative_cost(
        world,
        human,
        info,
        &ControlSequence::from_accels(&u_r),
        &ControlSequence::from_accels(u_h),
        &model.theta,
        &model.vehicle,
        model.dt,
        &model.features,
    )
    .unwrap()
}

/// `Q*(u0)` by enumerating every tail.
pub fn oracle_q(
    world: &WorldState,
    info: &SocialInfo,
    human: usize,
    u0: f64,
    u_r: &ControlSequence,
    model: &HumanModel,
) -> f64 {
    let n = model.rationality.horizon;
    all_sequences(model.lattice.accels(), n - 1)
        .into_iter()
        .map(|tail| {
            let mut seq = vec![u0];
            seq.extend(tail);
            sequence_cost(world, info, human, &seq, u_r, model)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Boltzmann action probabilities from enumerated `Q*`, normalized with log-sum-exp.
pub fn oracle_likelihoods(
    world: &WorldState,
    info: &SocialInfo,
    human: usize,
    u_r: &ControlSequence,
    model: &HumanModel,
) -> Vec<f64> {
    let beta = model.rationality.beta;
    let logits: Vec<f64> = model
        .lattice
        .accels()
        .iter()
        .map(|&a| -beta * oracle_q(world, info, human, a, u_r, model))
        .collect();
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
    logits.iter().map(|l| (l - lse).exp()).collect()
}

/// Prior times likelihood, normalized, then floored at 1e-9 and renormalized.
pub fn oracle_posterior(prior: &[f64], likelihood: &[f64]) -> Vec<f64> {
    let w: Vec<f64> = prior.iter().zip(likelihood).map(|(p, l)| p * l).collect();
    let z: f64 = w.iter().sum();
    let post: Vec<f64> = w.iter().map(|x| (x / z).max(1e-9)).collect();
    let z: f64 = post.iter().sum();
    post.iter().map(|x| x / z).collect()
}

fn tie_key(a: f64) -> (f64, f64) {
    (a.abs(), a)
}

fn tie_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        let (kx, ky) = (tie_key(*x), tie_key(*y));
        match kx.0.total_cmp(&ky.0).then(kx.1.total_cmp(&ky.1)) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// Minimum-cost sequence over the whole lattice; ties go to the sequence that is
/// lexicographically smallest under the key `(|a|, a)`.
pub fn oracle_argmin(
    world: &WorldState,
    info: &SocialInfo,
    human: usize,
    u_r: &ControlSequence,
    model: &HumanModel,
) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for seq in all_sequences(model.lattice.accels(), model.rationality.horizon) {
        let c = sequence_cost(world, info, human, &seq, u_r, model);
        let better = match &best {
            None => true,
            Some((bc, bs)) => c < *bc || (c == *bc && tie_less(&seq, bs)),
        };
        if better {
            best = Some((c, seq));
        }
    }
    best.unwrap().1
}

/// A one-human scene: the human drives in the far lane, the robot in the near
/// lane, optionally with a pedestrian crossing ahead of the human.
pub fn random_human_scene(rng: &mut ChaCha8Rng) -> (WorldState, SocialInfo, ControlSequence) {
    let robot = AgentState::new(
        rng.random_range(-15.0..5.0),
        0.0,
        0.0,
        rng.random_range(4.0..11.0),
    );
    let mut w = WorldState::new(robot);
    let mut h = HumanAgent::new(AgentState::new(0.0, 3.5, 0.0, rng.random_range(3.0..12.0)));
    h.last_accel = rng.random_range(-2.0..2.0);
    w.humans.push(h);
    if rng.random_bool(0.6) {
        let walker = Pedestrian::walking(
            rng.random_range(6.0..25.0),
            rng.random_range(4.0..8.0),
            0.0,
            -rng.random_range(0.5..2.0),
        );
        w.pedestrians.push(Pedestrian {
            remaining: rng.random_range(5.0..12.0),
            ..walker
        });
    }
    let info = SocialInfo::with_traffic_speed(rng.random_range(5.0..11.0));
    let u_r: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
    (w, info, ControlSequence::from_accels(&u_r))
}

/// Demonstrations that are exact lattice argmins of the cost under `theta`.
pub fn synthetic_demos(
    theta: &[f64],
    count: usize,
    horizon: usize,
    seed: u64,
) -> Vec<Demonstration> {
    let lattice = ActionLattice::default();
    let model = human_model(theta, lattice.accels(), horizon, 1.0, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let (w, info, u_r) = random_human_scene(&mut rng);
            let u_r = ControlSequence::from_accels(
                &(0..horizon)
                    .map(|k| u_r.at_or_last(k).accel)
                    .collect::<Vec<_>>(),
            );
            let u_h = oracle_argmin(&w, &info, 0, &u_r, &model);
            Demonstration {
                x0: w,
                info,
                u_r,
                u_h: ControlSequence::from_accels(&u_h),
                dt: model.dt,
                human: 0,
            }
        })
        .collect()
}

/// Arbitrary (usually non-optimal) human controls in a random one-human scene.
pub fn random_demo(r: &mut ChaCha8Rng, n: usize) -> Demonstration {
    let (x0, info, _) = random_human_scene(r);
    let u_h: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..2.0)).collect();
    let u_r: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
    Demonstration {
        x0,
        info,
        u_r: ControlSequence::from_accels(&u_r),
        u_h: ControlSequence::from_accels(&u_h),
        dt: 0.5,
        human: 0,
    }
}

pub fn random_theta(r: &mut ChaCha8Rng) -> Weights {
    Weights((0..5).map(|_| r.random_range(0.3..3.0)).collect())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

//! Randomized inputs and the snapping rule for the Bayes-oracle comparisons.

use occlusim::inference::{Belief, Hypothesis, HypothesisSet};
use occlusim::world::{AgentState, HumanAgent, Pedestrian, WorldState};
use rand::Rng;

pub const FULL: [f64; 7] = [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0];

pub fn oracle_snap(lattice: &[f64], a: f64) -> usize {
    let key = |i: usize| ((lattice[i] - a).abs(), lattice[i].abs(), lattice[i]);
    (0..lattice.len())
        .min_by(|&i, &j| {
            let (x, y) = (key(i), key(j));
            x.0.total_cmp(&y.0)
                .then(x.1.total_cmp(&y.1))
                .then(x.2.total_cmp(&y.2))
        })
        .unwrap()
}

/// A sorted, non-empty subset of the full lattice drawn from a bitmask.
pub fn lattice_from_mask(mask: u8) -> Vec<f64> {
    let l: Vec<f64> = FULL
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, &a)| a)
        .collect();
    if l.len() < 2 {
        vec![-2.0, 0.0]
    } else {
        l
    }
}

pub fn random_prior(r: &mut impl Rng, n: usize) -> Belief {
    let w: Vec<f64> = (0..n).map(|_| r.random_range(0.05..1.0)).collect();
    Belief::from_weights(&w).unwrap()
}

pub fn random_hypotheses(r: &mut impl Rng, n: usize) -> HypothesisSet {
    HypothesisSet::new(
        (0..n)
            .map(|l| {
                let pedestrians = if l == 0 {
                    Vec::new()
                } else {
                    let walker = Pedestrian::walking(
                        r.random_range(5.0..25.0),
                        r.random_range(3.0..8.0),
                        0.0,
                        -1.2,
                    );
                    vec![Pedestrian {
                        remaining: r.random_range(3.0..10.0),
                        ..walker
                    }]
                };
                Hypothesis {
                    label: format!("h{l}"),
                    pedestrians,
                }
            })
            .collect(),
    )
    .unwrap()
}

/// Extra humans behind and ahead of the first one, all in the far lane.
pub fn add_humans(r: &mut impl Rng, w: &mut WorldState, extra: usize) {
    for k in 0..extra {
        let mut h = HumanAgent::new(AgentState::new(
            -12.0 * (k as f64 + 1.0) + r.random_range(-2.0..2.0),
            3.5,
            0.0,
            r.random_range(4.0..11.0),
        ));
        h.last_accel = r.random_range(-1.0..1.0);
        w.humans.push(h);
    }
}

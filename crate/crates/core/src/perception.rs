//! Line-of-sight occlusion geometry and per-agent observations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::{dist, AgentState, BodyGeometry, WorldState};

const EPS: f64 = 1e-9;

/// A simple counter-clockwise polygon that blocks line of sight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct Occluder {
    vertices: Vec<[f64; 2]>,
}

impl TryFrom<Vec<[f64; 2]>> for Occluder {
    type Error = Error;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        Occluder::new(v)
    }
}

impl From<Occluder> for Vec<[f64; 2]> {
    fn from(o: Occluder) -> Self {
        o.vertices
    }
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    (0..n).map(|i| cross(v[i], v[(i + 1) % n])).sum::<f64>() / 2.0
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let o1 = cross(sub(b, a), sub(c, a));
    let o2 = cross(sub(b, a), sub(d, a));
    let o3 = cross(sub(d, c), sub(a, c));
    let o4 = cross(sub(d, c), sub(b, c));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

impl Occluder {
    /// Validates and stores a polygon; clockwise input is reversed.
    pub fn new(mut vertices: Vec<[f64; 2]>) -> Result<Self> {
        let path = "map.occluders";
        if vertices.len() < 3 {
            return Err(Error::config(
                path,
                format!("polygon needs at least 3 vertices, got {}", vertices.len()),
            ));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::config(path, "non-finite polygon vertex"));
        }
        let area = signed_area(&vertices);
        if area.abs() < EPS {
            return Err(Error::config(path, "polygon has zero area"));
        }
        let n = vertices.len();
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                if segments_cross(
                    vertices[i],
                    vertices[(i + 1) % n],
                    vertices[j],
                    vertices[(j + 1) % n],
                ) {
                    return Err(Error::config(path, "polygon is self-intersecting"));
                }
            }
        }
        if area < 0.0 {
            vertices.reverse();
        }
        Ok(Occluder { vertices })
    }

    /// Rectangle of `length × width` centered at `center`, rotated by `heading`.
    pub fn rectangle(center: [f64; 2], heading: f64, length: f64, width: f64) -> Occluder {
        let (s, c) = heading.sin_cos();
        let (hl, hw) = (length / 2.0, width / 2.0);
        let vertices = [(hl, -hw), (hl, hw), (-hl, hw), (-hl, -hw)]
            .iter()
            .map(|&(a, b)| [center[0] + a * c - b * s, center[1] + a * s + b * c])
            .collect();
        Occluder { vertices }
    }

    pub fn footprint(state: &AgentState, geom: &BodyGeometry) -> Occluder {
        Occluder::rectangle(
            state.position(),
            state.heading,
            geom.vehicle_length,
            geom.vehicle_width,
        )
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    fn edges(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Strict interior test; points within `EPS` of the boundary are outside.
    pub fn contains_strictly(&self, p: [f64; 2]) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if crate::costs::point_segment_distance(p, a, b) <= EPS {
                return false;
            }
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Whether the open segment `a → b` passes through the polygon interior.
    pub fn blocks(&self, a: [f64; 2], b: [f64; 2]) -> bool {
        let d = sub(b, a);
        let mut ts = vec![0.0, 1.0];
        for (p, q) in self.edges() {
            let e = sub(q, p);
            let denom = cross(d, e);
            let ap = sub(p, a);
            if denom.abs() > 1e-15 {
                let t = cross(ap, e) / denom;
                let s = cross(ap, d) / denom;
                if (-EPS..=1.0 + EPS).contains(&s) && t > 0.0 && t < 1.0 {
                    ts.push(t);
                }
            } else if cross(ap, d).abs() < 1e-15 {
                let dd = d[0] * d[0] + d[1] * d[1];
                for v in [p, q] {
                    let t = (sub(v, a)[0] * d[0] + sub(v, a)[1] * d[1]) / dd;
                    if t > 0.0 && t < 1.0 {
                        ts.push(t);
                    }
                }
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.windows(2).any(|w| {
            if w[1] - w[0] <= 0.0 {
                return false;
            }
            let m = (w[0] + w[1]) / 2.0;
            self.contains_strictly([a[0] + m * d[0], a[1] + m * d[1]])
        })
    }
}

/// True iff `target` is within `range` of `sensor` and no occluder interior
/// lies on the segment between them.
pub fn is_visible(
    sensor: [f64; 2],
    target: [f64; 2],
    occluders: &[Occluder],
    range: f64,
) -> Result<bool> {
    if range.is_nan() || range <= 0.0 {
        return Err(Error::Domain(format!(
            "sensor range must be positive, got {range}"
        )));
    }
    Ok(visible_unchecked(sensor, target, occluders, range))
}

fn visible_unchecked(
    sensor: [f64; 2],
    target: [f64; 2],
    occluders: &[Occluder],
    range: f64,
) -> bool {
    let d = dist(sensor, target);
    if d > range {
        return false;
    }
    if d == 0.0 {
        return true;
    }
    !occluders.iter().any(|o| o.blocks(sensor, target))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentId {
    Robot,
    Human(usize),
    Pedestrian(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Visible,
    Occluded,
    OutOfRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedAgent {
    pub id: AgentId,
    pub state: AgentState,
}

/// What one agent's sensors report at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub observer: AgentId,
    pub visible: Vec<ObservedAgent>,
    pub queries: Vec<Verdict>,
}

impl Observation {
    pub fn sees(&self, id: AgentId) -> bool {
        self.visible.iter().any(|a| a.id == id)
    }
}

/// Static occluders plus every vehicle footprint except the excluded agents.
fn scene_occluders(
    world: &WorldState,
    statics: &[Occluder],
    exclude: &[AgentId],
    geom: &BodyGeometry,
) -> Vec<Occluder> {
    let mut out = statics.to_vec();
    if !exclude.contains(&AgentId::Robot) {
        out.push(Occluder::footprint(&world.robot, geom));
    }
    for (i, h) in world.humans.iter().enumerate() {
        if !exclude.contains(&AgentId::Human(i)) {
            out.push(Occluder::footprint(&h.state, geom));
        }
    }
    out
}

fn agent_position(world: &WorldState, id: AgentId) -> Result<[f64; 2]> {
    match id {
        AgentId::Robot => Ok(world.robot.position()),
        AgentId::Human(i) => world
            .humans
            .get(i)
            .map(|h| h.state.position())
            .ok_or_else(|| Error::Lookup(format!("human {i}"))),
        AgentId::Pedestrian(i) => world
            .pedestrians
            .get(i)
            .map(|p| p.position())
            .ok_or_else(|| Error::Lookup(format!("pedestrian {i}"))),
    }
}

fn verdict(sensor: [f64; 2], target: [f64; 2], occ: &[Occluder], range: f64) -> Verdict {
    if dist(sensor, target) > range {
        Verdict::OutOfRange
    } else if visible_unchecked(sensor, target, occ, range) {
        Verdict::Visible
    } else {
        Verdict::Occluded
    }
}

/// Runs the visibility test from `observer` to every other agent and to each
/// query point. Vehicles occlude with their footprints; the observer's and the
/// target's own bodies are ignored. Inactive pedestrians are never observed.
pub fn observe(
    world: &WorldState,
    observer: AgentId,
    statics: &[Occluder],
    queries: &[[f64; 2]],
    range: f64,
    geom: &BodyGeometry,
) -> Result<Observation> {
    if range.is_nan() || range <= 0.0 {
        return Err(Error::Domain(format!(
            "sensor range must be positive, got {range}"
        )));
    }
    let sensor = agent_position(world, observer)?;
    let mut visible = Vec::new();

    let mut vehicles = vec![(AgentId::Robot, world.robot)];
    vehicles.extend(
        world
            .humans
            .iter()
            .enumerate()
            .map(|(i, h)| (AgentId::Human(i), h.state)),
    );
    for (id, state) in vehicles {
        if id == observer {
            continue;
        }
        let occ = scene_occluders(world, statics, &[observer, id], geom);
        if visible_unchecked(sensor, state.position(), &occ, range) {
            visible.push(ObservedAgent { id, state });
        }
    }

    let occ = scene_occluders(world, statics, &[observer], geom);
    for (i, p) in world.pedestrians.iter().enumerate() {
        let id = AgentId::Pedestrian(i);
        if id == observer || !p.active {
            continue;
        }
        if visible_unchecked(sensor, p.position(), &occ, range) {
            let state = AgentState::new(p.x, p.y, p.vy.atan2(p.vx), p.speed());
            visible.push(ObservedAgent { id, state });
        }
    }

    let queries = queries
        .iter()
        .map(|q| verdict(sensor, *q, &occ, range))
        .collect();
    Ok(Observation {
        observer,
        visible,
        queries,
    })
}

/// Humans within `radius` of the robot that can see at least one point of `region`.
pub fn select_informative_humans(
    world: &WorldState,
    region: &[[f64; 2]],
    statics: &[Occluder],
    range: f64,
    radius: f64,
    geom: &BodyGeometry,
) -> Vec<usize> {
    let robot = world.robot.position();
    (0..world.humans.len())
        .filter(|&i| {
            let pos = world.humans[i].state.position();
            if dist(pos, robot) > radius {
                return false;
            }
            let occ = scene_occluders(world, statics, &[AgentId::Human(i)], geom);
            region
                .iter()
                .any(|q| visible_unchecked(pos, *q, &occ, range))
        })
        .collect()
}

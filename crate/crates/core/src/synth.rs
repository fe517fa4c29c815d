//! Seeded traffic simulator: kinematic ground truth along lane polylines and
//! a detector noise model (misses, jitter, duplicates, class flips,
//! occlusion, false positives, appearance embeddings).
//!
//! Randomness comes from ChaCha8 seeded with the run seed, with one stream
//! per frame, so any frame can be regenerated independently.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::counting::{CountReport, Direction, Zone};
use crate::error::SynthError;
use crate::geometry::{iou, point_in_polygon, Point, Polygon};
use crate::model::{BoundingBox, Detection, Frame, Track, VehicleClass, EMBEDDING_DIM};

/// Box `[width, height]` per class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeTable {
    pub car: [f64; 2],
    pub truck: [f64; 2],
}

impl Default for SizeTable {
    fn default() -> Self {
        Self {
            car: [40.0, 60.0],
            truck: [50.0, 100.0],
        }
    }
}

impl SizeTable {
    pub fn get(&self, class: VehicleClass) -> [f64; 2] {
        match class {
            VehicleClass::Car => self.car,
            VehicleClass::Truck => self.truck,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lane {
    pub name: String,
    pub direction: Direction,
    pub path: Vec<Point>,
}

impl Lane {
    pub fn length(&self) -> f64 {
        self.path
            .windows(2)
            .map(|w| (w[1].x - w[0].x).hypot(w[1].y - w[0].y))
            .sum()
    }

    /// Point at arc length `s` from the start, `None` past the end.
    pub fn point_at(&self, s: f64) -> Option<Point> {
        if s < 0.0 {
            return None;
        }
        let mut rest = s;
        for w in self.path.windows(2) {
            let len = (w[1].x - w[0].x).hypot(w[1].y - w[0].y);
            if rest <= len {
                let t = rest / len;
                return Some(Point::new(
                    w[0].x + t * (w[1].x - w[0].x),
                    w[0].y + t * (w[1].y - w[0].y),
                ));
            }
            rest -= len;
        }
        None
    }
}

/// Stop at arc length `at` for `frames` frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dwell {
    pub at: f64,
    pub frames: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spawn {
    pub frame: u64,
    pub lane: String,
    pub class: VehicleClass,
    /// Pixels per frame along the lane.
    pub speed: f64,
    /// Overrides the class size table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dwell: Option<Dwell>,
}

impl Spawn {
    /// Arc length travelled `elapsed` frames after spawning.
    fn arc_length(&self, elapsed: f64) -> f64 {
        let moving = match self.dwell {
            None => elapsed,
            Some(d) => {
                let reach = d.at / self.speed;
                if elapsed <= reach {
                    elapsed
                } else if elapsed <= reach + d.frames as f64 {
                    reach
                } else {
                    elapsed - d.frames as f64
                }
            }
        };
        self.speed * moving
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub width: f64,
    pub height: f64,
    pub duration: u64,
    #[serde(default)]
    pub sizes: SizeTable,
    pub lanes: Vec<Lane>,
    pub spawns: Vec<Spawn>,
}

impl Scenario {
    pub fn lane(&self, name: &str) -> Option<&Lane> {
        self.lanes.iter().find(|l| l.name == name)
    }

    /// Checks the scenario on its own and against the zones it will be
    /// counted with.
    pub fn validate(&self, zones: &[Zone]) -> Result<(), SynthError> {
        if !(self.width.is_finite() && self.width > 0.0 && self.height.is_finite() && self.height > 0.0)
        {
            return Err(SynthError::Scenario(format!(
                "image extent {}x{} must be positive",
                self.width, self.height
            )));
        }
        for s in [self.sizes.car, self.sizes.truck] {
            if !s.iter().all(|v| v.is_finite() && *v > 0.0) {
                return Err(SynthError::Scenario(format!("bad size table entry {s:?}")));
            }
        }
        for (i, lane) in self.lanes.iter().enumerate() {
            let err = |message: String| SynthError::Lane {
                lane: lane.name.clone(),
                message,
            };
            if self.lanes[..i].iter().any(|l| l.name == lane.name) {
                return Err(err("duplicate lane name".into()));
            }
            if lane.path.len() < 2 {
                return Err(err("path needs at least 2 points".into()));
            }
            for p in &lane.path {
                if !(p.x.is_finite() && p.y.is_finite()) {
                    return Err(err("path has a non-finite point".into()));
                }
                if p.x < 0.0 || p.y < 0.0 || p.x > self.width || p.y > self.height {
                    return Err(err(format!(
                        "point ({}, {}) leaves the {}x{} image",
                        p.x, p.y, self.width, self.height
                    )));
                }
            }
            if lane.path.windows(2).any(|w| w[0] == w[1]) {
                return Err(err("path has a zero-length segment".into()));
            }
            for zone in zones {
                if zone.direction != lane.direction && lane_touches(lane, &zone.polygon) {
                    return Err(err(format!(
                        "{} lane crosses {} zone `{}`",
                        lane.direction, zone.direction, zone.name
                    )));
                }
            }
        }
        for (index, s) in self.spawns.iter().enumerate() {
            let err = |message: String| SynthError::Spawn { index, message };
            if s.frame >= self.duration {
                return Err(err(format!(
                    "frame {} outside duration {}",
                    s.frame, self.duration
                )));
            }
            let Some(lane) = self.lane(&s.lane) else {
                return Err(err(format!("unknown lane `{}`", s.lane)));
            };
            if !(s.speed.is_finite() && s.speed > 0.0) {
                return Err(err(format!("speed {} must be positive", s.speed)));
            }
            if let Some(size) = s.size {
                if !size.iter().all(|v| v.is_finite() && *v > 0.0) {
                    return Err(err(format!("bad box size {size:?}")));
                }
            }
            if let Some(d) = s.dwell {
                if !(d.at.is_finite() && d.at >= 0.0 && d.at <= lane.length()) {
                    return Err(err(format!("dwell position {} not on lane", d.at)));
                }
            }
        }
        Ok(())
    }
}

fn lane_touches(lane: &Lane, polygon: &Polygon) -> bool {
    if lane.path.iter().any(|p| point_in_polygon(*p, polygon)) {
        return true;
    }
    lane.path.windows(2).any(|w| {
        polygon
            .edges()
            .any(|(a, b)| crate::geometry::segments_intersect(w[0], w[1], a, b))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GtObject {
    pub id: u64,
    pub class: VehicleClass,
    pub direction: Direction,
    pub lane: String,
    pub boxes: Vec<(u64, BoundingBox)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub width: f64,
    pub height: f64,
    pub duration: u64,
    pub objects: Vec<GtObject>,
    /// Objects whose center path enters a zone, per direction and class.
    pub counts: CountReport,
}

impl GroundTruth {
    /// Ground-truth boxes of each frame as `(object id, box)`, by id.
    pub fn frame_boxes(&self) -> Vec<Vec<(u64, BoundingBox)>> {
        let mut frames = vec![Vec::new(); self.duration as usize];
        for o in &self.objects {
            for (f, b) in &o.boxes {
                frames[*f as usize].push((o.id, *b));
            }
        }
        frames
    }

    pub fn class_of(&self, id: u64) -> VehicleClass {
        self.objects[(id - 1) as usize].class
    }

    /// Trajectories as finished tracks with unit scores.
    pub fn tracks(&self) -> Vec<Track> {
        self.objects
            .iter()
            .filter(|o| !o.boxes.is_empty())
            .map(|o| {
                let det = |b: BoundingBox| Detection {
                    bbox: b,
                    class: o.class,
                    score: 1.0,
                    embedding: None,
                };
                let (f0, b0) = o.boxes[0];
                let mut t = Track::start(o.id, f0, &det(b0));
                for (f, b) in &o.boxes[1..] {
                    t.push_measured(*f, &det(*b));
                }
                t.finish();
                t
            })
            .collect()
    }
}

/// Fixed appearance vector of an identity: a basis vector, so distinct
/// identities below the embedding dimension are orthogonal.
pub fn identity_embedding(id: u64) -> Vec<f64> {
    let mut e = vec![0.0; EMBEDDING_DIM];
    e[((id.max(1) - 1) % EMBEDDING_DIM as u64) as usize] = 1.0;
    e
}

/// Builds the kinematic ground truth. The trajectories do not depend on the
/// seed; it is accepted so every stage of a run is keyed the same way.
pub fn generate(scenario: &Scenario, zones: &[Zone], _seed: u64) -> Result<GroundTruth, SynthError> {
    scenario.validate(zones)?;
    let mut objects = Vec::with_capacity(scenario.spawns.len());
    let mut counts = CountReport::new();
    for (i, spawn) in scenario.spawns.iter().enumerate() {
        let lane = scenario.lane(&spawn.lane).expect("validated");
        let [w, h] = spawn.size.unwrap_or_else(|| scenario.sizes.get(spawn.class));
        let mut boxes = Vec::new();
        let mut entered = false;
        for frame in spawn.frame..scenario.duration {
            let Some(p) = lane.point_at(spawn.arc_length((frame - spawn.frame) as f64)) else {
                break;
            };
            let b = BoundingBox::from_center(p.x, p.y, w, h).map_err(|e| SynthError::Spawn {
                index: i,
                message: e.to_string(),
            })?;
            entered |= zones.iter().any(|z| point_in_polygon(p, &z.polygon));
            boxes.push((frame, b));
        }
        if entered && boxes.len() >= 2 {
            let n = counts.get(lane.direction, spawn.class);
            counts.set(lane.direction, spawn.class, n + 1);
        }
        objects.push(GtObject {
            id: i as u64 + 1,
            class: spawn.class,
            direction: lane.direction,
            lane: lane.name.clone(),
            boxes,
        });
    }
    Ok(GroundTruth {
        width: scenario.width,
        height: scenario.height,
        duration: scenario.duration,
        objects,
        counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    pub miss_rate: f64,
    /// Expected false positives per frame.
    pub fp_rate: f64,
    /// Standard deviation of the box center offset, pixels.
    pub jitter_sigma: f64,
    pub duplicate_rate: f64,
    pub class_flip_rate: f64,
    /// The smaller of two ground-truth boxes overlapping above this is dropped.
    pub occlusion_iou: f64,
    pub score_mean: f64,
    pub score_sigma: f64,
    pub fp_score_mean: f64,
    pub fp_score_sigma: f64,
    /// Scale of the angular perturbation of embeddings, radians.
    pub embedding_noise: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::zero()
    }
}

impl NoiseModel {
    pub const PRESETS: [&'static str; 4] = ["zero", "daylight", "night", "rain"];

    pub fn zero() -> Self {
        Self {
            miss_rate: 0.0,
            fp_rate: 0.0,
            jitter_sigma: 0.0,
            duplicate_rate: 0.0,
            class_flip_rate: 0.0,
            occlusion_iou: 1.0,
            score_mean: 1.0,
            score_sigma: 0.0,
            fp_score_mean: 0.5,
            fp_score_sigma: 0.0,
            embedding_noise: 0.0,
        }
    }

    pub fn daylight() -> Self {
        Self {
            miss_rate: 0.05,
            fp_rate: 0.1,
            jitter_sigma: 1.5,
            duplicate_rate: 0.02,
            class_flip_rate: 0.03,
            occlusion_iou: 0.45,
            score_mean: 0.85,
            score_sigma: 0.08,
            fp_score_mean: 0.5,
            fp_score_sigma: 0.15,
            embedding_noise: 0.1,
        }
    }

    /// Headlights only: many misses, weak scores.
    pub fn night() -> Self {
        Self {
            miss_rate: 0.3,
            fp_rate: 0.05,
            jitter_sigma: 2.5,
            duplicate_rate: 0.01,
            class_flip_rate: 0.08,
            occlusion_iou: 0.45,
            score_mean: 0.5,
            score_sigma: 0.15,
            fp_score_mean: 0.35,
            fp_score_sigma: 0.1,
            embedding_noise: 0.25,
        }
    }

    pub fn rain() -> Self {
        Self {
            miss_rate: 0.15,
            fp_rate: 0.4,
            jitter_sigma: 3.0,
            duplicate_rate: 0.05,
            class_flip_rate: 0.05,
            occlusion_iou: 0.45,
            score_mean: 0.7,
            score_sigma: 0.12,
            fp_score_mean: 0.45,
            fp_score_sigma: 0.15,
            embedding_noise: 0.2,
        }
    }

    pub fn preset(name: &str) -> Result<Self, SynthError> {
        match name {
            "zero" => Ok(Self::zero()),
            "daylight" => Ok(Self::daylight()),
            "night" => Ok(Self::night()),
            "rain" => Ok(Self::rain()),
            other => Err(SynthError::UnknownPreset(other.to_string())),
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let unit = [
            ("miss_rate", self.miss_rate),
            ("duplicate_rate", self.duplicate_rate),
            ("class_flip_rate", self.class_flip_rate),
            ("occlusion_iou", self.occlusion_iou),
        ];
        for (name, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                return Err(SynthError::Noise(format!("{name} {v} outside [0, 1]")));
            }
        }
        let non_negative = [
            ("fp_rate", self.fp_rate),
            ("jitter_sigma", self.jitter_sigma),
            ("score_sigma", self.score_sigma),
            ("fp_score_sigma", self.fp_score_sigma),
            ("embedding_noise", self.embedding_noise),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SynthError::Noise(format!("{name} {v} must be finite and >= 0")));
            }
        }
        for (name, v) in [("score_mean", self.score_mean), ("fp_score_mean", self.fp_score_mean)] {
            if !v.is_finite() {
                return Err(SynthError::Noise(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

/// Extra center offset of a duplicate box relative to the original, pixels.
const DUPLICATE_JITTER: f64 = 2.0;

fn frame_rng(seed: u64, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..EMBEDDING_DIM).map(|_| normal(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Rotates `base` (unit) by an angle drawn at scale `sigma` towards a random
/// orthogonal direction.
fn perturb(base: &[f64], sigma: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let angle = (sigma * normal(rng)).abs();
    if angle == 0.0 {
        return base.to_vec();
    }
    let u = random_unit(rng);
    let dot: f64 = base.iter().zip(&u).map(|(a, b)| a * b).sum();
    let mut w: Vec<f64> = u.iter().zip(base).map(|(x, b)| x - dot * b).collect();
    let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n < 1e-12 {
        return base.to_vec();
    }
    w.iter_mut().for_each(|x| *x /= n);
    let (s, c) = angle.sin_cos();
    let mut e: Vec<f64> = base.iter().zip(&w).map(|(b, x)| c * b + s * x).collect();
    let n = e.iter().map(|x| x * x).sum::<f64>().sqrt();
    e.iter_mut().for_each(|x| *x /= n);
    e
}

fn draw_score(mean: f64, sigma: f64, rng: &mut ChaCha8Rng) -> f64 {
    (mean + sigma * normal(rng)).clamp(0.0, 1.0)
}

/// Indices (into `boxes`) of ground-truth boxes hidden behind a larger one.
pub fn occluded(boxes: &[(u64, BoundingBox)], threshold: f64) -> Vec<bool> {
    let mut hidden = vec![false; boxes.len()];
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            if iou(&boxes[i].1, &boxes[j].1) > threshold {
                // the smaller box goes; equal areas drop the later identity
                if boxes[i].1.area() < boxes[j].1.area() {
                    hidden[i] = true;
                } else {
                    hidden[j] = true;
                }
            }
        }
    }
    hidden
}

/// Turns ground truth into a detection stream with one frame per time step.
pub fn corrupt(
    gt: &GroundTruth,
    sizes: &SizeTable,
    noise: &NoiseModel,
    seed: u64,
) -> Result<Vec<Frame>, SynthError> {
    noise.validate()?;
    let fp_dist = if noise.fp_rate > 0.0 {
        Some(Poisson::new(noise.fp_rate).map_err(|e| SynthError::Noise(e.to_string()))?)
    } else {
        None
    };
    let frames = gt.frame_boxes();
    let mut out = Vec::with_capacity(frames.len());
    for (index, boxes) in frames.iter().enumerate() {
        let index = index as u64;
        let mut rng = frame_rng(seed, index);
        let hidden = occluded(boxes, noise.occlusion_iou);
        let mut dets = Vec::with_capacity(boxes.len() + 1);
        for ((id, b), hide) in boxes.iter().zip(hidden) {
            // a fixed number of draws per box keeps streams aligned across
            // miss and duplicate rates
            let miss = rng.random::<f64>() < noise.miss_rate;
            let (dx, dy) = (normal(&mut rng), normal(&mut rng));
            let flip = rng.random::<f64>() < noise.class_flip_rate;
            let score = draw_score(noise.score_mean, noise.score_sigma, &mut rng);
            let base = identity_embedding(*id);
            let embedding = perturb(&base, noise.embedding_noise, &mut rng);
            let dup = rng.random::<f64>() < noise.duplicate_rate;
            let (ddx, ddy) = (normal(&mut rng), normal(&mut rng));
            let dup_score = draw_score(noise.score_mean, noise.score_sigma, &mut rng);
            let dup_embedding = perturb(&base, noise.embedding_noise, &mut rng);
            if hide || miss {
                continue;
            }
            let class = if flip { gt.class_of(*id).other() } else { gt.class_of(*id) };
            let bbox = translate(b, noise.jitter_sigma * dx, noise.jitter_sigma * dy);
            dets.push(Detection {
                bbox,
                class,
                score,
                embedding: Some(embedding),
            });
            if dup {
                let extra = noise.jitter_sigma.hypot(DUPLICATE_JITTER);
                dets.push(Detection {
                    bbox: translate(&bbox, extra * ddx, extra * ddy),
                    class,
                    score: dup_score,
                    embedding: Some(dup_embedding),
                });
            }
        }
        let n_fp = fp_dist.map_or(0, |d| d.sample(&mut rng) as usize);
        for _ in 0..n_fp {
            let class = if rng.random::<bool>() { VehicleClass::Truck } else { VehicleClass::Car };
            let [w, h] = sizes.get(class);
            let cx = rng.random::<f64>() * gt.width;
            let cy = rng.random::<f64>() * gt.height;
            let score = draw_score(noise.fp_score_mean, noise.fp_score_sigma, &mut rng);
            dets.push(Detection {
                bbox: BoundingBox::from_center(cx, cy, w, h).expect("positive size"),
                class,
                score,
                embedding: Some(random_unit(&mut rng)),
            });
        }
        out.push(Frame::new(index, dets));
    }
    Ok(out)
}

fn translate(b: &BoundingBox, dx: f64, dy: f64) -> BoundingBox {
    b.translate(dx, dy).expect("finite offset keeps the box valid")
}

/// A scenario bundled with its counting zones and detector noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub scenario: Scenario,
    pub zones: Vec<Zone>,
    pub noise: NoiseModel,
}

pub const WIDTH: f64 = 1280.0;
pub const HEIGHT: f64 = 720.0;

/// Northbound traffic uses the right half of the image, southbound the left.
pub fn standard_zones() -> Vec<Zone> {
    vec![
        Zone {
            name: "north".into(),
            direction: Direction::Northbound,
            polygon: Polygon::rectangle(660.0, 260.0, 1260.0, 460.0).expect("valid"),
        },
        Zone {
            name: "south".into(),
            direction: Direction::Southbound,
            polygon: Polygon::rectangle(20.0, 260.0, 620.0, 460.0).expect("valid"),
        },
    ]
}

fn lane(name: &str, direction: Direction, path: &[(f64, f64)]) -> Lane {
    Lane {
        name: name.into(),
        direction,
        path: path.iter().map(|&(x, y)| Point::new(x, y)).collect(),
    }
}

fn spawn(frame: u64, lane: &str, class: VehicleClass, speed: f64) -> Spawn {
    Spawn {
        frame,
        lane: lane.into(),
        class,
        speed,
        size: None,
        dwell: None,
    }
}

fn class_cycle(i: usize) -> VehicleClass {
    if i % 3 == 2 {
        VehicleClass::Truck
    } else {
        VehicleClass::Car
    }
}

fn two_lane(interval: u64, per_direction: usize) -> Scenario {
    let lanes = vec![
        lane("nb", Direction::Northbound, &[(900.0, 700.0), (900.0, 20.0)]),
        lane("sb", Direction::Southbound, &[(380.0, 20.0), (380.0, 700.0)]),
    ];
    let mut spawns = Vec::new();
    for i in 0..per_direction {
        let f = i as u64 * interval;
        spawns.push(spawn(f, "nb", class_cycle(i), 3.0));
        spawns.push(spawn(f + interval / 2, "sb", class_cycle(i + 1), 3.0));
    }
    let last = spawns.iter().map(|s| s.frame).max().unwrap_or(0);
    Scenario {
        width: WIDTH,
        height: HEIGHT,
        duration: last + 240,
        sizes: SizeTable::default(),
        lanes,
        spawns,
    }
}

pub fn straight_two_lane() -> Preset {
    Preset {
        name: "straight_two_lane",
        scenario: two_lane(40, 10),
        zones: standard_zones(),
        noise: NoiseModel::daylight(),
    }
}

pub fn night_sparse() -> Preset {
    Preset {
        name: "night_sparse",
        scenario: two_lane(90, 5),
        zones: standard_zones(),
        noise: NoiseModel::night(),
    }
}

/// Frames from spawn until a crossing vehicle reaches the crossing point.
pub const CROSSING_LEAD: u64 = 100;

/// In each direction a car and a truck cross in an X inside the zone. The
/// truck reaches the crossing half a frame after the car, which leaves the
/// car hidden behind it for exactly two frames at `occlusion_iou` 0.45.
pub fn crossing_occlusion() -> Preset {
    let lead = CROSSING_LEAD as f64;
    let x_lane = |name: &str, dir: Direction, c: (f64, f64), v: (f64, f64), lag: f64| {
        let start = (c.0 - (lead + lag) * v.0, c.1 - (lead + lag) * v.1);
        let end = (c.0 + lead * v.0, c.1 + lead * v.1);
        lane(name, dir, &[start, end])
    };
    let speed = 13f64.sqrt();
    let lanes = vec![
        x_lane("nb_truck", Direction::Northbound, (960.0, 360.0), (3.0, -2.0), 0.5),
        x_lane("nb_car", Direction::Northbound, (960.0, 360.0), (-3.0, -2.0), 0.0),
        x_lane("sb_truck", Direction::Southbound, (320.0, 360.0), (3.0, 2.0), 0.5),
        x_lane("sb_car", Direction::Southbound, (320.0, 360.0), (-3.0, 2.0), 0.0),
    ];
    let mut spawns = Vec::new();
    for i in 0..4u64 {
        let f = i * 60;
        spawns.push(spawn(f, "nb_car", VehicleClass::Car, speed));
        spawns.push(spawn(f, "nb_truck", VehicleClass::Truck, speed));
        spawns.push(spawn(f + 30, "sb_car", VehicleClass::Car, speed));
        spawns.push(spawn(f + 30, "sb_truck", VehicleClass::Truck, speed));
    }
    Preset {
        name: "crossing_occlusion",
        scenario: Scenario {
            width: WIDTH,
            height: HEIGHT,
            duration: 450,
            sizes: SizeTable::default(),
            lanes,
            spawns,
        },
        zones: standard_zones(),
        noise: NoiseModel {
            miss_rate: 0.0,
            fp_rate: 0.0,
            jitter_sigma: 1.0,
            duplicate_rate: 0.0,
            class_flip_rate: 0.0,
            occlusion_iou: 0.45,
            score_mean: 0.9,
            score_sigma: 0.05,
            fp_score_mean: 0.5,
            fp_score_sigma: 0.1,
            embedding_noise: 0.1,
        },
    }
}

/// Vehicles stop inside the zone for a while before moving on.
pub fn congestion_dwell() -> Preset {
    let mut scenario = two_lane(130, 5);
    for s in &mut scenario.spawns {
        s.dwell = Some(Dwell {
            at: 330.0,
            frames: 60,
        });
    }
    scenario.duration += 60;
    Preset {
        name: "congestion_dwell",
        scenario,
        zones: standard_zones(),
        noise: NoiseModel::daylight(),
    }
}

pub const PRESET_NAMES: [&str; 4] = [
    "straight_two_lane",
    "crossing_occlusion",
    "congestion_dwell",
    "night_sparse",
];

pub fn scenario_library() -> Vec<Preset> {
    vec![
        straight_two_lane(),
        crossing_occlusion(),
        congestion_dwell(),
        night_sparse(),
    ]
}

pub fn preset(name: &str) -> Result<Preset, SynthError> {
    scenario_library()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| SynthError::UnknownPreset(name.to_string()))
}

/// Stream for throughput measurements: eight objects on parallel vertical
/// lanes, wrapping around the image, so every frame has eight detections.
pub fn bench_stream(frames: u64, seed: u64) -> Vec<Frame> {
    const OBJECTS: usize = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offsets: Vec<f64> = (0..OBJECTS).map(|_| rng.random::<f64>() * HEIGHT).collect();
    (0..frames)
        .map(|f| {
            let dets = offsets
                .iter()
                .enumerate()
                .map(|(i, off)| {
                    let x = 80.0 + 150.0 * i as f64;
                    let y = (off + 2.0 * f as f64) % HEIGHT;
                    Detection {
                        bbox: BoundingBox::from_center(x, y, 40.0, 60.0).expect("positive size"),
                        class: VehicleClass::Car,
                        score: 0.9,
                        embedding: None,
                    }
                })
                .collect();
            Frame::new(f, dets)
        })
        .collect()
}

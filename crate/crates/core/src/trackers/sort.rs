//! SORT and Deep SORT: Kalman prediction for every track, then optimal
//! assignment on a gated cost matrix. Deep SORT blends the overlap cost with
//! the smallest cosine distance to each track's embedding gallery.

use std::collections::VecDeque;

use crate::assignment::{iou_cost, solve_assignment, CostMatrix};
use crate::error::TrackError;
use crate::geometry::iou;
use crate::kalman::{KalmanFilter, KalmanState};
use crate::model::{BoundingBox, Detection, Frame, Track};

use super::{sorted_by_id, DeepSortParams, FrameClock, SortParams, Tracker};

/// Cosine distance between two unit vectors.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (1.0 - dot).clamp(0.0, 2.0)
}

#[derive(Debug, Clone)]
struct Target {
    track: Track,
    state: KalmanState,
    hits: u32,
    time_since_update: u32,
    pending: Vec<(u64, BoundingBox)>,
    gallery: VecDeque<Vec<f64>>,
}

impl Target {
    fn predicted_box(&self) -> BoundingBox {
        self.state
            .to_box()
            .unwrap_or_else(|_| self.track.tail().bbox)
    }

    /// Smallest cosine distance between `emb` and the gallery.
    fn appearance_distance(&self, emb: &[f64]) -> Option<f64> {
        self.gallery
            .iter()
            .map(|g| cosine_distance(g, emb))
            .min_by(f64::total_cmp)
    }
}

#[derive(Debug, Clone, Copy)]
struct Appearance {
    lambda_motion: f64,
    cos_max: f64,
    gallery_budget: usize,
}

/// Shared SORT machinery; `appearance` switches on the Deep SORT cost.
#[derive(Debug, Clone)]
struct Engine {
    params: SortParams,
    appearance: Option<Appearance>,
    filter: KalmanFilter,
    active: Vec<Target>,
    finished: Vec<Track>,
    next_id: u64,
    clock: FrameClock,
}

impl Engine {
    fn new(params: SortParams, appearance: Option<Appearance>) -> Self {
        Self {
            filter: KalmanFilter::new(params.kalman),
            params,
            appearance,
            active: Vec::new(),
            finished: Vec::new(),
            next_id: 1,
            clock: FrameClock::default(),
        }
    }

    fn cost_matrix(&self, predicted: &[BoundingBox], dets: &[Detection]) -> CostMatrix {
        let boxes: Vec<BoundingBox> = dets.iter().map(|d| d.bbox).collect();
        let Some(app) = self.appearance else {
            return iou_cost(predicted, &boxes, self.params.iou_min)
                .expect("both sides are non-empty");
        };
        let mut costs = Vec::with_capacity(predicted.len() * dets.len());
        let mut gated = Vec::with_capacity(predicted.len() * dets.len());
        for (target, pbox) in self.active.iter().zip(predicted) {
            for det in dets {
                let overlap = iou(pbox, &det.bbox);
                let motion = 1.0 - overlap;
                let appearance = det
                    .embedding
                    .as_deref()
                    .and_then(|e| target.appearance_distance(e));
                match appearance {
                    Some(d) => {
                        costs.push(app.lambda_motion * motion + (1.0 - app.lambda_motion) * d);
                        gated.push(overlap < self.params.iou_min || d > app.cos_max);
                    }
                    None => {
                        costs.push(motion);
                        gated.push(overlap < self.params.iou_min);
                    }
                }
            }
        }
        CostMatrix::new(predicted.len(), dets.len(), costs, gated)
            .expect("costs are finite and non-negative")
    }

    fn start(&mut self, frame: u64, det: &Detection) -> Target {
        let mut gallery = VecDeque::new();
        if let Some(e) = &det.embedding {
            gallery.push_back(e.clone());
        }
        let t = Target {
            track: Track::start(self.next_id, frame, det),
            state: self.filter.box_to_state(&det.bbox),
            hits: 1,
            time_since_update: 0,
            pending: Vec::new(),
            gallery,
        };
        self.next_id += 1;
        t
    }

    fn close(&mut self, target: Target) {
        if target.hits >= self.params.min_hits {
            let mut track = target.track;
            track.finish();
            self.finished.push(track);
        }
    }

    fn step(&mut self, frame: &Frame) -> Result<(), TrackError> {
        let elapsed = self.clock.advance(frame.index)?;

        for t in &mut self.active {
            for k in (0..elapsed).rev() {
                t.state = self.filter.predict(&t.state);
                let b = t.predicted_box();
                t.pending.push((frame.index - k, b));
            }
            t.time_since_update += elapsed as u32;
        }

        let dets = &frame.detections;
        let mut det_taken = vec![false; dets.len()];
        if !self.active.is_empty() && !dets.is_empty() {
            let predicted: Vec<BoundingBox> =
                self.active.iter().map(Target::predicted_box).collect();
            let cost = self.cost_matrix(&predicted, dets);
            for (row, col) in solve_assignment(&cost) {
                let det = &dets[col];
                det_taken[col] = true;
                let t = &mut self.active[row];
                t.pending.pop();
                for (f, b) in t.pending.drain(..) {
                    t.track.push_predicted(f, b);
                }
                t.track.push_measured(frame.index, det);
                t.state = self.filter.update(&t.state, &det.bbox)?;
                t.hits += 1;
                t.time_since_update = 0;
                if let (Some(app), Some(e)) = (self.appearance, &det.embedding) {
                    t.gallery.push_back(e.clone());
                    while t.gallery.len() > app.gallery_budget {
                        t.gallery.pop_front();
                    }
                }
            }
        }

        let max_age = self.params.max_age;
        let (alive, dead): (Vec<Target>, Vec<Target>) = std::mem::take(&mut self.active)
            .into_iter()
            .partition(|t| t.time_since_update <= max_age);
        for t in dead {
            self.close(t);
        }
        self.active = alive;

        for (det, taken) in dets.iter().zip(det_taken) {
            if !taken {
                let t = self.start(frame.index, det);
                self.active.push(t);
            }
        }
        Ok(())
    }

    fn flush(&mut self) -> Vec<Track> {
        for t in std::mem::take(&mut self.active) {
            self.close(t);
        }
        sorted_by_id(&self.finished)
    }
}

/// Kalman prediction plus Hungarian matching on `1 - IOU`.
#[derive(Debug, Clone)]
pub struct SortTracker {
    engine: Engine,
}

impl SortTracker {
    pub fn new(params: SortParams) -> Result<Self, TrackError> {
        params.validate()?;
        Ok(Self {
            engine: Engine::new(params, None),
        })
    }
}

impl Tracker for SortTracker {
    fn step(&mut self, frame: &Frame) -> Result<(), TrackError> {
        self.engine.step(frame)
    }

    fn flush(&mut self) -> Vec<Track> {
        self.engine.flush()
    }

    fn tracks_created(&self) -> u64 {
        self.engine.next_id - 1
    }
}

/// SORT with an appearance term. A cell costs
/// `lambda * (1 - IOU) + (1 - lambda) * d_cos`, where `d_cos` is the smallest
/// cosine distance to the track's gallery; it is gated when the overlap is
/// below `iou_min` or `d_cos` exceeds `cos_max`. Cells without an embedding
/// on either side fall back to `1 - IOU`.
#[derive(Debug, Clone)]
pub struct DeepSortTracker {
    engine: Engine,
}

impl DeepSortTracker {
    pub fn new(params: DeepSortParams) -> Result<Self, TrackError> {
        params.validate()?;
        let appearance = Appearance {
            lambda_motion: params.lambda_motion,
            cos_max: params.cos_max,
            gallery_budget: params.gallery_budget,
        };
        Ok(Self {
            engine: Engine::new(params.sort(), Some(appearance)),
        })
    }
}

impl Tracker for DeepSortTracker {
    fn step(&mut self, frame: &Frame) -> Result<(), TrackError> {
        self.engine.step(frame)
    }

    fn flush(&mut self) -> Vec<Track> {
        self.engine.flush()
    }

    fn tracks_created(&self) -> u64 {
        self.engine.next_id - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{VehicleClass, EMBEDDING_DIM};

    fn det(x: f64, y: f64) -> Detection {
        Detection::new(
            BoundingBox::new(x, y, x + 20.0, y + 20.0).unwrap(),
            VehicleClass::Car,
            0.9,
        )
        .unwrap()
    }

    fn basis(i: usize) -> Vec<f64> {
        let mut v = vec![0.0; EMBEDDING_DIM];
        v[i] = 1.0;
        v
    }

    fn run(t: &mut dyn Tracker, frames: &[Frame]) -> Vec<Track> {
        for f in frames {
            t.step(f).unwrap();
        }
        t.flush()
    }

    #[test]
    fn cosine_distance_of_unit_vectors() {
        assert_eq!(cosine_distance(&basis(0), &basis(0)), 0.0);
        assert_eq!(cosine_distance(&basis(0), &basis(1)), 1.0);
    }

    #[test]
    fn constant_velocity_keeps_one_id() {
        let frames: Vec<Frame> = (0..40)
            .map(|i| Frame::new(i, vec![det(3.0 * i as f64, 0.0)]))
            .collect();
        let mut t = SortTracker::new(SortParams::default()).unwrap();
        let tracks = run(&mut t, &frames);
        assert_eq!(tracks.len(), 1);
        assert_eq!(tracks[0].len(), 40);
    }

    #[test]
    fn parallel_lanes_keep_their_ids() {
        let frames: Vec<Frame> = (0..40)
            .map(|i| {
                let x = 3.0 * i as f64;
                Frame::new(i, vec![det(x, 0.0), det(x, 100.0)])
            })
            .collect();
        let mut t = SortTracker::new(SortParams::default()).unwrap();
        let tracks = run(&mut t, &frames);
        assert_eq!(tracks.len(), 2);
        for tr in &tracks {
            let y0 = tr.boxes[0].bbox.y_min();
            assert!(tr.boxes.iter().all(|b| b.bbox.y_min() == y0));
        }
    }

    #[test]
    fn long_absence_starts_new_track() {
        let p = SortParams::default();
        let gap = u64::from(p.max_age) + 1;
        let frames: Vec<Frame> = (0..20)
            .map(|i| {
                let dets = if (10..10 + gap).contains(&i) {
                    vec![]
                } else {
                    vec![det(i as f64, 0.0)]
                };
                Frame::new(i, dets)
            })
            .collect();
        let mut t = SortTracker::new(p).unwrap();
        let tracks = run(&mut t, &frames);
        assert_eq!(tracks.len(), 2);
        assert_eq!(tracks[0].boxes.last().unwrap().frame, 9);
        assert_eq!(tracks[1].boxes[0].frame, 10 + gap);

        // an absence of exactly max_age frames is bridged
        let frames: Vec<Frame> = (0..20)
            .map(|i| {
                let dets = if i == 10 { vec![] } else { vec![det(i as f64, 0.0)] };
                Frame::new(i, dets)
            })
            .collect();
        let mut t = SortTracker::new(p).unwrap();
        let tracks = run(&mut t, &frames);
        assert_eq!(tracks.len(), 1);
        assert!(tracks[0].boxes[10].predicted);
    }

    #[test]
    fn min_hits_filters_short_tracks() {
        let p = SortParams {
            min_hits: 3,
            ..SortParams::default()
        };
        let frames = vec![
            Frame::new(0, vec![det(0.0, 0.0)]),
            Frame::new(1, vec![det(1.0, 0.0)]),
        ];
        let mut t = SortTracker::new(p).unwrap();
        assert!(run(&mut t, &frames).is_empty());
    }

    #[test]
    fn deep_sort_single_object_one_id() {
        let frames: Vec<Frame> = (0..30)
            .map(|i| Frame::new(i, vec![det(2.0 * i as f64, 0.0).with_embedding(basis(5))]))
            .collect();
        let mut t = DeepSortTracker::new(DeepSortParams::default()).unwrap();
        assert_eq!(run(&mut t, &frames).len(), 1);
    }

    #[test]
    fn appearance_gate_blocks_foreign_embedding() {
        // Same place, different identity: motion alone would match, the
        // orthogonal embedding forbids it.
        let frames = vec![
            Frame::new(0, vec![det(0.0, 0.0).with_embedding(basis(0))]),
            Frame::new(1, vec![det(0.0, 0.0).with_embedding(basis(1))]),
        ];
        let mut t = DeepSortTracker::new(DeepSortParams::default()).unwrap();
        assert_eq!(run(&mut t, &frames).len(), 2);

        let mut sort = SortTracker::new(SortParams::default()).unwrap();
        assert_eq!(run(&mut sort, &frames).len(), 1);
    }

    #[test]
    fn gallery_respects_budget() {
        let p = DeepSortParams {
            gallery_budget: 2,
            ..DeepSortParams::default()
        };
        let mut t = DeepSortTracker::new(p).unwrap();
        for i in 0..5 {
            t.step(&Frame::new(i, vec![det(i as f64, 0.0).with_embedding(basis(0))]))
                .unwrap();
        }
        assert_eq!(t.engine.active[0].gallery.len(), 2);
    }
}

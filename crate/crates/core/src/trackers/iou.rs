//! Greedy IOU tracker: each active track, in ascending id order, takes the
//! remaining detection with the highest overlap against its last box.

use crate::error::TrackError;
use crate::geometry::iou;
use crate::model::{Detection, Frame, Track};

use super::{sorted_by_id, FrameClock, IouParams, Tracker};

#[derive(Debug, Clone)]
pub struct IouTracker {
    params: IouParams,
    active: Vec<Track>,
    finished: Vec<Track>,
    next_id: u64,
    clock: FrameClock,
}

/// Index and overlap of the detection in `pool` overlapping `tail` the most.
/// Ties go to the earlier detection.
pub(super) fn best_overlap(
    tail: &crate::model::BoundingBox,
    pool: &[&Detection],
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, d) in pool.iter().enumerate() {
        let o = iou(tail, &d.bbox);
        if best.is_none_or(|(_, b)| o > b) {
            best = Some((i, o));
        }
    }
    best
}

impl IouTracker {
    pub fn new(params: IouParams) -> Result<Self, TrackError> {
        params.validate()?;
        Ok(Self {
            params,
            active: Vec::new(),
            finished: Vec::new(),
            next_id: 1,
            clock: FrameClock::default(),
        })
    }

    pub fn params(&self) -> &IouParams {
        &self.params
    }

    pub fn active(&self) -> &[Track] {
        &self.active
    }

    fn close(&mut self, mut track: Track) {
        track.finish();
        if self.params.keeps(&track) {
            self.finished.push(track);
        }
    }
}

impl Tracker for IouTracker {
    fn step(&mut self, frame: &Frame) -> Result<(), TrackError> {
        self.clock.advance(frame.index)?;
        let mut pool: Vec<&Detection> = frame
            .detections
            .iter()
            .filter(|d| d.score >= self.params.sigma_l)
            .collect();

        let mut updated = Vec::with_capacity(self.active.len());
        for mut track in std::mem::take(&mut self.active) {
            if let Some((i, o)) = best_overlap(&track.tail().bbox, &pool) {
                if o >= self.params.sigma_iou {
                    let det = pool.remove(i);
                    track.push_measured(frame.index, det);
                    updated.push(track);
                    continue;
                }
            }
            // Taken literally, "if empty(T_u) or t_i is not last(T_u)" would
            // also close a track that was just extended whenever another
            // track was extended after it. The intended reading is used
            // instead: any track not extended in this frame is closed.
            self.close(track);
        }

        for det in pool {
            updated.push(Track::start(self.next_id, frame.index, det));
            self.next_id += 1;
        }
        self.active = updated;
        Ok(())
    }

    fn flush(&mut self) -> Vec<Track> {
        for track in std::mem::take(&mut self.active) {
            self.close(track);
        }
        sorted_by_id(&self.finished)
    }

    fn tracks_created(&self) -> u64 {
        self.next_id - 1
    }
}

//! IOU tracker with Kalman coasting. Tracks are matched against their
//! predicted box, survive up to `ttl` unmatched processed frames, and can
//! skip frames entirely.

use crate::error::TrackError;
use crate::kalman::{KalmanFilter, KalmanState};
use crate::model::{BoundingBox, Detection, Frame, Track};

use super::iou::best_overlap;
use super::{sorted_by_id, FrameClock, KiouParams, Tracker};

#[derive(Debug, Clone)]
struct Coasting {
    track: Track,
    state: KalmanState,
    /// Consecutive processed frames without a match.
    misses: u32,
    /// Predicted boxes since the last measurement, committed on re-match.
    pending: Vec<(u64, BoundingBox)>,
}

impl Coasting {
    fn predicted_box(&self) -> BoundingBox {
        self.state
            .to_box()
            .unwrap_or_else(|_| self.track.tail().bbox)
    }
}

#[derive(Debug, Clone)]
pub struct KiouTracker {
    params: KiouParams,
    filter: KalmanFilter,
    active: Vec<Coasting>,
    finished: Vec<Track>,
    next_id: u64,
    clock: FrameClock,
}

impl KiouTracker {
    pub fn new(params: KiouParams) -> Result<Self, TrackError> {
        params.validate()?;
        Ok(Self {
            filter: KalmanFilter::new(params.kalman),
            params,
            active: Vec::new(),
            finished: Vec::new(),
            next_id: 1,
            clock: FrameClock::default(),
        })
    }

    pub fn params(&self) -> &KiouParams {
        &self.params
    }

    fn is_processed(&self, index: u64) -> bool {
        index.is_multiple_of(u64::from(self.params.skip) + 1)
    }

    fn close(&mut self, c: Coasting) {
        let mut track = c.track;
        track.finish();
        if self.params.iou.keeps(&track) {
            self.finished.push(track);
        }
    }
}

impl Tracker for KiouTracker {
    fn step(&mut self, frame: &Frame) -> Result<(), TrackError> {
        let elapsed = self.clock.advance(frame.index)?;

        // advance every track to this frame, remembering the predicted boxes
        for c in &mut self.active {
            for k in (0..elapsed).rev() {
                c.state = self.filter.predict(&c.state);
                let b = c.predicted_box();
                c.pending.push((frame.index - k, b));
            }
        }

        if !self.is_processed(frame.index) {
            return Ok(());
        }

        let mut pool: Vec<&Detection> = frame
            .detections
            .iter()
            .filter(|d| d.score >= self.params.iou.sigma_l)
            .collect();

        let mut updated = Vec::with_capacity(self.active.len());
        for mut c in std::mem::take(&mut self.active) {
            let tail = c.predicted_box();
            if let Some((i, o)) = best_overlap(&tail, &pool) {
                if o >= self.params.iou.sigma_iou {
                    let det = pool.remove(i);
                    // the prediction for this frame is replaced by the measurement
                    c.pending.pop();
                    for (f, b) in c.pending.drain(..) {
                        c.track.push_predicted(f, b);
                    }
                    c.track.push_measured(frame.index, det);
                    c.state = self.filter.update(&c.state, &det.bbox)?;
                    c.misses = 0;
                    updated.push(c);
                    continue;
                }
            }
            c.misses += 1;
            if c.misses > self.params.ttl {
                self.close(c);
            } else {
                updated.push(c);
            }
        }

        for det in pool {
            updated.push(Coasting {
                track: Track::start(self.next_id, frame.index, det),
                state: self.filter.box_to_state(&det.bbox),
                misses: 0,
                pending: Vec::new(),
            });
            self.next_id += 1;
        }
        self.active = updated;
        Ok(())
    }

    fn flush(&mut self) -> Vec<Track> {
        for c in std::mem::take(&mut self.active) {
            self.close(c);
        }
        sorted_by_id(&self.finished)
    }

    fn tracks_created(&self) -> u64 {
        self.next_id - 1
    }
}

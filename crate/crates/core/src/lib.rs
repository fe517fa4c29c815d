//! Tracking-by-detection engine for directional vehicle counting.
//!
//! The pipeline reads per-frame detections, links them into tracks with one
//! of four trackers (IOU, Kalman-IOU, SORT, Deep SORT), counts tracks entering
//! directional zones and scores the counts against ground truth. A seeded
//! traffic simulator provides ground truth and detector-like noise.

pub mod assignment;
pub mod counting;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod kalman;
pub mod model;
pub mod stream;
pub mod synth;
pub mod trackers;

pub use error::{CountError, EvalError, KalmanError, ModelError, StreamError, SynthError, TrackError};
pub use model::{BoundingBox, Detection, Frame, Track, TrackBox, TrackState, VehicleClass};

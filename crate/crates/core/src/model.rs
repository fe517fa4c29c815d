//! Value types shared by every stage of the pipeline: boxes, detections,
//! frames and tracks.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Number of components in an appearance embedding.
pub const EMBEDDING_DIM: usize = 128;

/// Allowed deviation of an embedding's Euclidean norm from 1.
pub const EMBEDDING_NORM_TOLERANCE: f64 = 1e-6;

/// Axis-aligned box in continuous image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct BoundingBox {
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self, ModelError> {
        if !(x_min.is_finite() && y_min.is_finite() && x_max.is_finite() && y_max.is_finite()) {
            return Err(ModelError::NonFiniteBox);
        }
        if !(x_min < x_max && y_min < y_max) {
            return Err(ModelError::DegenerateBox(x_min, y_min, x_max, y_max));
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    /// Builds a box from its center and extent.
    pub fn from_center(cx: f64, cy: f64, width: f64, height: f64) -> Result<Self, ModelError> {
        Self::new(
            cx - width / 2.0,
            cy - height / 2.0,
            cx + width / 2.0,
            cy + height / 2.0,
        )
    }

    #[inline]
    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    #[inline]
    pub fn y_min(&self) -> f64 {
        self.y_min
    }
    #[inline]
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    #[inline]
    pub fn y_max(&self) -> f64 {
        self.y_max
    }
    #[inline]
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }
    #[inline]
    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }
    #[inline]
    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x_min, self.y_min, self.x_max, self.y_max]
    }

    /// Shifts the box by `(dx, dy)`.
    pub fn translate(&self, dx: f64, dy: f64) -> Result<Self, ModelError> {
        Self::new(
            self.x_min + dx,
            self.y_min + dy,
            self.x_max + dx,
            self.y_max + dy,
        )
    }
}

impl TryFrom<[f64; 4]> for BoundingBox {
    type Error = ModelError;

    fn try_from(v: [f64; 4]) -> Result<Self, Self::Error> {
        BoundingBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BoundingBox> for [f64; 4] {
    fn from(b: BoundingBox) -> Self {
        b.to_array()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VehicleClass {
    Car,
    Truck,
}

impl VehicleClass {
    pub const ALL: [VehicleClass; 2] = [VehicleClass::Car, VehicleClass::Truck];

    pub fn as_str(&self) -> &'static str {
        match self {
            VehicleClass::Car => "car",
            VehicleClass::Truck => "truck",
        }
    }

    pub fn other(&self) -> Self {
        match self {
            VehicleClass::Car => VehicleClass::Truck,
            VehicleClass::Truck => VehicleClass::Car,
        }
    }

    pub(crate) fn slot(&self) -> usize {
        match self {
            VehicleClass::Car => 0,
            VehicleClass::Truck => 1,
        }
    }
}

impl fmt::Display for VehicleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VehicleClass {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "car" => Ok(VehicleClass::Car),
            "truck" => Ok(VehicleClass::Truck),
            other => Err(ModelError::UnknownClass(other.to_string())),
        }
    }
}

/// A single detector output for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub bbox: BoundingBox,
    pub class: VehicleClass,
    pub score: f64,
    pub embedding: Option<Vec<f64>>,
}

impl Detection {
    pub fn new(bbox: BoundingBox, class: VehicleClass, score: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&score) {
            return Err(ModelError::ScoreOutOfRange(score));
        }
        Ok(Self {
            bbox,
            class,
            score,
            embedding: None,
        })
    }

    pub fn with_embedding(mut self, embedding: Vec<f64>) -> Self {
        self.embedding = Some(embedding);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Frame {
    pub index: u64,
    pub timestamp_ms: Option<u64>,
    pub detections: Vec<Detection>,
}

impl Frame {
    pub fn new(index: u64, detections: Vec<Detection>) -> Self {
        Self {
            index,
            timestamp_ms: None,
            detections,
        }
    }
}

/// One entry of a track's history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackBox {
    pub frame: u64,
    pub bbox: BoundingBox,
    /// True when the box came from motion prediction rather than a detection.
    pub predicted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackState {
    Active,
    Finished,
}

#[derive(Debug, Clone)]
pub struct Track {
    pub id: u64,
    /// Class of the most recent measured detection.
    pub class: VehicleClass,
    /// Most frequent class over measured detections; ties go to `class`.
    pub class_majority: VehicleClass,
    pub boxes: Vec<TrackBox>,
    pub max_score: f64,
    pub state: TrackState,
    pub(crate) class_votes: [u32; 2],
}

// Vote tallies are bookkeeping, not part of a track's identity.
impl PartialEq for Track {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.class == other.class
            && self.class_majority == other.class_majority
            && self.boxes == other.boxes
            && self.max_score == other.max_score
            && self.state == other.state
    }
}

impl Track {
    /// Starts a new active track from its first measured detection.
    pub fn start(id: u64, frame: u64, det: &Detection) -> Self {
        let mut track = Self {
            id,
            class: det.class,
            class_majority: det.class,
            boxes: Vec::new(),
            max_score: det.score,
            state: TrackState::Active,
            class_votes: [0; 2],
        };
        track.push_measured(frame, det);
        track
    }

    /// Reassembles a track read back from a file.
    pub fn from_parts(
        id: u64,
        class: VehicleClass,
        class_majority: VehicleClass,
        max_score: f64,
        boxes: Vec<TrackBox>,
    ) -> Self {
        let mut class_votes = [0; 2];
        class_votes[class_majority.slot()] = 1;
        Self {
            id,
            class,
            class_majority,
            boxes,
            max_score,
            state: TrackState::Finished,
            class_votes,
        }
    }

    pub fn push_measured(&mut self, frame: u64, det: &Detection) {
        self.boxes.push(TrackBox {
            frame,
            bbox: det.bbox,
            predicted: false,
        });
        if det.score > self.max_score {
            self.max_score = det.score;
        }
        self.class = det.class;
        self.class_votes[det.class.slot()] += 1;
        let [cars, trucks] = self.class_votes;
        self.class_majority = match cars.cmp(&trucks) {
            std::cmp::Ordering::Greater => VehicleClass::Car,
            std::cmp::Ordering::Less => VehicleClass::Truck,
            std::cmp::Ordering::Equal => self.class,
        };
    }

    pub fn push_predicted(&mut self, frame: u64, bbox: BoundingBox) {
        self.boxes.push(TrackBox {
            frame,
            bbox,
            predicted: true,
        });
    }

    /// Last box in the history, measured or predicted.
    pub fn tail(&self) -> &TrackBox {
        self.boxes.last().expect("track always holds at least one box")
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn measured(&self) -> impl Iterator<Item = &TrackBox> {
        self.boxes.iter().filter(|b| !b.predicted)
    }

    pub fn measured_len(&self) -> usize {
        self.measured().count()
    }

    /// Drops predicted boxes after the last measurement.
    pub(crate) fn trim_trailing_predictions(&mut self) {
        while self.boxes.len() > 1 && self.boxes.last().is_some_and(|b| b.predicted) {
            self.boxes.pop();
        }
    }

    pub(crate) fn finish(&mut self) {
        self.trim_trailing_predictions();
        self.state = TrackState::Finished;
    }
}

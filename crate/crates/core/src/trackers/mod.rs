//! Tracking state machines. Every tracker consumes frames in index order and
//! hands back its finished tracks, sorted by id, on [`Tracker::flush`].

mod iou;
mod kiou;
mod sort;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::TrackError;
use crate::geometry;
use crate::kalman::KalmanConfig;
use crate::model::{Frame, Track};

pub use self::iou::IouTracker;
pub use self::kiou::KiouTracker;
pub use self::sort::{DeepSortTracker, SortTracker};

/// How the IOU-family trackers decide whether a finished track is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FinishRule {
    /// Keep when the best score reaches `sigma_h` or the track is long enough.
    #[default]
    Or,
    /// Keep only when both conditions hold.
    And,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IouParams {
    /// Detections scoring below this are dropped before matching.
    pub sigma_l: f64,
    /// Best score a finished track needs.
    pub sigma_h: f64,
    /// Minimum overlap for extending a track.
    pub sigma_iou: f64,
    /// Minimum track length in frames.
    pub min_size: usize,
    pub finish_rule: FinishRule,
}

impl Default for IouParams {
    fn default() -> Self {
        Self {
            sigma_l: 0.0,
            sigma_h: 0.5,
            sigma_iou: 0.5,
            min_size: 2,
            finish_rule: FinishRule::Or,
        }
    }
}

impl IouParams {
    pub fn validate(&self) -> Result<(), TrackError> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(TrackError::InvalidParams(format!("{name} = {v} outside [0, 1]")))
            }
        };
        unit("sigma_l", self.sigma_l)?;
        unit("sigma_h", self.sigma_h)?;
        if self.sigma_l > self.sigma_h {
            return Err(TrackError::InvalidParams(format!(
                "sigma_l ({}) exceeds sigma_h ({})",
                self.sigma_l, self.sigma_h
            )));
        }
        if !(self.sigma_iou > 0.0 && self.sigma_iou <= 1.0) {
            return Err(TrackError::InvalidParams(format!(
                "sigma_iou = {} outside (0, 1]",
                self.sigma_iou
            )));
        }
        if self.min_size == 0 {
            return Err(TrackError::InvalidParams("min_size must be positive".into()));
        }
        Ok(())
    }

    /// Finish rule applied to a track that stopped being extended.
    pub fn keeps(&self, track: &Track) -> bool {
        let confident = track.max_score >= self.sigma_h;
        let long = track.len() >= self.min_size;
        match self.finish_rule {
            FinishRule::Or => confident || long,
            FinishRule::And => confident && long,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KiouParams {
    #[serde(flatten)]
    pub iou: IouParams,
    /// Consecutive processed frames a track may coast on prediction alone.
    pub ttl: u32,
    /// Frames skipped between processed frames; frame `i` is processed when
    /// `i % (skip + 1) == 0`.
    pub skip: u32,
    pub kalman: KalmanConfig,
}

impl Default for KiouParams {
    fn default() -> Self {
        Self {
            iou: IouParams::default(),
            ttl: 3,
            skip: 2,
            kalman: KalmanConfig::default(),
        }
    }
}

impl KiouParams {
    pub fn validate(&self) -> Result<(), TrackError> {
        self.iou.validate()?;
        if self.ttl == 0 {
            return Err(TrackError::InvalidParams("ttl must be at least 1".into()));
        }
        self.kalman.validate().map_err(TrackError::InvalidParams)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SortParams {
    /// Pairs overlapping less than this are never matched.
    pub iou_min: f64,
    /// Consecutive missed frames tolerated before a track is terminated.
    pub max_age: u32,
    /// Measured frames a track needs before it is reported.
    pub min_hits: u32,
    pub kalman: KalmanConfig,
}

impl Default for SortParams {
    fn default() -> Self {
        Self {
            iou_min: 0.3,
            max_age: 1,
            min_hits: 1,
            kalman: KalmanConfig::default(),
        }
    }
}

impl SortParams {
    pub fn validate(&self) -> Result<(), TrackError> {
        if !(self.iou_min > 0.0 && self.iou_min <= 1.0) {
            return Err(TrackError::InvalidParams(format!(
                "iou_min = {} outside (0, 1]",
                self.iou_min
            )));
        }
        if self.max_age == 0 || self.min_hits == 0 {
            return Err(TrackError::InvalidParams(
                "max_age and min_hits must be positive".into(),
            ));
        }
        self.kalman.validate().map_err(TrackError::InvalidParams)
    }
}

/// SORT lifecycle parameters plus the appearance terms. Fields are spelled
/// out rather than nested so partial configs fall back to these defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeepSortParams {
    pub iou_min: f64,
    pub max_age: u32,
    pub min_hits: u32,
    pub kalman: KalmanConfig,
    /// Weight of the motion term in the blended cost.
    pub lambda_motion: f64,
    /// Pairs whose gallery cosine distance exceeds this are never matched.
    pub cos_max: f64,
    /// Embeddings kept per track, oldest evicted first.
    pub gallery_budget: usize,
}

impl Default for DeepSortParams {
    fn default() -> Self {
        Self {
            iou_min: 0.1,
            max_age: 30,
            min_hits: 1,
            kalman: KalmanConfig::default(),
            lambda_motion: 0.5,
            cos_max: 0.4,
            gallery_budget: 100,
        }
    }
}

impl DeepSortParams {
    /// The motion and lifecycle part of the parameters.
    pub fn sort(&self) -> SortParams {
        SortParams {
            iou_min: self.iou_min,
            max_age: self.max_age,
            min_hits: self.min_hits,
            kalman: self.kalman,
        }
    }

    pub fn with_sort(mut self, sort: SortParams) -> Self {
        self.iou_min = sort.iou_min;
        self.max_age = sort.max_age;
        self.min_hits = sort.min_hits;
        self.kalman = sort.kalman;
        self
    }

    pub fn validate(&self) -> Result<(), TrackError> {
        self.sort().validate()?;
        if !(0.0..=1.0).contains(&self.lambda_motion) {
            return Err(TrackError::InvalidParams(format!(
                "lambda_motion = {} outside [0, 1]",
                self.lambda_motion
            )));
        }
        if !(0.0..=1.0).contains(&self.cos_max) {
            return Err(TrackError::InvalidParams(format!(
                "cos_max = {} outside [0, 1]",
                self.cos_max
            )));
        }
        if self.gallery_budget == 0 {
            return Err(TrackError::InvalidParams(
                "gallery_budget must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackerKind {
    Iou,
    Kiou,
    Sort,
    DeepSort,
}

impl TrackerKind {
    pub const ALL: [TrackerKind; 4] = [
        TrackerKind::Iou,
        TrackerKind::Kiou,
        TrackerKind::Sort,
        TrackerKind::DeepSort,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TrackerKind::Iou => "iou",
            TrackerKind::Kiou => "kiou",
            TrackerKind::Sort => "sort",
            TrackerKind::DeepSort => "deepsort",
        }
    }

    /// Human-readable name used in comparison tables.
    pub fn display_name(&self) -> &'static str {
        match self {
            TrackerKind::Iou => "IOU",
            TrackerKind::Kiou => "KIOU",
            TrackerKind::Sort => "SORT",
            TrackerKind::DeepSort => "Deep SORT",
        }
    }

    pub fn default_config(&self) -> TrackerConfig {
        match self {
            TrackerKind::Iou => TrackerConfig::Iou(IouParams::default()),
            TrackerKind::Kiou => TrackerConfig::Kiou(KiouParams::default()),
            TrackerKind::Sort => TrackerConfig::Sort(SortParams::default()),
            TrackerKind::DeepSort => TrackerConfig::DeepSort(DeepSortParams::default()),
        }
    }
}

impl fmt::Display for TrackerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrackerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "iou" => Ok(TrackerKind::Iou),
            "kiou" => Ok(TrackerKind::Kiou),
            "sort" => Ok(TrackerKind::Sort),
            "deepsort" | "deep-sort" | "deep_sort" => Ok(TrackerKind::DeepSort),
            other => Err(format!(
                "unknown tracker kind `{other}` (expected iou, kiou, sort or deepsort)"
            )),
        }
    }
}

/// A tracker kind together with its parameter block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum TrackerConfig {
    Iou(IouParams),
    Kiou(KiouParams),
    Sort(SortParams),
    DeepSort(DeepSortParams),
}

impl TrackerConfig {
    pub fn kind(&self) -> TrackerKind {
        match self {
            TrackerConfig::Iou(_) => TrackerKind::Iou,
            TrackerConfig::Kiou(_) => TrackerKind::Kiou,
            TrackerConfig::Sort(_) => TrackerKind::Sort,
            TrackerConfig::DeepSort(_) => TrackerKind::DeepSort,
        }
    }

    pub fn validate(&self) -> Result<(), TrackError> {
        match self {
            TrackerConfig::Iou(p) => p.validate(),
            TrackerConfig::Kiou(p) => p.validate(),
            TrackerConfig::Sort(p) => p.validate(),
            TrackerConfig::DeepSort(p) => p.validate(),
        }
    }

    /// Overrides the finish rule where the tracker has one.
    pub fn with_finish_rule(mut self, rule: FinishRule) -> Self {
        match &mut self {
            TrackerConfig::Iou(p) => p.finish_rule = rule,
            TrackerConfig::Kiou(p) => p.iou.finish_rule = rule,
            TrackerConfig::Sort(_) | TrackerConfig::DeepSort(_) => {}
        }
        self
    }

    pub fn build(&self) -> Result<Box<dyn Tracker>, TrackError> {
        self.validate()?;
        Ok(match *self {
            TrackerConfig::Iou(p) => Box::new(IouTracker::new(p)?),
            TrackerConfig::Kiou(p) => Box::new(KiouTracker::new(p)?),
            TrackerConfig::Sort(p) => Box::new(SortTracker::new(p)?),
            TrackerConfig::DeepSort(p) => Box::new(DeepSortTracker::new(p)?),
        })
    }
}

/// Common interface of the tracking state machines.
pub trait Tracker: Send {
    /// Consumes the next frame. Frames must arrive with increasing index.
    fn step(&mut self, frame: &Frame) -> Result<(), TrackError>;

    /// Closes every active track and returns all finished tracks sorted by id.
    /// Calling it again returns the same list.
    fn flush(&mut self) -> Vec<Track>;

    /// Number of track ids handed out so far.
    fn tracks_created(&self) -> u64;
}

/// Runs a tracker over a whole stream.
pub fn run_tracker(config: &TrackerConfig, frames: &[Frame]) -> Result<Vec<Track>, TrackError> {
    let mut tracker = config.build()?;
    for frame in frames {
        tracker.step(frame)?;
    }
    Ok(tracker.flush())
}

/// Sequencing guard shared by the trackers.
#[derive(Debug, Clone, Default)]
pub(crate) struct FrameClock {
    last: Option<u64>,
}

impl FrameClock {
    /// Records `index` and returns the number of frames elapsed since the
    /// previous one (1 for the first frame).
    pub(crate) fn advance(&mut self, index: u64) -> Result<u64, TrackError> {
        let elapsed = match self.last {
            Some(last) if index <= last => {
                return Err(TrackError::OutOfOrder { index, last });
            }
            Some(last) => index - last,
            None => 1,
        };
        self.last = Some(index);
        Ok(elapsed)
    }
}

pub(crate) fn sorted_by_id(tracks: &[Track]) -> Vec<Track> {
    let mut out = tracks.to_vec();
    out.sort_by_key(|t| t.id);
    out
}

/// Greedy non-maximum suppression: a detection overlapping a higher-scoring
/// kept detection by more than `iou_threshold` is dropped. Survivors keep
/// their original order.
pub fn suppress_duplicates(frame: &Frame, iou_threshold: f64) -> Frame {
    let dets = &frame.detections;
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score).then(a.cmp(&b)));
    let mut keep = vec![false; dets.len()];
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        if kept
            .iter()
            .all(|&k| geometry::iou(&dets[k].bbox, &dets[i].bbox) <= iou_threshold)
        {
            keep[i] = true;
            kept.push(i);
        }
    }
    Frame {
        index: frame.index,
        timestamp_ms: frame.timestamp_ms,
        detections: dets
            .iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(d, _)| d.clone())
            .collect(),
    }
}

/// Default IOU above which the optional pre-pass merges detections.
pub const NMS_IOU: f64 = 0.9;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BoundingBox, Detection, VehicleClass};

    fn det(x: f64, score: f64) -> Detection {
        Detection::new(
            BoundingBox::new(x, 0.0, x + 10.0, 10.0).unwrap(),
            VehicleClass::Car,
            score,
        )
        .unwrap()
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("deepsort".parse::<TrackerKind>(), Ok(TrackerKind::DeepSort));
        assert_eq!("KIOU".parse::<TrackerKind>(), Ok(TrackerKind::Kiou));
        assert!("bytetrack".parse::<TrackerKind>().is_err());
    }

    #[test]
    fn params_validation() {
        let bad = IouParams {
            sigma_l: 0.6,
            sigma_h: 0.5,
            ..IouParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = IouParams {
            sigma_iou: 0.0,
            ..IouParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = KiouParams {
            ttl: 0,
            ..KiouParams::default()
        };
        assert!(bad.validate().is_err());
        let mut bad = DeepSortParams::default();
        bad.gallery_budget = 0;
        assert!(bad.validate().is_err());
        for kind in TrackerKind::ALL {
            assert!(kind.default_config().validate().is_ok());
        }
    }

    #[test]
    fn config_serde_shape() {
        let cfg = TrackerConfig::Sort(SortParams::default());
        let json = serde_json::to_value(cfg).unwrap();
        assert_eq!(json["kind"], "sort");
        assert_eq!(json["params"]["max_age"], 1);
        let partial: TrackerConfig =
            serde_json::from_str(r#"{"kind":"deepsort","params":{"cos_max":0.2}}"#).unwrap();
        match partial {
            TrackerConfig::DeepSort(p) => {
                assert_eq!(p.cos_max, 0.2);
                assert_eq!(p.gallery_budget, 100);
                assert_eq!(p.max_age, 30);
                assert_eq!(p.iou_min, 0.1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_stream_gives_no_tracks() {
        for kind in TrackerKind::ALL {
            assert!(run_tracker(&kind.default_config(), &[]).unwrap().is_empty());
        }
    }

    #[test]
    fn out_of_order_frames_rejected() {
        for kind in TrackerKind::ALL {
            let mut t = kind.default_config().build().unwrap();
            t.step(&Frame::new(5, vec![])).unwrap();
            assert_eq!(
                t.step(&Frame::new(5, vec![])),
                Err(TrackError::OutOfOrder { index: 5, last: 5 })
            );
        }
    }

    #[test]
    fn nms_keeps_best_of_near_duplicates() {
        let frame = Frame::new(0, vec![det(0.0, 0.5), det(0.1, 0.9), det(50.0, 0.3)]);
        let out = suppress_duplicates(&frame, NMS_IOU);
        assert_eq!(out.detections.len(), 2);
        assert_eq!(out.detections[0].score, 0.9);
        assert_eq!(out.detections[1].score, 0.3);
    }
}

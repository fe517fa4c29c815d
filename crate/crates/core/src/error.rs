use thiserror::Error;

/// Errors raised while reading or validating the detection and track wire formats.
#[derive(Debug, Error, PartialEq)]
pub enum StreamError {
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: non-monotone frame index ({index} after {previous})")]
    NonMonotoneFrame {
        line: usize,
        previous: u64,
        index: u64,
    },
    #[error("line {line}: embedding has {len} components, expected {expected}")]
    EmbeddingLength {
        line: usize,
        len: usize,
        expected: usize,
    },
    #[error("line {line}: embedding norm {norm} cannot be normalized")]
    EmbeddingNorm { line: usize, norm: f64 },
    #[error("line {line}: invalid detection: {source}")]
    InvalidValue {
        line: usize,
        #[source]
        source: ModelError,
    },
    #[error("i/o failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for StreamError {
    fn from(e: std::io::Error) -> Self {
        StreamError::Io(e.to_string())
    }
}

/// Domain invariant violations for the core value types.
#[derive(Debug, Error, PartialEq, Clone)]
pub enum ModelError {
    #[error("bounding box has non-finite coordinate")]
    NonFiniteBox,
    #[error("bounding box has zero or negative area: ({0}, {1}, {2}, {3})")]
    DegenerateBox(f64, f64, f64, f64),
    #[error("score {0} outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("unknown vehicle class `{0}`")]
    UnknownClass(String),
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon has non-finite vertex")]
    NonFiniteVertex,
    #[error("polygon encloses zero area")]
    ZeroAreaPolygon,
    #[error("polygon edges {0} and {1} intersect")]
    SelfIntersecting(usize, usize),
}

/// Errors produced by the Kalman motion model.
#[derive(Debug, Error, PartialEq, Clone)]
pub enum KalmanError {
    #[error("degenerate state: area {area}, aspect ratio {aspect}")]
    DegenerateState { area: f64, aspect: f64 },
    #[error("innovation covariance is numerically singular")]
    SingularInnovation,
}

/// Errors raised by the tracker state machines.
#[derive(Debug, Error, PartialEq, Clone)]
pub enum TrackError {
    #[error("frame {index} arrived after frame {last}")]
    OutOfOrder { index: u64, last: u64 },
    #[error("invalid tracker parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Kalman(#[from] KalmanError),
}

/// Zone and counting configuration errors.
#[derive(Debug, Error, PartialEq, Clone)]
pub enum CountError {
    #[error("zone `{name}`: {source}")]
    InvalidZone {
        name: String,
        #[source]
        source: ModelError,
    },
    #[error("zones `{a}` and `{b}` have different directions but overlap")]
    OverlappingZones { a: String, b: String },
    #[error("malformed {what}: {message}")]
    Malformed { what: &'static str, message: String },
}

/// Scenario configuration errors from the simulator.
#[derive(Debug, Error, PartialEq, Clone)]
pub enum SynthError {
    #[error("lane `{lane}`: {message}")]
    Lane { lane: String, message: String },
    #[error("spawn {index}: {message}")]
    Spawn { index: usize, message: String },
    #[error("invalid noise model: {0}")]
    Noise(String),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

/// Failures of the evaluation harness.
#[derive(Debug, Error, PartialEq, Clone)]
pub enum EvalError {
    #[error("stream `{stream}` with {tracker}: {source}")]
    Track {
        stream: String,
        tracker: String,
        #[source]
        source: TrackError,
    },
    #[error(transparent)]
    Count(#[from] CountError),
    #[error("invalid heat-map grid: {0}")]
    Grid(String),
    #[error("malformed comparison table: {0}")]
    Table(String),
}

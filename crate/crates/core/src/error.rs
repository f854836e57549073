use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the pipeline can report.
#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("input is not valid UTF-8: {0}")]
    Encoding(String),

    #[error("track point {index} has no <time> element")]
    MissingTimestamp { index: usize },

    #[error("track point {index} is earlier than the point before it")]
    NonMonotoneTrack { index: usize },

    #[error("track contains no points")]
    EmptyTrack,

    #[error("track has {points} point(s); at least 2 are required")]
    TrackTooShort { points: usize },

    #[error("coordinate out of range: lat {lat}, lon {lon}")]
    InvalidCoordinate { lat: f64, lon: f64 },

    #[error("negative timestamp: {0} ms")]
    NegativeTimestamp(i64),

    #[error("transcript contains no segments")]
    EmptyTranscript,

    #[error("fps must be a positive finite number, got {0}")]
    InvalidFps(f64),

    #[error("anchored time {millis} ms is before the Unix epoch")]
    InvalidAnchor { millis: i64 },

    #[error("bearing undefined between coincident points")]
    DegenerateBearing,

    #[error("time {t} ms is outside the track span [{first}, {last}] beyond tolerance")]
    OutOfTrackSpan { t: i64, first: i64, last: i64 },

    #[error("instruction text is empty")]
    EmptyInstruction,

    #[error("lexicon error at {path}: {message}")]
    Lexicon { path: String, message: String },

    #[error("time is before the video start")]
    BeforeVideoStart,

    #[error("frame {index} is past the last frame (frame_count {frame_count})")]
    AfterVideoEnd { index: u64, frame_count: u64 },

    #[error("no usable instruction events")]
    NoUsableEvents,

    #[error("not enough non-degenerate points to measure a bearing change")]
    InsufficientGeometry,

    #[error("internal ordering error: {0}")]
    InternalOrdering(String),

    #[error("invalid route plan: {0}")]
    InvalidPlan(String),

    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable name of the variant, used in CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "ParseError",
            Error::Encoding(_) => "EncodingError",
            Error::MissingTimestamp { .. } => "MissingTimestamp",
            Error::NonMonotoneTrack { .. } => "NonMonotoneTrack",
            Error::EmptyTrack => "EmptyTrack",
            Error::TrackTooShort { .. } => "TrackTooShort",
            Error::InvalidCoordinate { .. } => "InvalidCoordinate",
            Error::NegativeTimestamp(_) => "NegativeTimestamp",
            Error::EmptyTranscript => "EmptyTranscript",
            Error::InvalidFps(_) => "InvalidFps",
            Error::InvalidAnchor { .. } => "InvalidAnchor",
            Error::DegenerateBearing => "DegenerateBearing",
            Error::OutOfTrackSpan { .. } => "OutOfTrackSpan",
            Error::EmptyInstruction => "EmptyInstruction",
            Error::Lexicon { .. } => "LexiconError",
            Error::BeforeVideoStart => "BeforeVideoStart",
            Error::AfterVideoEnd { .. } => "AfterVideoEnd",
            Error::NoUsableEvents => "NoUsableEvents",
            Error::InsufficientGeometry => "InsufficientGeometry",
            Error::InternalOrdering(_) => "InternalOrderingError",
            Error::InvalidPlan(_) => "InvalidPlan",
            Error::Schema { .. } => "SchemaError",
            Error::Io { .. } => "IoError",
        }
    }
}

use serde_json::{Map, Value};

use super::decode_utf8;
use crate::error::{Error, Result};
use crate::model::Timestamp;

/// Maps wall time onto frame numbers for one recorded video. The media file
/// itself is never opened.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VideoIndex {
    start: Timestamp,
    fps: f64,
    frame_count: u64,
}

impl VideoIndex {
    pub fn new(start: Timestamp, fps: f64, frame_count: u64) -> Result<Self> {
        if !fps.is_finite() || fps <= 0.0 {
            return Err(Error::InvalidFps(fps));
        }
        Ok(VideoIndex {
            start,
            fps,
            frame_count,
        })
    }

    pub fn start(&self) -> Timestamp {
        self.start
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn frame_count(&self) -> u64 {
        self.frame_count
    }

    pub fn shifted(&self, offset_ms: i64) -> Result<VideoIndex> {
        Ok(VideoIndex {
            start: self.start.offset(offset_ms)?,
            ..*self
        })
    }
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value> {
    obj.get(name)
        .ok_or_else(|| Error::parse(name, "missing field"))
}

/// Reads a `{"start_time", "fps", "frame_count"}` sidecar.
pub fn parse_video_meta(bytes: &[u8]) -> Result<VideoIndex> {
    let text = decode_utf8(bytes)?;
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::parse("video-meta", e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::parse("video-meta", "expected a JSON object"))?;

    let start = field(obj, "start_time")?
        .as_str()
        .ok_or_else(|| Error::parse("start_time", "expected an ISO-8601 string"))
        .and_then(|s| {
            Timestamp::parse_iso8601(s).map_err(|e| Error::parse("start_time", e.to_string()))
        })?;
    let fps = field(obj, "fps")?
        .as_f64()
        .ok_or_else(|| Error::parse("fps", "expected a number"))?;
    let frame_count = field(obj, "frame_count")?
        .as_u64()
        .ok_or_else(|| Error::parse("frame_count", "expected a non-negative integer"))?;
    VideoIndex::new(start, fps, frame_count)
}

pub fn write_video_meta(video: &VideoIndex) -> String {
    let mut doc = Map::new();
    doc.insert("start_time".into(), Value::String(video.start.to_iso8601()));
    doc.insert(
        "fps".into(),
        serde_json::Number::from_f64(video.fps)
            .map(Value::Number)
            .expect("fps is finite"),
    );
    doc.insert("frame_count".into(), Value::from(video.frame_count));
    let mut out = serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON value");
    out.push('\n');
    out
}

//! Fuses the language, action and vision streams into instruction events.

use serde::{Deserialize, Serialize};

use crate::classify::{classify, ClassSet, Evidence, Lexicon};
use crate::error::{Error, Result};
use crate::ingest::{absolutize, Transcript, VideoIndex};
use crate::model::{GeoPoint, Heading, Timestamp};
use crate::track::{TrackLog, DEFAULT_SPAN_TOLERANCE_MS};

/// Per-stream clock corrections, added to each stream's native timestamps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamOffsets {
    pub gps_offset_ms: i64,
    pub audio_offset_ms: i64,
    pub video_offset_ms: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncConfig {
    /// How far outside the track span an instruction may fall and still be kept.
    pub tolerance_ms: i64,
}

impl Default for SyncConfig {
    fn default() -> Self {
        SyncConfig {
            tolerance_ms: DEFAULT_SPAN_TOLERANCE_MS,
        }
    }
}

/// One spoken instruction anchored in time, space and video.
#[derive(Debug, Clone, PartialEq)]
pub struct InstructionEvent {
    pub id: usize,
    pub t: Timestamp,
    pub text: String,
    pub classes: ClassSet,
    pub evidence: Vec<Evidence>,
    pub geo: GeoPoint,
    pub heading: Heading,
    pub frame_index: Option<u64>,
    pub warnings: Vec<String>,
}

/// Events plus the warnings for transcript segments that did not become events.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSet {
    pub events: Vec<InstructionEvent>,
    pub warnings: Vec<String>,
}

/// `floor((t - start) * fps / 1000)`. With `clamp`, times past the last frame
/// map to the last frame.
pub fn frame_index_at(video: &VideoIndex, t: Timestamp, clamp: bool) -> Result<u64> {
    if t < video.start() {
        return Err(Error::BeforeVideoStart);
    }
    let elapsed_ms = (t.millis() - video.start().millis()) as f64;
    let index = (elapsed_ms * video.fps() / 1000.0).floor() as u64;
    if index >= video.frame_count() {
        if clamp && video.frame_count() > 0 {
            return Ok(video.frame_count() - 1);
        }
        return Err(Error::AfterVideoEnd {
            index,
            frame_count: video.frame_count(),
        });
    }
    Ok(index)
}

/// Builds one event per transcript segment: classified text, interpolated
/// position and heading, and the video frame at the instruction onset.
///
/// Segments outside the track span (beyond the tolerance) or without any
/// classifiable text are dropped and reported in `EventSet::warnings`.
pub fn build_events(
    transcript: &Transcript,
    track: &TrackLog,
    video: Option<&VideoIndex>,
    lex: &Lexicon,
    offsets: StreamOffsets,
    audio_start: Timestamp,
    config: SyncConfig,
) -> Result<EventSet> {
    let track = track.shifted(offsets.gps_offset_ms)?;
    let video = video
        .map(|v| v.shifted(offsets.video_offset_ms))
        .transpose()?;
    let anchored = absolutize(transcript, audio_start, offsets.audio_offset_ms)?;

    let mut events = Vec::with_capacity(anchored.len());
    let mut warnings = Vec::new();
    for (i, (t, text)) in anchored.into_iter().enumerate() {
        let geo = match track.interpolate_position(t, config.tolerance_ms) {
            Ok(g) => g,
            Err(Error::OutOfTrackSpan { first, last, .. }) => {
                warnings.push(format!(
                    "segment {i} at {t} is outside the track span {}..{} (tolerance {} ms); dropped",
                    Timestamp::from_millis(first)?,
                    Timestamp::from_millis(last)?,
                    config.tolerance_ms
                ));
                continue;
            }
            Err(e) => return Err(e),
        };
        let classification = match classify(&text, lex) {
            Ok(c) => c,
            Err(Error::EmptyInstruction) => {
                warnings.push(format!("segment {i} has no classifiable text; dropped"));
                continue;
            }
            Err(e) => return Err(e),
        };

        let mut event_warnings = Vec::new();
        if t < track.start() || t > track.end() {
            event_warnings.push("position clamped to the nearest track endpoint".to_owned());
        }
        let heading = match track.heading_at(t, config.tolerance_ms) {
            Ok(b) => Heading::Bearing(b),
            Err(Error::DegenerateBearing) => {
                event_warnings.push("vehicle stationary; heading undefined".to_owned());
                Heading::Degenerate
            }
            Err(e) => return Err(e),
        };
        let frame_index = match &video {
            Some(v) => match frame_index_at(v, t, false) {
                Ok(f) => Some(f),
                Err(e) => {
                    event_warnings.push(format!("no video frame: {e}"));
                    None
                }
            },
            None => None,
        };

        events.push(InstructionEvent {
            id: 0,
            t,
            text,
            classes: classification.classes,
            evidence: classification.evidence,
            geo,
            heading,
            frame_index,
            warnings: event_warnings,
        });
    }

    if events.is_empty() {
        return Err(Error::NoUsableEvents);
    }
    events.sort_by_key(|e| e.t);
    for (id, e) in events.iter_mut().enumerate() {
        e.id = id;
    }
    Ok(EventSet { events, warnings })
}

//! Parsers for the three input streams: GPX track logs, instruction
//! transcripts and video metadata sidecars.
//!
//! Every parser is a pure function of its input bytes.

mod gpx;
mod transcript;
mod video;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use gpx::{parse_gpx, write_gpx};
pub use transcript::{parse_transcript, write_segment_json, write_srt};
pub use video::{parse_video_meta, write_video_meta, VideoIndex};

use crate::error::{Error, Result};
use crate::model::Timestamp;

/// Upper bound on a segment time, about 31 years of audio.
const MAX_SEGMENT_SECONDS: f64 = 1e9;

/// One timestamped piece of transcribed speech. Times are kept in integer
/// milliseconds relative to the start of the audio.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptSegment {
    start_ms: i64,
    end_ms: i64,
    text: String,
}

impl TranscriptSegment {
    /// Text is trimmed; empty text and inverted times are rejected.
    pub fn new(start_ms: i64, end_ms: i64, text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::parse("segment", "empty text"));
        }
        if start_ms < 0 || end_ms < start_ms {
            return Err(Error::parse(
                "segment",
                format!("invalid time range {start_ms}..{end_ms} ms"),
            ));
        }
        Ok(TranscriptSegment {
            start_ms,
            end_ms,
            text: text.to_owned(),
        })
    }

    pub fn start_ms(&self) -> i64 {
        self.start_ms
    }

    pub fn end_ms(&self) -> i64 {
        self.end_ms
    }

    pub fn start_s(&self) -> f64 {
        self.start_ms as f64 / 1000.0
    }

    pub fn end_s(&self) -> f64 {
        self.end_ms as f64 / 1000.0
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

/// The language stream: ordered, non-overlapping segments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    segments: Vec<TranscriptSegment>,
    audio_start: Option<Timestamp>,
}

impl Transcript {
    /// Sorts by start time and merges overlapping segments. Fails on an empty list.
    pub fn new(segments: Vec<TranscriptSegment>, audio_start: Option<Timestamp>) -> Result<Self> {
        Ok(Transcript {
            segments: normalize_segments(segments)?,
            audio_start,
        })
    }

    pub fn segments(&self) -> &[TranscriptSegment] {
        &self.segments
    }

    pub fn audio_start(&self) -> Option<Timestamp> {
        self.audio_start
    }

    pub fn with_audio_start(mut self, audio_start: Option<Timestamp>) -> Self {
        self.audio_start = audio_start;
        self
    }
}

fn normalize_segments(mut segments: Vec<TranscriptSegment>) -> Result<Vec<TranscriptSegment>> {
    if segments.is_empty() {
        return Err(Error::EmptyTranscript);
    }
    segments.sort_by_key(|s| (s.start_ms, s.end_ms));
    let mut merged: Vec<TranscriptSegment> = Vec::with_capacity(segments.len());
    for seg in segments {
        match merged.last_mut() {
            Some(prev) if seg.start_ms < prev.end_ms => {
                prev.end_ms = prev.end_ms.max(seg.end_ms);
                prev.text.push(' ');
                prev.text.push_str(&seg.text);
            }
            _ => merged.push(seg),
        }
    }
    Ok(merged)
}

/// Converts a seconds value from an input file into integer milliseconds.
pub(crate) fn seconds_to_ms(seconds: f64, location: impl FnOnce() -> String) -> Result<i64> {
    if !seconds.is_finite() || !(0.0..=MAX_SEGMENT_SECONDS).contains(&seconds) {
        return Err(Error::parse(
            location(),
            format!("time {seconds} s is not a non-negative finite value"),
        ));
    }
    Ok((seconds * 1000.0).round() as i64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TranscriptFormat {
    SegmentJson,
    Srt,
    PlainLines,
}

impl TranscriptFormat {
    pub const ALL: [TranscriptFormat; 3] = [
        TranscriptFormat::SegmentJson,
        TranscriptFormat::Srt,
        TranscriptFormat::PlainLines,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TranscriptFormat::SegmentJson => "segment-json",
            TranscriptFormat::Srt => "srt",
            TranscriptFormat::PlainLines => "plain-lines",
        }
    }
}

impl fmt::Display for TranscriptFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TranscriptFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        TranscriptFormat::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown transcript format {s:?}"))
    }
}

/// Anchors each segment's start on the wall clock:
/// `audio_start + start_ms + offset_ms`.
pub fn absolutize(
    transcript: &Transcript,
    audio_start: Timestamp,
    offset_ms: i64,
) -> Result<Vec<(Timestamp, String)>> {
    transcript
        .segments()
        .iter()
        .map(|seg| {
            let t = seg
                .start_ms
                .checked_add(offset_ms)
                .and_then(|d| audio_start.millis().checked_add(d))
                .ok_or(Error::InvalidAnchor { millis: i64::MAX })?;
            let t = Timestamp::from_millis(t).map_err(|_| Error::InvalidAnchor { millis: t })?;
            Ok((t, seg.text.clone()))
        })
        .collect()
}

pub(crate) fn decode_utf8(bytes: &[u8]) -> Result<&str> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::Encoding(format!("invalid UTF-8 at byte {}", e.valid_up_to())))?;
    Ok(text.strip_prefix('\u{feff}').unwrap_or(text))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seg(a: i64, b: i64, text: &str) -> TranscriptSegment {
        TranscriptSegment::new(a, b, text).unwrap()
    }

    #[test]
    fn overlapping_segments_merge() {
        let t = Transcript::new(
            vec![
                seg(4000, 6000, "turn right"),
                seg(3000, 5000, "in 500 feet"),
            ],
            None,
        )
        .unwrap();
        assert_eq!(t.segments(), &[seg(3000, 6000, "in 500 feet turn right")]);
    }

    #[test]
    fn touching_segments_stay_separate() {
        let t = Transcript::new(vec![seg(0, 1000, "a"), seg(1000, 2000, "b")], None).unwrap();
        assert_eq!(t.segments().len(), 2);
    }

    #[test]
    fn empty_transcript_rejected() {
        assert!(matches!(
            Transcript::new(vec![], None),
            Err(Error::EmptyTranscript)
        ));
    }

    #[test]
    fn absolutize_examples() {
        let t = Transcript::new(vec![seg(2000, 4500, "Turn left.")], None).unwrap();
        let anchor = Timestamp::from_millis(1_000_000).unwrap();
        assert_eq!(absolutize(&t, anchor, 0).unwrap()[0].0.millis(), 1_002_000);
        assert_eq!(
            absolutize(&t, anchor, -500).unwrap()[0].0.millis(),
            1_001_500
        );

        let t0 = Transcript::new(vec![seg(0, 10, "x")], None).unwrap();
        assert!(matches!(
            absolutize(&t0, Timestamp::EPOCH, -1),
            Err(Error::InvalidAnchor { millis: -1 })
        ));
    }

    #[test]
    fn format_names_round_trip() {
        for f in TranscriptFormat::ALL {
            assert_eq!(f.as_str().parse::<TranscriptFormat>().unwrap(), f);
        }
        assert!("vtt".parse::<TranscriptFormat>().is_err());
    }

    proptest! {
        #[test]
        fn absolutize_is_translation_equivariant(
            starts in prop::collection::vec(0i64..1_000_000, 1..10),
            anchor in 0i64..1_000_000_000,
            k in 0i64..1_000_000,
            offset in -1000i64..1000,
        ) {
            let segs = starts.iter().enumerate().map(|(i, &s)| seg(s, s, &format!("s{i}"))).collect();
            let t = Transcript::new(segs, None).unwrap();
            let base = Timestamp::from_millis(anchor + 1000).unwrap();
            let shifted = Timestamp::from_millis(anchor + 1000 + k).unwrap();
            let a = absolutize(&t, base, offset).unwrap();
            let b = absolutize(&t, shifted, offset).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert_eq!(x.0.millis() + k, y.0.millis());
                prop_assert_eq!(&x.1, &y.1);
            }
            for w in a.windows(2) {
                prop_assert!(w[0].0 <= w[1].0);
            }
        }
    }
}

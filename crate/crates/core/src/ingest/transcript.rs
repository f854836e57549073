use std::fmt::Write as _;

use serde::Deserialize;
use serde_json::Value;

use super::{decode_utf8, seconds_to_ms, Transcript, TranscriptFormat, TranscriptSegment};
use crate::error::{Error, Result};
use crate::model::Timestamp;

/// Parses a transcript in the given format. Segments with blank text are
/// skipped; the rest are sorted and overlapping ones merged.
pub fn parse_transcript(bytes: &[u8], format: TranscriptFormat) -> Result<Transcript> {
    let text = decode_utf8(bytes)?;
    let (segments, audio_start) = match format {
        TranscriptFormat::SegmentJson => parse_segment_json(text)?,
        TranscriptFormat::Srt => (parse_srt(text)?, None),
        TranscriptFormat::PlainLines => (parse_plain_lines(text)?, None),
    };
    Transcript::new(segments, audio_start)
}

#[derive(Deserialize)]
struct SegmentDoc {
    segments: Vec<Value>,
    #[serde(default)]
    audio_start: Option<String>,
}

#[derive(Deserialize)]
struct RawSegment {
    start: f64,
    end: f64,
    text: String,
}

fn push_segment(
    out: &mut Vec<TranscriptSegment>,
    start_ms: i64,
    end_ms: i64,
    text: &str,
    location: impl Fn() -> String,
) -> Result<()> {
    if text.trim().is_empty() {
        return Ok(());
    }
    if end_ms < start_ms {
        return Err(Error::parse(location(), "end is before start"));
    }
    out.push(TranscriptSegment::new(start_ms, end_ms, text)?);
    Ok(())
}

fn parse_segment_json(text: &str) -> Result<(Vec<TranscriptSegment>, Option<Timestamp>)> {
    let doc: SegmentDoc =
        serde_json::from_str(text).map_err(|e| Error::parse("segment-json", e.to_string()))?;
    let audio_start = doc
        .audio_start
        .as_deref()
        .map(Timestamp::parse_iso8601)
        .transpose()
        .map_err(|e| Error::parse("audio_start", e.to_string()))?;
    let mut out = Vec::with_capacity(doc.segments.len());
    for (i, value) in doc.segments.into_iter().enumerate() {
        let loc = || format!("segments[{i}]");
        let raw: RawSegment =
            serde_json::from_value(value).map_err(|e| Error::parse(loc(), e.to_string()))?;
        let start = seconds_to_ms(raw.start, loc)?;
        let end = seconds_to_ms(raw.end, loc)?;
        push_segment(&mut out, start, end, &raw.text, loc)?;
    }
    Ok((out, audio_start))
}

/// `HH:MM:SS,mmm`; a dot is accepted in place of the comma.
fn parse_srt_time(raw: &str) -> Option<i64> {
    let (hms, frac) = raw.trim().split_once([',', '.'])?;
    let mut parts = hms.split(':');
    let (h, m, s) = (parts.next()?, parts.next()?, parts.next()?);
    if parts.next().is_some() || frac.is_empty() || frac.len() > 3 {
        return None;
    }
    let num = |x: &str| -> Option<i64> {
        if x.is_empty() || x.len() > 6 || !x.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        x.parse().ok()
    };
    let (h, m, s) = (num(h)?, num(m)?, num(s)?);
    if m >= 60 || s >= 60 {
        return None;
    }
    let ms = num(frac)? * 10i64.pow(3 - frac.len() as u32);
    Some(((h * 60 + m) * 60 + s) * 1000 + ms)
}

fn parse_srt_timing(line: &str) -> Option<(i64, i64)> {
    let (a, b) = line.split_once("-->")?;
    // anything after the end time (cue position settings) is ignored
    let b = b.split_whitespace().next()?;
    Some((parse_srt_time(a)?, parse_srt_time(b)?))
}

fn parse_srt(text: &str) -> Result<Vec<TranscriptSegment>> {
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        if lines[i].trim().is_empty() {
            i += 1;
            continue;
        }
        let block_line = i + 1;
        let is_index = lines[i].trim().bytes().all(|b| b.is_ascii_digit());
        if is_index && !lines[i].contains("-->") {
            i += 1;
        }
        let timing_line = i + 1;
        let (start, end) = lines
            .get(i)
            .and_then(|l| parse_srt_timing(l))
            .ok_or_else(|| {
                Error::parse(
                    format!("line {timing_line}"),
                    "expected HH:MM:SS,mmm --> HH:MM:SS,mmm",
                )
            })?;
        i += 1;
        let mut body: Vec<&str> = Vec::new();
        while i < lines.len() && !lines[i].trim().is_empty() {
            body.push(lines[i].trim());
            i += 1;
        }
        push_segment(&mut out, start, end, &body.join(" "), || {
            format!("block at line {block_line}")
        })?;
    }
    Ok(out)
}

fn parse_plain_lines(text: &str) -> Result<Vec<TranscriptSegment>> {
    let mut out: Vec<TranscriptSegment> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let loc = || format!("line {}", n + 1);
        if !line.contains('\t') {
            // untimed sentence: zero-length, right after the previous segment
            let at = out.last().map_or(0, |s| s.end_ms());
            push_segment(&mut out, at, at, line, loc)?;
            continue;
        }
        let mut fields = line.splitn(3, '\t');
        let (start, end, body) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return Err(Error::parse(loc(), "expected start<TAB>end<TAB>text")),
        };
        let secs = |raw: &str| {
            raw.trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(loc(), format!("bad time {raw:?}")))
        };
        let start = seconds_to_ms(secs(start)?, loc)?;
        let end = seconds_to_ms(secs(end)?, loc)?;
        push_segment(&mut out, start, end, body, loc)?;
    }
    Ok(out)
}

fn ms_to_seconds_json(ms: i64) -> Value {
    serde_json::Number::from_f64(ms as f64 / 1000.0)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// Serializes to the segment-json layout, including `audio_start` when set.
pub fn write_segment_json(transcript: &Transcript) -> String {
    let segments: Vec<Value> = transcript
        .segments()
        .iter()
        .map(|s| {
            serde_json::json!({
                "start": ms_to_seconds_json(s.start_ms()),
                "end": ms_to_seconds_json(s.end_ms()),
                "text": s.text(),
            })
        })
        .collect();
    let mut doc = serde_json::Map::new();
    if let Some(t) = transcript.audio_start() {
        doc.insert("audio_start".into(), Value::String(t.to_iso8601()));
    }
    doc.insert("segments".into(), Value::Array(segments));
    let mut out = serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON value");
    out.push('\n');
    out
}

fn fmt_srt_time(ms: i64) -> String {
    let (h, rem) = (ms / 3_600_000, ms % 3_600_000);
    let (m, rem) = (rem / 60_000, rem % 60_000);
    let (s, ms) = (rem / 1000, rem % 1000);
    format!("{h:02}:{m:02}:{s:02},{ms:03}")
}

pub fn write_srt(transcript: &Transcript) -> String {
    let mut out = String::new();
    for (i, s) in transcript.segments().iter().enumerate() {
        let _ = write!(
            out,
            "{}\n{} --> {}\n{}\n\n",
            i + 1,
            fmt_srt_time(s.start_ms()),
            fmt_srt_time(s.end_ms()),
            s.text()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str, f: TranscriptFormat) -> Result<Transcript> {
        parse_transcript(s.as_bytes(), f)
    }

    #[test]
    fn segment_json_minimal() {
        let t = parse(
            r#"{"segments":[{"start":2.0,"end":4.5,"text":"Turn left.","id":0,"tokens":[1,2]}],"language":"en"}"#,
            TranscriptFormat::SegmentJson,
        )
        .unwrap();
        assert_eq!(
            t.segments(),
            &[TranscriptSegment::new(2000, 4500, "Turn left.").unwrap()]
        );
        assert_eq!(t.audio_start(), None);
    }

    #[test]
    fn srt_matches_segment_json() {
        let json = parse(
            r#"{"segments":[{"start":2.0,"end":4.5,"text":" Turn left."}]}"#,
            TranscriptFormat::SegmentJson,
        )
        .unwrap();
        let srt = parse(
            "1\n00:00:02,000 --> 00:00:04,500\nTurn left.",
            TranscriptFormat::Srt,
        )
        .unwrap();
        assert_eq!(json, srt);
    }

    #[test]
    fn srt_variants() {
        let text = "\u{feff}1\r\n00:00:01.5 --> 00:00:03,000 X1:10\r\nKeep\r\nleft\r\n\r\n\r\n2\r\n01:00:00,000 --> 01:00:01,000\r\nOK\r\n";
        let t = parse(text, TranscriptFormat::Srt).unwrap();
        assert_eq!(
            t.segments()[0],
            TranscriptSegment::new(1500, 3000, "Keep left").unwrap()
        );
        assert_eq!(t.segments()[1].start_ms(), 3_600_000);
    }

    #[test]
    fn srt_bad_timing_names_line() {
        let err = parse("1\n00:00:02 -> 00:00:04\nhi\n", TranscriptFormat::Srt).unwrap_err();
        match err {
            Error::Parse { location, .. } => assert_eq!(location, "line 2"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn plain_lines() {
        let t = parse(
            "# recorded 2024-01-01\n3.0\t5.0\tIn 500 feet\n\n4.0\t6.0\tturn right\n",
            TranscriptFormat::PlainLines,
        )
        .unwrap();
        assert_eq!(
            t.segments(),
            &[TranscriptSegment::new(3000, 6000, "In 500 feet turn right").unwrap()]
        );
        let err = parse("1.0\t2.0 text\n", TranscriptFormat::PlainLines).unwrap_err();
        assert!(matches!(err, Error::Parse { ref location, .. } if location == "line 1"));
        let untimed = parse(
            "Head West.\nMake a left turn.\n",
            TranscriptFormat::PlainLines,
        )
        .unwrap();
        let texts: Vec<&str> = untimed.segments().iter().map(|s| s.text()).collect();
        assert_eq!(texts, ["Head West.", "Make a left turn."]);
        let err = parse("1.0\tx\ttext\n", TranscriptFormat::PlainLines).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn error_cases() {
        for f in TranscriptFormat::ALL {
            assert!(matches!(
                parse_transcript(&[0xc3, 0x28], f),
                Err(Error::Encoding(_))
            ));
        }
        assert!(matches!(
            parse(r#"{"segments":[]}"#, TranscriptFormat::SegmentJson),
            Err(Error::EmptyTranscript)
        ));
        assert!(matches!(
            parse("", TranscriptFormat::Srt),
            Err(Error::EmptyTranscript)
        ));
        assert!(matches!(
            parse("# only\n", TranscriptFormat::PlainLines),
            Err(Error::EmptyTranscript)
        ));
        let err = parse(
            r#"{"segments":[{"start":1,"end":2,"text":"a"},{"start":"x","end":2,"text":"b"}]}"#,
            TranscriptFormat::SegmentJson,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { ref location, .. } if location == "segments[1]"));
        assert!(matches!(
            parse(
                r#"{"segments":[{"start":-1,"end":2,"text":"a"}]}"#,
                TranscriptFormat::SegmentJson
            ),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse(
                r#"{"segments":[{"start":3,"end":2,"text":"a"}]}"#,
                TranscriptFormat::SegmentJson
            ),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse("[]", TranscriptFormat::SegmentJson),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn blank_segments_skipped() {
        let t = parse(
            r#"{"segments":[{"start":0,"end":1,"text":"   "},{"start":1,"end":2,"text":"Head west."}]}"#,
            TranscriptFormat::SegmentJson,
        )
        .unwrap();
        assert_eq!(t.segments().len(), 1);
    }

    #[test]
    fn audio_start_field() {
        let t = parse(
            r#"{"audio_start":"2024-01-01T00:00:00Z","segments":[{"start":0,"end":1,"text":"go"}]}"#,
            TranscriptFormat::SegmentJson,
        )
        .unwrap();
        assert_eq!(t.audio_start().unwrap().millis(), 1_704_067_200_000);
        let again = parse(&write_segment_json(&t), TranscriptFormat::SegmentJson).unwrap();
        assert_eq!(again, t);
    }

    fn text_strategy() -> impl Strategy<Value = String> {
        "[A-Za-z][A-Za-z0-9 ,.']{0,30}".prop_map(|s| s.trim().to_owned())
    }

    proptest! {
        #[test]
        fn json_and_srt_agree(raw in prop::collection::vec((0i64..10_000_000, 0i64..20_000, text_strategy()), 1..12)) {
            let segs: Vec<TranscriptSegment> = raw.iter()
                .map(|(s, d, txt)| TranscriptSegment::new(*s, s + d, txt).unwrap())
                .collect();
            let t = Transcript::new(segs, None).unwrap();
            let from_json = parse(&write_segment_json(&t), TranscriptFormat::SegmentJson).unwrap();
            let from_srt = parse(&write_srt(&t), TranscriptFormat::Srt).unwrap();
            prop_assert_eq!(&from_json, &from_srt);
            prop_assert_eq!(&from_json, &t);
        }
    }
}

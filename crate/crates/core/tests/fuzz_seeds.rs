// The checked-in fuzz seeds are meant to reach past the first parse error.
// If a format change starts rejecting them, the corpus needs refreshing.

use std::fs;
use std::path::PathBuf;

use advlat::classify::{classify, load_lexicon, Lexicon};
use advlat::emit::parse_triad_line;
use advlat::ingest::{parse_gpx, parse_transcript, parse_video_meta, TranscriptFormat};
use advlat::Timestamp;

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn text(b: &[u8]) -> &str {
    std::str::from_utf8(b).unwrap()
}

#[test]
fn every_seed_is_accepted() {
    for target in ["parse_gpx", "gpx_round_trip"] {
        for (p, b) in seeds(target) {
            parse_gpx(&b).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        }
    }
    for (target, format) in [
        ("parse_segment_json", TranscriptFormat::SegmentJson),
        ("parse_srt", TranscriptFormat::Srt),
        ("parse_plain_lines", TranscriptFormat::PlainLines),
    ] {
        for (p, b) in seeds(target) {
            parse_transcript(&b, format).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        }
    }
    for (p, b) in seeds("parse_video_meta") {
        parse_video_meta(&b).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, b) in seeds("load_lexicon") {
        load_lexicon(Some(&b)).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    let lex = Lexicon::builtin();
    for (p, b) in seeds("classify") {
        let c = classify(text(&b), &lex).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert!(!c.classes.is_empty(), "{}", p.display());
    }
    for (p, b) in seeds("parse_triad_line") {
        parse_triad_line(text(&b), 1).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, b) in seeds("parse_timestamp") {
        Timestamp::parse_iso8601(text(&b)).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}

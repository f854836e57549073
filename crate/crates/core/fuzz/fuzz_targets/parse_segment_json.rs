#![no_main]

use advlat::ingest::{parse_transcript, TranscriptFormat};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = parse_transcript(data, TranscriptFormat::SegmentJson);
});

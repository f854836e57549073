#![no_main]

use advlat::ingest::{parse_gpx, write_gpx};
use libfuzzer_sys::fuzz_target;

// Differential: whatever the parser accepts, the writer must reproduce.
fuzz_target!(|data: &[u8]| {
    let Ok(track) = parse_gpx(data) else { return };
    let again = parse_gpx(write_gpx(&track).as_bytes()).expect("writer output parses");
    assert_eq!(track.points(), again.points());
});

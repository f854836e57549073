#![no_main]

use advlat::emit::{parse_triad_line, render_triads};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let Ok(record) = parse_triad_line(text, 1) else { return };
    // anything accepted must survive a second trip unchanged
    let Ok(triad) = record.to_triad(None) else { return };
    let line = render_triads(std::slice::from_ref(&triad)).unwrap();
    let again = parse_triad_line(line.trim_end(), 1).unwrap();
    let triad2 = again.to_triad(None).unwrap();
    assert_eq!(line, render_triads(std::slice::from_ref(&triad2)).unwrap());
});

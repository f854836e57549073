#![no_main]

use advlat::Timestamp;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(t) = Timestamp::parse_iso8601(text) {
        assert_eq!(Timestamp::parse_iso8601(&t.to_iso8601()).unwrap(), t);
    }
});

#![no_main]

use advlat::classify::{classify, load_lexicon};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // a lexicon that loads must be usable
    if let Ok(lex) = load_lexicon(Some(data)) {
        let _ = classify("In 500 feet turn left onto Oak Street.", &lex);
    }
});

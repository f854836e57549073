#![no_main]

use std::sync::OnceLock;

use advlat::classify::{classify, Lexicon};
use libfuzzer_sys::fuzz_target;

static LEXICON: OnceLock<Lexicon> = OnceLock::new();

fuzz_target!(|text: &str| {
    let lex = LEXICON.get_or_init(Lexicon::builtin);
    if let Ok(c) = classify(text, lex) {
        // every reported class needs evidence behind it
        for class in &c.classes {
            assert!(c.evidence.iter().any(|e| e.class == *class));
        }
    }
});

//! Token-level pattern matching behind `classify`.

use super::lexicon::Slot;
use super::normalize::Normalized;
use super::{CommandClass, Evidence, Lexicon};

const MAX_GAP: usize = 3;
const MAX_NAME_TOKENS: usize = 6;

const NUMBER_WORDS: &[&str] = &[
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
    "twenty",
    "thirty",
    "forty",
    "fifty",
    "sixty",
    "seventy",
    "eighty",
    "ninety",
    "hundred",
    "thousand",
    "half",
    "quarter",
    "quarters",
    "third",
    "thirds",
    "tenth",
    "tenths",
];

const CARDINALS: &[&str] = &[
    "north",
    "south",
    "east",
    "west",
    "northeast",
    "northwest",
    "southeast",
    "southwest",
];

// Words that never belong to a road or place name.
const STOPWORDS: &[&str] = &[
    "a",
    "an",
    "the",
    "on",
    "onto",
    "to",
    "toward",
    "towards",
    "at",
    "in",
    "into",
    "for",
    "from",
    "via",
    "and",
    "then",
    "or",
    "by",
    "with",
    "near",
    "past",
    "through",
    "after",
    "before",
    "until",
    "turn",
    "turns",
    "turning",
    "head",
    "heading",
    "continue",
    "go",
    "keep",
    "take",
    "make",
    "use",
    "merge",
    "stay",
    "arrive",
    "arrived",
    "arriving",
    "proceed",
    "drive",
    "follow",
    "exit",
    "left",
    "right",
    "straight",
    "slight",
    "sharp",
    "u-turn",
    "uturn",
    "your",
    "destination",
    "is",
    "are",
    "will",
    "be",
    "you",
    "it",
    "this",
    "these",
    "that",
    "those",
    "next",
    "set",
    "here",
    "there",
    "now",
    "ahead",
    "again",
    "lanes",
    "light",
    "lights",
    "sign",
    "signs",
    "stop",
    "intersection",
    "roundabout",
    "crosswalk",
];

// Words that make a following "lane" a travel lane rather than a street name.
const LANE_QUALIFIERS: &[&str] = &[
    "left", "right", "middle", "center", "centre", "two", "three", "four", "both", "carpool",
    "hov", "bike", "bus", "turn", "turning", "exit", "fast", "slow", "outer", "inner", "next",
    "same", "other", "the", "this", "that", "your",
];

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    start: usize,
    end: usize,
    break_before: bool,
}

fn tokenize(n: &Normalized) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut pos = 0;
    for word in n.as_str().split(' ') {
        tokens.push(Token {
            text: word,
            start: pos,
            end: pos + word.len(),
            break_before: pos > 0 && n.is_break(pos - 1),
        });
        pos += word.len() + 1;
    }
    tokens
}

fn is_numeric(word: &str) -> bool {
    word.starts_with(|c: char| c.is_ascii_digit())
        && word
            .chars()
            .all(|c| c.is_ascii_digit() || c == '.' || c == ',')
}

fn is_number(word: &str) -> bool {
    is_numeric(word) || NUMBER_WORDS.contains(&word)
}

fn is_cardinal(word: &str) -> bool {
    CARDINALS.contains(&word)
}

fn is_cardinal_like(word: &str) -> bool {
    let stem = word
        .strip_suffix("-bound")
        .or_else(|| word.strip_suffix("bound"))
        .unwrap_or(word);
    is_cardinal(stem)
}

struct Sentence<'a> {
    tokens: Vec<Token<'a>>,
    lex: &'a Lexicon,
    // token ranges [start, end) of road-name phrases
    roads: Vec<(usize, usize)>,
}

impl<'a> Sentence<'a> {
    fn new(normalized: &'a Normalized, lex: &'a Lexicon) -> Self {
        let mut s = Sentence {
            tokens: tokenize(normalized),
            lex,
            roads: Vec::new(),
        };
        s.roads = s.road_spans();
        s
    }

    fn word(&self, i: usize) -> Option<&'a str> {
        self.tokens.get(i).map(|t| t.text)
    }

    fn is_name_token(&self, word: &str) -> bool {
        !STOPWORDS.contains(&word)
            && !self.lex.is_unit(word)
            && word.chars().any(char::is_alphanumeric)
    }

    /// A run of name tokens ending in a road suffix ("east 15th street"), or a
    /// suffix followed by a route number ("highway 99").
    fn road_spans(&self) -> Vec<(usize, usize)> {
        let toks = &self.tokens;
        let mut spans = Vec::new();
        for (j, tok) in toks.iter().enumerate() {
            if !self.lex.is_road_suffix(tok.text) {
                continue;
            }
            let mut k = j;
            while k > 0
                && j - k < MAX_NAME_TOKENS
                && !toks[k].break_before
                && self.is_name_token(toks[k - 1].text)
            {
                k -= 1;
            }
            let lane_like = matches!(tok.text, "lane" | "ln")
                && j > 0
                && LANE_QUALIFIERS.contains(&toks[j - 1].text);
            if k < j && !lane_like {
                spans.push((k, j + 1));
            } else if toks
                .get(j + 1)
                .is_some_and(|n| is_numeric(n.text) && !n.break_before)
            {
                spans.push((j, j + 2));
            }
        }
        let all = spans.clone();
        spans.retain(|&(s, e)| {
            !all.iter()
                .any(|&(os, oe)| (os, oe) != (s, e) && os <= s && e <= oe)
        });
        spans
    }

    fn valid_name(&self, from: usize, to: usize) -> bool {
        let words = &self.tokens[from..to];
        if words
            .iter()
            .any(|t| matches!(t.text, "destination" | "destinations" | "your"))
        {
            return false;
        }
        let last = words[words.len() - 1].text;
        self.is_name_token(last) && !self.lex.is_road_suffix(last)
    }

    /// Can token `pos` be consumed by a match whose first token is `first`?
    fn takeable(&self, pos: usize, first: Option<usize>) -> bool {
        pos < self.tokens.len() && (first.is_none() || !self.tokens[pos].break_before)
    }

    fn single(
        &self,
        pos: usize,
        first: Option<usize>,
        ok: bool,
        rest: &[Slot],
        out: &mut Vec<(usize, usize)>,
    ) {
        if ok && self.takeable(pos, first) {
            self.ends(rest, pos + 1, first.or(Some(pos)), out);
        }
    }

    /// Collects every `(first, end)` token range matching `slots` from `pos`.
    fn ends(
        &self,
        slots: &[Slot],
        pos: usize,
        first: Option<usize>,
        out: &mut Vec<(usize, usize)>,
    ) {
        let Some((slot, rest)) = slots.split_first() else {
            if let Some(f) = first {
                out.push((f, pos));
            }
            return;
        };
        let word = self.word(pos).unwrap_or("");
        match slot {
            Slot::Words(ws) => self.single(pos, first, ws.iter().any(|w| w == word), rest, out),
            Slot::Optional(ws) => {
                self.ends(rest, pos, first, out);
                self.single(pos, first, ws.iter().any(|w| w == word), rest, out);
            }
            Slot::Num => self.single(pos, first, is_number(word), rest, out),
            Slot::Unit => self.single(pos, first, self.lex.is_unit(word), rest, out),
            Slot::Cardinal => self.single(pos, first, is_cardinal(word), rest, out),
            Slot::Gap => {
                // a gap is always interior, so `first` is set
                for g in 0..=MAX_GAP {
                    if g > 0 && !self.takeable(pos + g - 1, first) {
                        break;
                    }
                    self.ends(rest, pos + g, first, out);
                }
            }
            Slot::Road => {
                if self.takeable(pos, first) {
                    for &(s, e) in self.roads.iter().filter(|(s, _)| *s == pos) {
                        self.ends(rest, e, first.or(Some(s)), out);
                    }
                }
            }
            Slot::Name => {
                for len in 1..=MAX_NAME_TOKENS {
                    let last = pos + len - 1;
                    if !self.takeable(last, first) || (len > 1 && self.tokens[last].break_before) {
                        break;
                    }
                    if self.valid_name(pos, pos + len) {
                        self.ends(rest, pos + len, first.or(Some(pos)), out);
                    }
                }
            }
        }
    }

    fn in_road(&self, i: usize) -> bool {
        self.roads.iter().any(|&(s, e)| s <= i && i < e)
    }

    /// "left"/"right" naming a lane or a side of the road rather than a maneuver.
    fn non_maneuver_side(&self, i: usize) -> bool {
        let next = |k: usize| {
            self.tokens
                .get(i + k)
                .filter(|t| !t.break_before)
                .map(|t| t.text)
        };
        let lane = |w: Option<&str>| matches!(w, Some("lane" | "lanes" | "most" | "-most"));
        let quantified_lane = next(1).is_some_and(is_number) && lane(next(2));
        let prev = |k: usize| i.checked_sub(k).and_then(|j| self.word(j));
        let on_side = prev(1) == Some("on")
            || (prev(2) == Some("on") && matches!(prev(1), Some("the" | "your")));
        lane(next(1)) || quantified_lane || on_side || next(1) == Some("away")
    }

    fn keep(&self, class: CommandClass, first: usize, end: usize) -> bool {
        match class {
            CommandClass::Turn if end - first == 1 => {
                !(matches!(self.tokens[first].text, "left" | "right")
                    && self.non_maneuver_side(first))
            }
            CommandClass::Cardinal => {
                let cardinal: Vec<usize> = (first..end)
                    .filter(|&i| is_cardinal_like(self.tokens[i].text))
                    .collect();
                cardinal.is_empty() || !cardinal.iter().all(|&i| self.in_road(i))
            }
            _ => true,
        }
    }
}

pub(super) fn find_evidence(
    original: &str,
    normalized: &Normalized,
    lex: &Lexicon,
) -> Vec<Evidence> {
    let sentence = Sentence::new(normalized, lex);
    let mut found: Vec<Evidence> = Vec::new();
    for class in CommandClass::ALL {
        let mut ranges: Vec<(usize, usize)> = Vec::new();
        for pattern in lex.patterns(class) {
            for start in 0..sentence.tokens.len() {
                let mut out = Vec::new();
                sentence.ends(&pattern.slots, start, None, &mut out);
                ranges.extend(out);
            }
        }
        ranges.sort_unstable();
        ranges.dedup();
        // longest match per first token
        let mut longest: Vec<(usize, usize)> = Vec::new();
        for r in ranges {
            match longest.last_mut() {
                Some(prev) if prev.0 == r.0 => prev.1 = prev.1.max(r.1),
                _ => longest.push(r),
            }
        }
        let kept: Vec<(usize, usize)> = longest
            .into_iter()
            .filter(|&(f, e)| sentence.keep(class, f, e))
            .collect();
        for &(f, e) in &kept {
            let contained = kept
                .iter()
                .any(|&(of, oe)| (of, oe) != (f, e) && of <= f && e <= oe);
            if contained {
                continue;
            }
            let (s, en) =
                normalized.original_span(sentence.tokens[f].start, sentence.tokens[e - 1].end);
            found.push(Evidence {
                class,
                start: s,
                end: en,
                matched: original[s..en].to_owned(),
            });
        }
    }
    found.sort_by_key(|a| (a.start, a.end, a.class));
    found
}

//! The configurable pattern bank behind the rule-based classifier.
//!
//! A lexicon document is a single JSON object:
//!
//! ```json
//! {
//!   "version": "my-lexicon-2",
//!   "Road": ["<road>"],
//!   "StaticObject": ["stop sign", "light|lights"],
//!   "road_suffixes": ["motorway"],
//!   "distance_units": ["furlongs"]
//! }
//! ```
//!
//! Keys are class names (see [`CommandClass::name`]), `road_suffixes`,
//! `distance_units` and `version`. When merged over the built-in lexicon,
//! a class list replaces the built-in list for that class, while suffix and
//! unit lists are appended (duplicates dropped).
//!
//! Pattern syntax, one slot per whitespace-separated item:
//!
//! | slot         | matches                                               |
//! |--------------|-------------------------------------------------------|
//! | `word`       | that normalized token                                 |
//! | `a\|b\|c`     | any of the alternatives                               |
//! | `word?`      | optionally that token                                 |
//! | `...`        | up to three arbitrary tokens                          |
//! | `<num>`      | a numeral or number word (incl. half, quarter, third) |
//! | `<unit>`     | a word from `distance_units`                          |
//! | `<cardinal>` | north, south, east, west and their combinations       |
//! | `<road>`     | a road name phrase ending in a road suffix            |
//! | `<name>`     | a place name that is not a road or the destination    |
//!
//! No match spans a clause boundary (`,` `.` `;` `:` `!` `?` in the source).

use std::collections::BTreeMap;

use serde_json::{Map, Value};

use super::normalize::normalize_text;
use super::CommandClass;
use crate::error::{Error, Result};

const BUILTIN: &str = include_str!("default_lexicon.json");

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Slot {
    Words(Vec<String>),
    Optional(Vec<String>),
    Gap,
    Num,
    Unit,
    Cardinal,
    Road,
    Name,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    source: String,
    pub(crate) slots: Vec<Slot>,
}

impl Pattern {
    pub fn parse(source: &str) -> std::result::Result<Self, String> {
        let mut slots = Vec::new();
        for item in source.split_whitespace() {
            let slot = match item {
                "..." => Slot::Gap,
                "<num>" => Slot::Num,
                "<unit>" => Slot::Unit,
                "<cardinal>" => Slot::Cardinal,
                "<road>" => Slot::Road,
                "<name>" => Slot::Name,
                _ if item.starts_with('<') => return Err(format!("unknown placeholder {item}")),
                _ => {
                    let (body, optional) = match item.strip_suffix('?') {
                        Some(b) => (b, true),
                        None => (item, false),
                    };
                    let words = body
                        .split('|')
                        .map(normalize_word)
                        .collect::<std::result::Result<Vec<_>, _>>()?;
                    if optional {
                        Slot::Optional(words)
                    } else {
                        Slot::Words(words)
                    }
                }
            };
            slots.push(slot);
        }
        let required = |s: &Slot| !matches!(s, Slot::Gap | Slot::Optional(_));
        if !slots.iter().any(required) {
            return Err("pattern needs at least one required slot".into());
        }
        if matches!(slots.first(), Some(Slot::Gap)) || matches!(slots.last(), Some(Slot::Gap)) {
            return Err("a pattern cannot start or end with `...`".into());
        }
        Ok(Pattern {
            source: source.split_whitespace().collect::<Vec<_>>().join(" "),
            slots,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

/// A single word as the normalizer would emit it.
fn normalize_word(raw: &str) -> std::result::Result<String, String> {
    match normalize_text(raw) {
        Ok(n) if !n.as_str().contains(' ') && n.as_str() == raw.to_lowercase() => {
            Ok(n.as_str().to_owned())
        }
        _ => Err(format!("{raw:?} is not a single normalized word")),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    version: String,
    patterns: BTreeMap<CommandClass, Vec<Pattern>>,
    road_suffixes: Vec<String>,
    distance_units: Vec<String>,
}

impl Lexicon {
    /// The built-in lexicon, version `builtin-1`.
    pub fn builtin() -> Lexicon {
        let doc: Value = serde_json::from_str(BUILTIN).expect("built-in lexicon is valid JSON");
        let mut lex = Lexicon {
            version: String::new(),
            patterns: CommandClass::ALL.iter().map(|&c| (c, Vec::new())).collect(),
            road_suffixes: Vec::new(),
            distance_units: Vec::new(),
        };
        lex.apply(&doc).expect("built-in lexicon is well formed");
        lex
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn patterns(&self, class: CommandClass) -> &[Pattern] {
        self.patterns.get(&class).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn road_suffixes(&self) -> &[String] {
        &self.road_suffixes
    }

    pub fn distance_units(&self) -> &[String] {
        &self.distance_units
    }

    pub(crate) fn is_road_suffix(&self, word: &str) -> bool {
        self.road_suffixes.iter().any(|s| s == word)
    }

    pub(crate) fn is_unit(&self, word: &str) -> bool {
        self.distance_units.iter().any(|s| s == word)
    }

    /// Appends a pattern to one class.
    pub fn add_pattern(&mut self, class: CommandClass, pattern: Pattern) {
        self.patterns.entry(class).or_default().push(pattern);
    }

    /// The lexicon as a document `load_lexicon` accepts. Key order is fixed.
    pub fn to_document(&self) -> Value {
        let mut doc = Map::new();
        doc.insert("version".into(), Value::String(self.version.clone()));
        for (class, pats) in &self.patterns {
            let list = pats
                .iter()
                .map(|p| Value::String(p.source.clone()))
                .collect();
            doc.insert(class.name().into(), Value::Array(list));
        }
        let words = |v: &[String]| Value::Array(v.iter().cloned().map(Value::String).collect());
        doc.insert("road_suffixes".into(), words(&self.road_suffixes));
        doc.insert("distance_units".into(), words(&self.distance_units));
        Value::Object(doc)
    }

    fn apply(&mut self, doc: &Value) -> Result<()> {
        let obj = doc.as_object().ok_or_else(|| Error::Lexicon {
            path: "$".into(),
            message: "expected a JSON object".into(),
        })?;
        let string_list = |key: &str, value: &Value| -> Result<Vec<String>> {
            let arr = value.as_array().ok_or_else(|| Error::Lexicon {
                path: format!("$.{key}"),
                message: "expected an array of strings".into(),
            })?;
            arr.iter()
                .enumerate()
                .map(|(i, v)| {
                    v.as_str().map(str::to_owned).ok_or_else(|| Error::Lexicon {
                        path: format!("$.{key}[{i}]"),
                        message: "expected a string".into(),
                    })
                })
                .collect()
        };

        for (key, value) in obj {
            match key.as_str() {
                "version" => {
                    self.version = value
                        .as_str()
                        .ok_or_else(|| Error::Lexicon {
                            path: "$.version".into(),
                            message: "expected a string".into(),
                        })?
                        .to_owned();
                }
                "road_suffixes" | "distance_units" => {
                    let mut words = Vec::new();
                    for (i, raw) in string_list(key, value)?.into_iter().enumerate() {
                        let w = normalize_word(&raw).map_err(|message| Error::Lexicon {
                            path: format!("$.{key}[{i}]"),
                            message,
                        })?;
                        words.push(w);
                    }
                    let target = if key == "road_suffixes" {
                        &mut self.road_suffixes
                    } else {
                        &mut self.distance_units
                    };
                    for w in words {
                        if !target.contains(&w) {
                            target.push(w);
                        }
                    }
                }
                other => {
                    let class: CommandClass = other.parse().map_err(|_| Error::Lexicon {
                        path: format!("$.{other}"),
                        message: "unknown class name".into(),
                    })?;
                    let pats = string_list(other, value)?
                        .iter()
                        .enumerate()
                        .map(|(i, src)| {
                            Pattern::parse(src).map_err(|message| Error::Lexicon {
                                path: format!("$.{other}[{i}]"),
                                message,
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    self.patterns.insert(class, pats);
                }
            }
        }
        Ok(())
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon::builtin()
    }
}

/// The built-in lexicon, with `bytes` deep-merged over it when given.
pub fn load_lexicon(bytes: Option<&[u8]>) -> Result<Lexicon> {
    let mut lex = Lexicon::builtin();
    let Some(bytes) = bytes else {
        return Ok(lex);
    };
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Lexicon {
        path: "$".into(),
        message: format!("invalid UTF-8: {e}"),
    })?;
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Lexicon {
        path: "$".into(),
        message: e.to_string(),
    })?;
    let base_version = lex.version.clone();
    lex.version = format!("{base_version}+override");
    lex.apply(&doc)?;
    Ok(lex)
}

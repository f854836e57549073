//! Multi-label, rule-based classification of navigation instructions by the
//! kind of reference they make (distance, road name, static object, ...).
//!
//! Every label is backed by at least one [`Evidence`] span pointing into the
//! original, un-normalized text.

mod lexicon;
mod normalize;
mod rules;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use lexicon::{load_lexicon, Lexicon, Pattern};
pub use normalize::{normalize_text, Normalized};

use crate::error::Result;

/// Referentiality class of an instruction. Declared in alphabetical order of
/// [`CommandClass::name`], so the derived `Ord` is the canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CommandClass {
    Cardinal,
    Destination,
    Distance,
    LaneInformation,
    LightInformation,
    LocationName,
    Road,
    StaticObject,
    Turn,
}

pub type ClassSet = BTreeSet<CommandClass>;

impl CommandClass {
    pub const ALL: [CommandClass; 9] = [
        CommandClass::Cardinal,
        CommandClass::Destination,
        CommandClass::Distance,
        CommandClass::LaneInformation,
        CommandClass::LightInformation,
        CommandClass::LocationName,
        CommandClass::Road,
        CommandClass::StaticObject,
        CommandClass::Turn,
    ];

    /// Row order of the per-class frequency report.
    pub const REPORT_ORDER: [CommandClass; 9] = [
        CommandClass::Turn,
        CommandClass::Road,
        CommandClass::Distance,
        CommandClass::StaticObject,
        CommandClass::Cardinal,
        CommandClass::LaneInformation,
        CommandClass::LightInformation,
        CommandClass::LocationName,
        CommandClass::Destination,
    ];

    /// Identifier used in files and lexicon keys.
    pub fn name(self) -> &'static str {
        match self {
            CommandClass::Cardinal => "Cardinal",
            CommandClass::Destination => "Destination",
            CommandClass::Distance => "Distance",
            CommandClass::LaneInformation => "LaneInformation",
            CommandClass::LightInformation => "LightInformation",
            CommandClass::LocationName => "LocationName",
            CommandClass::Road => "Road",
            CommandClass::StaticObject => "StaticObject",
            CommandClass::Turn => "Turn",
        }
    }

    /// Human-readable label for reports.
    pub fn label(self) -> &'static str {
        match self {
            CommandClass::Cardinal => "Cardinal",
            CommandClass::Destination => "Destination",
            CommandClass::Distance => "Distance",
            CommandClass::LaneInformation => "Lane Information",
            CommandClass::LightInformation => "Light Information",
            CommandClass::LocationName => "Location Name",
            CommandClass::Road => "Road",
            CommandClass::StaticObject => "Static Object",
            CommandClass::Turn => "Turn",
        }
    }
}

impl fmt::Display for CommandClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CommandClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        CommandClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command class {s:?}"))
    }
}

/// Why a class was assigned: the matched text and its byte span in the original.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Evidence {
    pub class: CommandClass,
    pub start: usize,
    pub end: usize,
    pub matched: String,
}

/// Direction named by a turn instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TurnDirection {
    Left,
    Right,
}

impl fmt::Display for TurnDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TurnDirection::Left => "left",
            TurnDirection::Right => "right",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub text: String,
    pub classes: ClassSet,
    pub evidence: Vec<Evidence>,
}

impl Classification {
    /// The single direction the Turn evidence names, if any. Instructions
    /// naming both left and right state no direction.
    pub fn stated_direction(&self) -> Option<TurnDirection> {
        stated_direction(&self.evidence)
    }
}

pub fn stated_direction(evidence: &[Evidence]) -> Option<TurnDirection> {
    let (mut left, mut right) = (false, false);
    for ev in evidence.iter().filter(|e| e.class == CommandClass::Turn) {
        let lower = ev.matched.to_lowercase();
        for word in lower.split(|c: char| !c.is_alphanumeric()) {
            left |= word == "left";
            right |= word == "right";
        }
    }
    match (left, right) {
        (true, false) => Some(TurnDirection::Left),
        (false, true) => Some(TurnDirection::Right),
        _ => None,
    }
}

/// Runs every rule in `lex` over `text` and unions the results.
pub fn classify(text: &str, lex: &Lexicon) -> Result<Classification> {
    let normalized = normalize_text(text)?;
    let evidence = rules::find_evidence(text, &normalized, lex);
    let classes = evidence.iter().map(|e| e.class).collect();
    Ok(Classification {
        text: text.to_owned(),
        classes,
        evidence,
    })
}

//! Turns ordinary drive recordings into vision-language-action triads.
//!
//! Three streams go in: a GPS track log (action), a timestamped transcript of
//! navigation-app voice prompts (language) and a video metadata sidecar
//! (vision). Each prompt is classified by the kinds of reference it makes,
//! anchored to the vehicle position and video frame at the moment it was
//! spoken, and paired with the trajectory driven until the next prompt.

pub mod classify;
pub mod emit;
pub mod error;
pub mod geo;
pub mod ingest;
pub mod model;
pub mod segment;
pub mod stats;
pub mod sync;
pub mod synth;
pub mod track;

pub use error::{Error, Result};
pub use model::{BearingDeg, GeoPoint, Heading, Timestamp};
pub use track::TrackLog;

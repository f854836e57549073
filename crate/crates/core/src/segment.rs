//! Action segments: the trajectory driven between one instruction and the next.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classify::TurnDirection;
use crate::error::{Error, Result};
use crate::geo::{haversine_distance, initial_bearing, signed_bearing_delta};
use crate::ingest::VideoIndex;
use crate::model::{GeoPoint, Timestamp};
use crate::sync::{frame_index_at, InstructionEvent};
use crate::track::TrackLog;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Maneuver {
    Straight,
    LeftTurn,
    RightTurn,
    UTurn,
    Unknown,
}

impl Maneuver {
    pub fn name(self) -> &'static str {
        match self {
            Maneuver::Straight => "Straight",
            Maneuver::LeftTurn => "LeftTurn",
            Maneuver::RightTurn => "RightTurn",
            Maneuver::UTurn => "UTurn",
            Maneuver::Unknown => "Unknown",
        }
    }

    /// The same maneuver seen in a mirror.
    pub fn mirrored(self) -> Maneuver {
        match self {
            Maneuver::LeftTurn => Maneuver::RightTurn,
            Maneuver::RightTurn => Maneuver::LeftTurn,
            other => other,
        }
    }
}

impl fmt::Display for Maneuver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Maneuver {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        [
            Maneuver::Straight,
            Maneuver::LeftTurn,
            Maneuver::RightTurn,
            Maneuver::UTurn,
            Maneuver::Unknown,
        ]
        .into_iter()
        .find(|m| m.name() == s)
        .ok_or_else(|| format!("unknown maneuver {s:?}"))
    }
}

/// Turn thresholds and the GPS jitter floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManeuverConfig {
    /// Net changes with a magnitude below this are `Straight`.
    pub straight_max_deg: f64,
    /// Net changes with a magnitude at or above this are `UTurn`.
    pub uturn_min_deg: f64,
    /// Steps shorter than this are merged into the next one before measuring bearings.
    pub jitter_floor_m: f64,
}

impl Default for ManeuverConfig {
    fn default() -> Self {
        ManeuverConfig {
            straight_max_deg: 30.0,
            uturn_min_deg: 150.0,
            jitter_floor_m: 1.0,
        }
    }
}

impl ManeuverConfig {
    pub fn classify(&self, net_change_deg: f64) -> Maneuver {
        let magnitude = net_change_deg.abs();
        if magnitude < self.straight_max_deg {
            Maneuver::Straight
        } else if magnitude >= self.uturn_min_deg {
            Maneuver::UTurn
        } else if net_change_deg > 0.0 {
            Maneuver::RightTurn
        } else {
            Maneuver::LeftTurn
        }
    }
}

/// Maneuver for a net bearing change under the default thresholds.
pub fn classify_maneuver(net_change_deg: f64) -> Maneuver {
    ManeuverConfig::default().classify(net_change_deg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionSegment {
    pub event_id: usize,
    pub t_start: Timestamp,
    pub t_end: Timestamp,
    pub waypoints: Vec<GeoPoint>,
    pub net_bearing_change_deg: f64,
    pub distance_m: f64,
    pub maneuver: Maneuver,
    pub frame_start: Option<u64>,
    pub frame_end: Option<u64>,
}

/// Sum of signed bearing changes along a polyline; positive is net clockwise.
///
/// Consecutive points closer than `jitter_floor_m` are skipped: each bearing
/// runs from the last kept point to the first point at least that far away.
pub fn net_bearing_change(waypoints: &[GeoPoint], jitter_floor_m: f64) -> Result<f64> {
    if waypoints.len() < 3 {
        return Err(Error::InsufficientGeometry);
    }
    let mut bearings = Vec::new();
    let mut anchor = &waypoints[0];
    for p in &waypoints[1..] {
        if haversine_distance(anchor, p) < jitter_floor_m {
            continue;
        }
        match initial_bearing(anchor, p) {
            Ok(b) => {
                bearings.push(b);
                anchor = p;
            }
            Err(Error::DegenerateBearing) => continue,
            Err(e) => return Err(e),
        }
    }
    if bearings.len() < 2 {
        return Err(Error::InsufficientGeometry);
    }
    Ok(bearings
        .windows(2)
        .map(|w| signed_bearing_delta(w[0], w[1]))
        .sum())
}

fn frame_range(video: &VideoIndex, start: Timestamp, end: Timestamp) -> Option<(u64, u64)> {
    if video.frame_count() == 0 || end < video.start() {
        return None;
    }
    let first = frame_index_at(video, start.max(video.start()), false).ok()?;
    let last = frame_index_at(video, end, true).ok()?;
    Some((first, last))
}

/// One segment per event, from its time to the next event's (the last runs
/// to the end of the track), so consecutive segments share their boundary.
pub fn segment_actions(
    events: &[InstructionEvent],
    track: &TrackLog,
    video: Option<&VideoIndex>,
    config: &ManeuverConfig,
) -> Result<Vec<ActionSegment>> {
    if events.is_empty() {
        return Err(Error::NoUsableEvents);
    }
    if track.points().len() < 2 {
        return Err(Error::TrackTooShort {
            points: track.points().len(),
        });
    }
    if let Some(w) = events.windows(2).find(|w| w[1].t < w[0].t) {
        return Err(Error::InternalOrdering(format!(
            "event {} precedes event {} in time",
            w[1].id, w[0].id
        )));
    }

    let mut segments = Vec::with_capacity(events.len());
    for (i, event) in events.iter().enumerate() {
        let t_start = event.t;
        let t_end = match events.get(i + 1) {
            Some(next) => next.t,
            None => track.end().max(t_start),
        };

        let mut waypoints = vec![track.position_clamped(t_start)];
        waypoints.extend(
            track
                .points()
                .iter()
                .filter(|p| p.t() > t_start && p.t() < t_end)
                .copied(),
        );
        if t_end > t_start {
            waypoints.push(track.position_clamped(t_end));
        }

        let distance_m = waypoints
            .windows(2)
            .map(|w| haversine_distance(&w[0], &w[1]))
            .sum();
        let (net_bearing_change_deg, maneuver) =
            match net_bearing_change(&waypoints, config.jitter_floor_m) {
                Ok(net) => (net, config.classify(net)),
                Err(Error::InsufficientGeometry) => (0.0, Maneuver::Unknown),
                Err(e) => return Err(e),
            };
        let frames = video.and_then(|v| frame_range(v, t_start, t_end));

        segments.push(ActionSegment {
            event_id: event.id,
            t_start,
            t_end,
            waypoints,
            net_bearing_change_deg,
            distance_m,
            maneuver,
            frame_start: frames.map(|f| f.0),
            frame_end: frames.map(|f| f.1),
        });
    }
    Ok(segments)
}

/// An instruction whose stated turn direction contradicts the driven maneuver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub event_id: usize,
    pub stated: TurnDirection,
    pub observed: Maneuver,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "event {}: instruction says {} but trajectory shows {}",
            self.event_id, self.stated, self.observed
        )
    }
}

/// Reports a left instruction followed by a right turn, or vice versa.
pub fn consistency_check(event: &InstructionEvent, segment: &ActionSegment) -> Option<Mismatch> {
    let stated = crate::classify::stated_direction(&event.evidence)?;
    let opposite = match stated {
        TurnDirection::Left => Maneuver::RightTurn,
        TurnDirection::Right => Maneuver::LeftTurn,
    };
    (segment.maneuver == opposite).then_some(Mismatch {
        event_id: event.id,
        stated,
        observed: segment.maneuver,
    })
}

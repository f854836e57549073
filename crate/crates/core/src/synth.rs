//! Synthetic drives with known maneuvers and known instruction classes.
//!
//! Routes are polylines on a local tangent plane at the origin (east/north
//! meters), driven at constant speed and sampled at a fixed rate. Turn cues are
//! phrased from small template banks whose vocabulary the built-in lexicon
//! covers, so every cue carries its exact expected class set.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::classify::{ClassSet, CommandClass};
use crate::error::{Error, Result};
use crate::geo::EARTH_RADIUS_M;
use crate::ingest::{
    write_gpx, write_segment_json, write_video_meta, Transcript, TranscriptSegment, VideoIndex,
};
use crate::model::{GeoPoint, Timestamp};
use crate::segment::Maneuver;
use crate::track::TrackLog;

pub const DEFAULT_LEAD_M: f64 = 150.0;
pub const DEFAULT_FPS: f64 = 30.0;
const CUE_DURATION_MS: i64 = 2_500;
const ARRIVAL_BEFORE_END_MS: i64 = 5_000;
// keeps template choice independent of the noise stream
const TEMPLATE_STREAM: u64 = 0x5EED_7E47;

pub const GPX_FILE: &str = "drive.gpx";
pub const TRANSCRIPT_FILE: &str = "transcript.json";
pub const VIDEO_FILE: &str = "video.json";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";

const ROADS: &[&str] = &[
    "Oak Street",
    "Maple Avenue",
    "Maple Lane",
    "Bear Creek Drive",
    "Pine Road",
    "Cedar Court",
    "Willow Boulevard",
    "Elm Drive",
    "Birch Place",
    "Ash Way",
    "East 15th Street",
    "North Lake Road",
];
const PLACES: &[&str] = &[
    "Pretty Good Burger",
    "Merced Public Library",
    "Bobcat Cafe",
    "Golden Valley Market",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub length_m: f64,
    /// What the vehicle does at the end of this leg; `None` only on the last leg.
    pub maneuver_after: Option<Maneuver>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    /// Start position; its time is the start of the drive.
    pub origin: GeoPoint,
    pub legs: Vec<Leg>,
    pub speed_mps: f64,
    pub sample_hz: f64,
    pub noise_sigma_m: f64,
    pub seed: u64,
    /// Heading of the first leg, clockwise from north.
    pub initial_heading_deg: f64,
    /// How far before a maneuver its cue is spoken.
    pub lead_m: f64,
}

impl RoutePlan {
    /// A plan with `legs` legs of 300 to 700 m, mostly left and right turns,
    /// driven at 12 m/s and sampled at 1 Hz from a fixed origin.
    pub fn random(seed: u64, legs: usize) -> RoutePlan {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let legs = (0..legs.max(1))
            .map(|i| Leg {
                length_m: rng.gen_range(300..=700) as f64,
                maneuver_after: (i + 1 < legs).then(|| match rng.gen_range(0..10) {
                    0..=3 => Maneuver::LeftTurn,
                    4..=7 => Maneuver::RightTurn,
                    8 => Maneuver::Straight,
                    _ => Maneuver::UTurn,
                }),
            })
            .collect();
        let initial_heading_deg = 90.0 * rng.gen_range(0..4) as f64;
        RoutePlan {
            // 2024-05-01T17:00:00Z in Merced, CA
            origin: GeoPoint::new(
                37.3022,
                -120.4830,
                None,
                Timestamp::from_millis(1_714_582_800_000).expect("positive"),
            )
            .expect("valid origin"),
            legs,
            speed_mps: 12.0,
            sample_hz: 1.0,
            noise_sigma_m: 0.0,
            seed,
            initial_heading_deg,
            lead_m: DEFAULT_LEAD_M,
        }
    }

    pub fn with_noise(mut self, sigma_m: f64) -> RoutePlan {
        self.noise_sigma_m = sigma_m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidPlan(m));
        if self.legs.is_empty() {
            return bad("at least one leg is required".into());
        }
        for (i, leg) in self.legs.iter().enumerate() {
            if !(leg.length_m.is_finite() && leg.length_m >= 1.0) {
                return bad(format!("leg {i}: length must be at least 1 m"));
            }
            let last = i + 1 == self.legs.len();
            match leg.maneuver_after {
                Some(Maneuver::Unknown) => {
                    return bad(format!("leg {i}: Unknown cannot be planted"))
                }
                Some(_) if last => return bad("the last leg cannot end in a maneuver".into()),
                None if !last => return bad(format!("leg {i}: maneuver missing")),
                _ => {}
            }
        }
        if !(self.speed_mps.is_finite() && self.speed_mps > 0.0) {
            return bad("speed must be positive".into());
        }
        if !(self.sample_hz.is_finite() && self.sample_hz > 0.0) {
            return bad("sample rate must be positive".into());
        }
        if !(self.noise_sigma_m.is_finite() && self.noise_sigma_m >= 0.0) {
            return bad("noise sigma must be non-negative".into());
        }
        if !(self.lead_m.is_finite() && self.lead_m > 0.0) || !self.initial_heading_deg.is_finite()
        {
            return bad("lead distance and initial heading must be finite, lead positive".into());
        }
        if self.origin.lat_deg().abs() > 80.0 {
            return bad("origin latitude must be within 80 degrees of the equator".into());
        }
        Ok(())
    }

    fn total_length_m(&self) -> f64 {
        self.legs.iter().map(|l| l.length_m).sum()
    }

    fn duration_ms(&self) -> i64 {
        (self.total_length_m() / self.speed_mps * 1000.0).round() as i64
    }

    fn time_at_ms(&self, distance_m: f64) -> i64 {
        (distance_m / self.speed_mps * 1000.0).round() as i64
    }

    /// Heading of each leg.
    fn headings(&self) -> Vec<f64> {
        let mut h = self.initial_heading_deg;
        let mut out = Vec::with_capacity(self.legs.len());
        for leg in &self.legs {
            out.push(h);
            h += match leg.maneuver_after {
                Some(Maneuver::LeftTurn) => -90.0,
                Some(Maneuver::RightTurn) => 90.0,
                Some(Maneuver::UTurn) => 180.0,
                _ => 0.0,
            };
        }
        out
    }

    /// East/north offset after driving `s` meters.
    fn position_at(&self, s: f64) -> (f64, f64) {
        let (mut x, mut y) = (0.0, 0.0);
        let mut remaining = s;
        for (leg, h) in self.legs.iter().zip(self.headings()) {
            let step = remaining.min(leg.length_m);
            let rad = h.to_radians();
            x += step * rad.sin();
            y += step * rad.cos();
            remaining -= step;
            if remaining <= 0.0 {
                break;
            }
        }
        (x, y)
    }

    fn to_geo(&self, x: f64, y: f64, t: Timestamp) -> Result<GeoPoint> {
        let lat0 = self.origin.lat_deg();
        let lat = lat0 + (y / EARTH_RADIUS_M).to_degrees();
        let lon =
            self.origin.lon_deg() + (x / (EARTH_RADIUS_M * lat0.to_radians().cos())).to_degrees();
        GeoPoint::new(lat, (lon + 180.0).rem_euclid(360.0) - 180.0, None, t)
    }
}

/// Drives the plan: samples every `1/sample_hz` seconds plus the final
/// position, each displaced by independent Gaussian noise per axis.
pub fn generate_route(plan: &RoutePlan) -> Result<TrackLog> {
    plan.validate()?;
    let total = plan.total_length_m();
    let end_ms = plan.duration_ms();
    let mut times = Vec::new();
    for k in 0u64.. {
        let t = (k as f64 * 1000.0 / plan.sample_hz).round() as i64;
        if t >= end_ms {
            break;
        }
        if times.last() != Some(&t) {
            times.push(t);
        }
    }
    times.push(end_ms);

    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let noise = (plan.noise_sigma_m > 0.0)
        .then(|| Normal::new(0.0, plan.noise_sigma_m).expect("sigma is finite and positive"));
    let t0 = plan.origin.t();
    let points = times
        .into_iter()
        .map(|t_ms| {
            let s = (plan.speed_mps * t_ms as f64 / 1000.0).min(total);
            let (mut x, mut y) = plan.position_at(s);
            if let Some(n) = &noise {
                x += n.sample(&mut rng);
                y += n.sample(&mut rng);
            }
            plan.to_geo(x, y, t0.offset(t_ms)?)
        })
        .collect::<Result<Vec<_>>>()?;
    TrackLog::new(points, format!("synthetic-{}", plan.seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Style {
    DistanceHeavy,
    StaticObjectHeavy,
    CardinalHeavy,
}

impl Style {
    pub const ALL: [Style; 3] = [
        Style::DistanceHeavy,
        Style::StaticObjectHeavy,
        Style::CardinalHeavy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Style::DistanceHeavy => "distance-heavy",
            Style::StaticObjectHeavy => "static-object-heavy",
            Style::CardinalHeavy => "cardinal-heavy",
        }
    }
}

impl std::fmt::Display for Style {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Style {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Style::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown style {s:?} (expected distance-heavy, static-object-heavy or cardinal-heavy)"))
    }
}

/// One generated instruction and what it should produce downstream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueTruth {
    pub start_ms: i64,
    pub end_ms: i64,
    pub text: String,
    pub classes: ClassSet,
    /// The maneuver this cue announces; `None` for the arrival.
    pub planted: Option<Maneuver>,
    pub leg: usize,
    /// Lead distance did not fit on the leg, so the cue has no distance phrase.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub style: Style,
    pub noise_sigma_m: f64,
    pub legs: Vec<Leg>,
    pub instructions: Vec<CueTruth>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StyledCorpus {
    pub plan: RoutePlan,
    pub style: Style,
    pub track: TrackLog,
    pub transcript: Transcript,
    pub video: VideoIndex,
    pub ground_truth: GroundTruth,
}

fn classes(cs: &[CommandClass]) -> ClassSet {
    cs.iter().copied().collect()
}

fn cardinal_name(heading_deg: f64) -> &'static str {
    ["north", "east", "south", "west"][((heading_deg / 90.0).round() as i64).rem_euclid(4) as usize]
}

/// Text and class set for one maneuver cue. `turn_index` rotates through the
/// style's turn templates.
fn phrase(
    style: Style,
    maneuver: Maneuver,
    fallback: bool,
    turn_index: usize,
    road: &str,
    heading_after: f64,
) -> (String, ClassSet) {
    use CommandClass::*;
    let dir = match maneuver {
        Maneuver::LeftTurn => "left",
        Maneuver::RightTurn => "right",
        _ => "",
    };
    let cardinal = cardinal_name(heading_after);
    let (text, cs): (String, &[CommandClass]) = match (style, maneuver, fallback) {
        (Style::DistanceHeavy, Maneuver::UTurn, false) => {
            ("In 500 feet make a U-turn.".into(), &[Distance, Turn])
        }
        (Style::DistanceHeavy, Maneuver::UTurn, true) => ("Make a U-turn.".into(), &[Turn]),
        (Style::DistanceHeavy, Maneuver::Straight, false) => (
            format!("In 500 feet continue straight onto {road}."),
            &[Distance, Road],
        ),
        (Style::DistanceHeavy, Maneuver::Straight, true) => {
            (format!("Continue straight onto {road}."), &[Road])
        }
        (Style::DistanceHeavy, _, false) => (
            format!("In 500 feet turn {dir} onto {road}."),
            &[Distance, Turn, Road],
        ),
        (Style::DistanceHeavy, _, true) => (format!("Turn {dir} onto {road}."), &[Turn, Road]),

        (Style::StaticObjectHeavy, Maneuver::UTurn, _) => (
            "At the intersection, make a U-turn.".into(),
            &[StaticObject, Turn],
        ),
        (Style::StaticObjectHeavy, Maneuver::Straight, _) => (
            format!("At the light, continue straight onto {road}."),
            &[StaticObject, Road],
        ),
        (Style::StaticObjectHeavy, _, _) => match turn_index % 3 {
            0 => (
                format!("At the stop sign, turn {dir} onto {road}."),
                &[StaticObject, Turn, Road],
            ),
            1 => (format!("At the light, turn {dir}."), &[StaticObject, Turn]),
            _ => (
                format!("Go past these lights, and at the next set, turn {dir}."),
                &[StaticObject, LightInformation, Turn],
            ),
        },

        (Style::CardinalHeavy, Maneuver::UTurn, _) => (
            format!("Make a U-turn and head {cardinal} on {road}."),
            &[Turn, Cardinal, Road],
        ),
        (Style::CardinalHeavy, Maneuver::Straight, _) => (
            format!("Continue straight and head {cardinal} on {road}."),
            &[Cardinal, Road],
        ),
        (Style::CardinalHeavy, _, _) => (
            format!("Turn {dir} and head {cardinal} on {road}."),
            &[Turn, Cardinal, Road],
        ),
    };
    (text, classes(cs))
}

/// The track plus one cue `lead_m` before every maneuver and a final
/// arrival announcement, with the expected class set of each.
pub fn generate_instructions(plan: &RoutePlan, style: Style) -> Result<StyledCorpus> {
    let track = generate_route(plan)?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed ^ TEMPLATE_STREAM);
    let headings = plan.headings();
    let end_ms = plan.duration_ms();

    let mut cues: Vec<CueTruth> = Vec::new();
    let mut leg_start = 0.0;
    let mut turn_index = 0;
    for (i, leg) in plan.legs.iter().enumerate() {
        let corner = leg_start + leg.length_m;
        if let Some(m) = leg.maneuver_after {
            let fallback = plan.lead_m >= leg.length_m;
            let lead = if fallback {
                leg.length_m / 2.0
            } else {
                plan.lead_m
            };
            let road = ROADS[rng.gen_range(0..ROADS.len())];
            let (text, classes) = phrase(style, m, fallback, turn_index, road, headings[i + 1]);
            if matches!(m, Maneuver::LeftTurn | Maneuver::RightTurn) {
                turn_index += 1;
            }
            cues.push(CueTruth {
                start_ms: plan.time_at_ms(corner - lead),
                end_ms: 0,
                text,
                classes,
                planted: Some(m),
                leg: i,
                fallback,
            });
        }
        leg_start = corner;
    }
    let last = plan.legs.len() - 1;
    let last_leg_ms = plan.time_at_ms(plan.legs[last].length_m);
    let place = PLACES[rng.gen_range(0..PLACES.len())];
    cues.push(CueTruth {
        start_ms: end_ms - ARRIVAL_BEFORE_END_MS.min(last_leg_ms / 2),
        end_ms: 0,
        text: format!("Arrived at {place}."),
        classes: classes(&[CommandClass::LocationName]),
        planted: None,
        leg: last,
        fallback: false,
    });

    for i in 0..cues.len() {
        let limit = cues.get(i + 1).map_or(end_ms, |next| next.start_ms);
        cues[i].end_ms = (cues[i].start_ms + CUE_DURATION_MS)
            .min(limit)
            .max(cues[i].start_ms);
    }

    let segments = cues
        .iter()
        .map(|c| TranscriptSegment::new(c.start_ms, c.end_ms, &c.text))
        .collect::<Result<Vec<_>>>()?;
    let transcript = Transcript::new(segments, Some(plan.origin.t()))?;
    let frame_count = (end_ms as f64 * DEFAULT_FPS / 1000.0).floor() as u64 + 1;
    let video = VideoIndex::new(plan.origin.t(), DEFAULT_FPS, frame_count)?;

    Ok(StyledCorpus {
        plan: plan.clone(),
        style,
        track,
        transcript,
        video,
        ground_truth: GroundTruth {
            seed: plan.seed,
            style,
            noise_sigma_m: plan.noise_sigma_m,
            legs: plan.legs.clone(),
            instructions: cues,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusFiles {
    pub gpx: PathBuf,
    pub transcript: PathBuf,
    pub video: PathBuf,
    pub ground_truth: PathBuf,
}

pub fn render_ground_truth(gt: &GroundTruth) -> String {
    let mut s = serde_json::to_string_pretty(gt).expect("ground truth serializes");
    s.push('\n');
    s
}

/// Writes the GPX track, segment-json transcript, video sidecar and ground truth.
pub fn write_corpus(corpus: &StyledCorpus, out_dir: &Path) -> Result<CorpusFiles> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let files = CorpusFiles {
        gpx: out_dir.join(GPX_FILE),
        transcript: out_dir.join(TRANSCRIPT_FILE),
        video: out_dir.join(VIDEO_FILE),
        ground_truth: out_dir.join(GROUND_TRUTH_FILE),
    };
    let contents = [
        (&files.gpx, write_gpx(&corpus.track)),
        (&files.transcript, write_segment_json(&corpus.transcript)),
        (&files.video, write_video_meta(&corpus.video)),
        (
            &files.ground_truth,
            render_ground_truth(&corpus.ground_truth),
        ),
    ];
    for (path, body) in contents {
        fs::write(path, body).map_err(|e| Error::io(path, e))?;
    }
    Ok(files)
}

//! On-disk dataset: `triads.jsonl` plus a `manifest.json` with input digests.
//!
//! Every float in `triads.jsonl` is written with exactly six decimals and
//! keys appear in a fixed order, so identical inputs give identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::classify::{CommandClass, Evidence};
use crate::error::{Error, Result};
use crate::model::{GeoPoint, Heading, Timestamp};
use crate::segment::{ActionSegment, Maneuver};
use crate::sync::InstructionEvent;

pub const TRIADS_FILE: &str = "triads.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const HASH_ALGORITHM: &str = "sha256";
pub const TOOL_VERSION: &str = concat!("advlat ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisionRef {
    pub video_id: String,
    pub frame_start: u64,
    pub frame_end: u64,
}

/// A spoken instruction, the motion that carried it out, and the frames that show it.
#[derive(Debug, Clone, PartialEq)]
pub struct VlaTriad {
    pub event: InstructionEvent,
    pub action: ActionSegment,
    pub vision: Option<VisionRef>,
}

impl VlaTriad {
    pub fn new(
        event: InstructionEvent,
        action: ActionSegment,
        video_id: Option<&str>,
    ) -> Result<Self> {
        if action.event_id != event.id {
            return Err(Error::InternalOrdering(format!(
                "segment for event {} paired with event {}",
                action.event_id, event.id
            )));
        }
        let vision = match (video_id, action.frame_start, action.frame_end) {
            (Some(id), Some(frame_start), Some(frame_end)) => {
                if frame_start > frame_end {
                    return Err(Error::InternalOrdering(format!(
                        "event {}: frame range {frame_start}..{frame_end} is inverted",
                        event.id
                    )));
                }
                Some(VisionRef {
                    video_id: id.to_owned(),
                    frame_start,
                    frame_end,
                })
            }
            _ => None,
        };
        Ok(VlaTriad {
            event,
            action,
            vision,
        })
    }
}

/// Pairs events with their segments by position.
pub fn assemble_triads(
    events: &[InstructionEvent],
    segments: &[ActionSegment],
    video_id: Option<&str>,
) -> Result<Vec<VlaTriad>> {
    if events.len() != segments.len() {
        return Err(Error::InternalOrdering(format!(
            "{} events but {} segments",
            events.len(),
            segments.len()
        )));
    }
    events
        .iter()
        .zip(segments)
        .map(|(e, s)| VlaTriad::new(e.clone(), s.clone(), video_id))
        .collect()
}

fn fixed6_text(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_owned()
    } else {
        s
    }
}

/// `x` rounded to the precision it is written with.
pub fn quantize(x: f64) -> f64 {
    fixed6_text(x).parse().unwrap_or(x)
}

fn fixed6<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::Error as _;
    if !x.is_finite() {
        return Err(S::Error::custom("non-finite float"));
    }
    RawValue::from_string(fixed6_text(*x))
        .map_err(S::Error::custom)?
        .serialize(s)
}

fn fixed6_opt<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => fixed6(v, s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoRecord {
    #[serde(serialize_with = "fixed6")]
    pub lat: f64,
    #[serde(serialize_with = "fixed6")]
    pub lon: f64,
    #[serde(serialize_with = "fixed6_opt")]
    pub ele_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointRecord {
    pub t_ms: i64,
    #[serde(serialize_with = "fixed6")]
    pub lat: f64,
    #[serde(serialize_with = "fixed6")]
    pub lon: f64,
    #[serde(serialize_with = "fixed6_opt")]
    pub ele_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionRecord {
    pub t_start_ms: i64,
    pub t_end_ms: i64,
    pub maneuver: Maneuver,
    #[serde(serialize_with = "fixed6")]
    pub net_bearing_change_deg: f64,
    #[serde(serialize_with = "fixed6")]
    pub distance_m: f64,
    pub waypoints: Vec<WaypointRecord>,
    pub frame_start: Option<u64>,
    pub frame_end: Option<u64>,
}

/// One line of `triads.jsonl`. Field order here is the key order on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriadRecord {
    pub id: usize,
    pub t_utc_ms: i64,
    pub text: String,
    pub classes: Vec<CommandClass>,
    pub evidence: Vec<Evidence>,
    pub geo: GeoRecord,
    #[serde(serialize_with = "fixed6_opt")]
    pub heading_deg: Option<f64>,
    pub frame_index: Option<u64>,
    pub action: ActionRecord,
}

fn geo_record(p: &GeoPoint) -> GeoRecord {
    GeoRecord {
        lat: quantize(p.lat_deg()),
        // keep the antimeridian at -180 as GeoPoint does
        lon: match quantize(p.lon_deg()) {
            l if l >= 180.0 => -180.0,
            l => l,
        },
        ele_m: p.ele_m().map(quantize),
    }
}

impl From<&VlaTriad> for TriadRecord {
    fn from(triad: &VlaTriad) -> Self {
        let (e, a) = (&triad.event, &triad.action);
        TriadRecord {
            id: e.id,
            t_utc_ms: e.t.millis(),
            text: e.text.clone(),
            classes: e.classes.iter().copied().collect(),
            evidence: e.evidence.clone(),
            geo: geo_record(&e.geo),
            heading_deg: e.heading.degrees().map(|d| {
                // 359.9999997 would print as 360.000000
                let q = quantize(d);
                if q >= 360.0 {
                    0.0
                } else {
                    q
                }
            }),
            frame_index: e.frame_index,
            action: ActionRecord {
                t_start_ms: a.t_start.millis(),
                t_end_ms: a.t_end.millis(),
                maneuver: a.maneuver,
                net_bearing_change_deg: quantize(a.net_bearing_change_deg),
                distance_m: quantize(a.distance_m),
                waypoints: a
                    .waypoints
                    .iter()
                    .map(|p| {
                        let g = geo_record(p);
                        WaypointRecord {
                            t_ms: p.t().millis(),
                            lat: g.lat,
                            lon: g.lon,
                            ele_m: g.ele_m,
                        }
                    })
                    .collect(),
                frame_start: triad.vision.as_ref().map(|v| v.frame_start),
                frame_end: triad.vision.as_ref().map(|v| v.frame_end),
            },
        }
    }
}

impl TriadRecord {
    /// Rebuilds the in-memory triad. Event warnings are not stored on disk
    /// and come back empty.
    pub fn to_triad(&self, video_id: Option<&str>) -> Result<VlaTriad> {
        let t = Timestamp::from_millis(self.t_utc_ms)?;
        let geo = GeoPoint::new(self.geo.lat, self.geo.lon, self.geo.ele_m, t)?;
        let heading = match self.heading_deg {
            Some(d) => Heading::Bearing(crate::model::BearingDeg::new(d)),
            None => Heading::Degenerate,
        };
        let a = &self.action;
        let waypoints = a
            .waypoints
            .iter()
            .map(|w| GeoPoint::new(w.lat, w.lon, w.ele_m, Timestamp::from_millis(w.t_ms)?))
            .collect::<Result<Vec<_>>>()?;
        let event = InstructionEvent {
            id: self.id,
            t,
            text: self.text.clone(),
            classes: self.classes.iter().copied().collect(),
            evidence: self.evidence.clone(),
            geo,
            heading,
            frame_index: self.frame_index,
            warnings: Vec::new(),
        };
        let action = ActionSegment {
            event_id: self.id,
            t_start: Timestamp::from_millis(a.t_start_ms)?,
            t_end: Timestamp::from_millis(a.t_end_ms)?,
            waypoints,
            net_bearing_change_deg: a.net_bearing_change_deg,
            distance_m: a.distance_m,
            maneuver: a.maneuver,
            frame_start: a.frame_start,
            frame_end: a.frame_end,
        };
        VlaTriad::new(event, action, video_id)
    }
}

/// The exact bytes of `triads.jsonl` for these triads.
pub fn render_triads(triads: &[VlaTriad]) -> Result<String> {
    if let Some(w) = triads.windows(2).find(|w| w[1].event.t < w[0].event.t) {
        return Err(Error::InternalOrdering(format!(
            "triad {} is earlier than triad {}",
            w[1].event.id, w[0].event.id
        )));
    }
    let mut out = String::new();
    for triad in triads {
        let line = serde_json::to_string(&TriadRecord::from(triad))
            .map_err(|e| Error::InternalOrdering(format!("event {}: {e}", triad.event.id)))?;
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

/// Writes `triads.jsonl` into `out_dir`, creating the directory if needed.
pub fn export_triads(triads: &[VlaTriad], out_dir: &Path) -> Result<PathBuf> {
    let body = render_triads(triads)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join(TRIADS_FILE);
    fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Parses one `triads.jsonl` line; `line` is the 1-based number used in errors.
pub fn parse_triad_line(text: &str, line: usize) -> Result<TriadRecord> {
    serde_json::from_str(text).map_err(|e| Error::Schema {
        line,
        message: e.to_string(),
    })
}

/// Reads a whole `triads.jsonl`. Blank lines are ignored.
pub fn read_triads(bytes: &[u8]) -> Result<Vec<TriadRecord>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Encoding(e.to_string()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_triad_line(l, i + 1))
        .collect()
}

/// `sha256:<hex>` of the bytes.
pub fn digest_bytes(bytes: &[u8]) -> String {
    format!("{HASH_ALGORITHM}:{}", hex::encode(Sha256::digest(bytes)))
}

/// `path` relative to `base` when it lies under it, otherwise just its file
/// name; either way free of machine-specific prefixes.
pub fn relativize_path(path: &Path, base: &Path) -> String {
    let rel = match path.strip_prefix(base) {
        Ok(r) => r.to_path_buf(),
        Err(_) if path.is_relative() => path.to_path_buf(),
        Err(_) => path.file_name().map(PathBuf::from).unwrap_or_default(),
    };
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub role: String,
    pub digest: String,
}

impl InputDigest {
    pub fn new(path: impl Into<String>, role: impl Into<String>, bytes: &[u8]) -> Self {
        InputDigest {
            path: path.into(),
            role: role.into(),
            digest: digest_bytes(bytes),
        }
    }
}

fn ser_iso<S: Serializer>(t: &Timestamp, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&t.to_iso8601())
}

fn de_iso<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Timestamp, D::Error> {
    let s = String::deserialize(d)?;
    Timestamp::parse_iso8601(&s).map_err(serde::de::Error::custom)
}

/// Provenance for one output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    #[serde(serialize_with = "ser_iso", deserialize_with = "de_iso")]
    pub created_at: Timestamp,
    pub hash_algorithm: String,
    pub inputs: Vec<InputDigest>,
    pub config_digest: String,
    pub event_count: usize,
    pub segment_count: usize,
    pub warnings: Vec<String>,
}

impl Manifest {
    pub fn new(created_at: Timestamp, config_bytes: &[u8]) -> Self {
        Manifest {
            tool_version: TOOL_VERSION.to_owned(),
            created_at,
            hash_algorithm: HASH_ALGORITHM.to_owned(),
            inputs: Vec::new(),
            config_digest: digest_bytes(config_bytes),
            event_count: 0,
            segment_count: 0,
            warnings: Vec::new(),
        }
    }
}

pub fn render_manifest(m: &Manifest) -> String {
    // plain strings and integers only, so this cannot fail
    let mut s = serde_json::to_string_pretty(m).expect("manifest serializes");
    s.push('\n');
    s
}

pub fn write_manifest(m: &Manifest, out_dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join(MANIFEST_FILE);
    fs::write(&path, render_manifest(m)).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

//! Shared domain types: time, positions and bearings.

use std::fmt;

use chrono::{DateTime, NaiveDateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Milliseconds since the Unix epoch, UTC. Never negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub struct Timestamp(i64);

impl Timestamp {
    pub const EPOCH: Timestamp = Timestamp(0);

    pub fn from_millis(utc_ms: i64) -> Result<Self> {
        if utc_ms < 0 {
            return Err(Error::NegativeTimestamp(utc_ms));
        }
        Ok(Timestamp(utc_ms))
    }

    pub fn millis(self) -> i64 {
        self.0
    }

    /// Shift by a signed number of milliseconds.
    pub fn offset(self, delta_ms: i64) -> Result<Self> {
        let shifted = self
            .0
            .checked_add(delta_ms)
            .ok_or(Error::InvalidAnchor { millis: i64::MAX })?;
        if shifted < 0 {
            return Err(Error::InvalidAnchor { millis: shifted });
        }
        Ok(Timestamp(shifted))
    }

    /// Parses RFC 3339 / ISO-8601. A timestamp without a zone designator is read as UTC.
    pub fn parse_iso8601(text: &str) -> Result<Self> {
        let text = text.trim();
        let utc_ms = match DateTime::parse_from_rfc3339(text) {
            Ok(dt) => dt.timestamp_millis(),
            Err(_) => NaiveDateTime::parse_from_str(text, "%Y-%m-%dT%H:%M:%S%.f")
                .map_err(|e| Error::parse(text, format!("invalid ISO-8601 timestamp: {e}")))?
                .and_utc()
                .timestamp_millis(),
        };
        Timestamp::from_millis(utc_ms)
    }

    pub fn to_iso8601(self) -> String {
        DateTime::<Utc>::from_timestamp_millis(self.0)
            .expect("non-negative i64 millis is representable")
            .to_rfc3339_opts(SecondsFormat::Millis, true)
    }
}

impl TryFrom<i64> for Timestamp {
    type Error = Error;

    fn try_from(value: i64) -> Result<Self> {
        Timestamp::from_millis(value)
    }
}

impl From<Timestamp> for i64 {
    fn from(t: Timestamp) -> i64 {
        t.0
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_iso8601())
    }
}

/// A timestamped WGS-84 fix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    lat_deg: f64,
    lon_deg: f64,
    ele_m: Option<f64>,
    t: Timestamp,
}

impl GeoPoint {
    /// Longitude is wrapped into [-180, 180); latitude must lie in [-90, 90].
    pub fn new(lat_deg: f64, lon_deg: f64, ele_m: Option<f64>, t: Timestamp) -> Result<Self> {
        if !lat_deg.is_finite()
            || !lon_deg.is_finite()
            || !(-90.0..=90.0).contains(&lat_deg)
            || !(-180.0..=180.0).contains(&lon_deg)
        {
            return Err(Error::InvalidCoordinate {
                lat: lat_deg,
                lon: lon_deg,
            });
        }
        let lon_deg = if lon_deg == 180.0 { -180.0 } else { lon_deg };
        Ok(GeoPoint {
            lat_deg,
            lon_deg,
            ele_m: ele_m.filter(|e| e.is_finite()),
            t,
        })
    }

    pub fn lat_deg(&self) -> f64 {
        self.lat_deg
    }

    pub fn lon_deg(&self) -> f64 {
        self.lon_deg
    }

    pub fn ele_m(&self) -> Option<f64> {
        self.ele_m
    }

    pub fn t(&self) -> Timestamp {
        self.t
    }

    pub fn with_time(mut self, t: Timestamp) -> Self {
        self.t = t;
        self
    }

    pub fn same_position(&self, other: &GeoPoint) -> bool {
        self.lat_deg == other.lat_deg && self.lon_deg == other.lon_deg
    }
}

/// Compass bearing in degrees, normalized into [0, 360). 0 is north, 90 is east.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct BearingDeg(f64);

impl BearingDeg {
    pub fn new(degrees: f64) -> Self {
        let mut v = degrees.rem_euclid(360.0);
        // rem_euclid can round up to exactly 360 for tiny negative inputs.
        if v >= 360.0 {
            v = 0.0;
        }
        BearingDeg(v)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Vehicle heading at an instant. A stationary vehicle has no defined heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Heading {
    Bearing(BearingDeg),
    Degenerate,
}

impl Heading {
    pub fn degrees(self) -> Option<f64> {
        match self {
            Heading::Bearing(b) => Some(b.value()),
            Heading::Degenerate => None,
        }
    }
}

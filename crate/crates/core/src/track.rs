//! The action stream: a time-ordered GPS track and queries against it.

use crate::error::{Error, Result};
use crate::geo::initial_bearing;
use crate::model::{BearingDeg, GeoPoint, Timestamp};

/// Default slack, in milliseconds, for queries just outside the recorded span.
pub const DEFAULT_SPAN_TOLERANCE_MS: i64 = 5_000;

#[derive(Debug, Clone, PartialEq)]
pub struct TrackLog {
    points: Vec<GeoPoint>,
    source_id: String,
}

impl TrackLog {
    /// Fails with `EmptyTrack` for no points and `NonMonotoneTrack` if time ever decreases.
    pub fn new(points: Vec<GeoPoint>, source_id: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyTrack);
        }
        if let Some(i) = points.windows(2).position(|w| w[1].t() < w[0].t()) {
            return Err(Error::NonMonotoneTrack { index: i + 1 });
        }
        Ok(TrackLog {
            points,
            source_id: source_id.into(),
        })
    }

    pub fn points(&self) -> &[GeoPoint] {
        &self.points
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn with_source_id(mut self, source_id: impl Into<String>) -> Self {
        self.source_id = source_id.into();
        self
    }

    pub fn start(&self) -> Timestamp {
        self.points[0].t()
    }

    pub fn end(&self) -> Timestamp {
        self.points[self.points.len() - 1].t()
    }

    /// Applies a clock offset to every point.
    pub fn shifted(&self, offset_ms: i64) -> Result<TrackLog> {
        let points = self
            .points
            .iter()
            .map(|p| Ok(p.with_time(p.t().offset(offset_ms)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(TrackLog {
            points,
            source_id: self.source_id.clone(),
        })
    }

    fn require_pair(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::TrackTooShort {
                points: self.points.len(),
            });
        }
        Ok(())
    }

    fn check_span(&self, t: Timestamp, tolerance_ms: i64) -> Result<()> {
        let (first, last) = (self.start().millis(), self.end().millis());
        let t_ms = t.millis();
        if t_ms < first.saturating_sub(tolerance_ms) || t_ms > last.saturating_add(tolerance_ms) {
            return Err(Error::OutOfTrackSpan {
                t: t_ms,
                first,
                last,
            });
        }
        Ok(())
    }

    /// Index `i` such that points `i` and `i + 1` bracket `t` (clamped to the span).
    fn bracket(&self, t: Timestamp) -> usize {
        let n = self.points.len();
        // first index whose time is >= t
        let idx = self.points.partition_point(|p| p.t() < t);
        idx.saturating_sub(1).min(n - 2)
    }

    /// Linear lat/lon interpolation at `t`. Queries outside the span but within
    /// `tolerance_ms` of it are clamped to the nearest endpoint.
    pub fn interpolate_position(&self, t: Timestamp, tolerance_ms: i64) -> Result<GeoPoint> {
        self.require_pair()?;
        self.check_span(t, tolerance_ms)?;
        Ok(self.position_clamped(t))
    }

    pub(crate) fn position_clamped(&self, t: Timestamp) -> GeoPoint {
        if t <= self.start() {
            return self.points[0].with_time(t);
        }
        if t >= self.end() {
            return self.points[self.points.len() - 1].with_time(t);
        }
        let i = self.bracket(t);
        let (a, b) = (&self.points[i], &self.points[i + 1]);
        if t == a.t() {
            return *a;
        }
        if t == b.t() {
            return *b;
        }
        let span = (b.t().millis() - a.t().millis()) as f64;
        let f = (t.millis() - a.t().millis()) as f64 / span;
        let lerp = |x: f64, y: f64| x + f * (y - x);
        let ele = match (a.ele_m(), b.ele_m()) {
            (Some(x), Some(y)) => Some(lerp(x, y)),
            _ => None,
        };
        GeoPoint::new(
            lerp(a.lat_deg(), b.lat_deg()),
            lerp(a.lon_deg(), b.lon_deg()),
            ele,
            t,
        )
        .expect("interpolation between valid points stays in range")
    }

    /// Bearing of the bracketing pair at `t`, widening the pair outward while it is degenerate.
    pub fn heading_at(&self, t: Timestamp, tolerance_ms: i64) -> Result<BearingDeg> {
        self.require_pair()?;
        self.check_span(t, tolerance_ms)?;
        let last = self.points.len() - 1;
        let (mut lo, mut hi) = {
            let i = self.bracket(t);
            (i, i + 1)
        };
        loop {
            match initial_bearing(&self.points[lo], &self.points[hi]) {
                Ok(b) => return Ok(b),
                Err(Error::DegenerateBearing) if lo > 0 || hi < last => {
                    lo = lo.saturating_sub(1);
                    hi = (hi + 1).min(last);
                }
                Err(e) => return Err(e),
            }
        }
    }
}

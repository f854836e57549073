use std::fmt::Write as _;

use roxmltree::{Document, Node};

use super::decode_utf8;
use crate::error::{Error, Result};
use crate::model::{GeoPoint, Timestamp};
use crate::track::TrackLog;

fn child<'a, 'input>(node: Node<'a, 'input>, name: &str) -> Option<Node<'a, 'input>> {
    node.children()
        .find(|c| c.is_element() && c.tag_name().name() == name)
}

fn children<'a, 'input: 'a>(
    node: Node<'a, 'input>,
    name: &'a str,
) -> impl Iterator<Item = Node<'a, 'input>> + 'a {
    node.children()
        .filter(move |c| c.is_element() && c.tag_name().name() == name)
}

fn coordinate(node: Node<'_, '_>, attr: &str, index: usize) -> Result<f64> {
    let raw = node
        .attribute(attr)
        .ok_or_else(|| Error::parse(format!("trkpt[{index}]"), format!("missing {attr}")))?;
    raw.trim()
        .parse::<f64>()
        .map_err(|_| Error::parse(format!("trkpt[{index}]"), format!("bad {attr} {raw:?}")))
}

/// Reads every `trkpt` under `gpx/trk/trkseg`, in document order.
///
/// The track's source id is the first `<trk><name>` when present.
pub fn parse_gpx(bytes: &[u8]) -> Result<TrackLog> {
    let text = decode_utf8(bytes)?;
    let doc = Document::parse(text).map_err(|e| Error::parse("gpx", e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "gpx" {
        return Err(Error::parse(
            "gpx",
            format!(
                "root element is <{}>, expected <gpx>",
                root.tag_name().name()
            ),
        ));
    }
    if let Some(version) = root.attribute("version") {
        if version != "1.0" && version != "1.1" {
            return Err(Error::parse(
                "gpx",
                format!("unsupported GPX version {version:?}"),
            ));
        }
    }

    let mut source_id = String::new();
    let mut points = Vec::new();
    for trk in children(root, "trk") {
        if source_id.is_empty() {
            if let Some(name) = child(trk, "name").and_then(|n| n.text()) {
                source_id = name.trim().to_owned();
            }
        }
        for trkpt in children(trk, "trkseg").flat_map(|seg| children(seg, "trkpt")) {
            let index = points.len();
            let lat = coordinate(trkpt, "lat", index)?;
            let lon = coordinate(trkpt, "lon", index)?;
            let ele = match child(trkpt, "ele").and_then(|e| e.text()) {
                Some(raw) => Some(raw.trim().parse::<f64>().map_err(|_| {
                    Error::parse(
                        format!("trkpt[{index}]/ele"),
                        format!("bad elevation {raw:?}"),
                    )
                })?),
                None => None,
            };
            let time = child(trkpt, "time")
                .and_then(|t| t.text())
                .ok_or(Error::MissingTimestamp { index })?;
            let t = Timestamp::parse_iso8601(time).map_err(|e| match e {
                Error::Parse { message, .. } => {
                    Error::parse(format!("trkpt[{index}]/time"), message)
                }
                other => Error::parse(format!("trkpt[{index}]/time"), other.to_string()),
            })?;
            let point = GeoPoint::new(lat, lon, ele, t)
                .map_err(|e| Error::parse(format!("trkpt[{index}]"), e.to_string()))?;
            points.push(point);
        }
    }
    TrackLog::new(points, source_id)
}

fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Serializes a track as GPX 1.1 with a single `trk`/`trkseg`.
///
/// Coordinates use the shortest round-trip decimal form, so `parse_gpx`
/// recovers the exact points.
pub fn write_gpx(track: &TrackLog) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(
        "<gpx version=\"1.1\" creator=\"advlat\" xmlns=\"http://www.topografix.com/GPX/1/1\">\n",
    );
    out.push_str("  <trk>\n");
    if !track.source_id().is_empty() {
        let _ = writeln!(out, "    <name>{}</name>", escape_xml(track.source_id()));
    }
    out.push_str("    <trkseg>\n");
    for p in track.points() {
        let _ = writeln!(
            out,
            "      <trkpt lat=\"{}\" lon=\"{}\">",
            p.lat_deg(),
            p.lon_deg()
        );
        if let Some(ele) = p.ele_m() {
            let _ = writeln!(out, "        <ele>{ele}</ele>");
        }
        let _ = writeln!(out, "        <time>{}</time>", p.t().to_iso8601());
        out.push_str("      </trkpt>\n");
    }
    out.push_str("    </trkseg>\n  </trk>\n</gpx>\n");
    out
}

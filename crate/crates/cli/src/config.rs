//! Optional TOML config file. Keys mirror the long flags with underscores;
//! relative paths are resolved against the file's directory. Flags win.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub gpx: Option<PathBuf>,
    pub transcript: Option<PathBuf>,
    pub transcript_format: Option<String>,
    pub audio_start: Option<String>,
    pub video_meta: Option<PathBuf>,
    pub gps_offset_ms: Option<i64>,
    pub audio_offset_ms: Option<i64>,
    pub video_offset_ms: Option<i64>,
    pub lexicon: Option<PathBuf>,
    pub tolerance_ms: Option<i64>,
    pub straight_max_deg: Option<f64>,
    pub uturn_min_deg: Option<f64>,
    pub jitter_floor_m: Option<f64>,
    pub out: Option<PathBuf>,
    pub relativize: Option<bool>,
    pub seed: Option<u64>,
    pub legs: Option<usize>,
    pub style: Option<String>,
    pub noise_sigma_m: Option<f64>,
    pub sources: Option<Vec<String>>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig, Failure> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Failure::missing(path, &e))?;
        let mut cfg: FileConfig = toml::from_str(&text)
            .map_err(|e| Failure::usage(format!("{}: {}", path.display(), e.message())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.gpx,
            &mut cfg.transcript,
            &mut cfg.video_meta,
            &mut cfg.lexicon,
            &mut cfg.out,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Parses a config-file string the same way the flag would be parsed.
pub fn parse_setting<T>(key: &str, raw: Option<&str>) -> Result<Option<T>, Failure>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    raw.map(|s| {
        s.parse::<T>()
            .map_err(|e| Failure::usage(format!("config {key}: {e}")))
    })
    .transpose()
}

//! The `advlat` command: classify, pipeline, stats and synth subcommands.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use advlat::classify::{classify, load_lexicon, ClassSet, Evidence, Lexicon};
use advlat::emit::{
    assemble_triads, digest_bytes, read_triads, relativize_path, render_manifest, render_triads,
    InputDigest, Manifest, MANIFEST_FILE, TRIADS_FILE,
};
use advlat::ingest::{parse_gpx, parse_transcript, parse_video_meta, TranscriptFormat};
use advlat::segment::{consistency_check, segment_actions, ManeuverConfig};
use advlat::stats::{render_report, CorpusStats};
use advlat::sync::{build_events, StreamOffsets, SyncConfig};
use advlat::synth::{generate_instructions, write_corpus, RoutePlan, Style};
use advlat::{Error, Timestamp};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

mod config;

use config::parse_setting;
pub use config::FileConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_SOFTWARE: i32 = 70;

pub const REPORT_FILE: &str = "report.txt";
pub const MISMATCHES_FILE: &str = "mismatches.txt";

/// A failed command: the exit code and the line printed to stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: format!("usage: {}", message.into()),
        }
    }

    pub fn missing(path: &Path, e: &std::io::Error) -> Failure {
        Failure {
            code: EXIT_NO_INPUT,
            message: format!("MissingInput: {}: {e}", path.display()),
        }
    }

    /// A core error while processing `subject` (usually a file path).
    pub fn from_error(subject: &str, e: &Error) -> Failure {
        let code = match e {
            Error::Io { .. } | Error::InternalOrdering(_) => EXIT_SOFTWARE,
            Error::InvalidPlan(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: format!("{}: {subject}: {e}", e.name()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "advlat",
    version,
    about = "Build vision-language-action triads from drive recordings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify every transcript segment and print one JSON record per line.
    Classify(ClassifyArgs),
    /// Run the full pipeline and write a dataset directory.
    Pipeline(PipelineArgs),
    /// Merge triads files from several sources into a frequency report.
    Stats(StatsArgs),
    /// Generate a synthetic drive with ground truth.
    Synth(SynthArgs),
}

fn parse_format(s: &str) -> Result<TranscriptFormat, String> {
    s.parse()
}

fn parse_timestamp(s: &str) -> Result<Timestamp, String> {
    Timestamp::parse_iso8601(s).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    /// segment-json, srt or plain-lines; guessed from the extension if absent
    #[arg(long, value_parser = parse_format)]
    pub transcript_format: Option<TranscriptFormat>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub gpx: Option<PathBuf>,
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    pub transcript_format: Option<TranscriptFormat>,
    /// Wall-clock time of transcript offset zero (ISO-8601)
    #[arg(long, value_parser = parse_timestamp)]
    pub audio_start: Option<Timestamp>,
    #[arg(long)]
    pub video_meta: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub gps_offset_ms: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    pub audio_offset_ms: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    pub video_offset_ms: Option<i64>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub tolerance_ms: Option<i64>,
    #[arg(long)]
    pub straight_max_deg: Option<f64>,
    #[arg(long)]
    pub uturn_min_deg: Option<f64>,
    #[arg(long)]
    pub jitter_floor_m: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Record input paths relative to the working directory
    #[arg(long)]
    pub relativize: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// LABEL=PATH to a triads.jsonl (the label defaults to the file stem)
    #[arg(long = "source")]
    pub sources: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of legs; maneuvers are planted between them
    #[arg(long)]
    pub legs: Option<usize>,
    /// distance-heavy, static-object-heavy or cardinal-heavy
    #[arg(long, value_parser = |s: &str| s.parse::<Style>())]
    pub style: Option<Style>,
    #[arg(long)]
    pub noise_sigma_m: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational =
                matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let rendered = e.render().to_string();
            if informational {
                let _ = stdout.write_all(rendered.as_bytes());
                return EXIT_OK;
            }
            let _ = stderr.write_all(rendered.as_bytes());
            return EXIT_USAGE;
        }
    };
    let result = match cli.command {
        Command::Classify(a) => cmd_classify(&a),
        Command::Pipeline(a) => PipelineConfig::resolve(&a)
            .and_then(|cfg| cmd_pipeline(&cfg))
            .map(|s| s.to_string()),
        Command::Stats(a) => cmd_stats(&a),
        Command::Synth(a) => cmd_synth(&a),
    };
    match result {
        Ok(text) => {
            if stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return EXIT_SOFTWARE;
            }
            EXIT_OK
        }
        Err(f) => {
            let _ = writeln!(stderr, "advlat: {}", f.message);
            f.code
        }
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::missing(path, &e))
}

fn write_output(path: &Path, body: &str) -> Result<(), Failure> {
    std::fs::write(path, body).map_err(|e| {
        Failure::from_error(
            &path.display().to_string(),
            &Error::Io {
                path: path.to_path_buf(),
                source: e,
            },
        )
    })
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::usage(format!("--{flag} is required (flag or config file)")))
}

/// `.srt` is SubRip, `.json` segment-json, anything else plain lines.
pub fn guess_format(path: &Path) -> TranscriptFormat {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("srt") => TranscriptFormat::Srt,
        Some("json") => TranscriptFormat::SegmentJson,
        _ => TranscriptFormat::PlainLines,
    }
}

fn load_lexicon_file(path: Option<&Path>) -> Result<(Lexicon, Option<Vec<u8>>), Failure> {
    match path {
        None => Ok((Lexicon::builtin(), None)),
        Some(p) => {
            let bytes = read_input(p)?;
            let lex = load_lexicon(Some(&bytes))
                .map_err(|e| Failure::from_error(&p.display().to_string(), &e))?;
            Ok((lex, Some(bytes)))
        }
    }
}

#[derive(Serialize)]
struct ClassifyRecord<'a> {
    text: &'a str,
    classes: &'a ClassSet,
    evidence: &'a [Evidence],
}

pub fn cmd_classify(args: &ClassifyArgs) -> Result<String, Failure> {
    let file = FileConfig::load(args.config.as_deref())?;
    let path = required(args.transcript.clone().or(file.transcript), "transcript")?;
    let format = match args.transcript_format {
        Some(f) => f,
        None => parse_setting("transcript_format", file.transcript_format.as_deref())?
            .unwrap_or_else(|| guess_format(&path)),
    };
    let (lex, _) = load_lexicon_file(args.lexicon.clone().or(file.lexicon).as_deref())?;
    let shown = path.display().to_string();
    let transcript = parse_transcript(&read_input(&path)?, format)
        .map_err(|e| Failure::from_error(&shown, &e))?;

    let mut out = String::new();
    for (i, seg) in transcript.segments().iter().enumerate() {
        let c = classify(seg.text(), &lex)
            .map_err(|e| Failure::from_error(&format!("{shown}: segment {i}"), &e))?;
        let line = serde_json::to_string(&ClassifyRecord {
            text: seg.text(),
            classes: &c.classes,
            evidence: &c.evidence,
        })
        .map_err(|e| Failure::from_error(&shown, &Error::InternalOrdering(e.to_string())))?;
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

/// Everything `pipeline` needs, after merging flags over the config file.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub gpx: PathBuf,
    pub transcript: PathBuf,
    pub transcript_format: TranscriptFormat,
    pub video_meta: Option<PathBuf>,
    pub audio_start: Option<Timestamp>,
    pub offsets: StreamOffsets,
    pub lexicon: Option<PathBuf>,
    pub sync: SyncConfig,
    pub maneuver: ManeuverConfig,
    pub out: PathBuf,
    pub relativize: bool,
}

impl PipelineConfig {
    pub fn resolve(a: &PipelineArgs) -> Result<PipelineConfig, Failure> {
        let f = FileConfig::load(a.config.as_deref())?;
        let transcript = required(a.transcript.clone().or(f.transcript), "transcript")?;
        let transcript_format = match a.transcript_format {
            Some(fmt) => fmt,
            None => parse_setting("transcript_format", f.transcript_format.as_deref())?
                .unwrap_or_else(|| guess_format(&transcript)),
        };
        let audio_start = match a.audio_start {
            Some(t) => Some(t),
            None => f
                .audio_start
                .as_deref()
                .map(|s| {
                    parse_timestamp(s)
                        .map_err(|e| Failure::usage(format!("config audio_start: {e}")))
                })
                .transpose()?,
        };
        let defaults = ManeuverConfig::default();
        let maneuver = ManeuverConfig {
            straight_max_deg: a
                .straight_max_deg
                .or(f.straight_max_deg)
                .unwrap_or(defaults.straight_max_deg),
            uturn_min_deg: a
                .uturn_min_deg
                .or(f.uturn_min_deg)
                .unwrap_or(defaults.uturn_min_deg),
            jitter_floor_m: a
                .jitter_floor_m
                .or(f.jitter_floor_m)
                .unwrap_or(defaults.jitter_floor_m),
        };
        if !(0.0 <= maneuver.straight_max_deg
            && maneuver.straight_max_deg < maneuver.uturn_min_deg
            && maneuver.uturn_min_deg <= 180.0)
        {
            return Err(Failure::usage(
                "thresholds need 0 <= straight-max-deg < uturn-min-deg <= 180",
            ));
        }
        if !(maneuver.jitter_floor_m.is_finite() && maneuver.jitter_floor_m >= 0.0) {
            return Err(Failure::usage(
                "--jitter-floor-m must be a non-negative number",
            ));
        }
        let tolerance_ms = a
            .tolerance_ms
            .or(f.tolerance_ms)
            .unwrap_or(SyncConfig::default().tolerance_ms);
        if tolerance_ms < 0 {
            return Err(Failure::usage("--tolerance-ms must not be negative"));
        }
        Ok(PipelineConfig {
            gpx: required(a.gpx.clone().or(f.gpx), "gpx")?,
            transcript,
            transcript_format,
            video_meta: a.video_meta.clone().or(f.video_meta),
            audio_start,
            offsets: StreamOffsets {
                gps_offset_ms: a.gps_offset_ms.or(f.gps_offset_ms).unwrap_or(0),
                audio_offset_ms: a.audio_offset_ms.or(f.audio_offset_ms).unwrap_or(0),
                video_offset_ms: a.video_offset_ms.or(f.video_offset_ms).unwrap_or(0),
            },
            lexicon: a.lexicon.clone().or(f.lexicon),
            sync: SyncConfig { tolerance_ms },
            maneuver,
            out: required(a.out.clone().or(f.out), "out")?,
            relativize: a.relativize || f.relativize.unwrap_or(false),
        })
    }
}

// Settings that change the output, hashed into the manifest. Paths are left
// out (inputs are digested by content) so the digest is machine independent.
#[derive(Serialize)]
struct ConfigDigestInput<'a> {
    transcript_format: &'a str,
    audio_start: Option<String>,
    offsets: StreamOffsets,
    sync: SyncConfig,
    maneuver: ManeuverConfig,
    lexicon: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineSummary {
    pub events: usize,
    pub segments: usize,
    pub warnings: usize,
    pub mismatches: usize,
}

impl std::fmt::Display for PipelineSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "events: {}", self.events)?;
        writeln!(f, "segments: {}", self.segments)?;
        writeln!(f, "warnings: {}", self.warnings)?;
        writeln!(f, "mismatches: {}", self.mismatches)
    }
}

/// The rendered artifacts of one pipeline run, before anything is written.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub triads_jsonl: String,
    pub report: String,
    pub mismatches: String,
    pub manifest: Manifest,
    pub summary: PipelineSummary,
}

fn created_at() -> Timestamp {
    // SOURCE_DATE_EPOCH pins the timestamp for reproducible builds
    let from_env = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| secs.checked_mul(1000))
        .and_then(|ms| Timestamp::from_millis(ms).ok());
    from_env.unwrap_or_else(|| {
        let ms = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis() as i64)
            .unwrap_or(0);
        Timestamp::from_millis(ms).unwrap_or(Timestamp::EPOCH)
    })
}

fn file_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Runs every stage in memory. Nothing touches the output directory.
pub fn compute_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutput, Failure> {
    let shown = |p: &Path| p.display().to_string();
    let gpx_bytes = read_input(&cfg.gpx)?;
    let transcript_bytes = read_input(&cfg.transcript)?;
    let video_bytes = cfg.video_meta.as_deref().map(read_input).transpose()?;
    let (lex, lexicon_bytes) = load_lexicon_file(cfg.lexicon.as_deref())?;

    let track = parse_gpx(&gpx_bytes).map_err(|e| Failure::from_error(&shown(&cfg.gpx), &e))?;
    let transcript = parse_transcript(&transcript_bytes, cfg.transcript_format)
        .map_err(|e| Failure::from_error(&shown(&cfg.transcript), &e))?;
    let video = match (&video_bytes, &cfg.video_meta) {
        (Some(bytes), Some(path)) => {
            Some(parse_video_meta(bytes).map_err(|e| Failure::from_error(&shown(path), &e))?)
        }
        _ => None,
    };
    let audio_start = cfg
        .audio_start
        .or(transcript.audio_start())
        .ok_or_else(|| Failure::usage("the transcript has no audio_start; pass --audio-start"))?;

    let drive = shown(&cfg.transcript);
    let events = build_events(
        &transcript,
        &track,
        video.as_ref(),
        &lex,
        cfg.offsets,
        audio_start,
        cfg.sync,
    )
    .map_err(|e| Failure::from_error(&drive, &e))?;
    let track = track
        .shifted(cfg.offsets.gps_offset_ms)
        .map_err(|e| Failure::from_error(&drive, &e))?;
    let video = video
        .map(|v| v.shifted(cfg.offsets.video_offset_ms))
        .transpose()
        .map_err(|e| Failure::from_error(&drive, &e))?;
    let segments = segment_actions(&events.events, &track, video.as_ref(), &cfg.maneuver)
        .map_err(|e| Failure::from_error(&drive, &e))?;

    let mut mismatches = String::new();
    let mut mismatch_count = 0;
    for (e, s) in events.events.iter().zip(&segments) {
        if let Some(m) = consistency_check(e, s) {
            mismatch_count += 1;
            let _ = writeln!(mismatches, "{m}");
        }
    }

    let label = file_label(&cfg.gpx);
    let stats = CorpusStats::from_class_sets(label, events.events.iter().map(|e| &e.classes));
    let report = render_report(&[stats]);

    let video_id = cfg.video_meta.as_deref().map(file_label);
    let triads = assemble_triads(&events.events, &segments, video_id.as_deref())
        .map_err(|e| Failure::from_error(&drive, &e))?;
    let triads_jsonl = render_triads(&triads).map_err(|e| Failure::from_error(&drive, &e))?;

    let mut warnings = events.warnings.clone();
    for e in &events.events {
        warnings.extend(e.warnings.iter().map(|w| format!("event {}: {w}", e.id)));
    }

    let digest_input = ConfigDigestInput {
        transcript_format: cfg.transcript_format.as_str(),
        audio_start: Some(audio_start.to_iso8601()),
        offsets: cfg.offsets,
        sync: cfg.sync,
        maneuver: cfg.maneuver,
        lexicon: lexicon_bytes.as_deref().map(digest_bytes),
    };
    let config_json = serde_json::to_vec(&digest_input).expect("config serializes");
    let mut manifest = Manifest::new(created_at(), &config_json);
    let cwd = std::env::current_dir().unwrap_or_default();
    let record_path = |p: &Path| {
        if cfg.relativize {
            relativize_path(p, &cwd)
        } else {
            std::path::absolute(p)
                .unwrap_or_else(|_| p.to_path_buf())
                .display()
                .to_string()
        }
    };
    manifest
        .inputs
        .push(InputDigest::new(record_path(&cfg.gpx), "gpx", &gpx_bytes));
    manifest.inputs.push(InputDigest::new(
        record_path(&cfg.transcript),
        "transcript",
        &transcript_bytes,
    ));
    if let (Some(p), Some(b)) = (&cfg.video_meta, &video_bytes) {
        manifest
            .inputs
            .push(InputDigest::new(record_path(p), "video_meta", b));
    }
    if let (Some(p), Some(b)) = (&cfg.lexicon, &lexicon_bytes) {
        manifest
            .inputs
            .push(InputDigest::new(record_path(p), "lexicon", b));
    }
    manifest.event_count = events.events.len();
    manifest.segment_count = segments.len();
    manifest.warnings = warnings;

    let summary = PipelineSummary {
        events: events.events.len(),
        segments: segments.len(),
        warnings: manifest.warnings.len(),
        mismatches: mismatch_count,
    };
    Ok(PipelineOutput {
        triads_jsonl,
        report,
        mismatches,
        manifest,
        summary,
    })
}

/// Computes everything, then writes the four artifacts into `cfg.out`.
pub fn cmd_pipeline(cfg: &PipelineConfig) -> Result<PipelineSummary, Failure> {
    let output = compute_pipeline(cfg)?;
    let io_fail = |p: &Path, e: std::io::Error| {
        Failure::from_error(
            &p.display().to_string(),
            &Error::Io {
                path: p.to_path_buf(),
                source: e,
            },
        )
    };
    std::fs::create_dir_all(&cfg.out).map_err(|e| io_fail(&cfg.out, e))?;
    write_output(&cfg.out.join(TRIADS_FILE), &output.triads_jsonl)?;
    write_output(&cfg.out.join(REPORT_FILE), &output.report)?;
    write_output(&cfg.out.join(MISMATCHES_FILE), &output.mismatches)?;
    write_output(
        &cfg.out.join(MANIFEST_FILE),
        &render_manifest(&output.manifest),
    )?;
    Ok(output.summary)
}

fn split_source(arg: &str) -> (String, PathBuf) {
    match arg.split_once('=') {
        Some((label, path)) if !label.is_empty() => (label.to_owned(), PathBuf::from(path)),
        _ => {
            let path = PathBuf::from(arg);
            (file_label(&path), path)
        }
    }
}

pub fn cmd_stats(args: &StatsArgs) -> Result<String, Failure> {
    let file = FileConfig::load(args.config.as_deref())?;
    let source_args = if args.sources.is_empty() {
        file.sources.unwrap_or_default()
    } else {
        args.sources.clone()
    };
    if source_args.is_empty() {
        return Err(Failure::usage(
            "at least one --source LABEL=PATH is required",
        ));
    }
    let mut sources = Vec::with_capacity(source_args.len());
    for arg in &source_args {
        let (label, path) = split_source(arg);
        let records = read_triads(&read_input(&path)?)
            .map_err(|e| Failure::from_error(&path.display().to_string(), &e))?;
        let sets: Vec<ClassSet> = records
            .iter()
            .map(|r| r.classes.iter().copied().collect())
            .collect();
        sources.push(CorpusStats::from_class_sets(label, &sets));
    }
    Ok(render_report(&sources))
}

pub fn cmd_synth(args: &SynthArgs) -> Result<String, Failure> {
    let file = FileConfig::load(args.config.as_deref())?;
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let legs = args.legs.or(file.legs).unwrap_or(8);
    if legs == 0 {
        return Err(Failure::usage("--legs must be at least 1"));
    }
    let style = match args.style {
        Some(s) => s,
        None => parse_setting("style", file.style.as_deref())?.unwrap_or(Style::DistanceHeavy),
    };
    let noise = args.noise_sigma_m.or(file.noise_sigma_m).unwrap_or(0.0);
    let out = required(args.out.clone().or(file.out), "out")?;

    let plan = RoutePlan::random(seed, legs).with_noise(noise);
    let corpus =
        generate_instructions(&plan, style).map_err(|e| Failure::from_error("synth", &e))?;
    let files = write_corpus(&corpus, &out)
        .map_err(|e| Failure::from_error(&out.display().to_string(), &e))?;
    let mut text = String::new();
    for p in [
        &files.gpx,
        &files.transcript,
        &files.video,
        &files.ground_truth,
    ] {
        let _ = writeln!(text, "{}", p.display());
    }
    Ok(text)
}

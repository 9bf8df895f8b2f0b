//! gaitkit command line: convert, analyze, validate, classify, synth and
//! stream skeletal keypoint recordings.
//!
//! Logging is controlled through the `GAITKIT_LOG` environment variable
//! (env_logger syntax, default `warn`). On failure a machine-readable
//! error object is printed to stderr and the process exits with a stable
//! code: 2 configuration, 3 parse/ordering, 4 insufficient data,
//! 5 synchronization, 6 internal.

use std::fs;
use std::io::{BufRead, Write};
use std::net::UdpSocket;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use gaitkit::classify::GaitClass;
use gaitkit::error::GaitError;
use gaitkit::events::events_to_csv;
use gaitkit::ingest::{
    parse_keypoint_csv, parse_keypoint_json, serialize_keypoint_csv, serialize_keypoint_json,
    CsvOptions,
};
use gaitkit::pipeline::{
    analysis_report, analyze, validate, AnalysisReport, RunConfig, SessionAnalysis,
    StreamSession,
};
use gaitkit::progression::fpa_to_csv;
use gaitkit::synth::{generate, SynthParams};
use gaitkit::types::SkeletonSequence;

#[derive(Parser)]
#[command(name = "gaitkit", version, about = "Gait analysis from skeletal keypoint streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a keypoint stream between the JSON and CSV formats.
    Convert {
        /// Input stream (.json/.jsonl or .csv).
        #[arg(long)]
        input: PathBuf,
        /// Output path; format is taken from the extension unless --format
        /// is given.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Run configuration JSON (confidence floor, axes, ...).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Analyze one recording: angles, events, cycles, foot progression.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        /// Output directory for report.json and the CSV artifacts.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Validate an estimate recording against a reference recording.
    Validate {
        /// Estimate stream.
        #[arg(long)]
        input: PathBuf,
        /// Reference stream of the same walk.
        #[arg(long)]
        reference: PathBuf,
        /// Output directory for report.json and the plot CSVs.
        #[arg(long)]
        out: PathBuf,
        /// Label of the capture condition under validation.
        #[arg(long, default_value = "default")]
        condition: String,
        /// Histogram bin width in degrees (overrides the config).
        #[arg(long)]
        bin_width: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Classify the walking pattern of one recording.
    Classify {
        #[arg(long)]
        input: PathBuf,
        /// Write the label JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Generate synthetic sessions with ground truth.
    Synth {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Synthesis parameters JSON; missing fields use the defaults.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Gait-class preset (overrides class-related params).
        #[arg(long, value_enum)]
        class: Option<ClassArg>,
        /// RNG seed (overrides the params file).
        #[arg(long)]
        seed: Option<u64>,
        /// Keypoint noise sigma in meters (overrides the params file).
        #[arg(long)]
        noise: Option<f64>,
        /// Generate a labelled suite: this many sessions per class.
        #[arg(long)]
        suite: Option<usize>,
    },
    /// Ingest a live stream (stdin lines or UDP) and analyze on close.
    Stream {
        /// UDP listen address, e.g. 127.0.0.1:9999; default reads stdin.
        #[arg(long)]
        listen: Option<String>,
        /// Output directory for report.json and the CSV artifacts.
        #[arg(long)]
        out: PathBuf,
        /// End the session after this many seconds without a packet (UDP).
        #[arg(long, default_value_t = 5.0)]
        idle_timeout: f64,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Normal,
    Supination,
    Pronation,
    Limp,
}

impl From<ClassArg> for GaitClass {
    fn from(value: ClassArg) -> GaitClass {
        match value {
            ClassArg::Normal => GaitClass::Normal,
            ClassArg::Supination => GaitClass::Supination,
            ClassArg::Pronation => GaitClass::Pronation,
            ClassArg::Limp => GaitClass::Limp,
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GAITKIT_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Err(err) = run(cli.command) {
        let code = err.exit_code();
        let payload = serde_json::json!({
            "error": { "kind": err.kind(), "message": err.to_string(), "exit_code": code }
        });
        eprintln!("{payload}");
        std::process::exit(code);
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig, GaitError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let bytes = fs::read(p)?;
            serde_json::from_slice(&bytes)
                .map_err(|e| GaitError::Config(format!("bad config {}: {e}", p.display())))
        }
    }
}

fn detect_format(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => Format::Csv,
        _ => Format::Json,
    }
}

fn read_stream(path: &Path, config: &RunConfig) -> Result<SkeletonSequence, GaitError> {
    let bytes = fs::read(path)?;
    match detect_format(path) {
        Format::Csv => {
            let opts = CsvOptions {
                confidence_floor: Some(config.confidence_floor),
                ..CsvOptions::default()
            };
            parse_keypoint_csv(&bytes, &opts)
        }
        Format::Json => parse_keypoint_json(&bytes, &config.schema_options()),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), GaitError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), GaitError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| GaitError::Config(format!("serialization failed: {e}")))?;
    write_text(path, &(text + "\n"))
}

fn write_analysis_artifacts(
    dir: &Path,
    analysis: &SessionAnalysis,
    report: &AnalysisReport,
) -> Result<(), GaitError> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join("report.json"), report)?;
    write_text(&dir.join("angles.csv"), &analysis.angles.to_csv())?;
    write_text(&dir.join("events.csv"), &events_to_csv(&analysis.events))?;
    write_text(&dir.join("fpa.csv"), &fpa_to_csv(&analysis.fpa))?;
    Ok(())
}

fn run(command: Command) -> Result<(), GaitError> {
    match command {
        Command::Convert { input, out, format, config } => {
            let config = load_config(&config)?;
            let seq = read_stream(&input, &config)?;
            let format = format.unwrap_or_else(|| detect_format(&out));
            let text = match format {
                Format::Json => serialize_keypoint_json(&seq),
                Format::Csv => serialize_keypoint_csv(&seq),
            };
            write_text(&out, &text)?;
            log::info!("converted {} frames to {}", seq.len(), out.display());
            Ok(())
        }
        Command::Analyze { input, out, config } => {
            let config = load_config(&config)?;
            let seq = read_stream(&input, &config)?;
            let analysis = analyze(&seq, &config)?;
            let report = analysis_report(&analysis, &config);
            write_analysis_artifacts(&out, &analysis, &report)?;
            println!(
                "analyzed {} frames: {} events, {} cycles (L {}, R {})",
                report.frames,
                report.events.len(),
                report.cycles_left + report.cycles_right,
                report.cycles_left,
                report.cycles_right
            );
            Ok(())
        }
        Command::Validate { input, reference, out, condition, bin_width, config } => {
            let mut config = load_config(&config)?;
            if let Some(w) = bin_width {
                config.bin_width = w;
            }
            let est = read_stream(&input, &config)?;
            let reff = read_stream(&reference, &config)?;
            let (report, _est) = validate(&est, &reff, &condition, &config, None)?;
            fs::create_dir_all(&out)?;
            write_json(&out.join("report.json"), &report)?;
            for (name, contents) in report.plot_files() {
                write_text(&out.join(name), &contents)?;
            }
            println!(
                "validated condition '{}': {} aligned frames, rate {:.6}, offset {:.3}s",
                report.condition, report.aligned_frames, report.mapping.rate,
                report.mapping.offset
            );
            Ok(())
        }
        Command::Classify { input, out, config } => {
            let config = load_config(&config)?;
            let seq = read_stream(&input, &config)?;
            let analysis = analyze(&seq, &config)?;
            let (features, label) =
                analysis.classification(&config.thresholds).ok_or_else(|| {
                    GaitError::InsufficientData(
                        "need at least 2 gait cycles per side to classify".into(),
                    )
                })?;
            let payload = serde_json::json!({
                "label": label.label,
                "scores": label.scores,
                "features": features,
            });
            match out {
                Some(path) => write_json(&path, &payload)?,
                None => println!("{payload}"),
            }
            Ok(())
        }
        Command::Synth { out, params, class, seed, noise, suite } => {
            let mut base: SynthParams = match &params {
                None => SynthParams::default(),
                Some(p) => {
                    let bytes = fs::read(p)?;
                    serde_json::from_slice(&bytes).map_err(|e| {
                        GaitError::Config(format!("bad params {}: {e}", p.display()))
                    })?
                }
            };
            if let Some(class) = class {
                let preset = SynthParams::for_class(class.into(), base.seed);
                base.toe_out_deg = preset.toe_out_deg;
                base.inversion_bias_deg = preset.inversion_bias_deg;
                base.stance_fraction = preset.stance_fraction;
            }
            if let Some(seed) = seed {
                base.seed = seed;
            }
            if let Some(noise) = noise {
                base.noise_sigma = noise;
            }
            match suite {
                None => {
                    write_session(&out, &base)?;
                    println!("wrote session to {}", out.display());
                }
                Some(k) => {
                    if k == 0 {
                        return Err(GaitError::Config("--suite must be positive".into()));
                    }
                    for class in GaitClass::ALL {
                        for i in 0..k {
                            let mut p = SynthParams::for_class(class, 0);
                            p.seed = base.seed
                                .wrapping_add((i * GaitClass::ALL.len()) as u64)
                                .wrapping_add(class as u64);
                            p.noise_sigma = base.noise_sigma;
                            let dir = out.join(format!("{}_{i:02}", class.name()));
                            write_session(&dir, &p)?;
                        }
                    }
                    println!(
                        "wrote {} sessions ({k} per class) to {}",
                        4 * k,
                        out.display()
                    );
                }
            }
            Ok(())
        }
        Command::Stream { listen, out, idle_timeout, config } => {
            let config = load_config(&config)?;
            let mut session = StreamSession::new(config.clone());
            match listen {
                None => {
                    let stdin = std::io::stdin();
                    for line in stdin.lock().lines() {
                        session.push_line(&line?)?;
                    }
                }
                Some(addr) => {
                    let socket = UdpSocket::bind(&addr)?;
                    socket.set_read_timeout(Some(Duration::from_secs_f64(idle_timeout)))?;
                    log::info!("listening on udp://{addr}");
                    let mut buf = vec![0u8; 65536];
                    let mut carry = String::new();
                    loop {
                        match socket.recv(&mut buf) {
                            Ok(n) => {
                                carry.push_str(&String::from_utf8_lossy(&buf[..n]));
                                while let Some(pos) = carry.find('\n') {
                                    let line: String = carry.drain(..=pos).collect();
                                    session.push_line(line.trim_end())?;
                                }
                            }
                            Err(e)
                                if e.kind() == std::io::ErrorKind::WouldBlock
                                    || e.kind() == std::io::ErrorKind::TimedOut =>
                            {
                                if session.frames_accepted() > 0 {
                                    break; // idle after data: session over
                                }
                            }
                            Err(e) => return Err(e.into()),
                        }
                    }
                    if !carry.trim().is_empty() {
                        session.push_line(carry.trim_end())?;
                    }
                }
            }
            log::info!(
                "stream closed: {} frames accepted, {} rejected",
                session.frames_accepted(),
                session.frames_rejected()
            );
            let (analysis, report) = session.finish()?;
            write_analysis_artifacts(&out, &analysis, &report)?;
            println!(
                "streamed {} frames ({} rejected): {} events, {} cycles",
                session.frames_accepted(),
                session.frames_rejected(),
                report.events.len(),
                report.cycles_left + report.cycles_right
            );
            Ok(())
        }
    }
}

fn write_session(dir: &Path, params: &SynthParams) -> Result<(), GaitError> {
    let session = generate(params)?;
    fs::create_dir_all(dir)?;
    write_text(&dir.join("estimate.json"), &serialize_keypoint_json(&session.estimate))?;
    if let Some(reference) = &session.reference {
        write_text(&dir.join("reference.json"), &serialize_keypoint_json(reference))?;
    }
    write_json(&dir.join("truth.json"), &session.truth)?;
    write_json(&dir.join("params.json"), params)?;
    let mut stdout = std::io::stdout();
    let _ = writeln!(
        stdout,
        "{}: {} frames, label {}",
        dir.display(),
        session.estimate.len(),
        session.truth.intended_label.name()
    );
    Ok(())
}

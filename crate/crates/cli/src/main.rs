use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bciarm_core::arm::{read_trajectory_csv, trajectory_svg, write_trajectory_csv};
use bciarm_core::eeg_io::{
    load_ground_truth, load_recording_with, save_ground_truth, save_recording, synth_session,
    RawRecording,
};
use bciarm_core::pipeline::{
    decode, load_models, run_session, save_models, train, write_decision_log, write_json,
    PipelineConfig,
};
use bciarm_core::{Error, ErrorKind, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bciarm", version, about = "P300 BCI pipeline driving a simulated two-link arm")]
struct Cli {
    /// JSON config file; built-in defaults fill missing keys.
    #[arg(long, global = true, env = "BCIARM_CONFIG")]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set classifier.k=5`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic recording and its ground truth.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Fit frontend, PCA and classifier; write models and a CV report.
    Train {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        models: PathBuf,
    },
    /// Decode a recording and drive the arm; writes the decision log,
    /// trajectory CSV and SVG. Without `--recording`, a session is
    /// synthesized from the config.
    Run {
        #[command(flatten)]
        input: OptionalInput,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Decode only and print the metrics as JSON.
    Eval {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        models: PathBuf,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-render a trajectory CSV as SVG.
    Plot {
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    /// BCI Competition II P300 speller files (not bundled).
    Bci2,
}

#[derive(Args)]
struct Input {
    #[arg(long)]
    recording: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct OptionalInput {
    #[arg(long)]
    recording: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn load(cfg: &PipelineConfig, path: &Path, format: Format) -> Result<RawRecording> {
    match format {
        Format::Csv => load_recording_with(path, cfg.synth.n_channels),
        Format::Bci2 => Err(Error::Format {
            line: 0,
            message: format!(
                "{}: the BCI Competition II loader is not available in this build",
                path.display()
            ),
        }),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn execute(cli: Cli) -> Result<()> {
    let cfg = PipelineConfig::load(cli.config.as_deref(), &cli.overrides)?;
    match cli.command {
        Command::Synth { out_dir } => {
            std::fs::create_dir_all(&out_dir)?;
            let s = synth_session(&cfg.synth, cfg.sample_rate)?;
            save_recording(&s.recording, out_dir.join("recording.csv"))?;
            save_ground_truth(&s.intended, out_dir.join("truth.json"))?;
            eprintln!(
                "wrote {} samples, {} flashes, {} decisions to {}",
                s.recording.n_samples(),
                s.events.len(),
                s.intended.len(),
                out_dir.display()
            );
        }
        Command::Train { input, truth, models } => {
            let rec = load(&cfg, &input.recording, input.format)?;
            let intended = load_ground_truth(&truth)?;
            let (m, report) = train(&cfg, &rec, &intended)?;
            save_models(&m, &models)?;
            write_json(&report, models.join("cv_report.json"))?;
            for c in &report.classifiers {
                eprintln!("{}: cv accuracy {:.3}", c.name, c.cv.accuracy);
            }
        }
        Command::Run {
            input,
            truth,
            models,
            out_dir,
        } => {
            let m = load_models(&models)?;
            let (rec, intended) = match &input.recording {
                Some(path) => {
                    let intended = truth.as_deref().map(load_ground_truth).transpose()?;
                    (load(&cfg, path, input.format)?, intended)
                }
                None => {
                    let s = synth_session(&cfg.synth, cfg.sample_rate)?;
                    (s.recording, Some(s.intended))
                }
            };
            let out = run_session(&cfg, &m, &rec, intended.as_deref())?;
            std::fs::create_dir_all(&out_dir)?;
            let mut log = create(&out_dir.join("decisions.jsonl"))?;
            write_decision_log(&out.records, &mut log)?;
            log.flush()?;
            let mut csv = create(&out_dir.join("trajectory.csv"))?;
            write_trajectory_csv(&out.trajectory, &mut csv)?;
            csv.flush()?;
            std::fs::write(out_dir.join("trajectory.svg"), trajectory_svg(&out.trajectory, &cfg.robot))?;
            write_json(&out.eval, out_dir.join("eval.json"))?;
            let moves = out.records.iter().filter(|r| r.reference.is_some()).count();
            eprintln!(
                "{} blocks, {} decided, {moves} moves{}",
                out.eval.n_blocks,
                out.eval.n_decided,
                out.eval.accuracy.map(|a| format!(", accuracy {a:.3}")).unwrap_or_default()
            );
        }
        Command::Eval {
            input,
            truth,
            models,
            out,
        } => {
            let m = load_models(&models)?;
            let rec = load(&cfg, &input.recording, input.format)?;
            let intended = truth.as_deref().map(load_ground_truth).transpose()?;
            let report = decode(&cfg, &m, &rec, intended.as_deref())?;
            if let Some(path) = out {
                write_json(&report, path)?;
            }
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Plot { trajectory, out } => {
            let t = read_trajectory_csv(BufReader::new(File::open(&trajectory)?))?;
            std::fs::write(out, trajectory_svg(&t, &cfg.robot))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Data => 3,
                ErrorKind::Runtime => 4,
            })
        }
    }
}

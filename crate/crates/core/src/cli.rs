//! The `ffbp` command-line tool.
//!
//! Every command that writes files also writes `manifest.txt` next to them. A
//! manifest is a valid `--config` file, so `ffbp <command> --config
//! out/manifest.txt` repeats a run and reproduces its outputs byte for byte.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::dataset::{parse_csv, Dataset};
use crate::report::{
    comparison_csv, comparison_table, convergence_csv, error_series, match_percentage, render_svg,
    sigmoid_frequency, sweep_csv, trace_csv, zs_series,
};
use crate::trainer::{predict, sweep, train, weight_grid, TrainConfig, TrainReport};
use crate::weights_file::{parse_weights, write_weights, KeyValues};
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const DEFAULT_OUTPUT_DIR: &str = "out";

/// Exit status for a run that hit `max_iterations` without converging.
pub const EXIT_UNCONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ffbp",
    version,
    about = "Train and evaluate the sigmoid feed-forward rice production pipeline"
)]
pub struct Cli {
    /// District CSV to read.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,

    /// Directory for output files (default: out).
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,

    /// key=value file; command-line flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a CSV and replace zero cells with 0.01.
    Ingest {
        /// Destination of the preprocessed CSV (default: <output-dir>/preprocessed.csv).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Train to exact reconstruction and write the trace, convergence table and weights.
    Train(TrainArgs),
    /// Apply saved weights to a dataset and compare outputs with the inputs.
    Predict {
        #[arg(long)]
        weights: PathBuf,
    },
    /// Train, then write every table and figure.
    Report(TrainArgs),
    /// Train once per initial weight on a grid.
    Sweep {
        #[command(flatten)]
        train: TrainArgs,
        /// First initial weight [default: 0].
        #[arg(long, allow_negative_numbers = true)]
        w0_from: Option<f64>,
        /// Last initial weight, inclusive [default: 1].
        #[arg(long, allow_negative_numbers = true)]
        w0_to: Option<f64>,
        /// Grid spacing [default: 0.01].
        #[arg(long, allow_negative_numbers = true)]
        w0_step: Option<f64>,
    },
}

#[derive(Debug, Default, Args)]
pub struct TrainArgs {
    /// Error threshold used when --strict-zero is false [default: 1e-9].
    #[arg(long, allow_negative_numbers = true)]
    pub threshold: Option<f64>,
    /// Amount added to every weight per iteration [default: 0.01].
    #[arg(long, allow_negative_numbers = true)]
    pub increment: Option<f64>,
    /// Shared initial weight in [0, 1] [default: 0.76].
    #[arg(long, allow_negative_numbers = true)]
    pub initial_weight: Option<f64>,
    /// Hidden-layer bias [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    pub bias: Option<f64>,
    /// Iteration cap [default: 10000].
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Stop only at exactly zero error [default: true].
    #[arg(long, action = clap::ArgAction::Set)]
    pub strict_zero: Option<bool>,
}

const CONFIG_KEYS: &[&str] = &[
    "threshold",
    "increment",
    "initial_weight",
    "bias",
    "max_iterations",
    "strict_zero",
    "w0_from",
    "w0_to",
    "w0_step",
    "input",
    "output_dir",
    // manifest-only keys, accepted so a manifest can be replayed
    "command",
    "tool_version",
    "input_sha256",
    "weights",
    "weights_sha256",
];

/// Flags merged over the optional config file.
struct Settings {
    file: KeyValues,
    input: Option<PathBuf>,
    output_dir: PathBuf,
}

impl Settings {
    fn load(cli: &Cli) -> Result<Self> {
        let file = match &cli.config {
            Some(p) => {
                let kv = KeyValues::parse(&read_text(p)?, p.display().to_string())?;
                kv.ensure_known(CONFIG_KEYS)?;
                kv
            }
            None => KeyValues::default(),
        };
        let input = cli.input.clone().or(file.get("input").map(PathBuf::from));
        let output_dir = cli
            .output_dir
            .clone()
            .or(file.get("output_dir").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
        Ok(Self {
            file,
            input,
            output_dir,
        })
    }

    fn pick<V: std::str::FromStr>(&self, flag: Option<V>, key: &str) -> Result<Option<V>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.file.parse_opt(key),
        }
    }

    fn train_config(&self, a: &TrainArgs) -> Result<TrainConfig<f64>> {
        let d = TrainConfig::<f64>::default();
        let cfg = TrainConfig {
            threshold: self.pick(a.threshold, "threshold")?.unwrap_or(d.threshold),
            increment: self.pick(a.increment, "increment")?.unwrap_or(d.increment),
            initial_weight: self
                .pick(a.initial_weight, "initial_weight")?
                .unwrap_or(d.initial_weight),
            bias: self.pick(a.bias, "bias")?.unwrap_or(d.bias),
            max_iterations: self
                .pick(a.max_iterations, "max_iterations")?
                .unwrap_or(d.max_iterations),
            strict_zero: self
                .pick(a.strict_zero, "strict_zero")?
                .unwrap_or(d.strict_zero),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn input(&self) -> Result<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| Error::InvalidConfig("--input is required".into()))
    }

    /// Reads, digests and parses the input dataset. A manifest replay
    /// fails if the input no longer matches the recorded digest.
    fn dataset(&self) -> Result<(Dataset<f64>, Input)> {
        let path = self.input()?;
        let text = read_text(path)?;
        let input = Input {
            path: path.to_path_buf(),
            sha256: digest(&text),
        };
        if let Some(expected) = self.file.get("input_sha256") {
            if expected != input.sha256 {
                return Err(Error::InvalidConfig(format!(
                    "{} does not match the recorded input_sha256",
                    path.display()
                )));
            }
        }
        let label = path.file_stem().map_or_else(
            || "dataset".to_string(),
            |s| s.to_string_lossy().into_owned(),
        );
        Ok((parse_csv(&text, label)?, input))
    }
}

struct Input {
    path: PathBuf,
    sha256: String,
}

fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn read_text(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::InputNotFound(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes via a temporary sibling and a rename so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let name = path
        .file_name()
        .map_or_else(|| "output".into(), |n| n.to_string_lossy().into_owned());
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

/// Everything that determines a run's outputs.
#[derive(Debug)]
pub struct RunManifest {
    pub command: &'static str,
    pub inputs: Vec<(String, PathBuf, String)>,
    pub config: Option<TrainConfig<f64>>,
    pub grid: Option<(f64, f64, f64)>,
    pub output_dir: PathBuf,
    pub tool_version: &'static str,
}

impl RunManifest {
    fn new(command: &'static str, output_dir: &Path) -> Self {
        Self {
            command,
            inputs: Vec::new(),
            config: None,
            grid: None,
            output_dir: output_dir.to_path_buf(),
            tool_version: env!("CARGO_PKG_VERSION"),
        }
    }

    fn with_input(mut self, key: &str, input: &Input) -> Self {
        self.inputs
            .push((key.to_string(), input.path.clone(), input.sha256.clone()));
        self
    }

    pub fn render(&self) -> String {
        let mut lines = vec![
            "# ffbp run manifest; replay with --config".to_string(),
            format!("command={}", self.command),
            format!("tool_version={}", self.tool_version),
        ];
        for (key, path, sha) in &self.inputs {
            lines.push(format!("{key}={}", path.display()));
            lines.push(format!("{key}_sha256={sha}"));
        }
        lines.push(format!("output_dir={}", self.output_dir.display()));
        if let Some(c) = &self.config {
            lines.push(format!("threshold={}", c.threshold));
            lines.push(format!("increment={}", c.increment));
            lines.push(format!("initial_weight={}", c.initial_weight));
            lines.push(format!("bias={}", c.bias));
            lines.push(format!("max_iterations={}", c.max_iterations));
            lines.push(format!("strict_zero={}", c.strict_zero));
        }
        if let Some((from, to, step)) = self.grid {
            lines.push(format!("w0_from={from}"));
            lines.push(format!("w0_to={to}"));
            lines.push(format!("w0_step={step}"));
        }
        lines.join("\n") + "\n"
    }
}

/// Parses `std::env::args` and runs; returns the process exit status.
pub fn main_with_args<I, S>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let settings = Settings::load(cli)?;
    match &cli.command {
        Command::Ingest { output } => cmd_ingest(&settings, output.as_deref(), out),
        Command::Train(a) => cmd_train(&settings, a, false, out),
        Command::Report(a) => cmd_train(&settings, a, true, out),
        Command::Predict { weights } => cmd_predict(&settings, weights, out),
        Command::Sweep {
            train,
            w0_from,
            w0_to,
            w0_step,
        } => {
            let grid = (
                settings.pick(*w0_from, "w0_from")?.unwrap_or(0.0),
                settings.pick(*w0_to, "w0_to")?.unwrap_or(1.0),
                settings.pick(*w0_step, "w0_step")?.unwrap_or(0.01),
            );
            cmd_sweep(&settings, train, grid, out)
        }
    }
}

fn say(out: &mut dyn Write, line: impl AsRef<str>) {
    let _ = writeln!(out, "{}", line.as_ref());
}

fn cmd_ingest(s: &Settings, output: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let (raw, input) = s.dataset()?;
    let replaced = raw.zero_cells();
    let clean = raw.preprocess();
    let target = output.map_or_else(|| s.output_dir.join("preprocessed.csv"), Path::to_path_buf);
    write_atomic(&target, &clean.to_csv()?)?;
    let manifest_dir = target.parent().unwrap_or(Path::new("."));
    write_atomic(
        &manifest_dir.join(MANIFEST_FILE),
        &RunManifest::new("ingest", manifest_dir)
            .with_input("input", &input)
            .render(),
    )?;
    say(out, format!("records: {}", clean.len()));
    say(out, format!("zero replacements: {replaced}"));
    say(out, format!("wrote {}", target.display()));
    Ok(0)
}

fn write_training_outputs(dir: &Path, report: &TrainReport<f64>) -> Result<()> {
    write_atomic(&dir.join("trace.csv"), &trace_csv(report)?)?;
    write_atomic(&dir.join("convergence.csv"), &convergence_csv(report)?)?;
    write_atomic(
        &dir.join("weights.txt"),
        &write_weights(&report.final_weights),
    )
}

fn cmd_train(s: &Settings, a: &TrainArgs, full_report: bool, out: &mut dyn Write) -> Result<i32> {
    let cfg = s.train_config(a)?;
    let (raw, input) = s.dataset()?;
    let d = raw.preprocess();
    let report = train(&d, &cfg)?;
    let dir = &s.output_dir;
    write_training_outputs(dir, &report)?;

    if full_report {
        write_atomic(
            &dir.join("frequency.csv"),
            &sigmoid_frequency(&d)?.to_csv()?,
        )?;
        let rows = comparison_table(&d, &predict(&d, &report.final_weights)?)?;
        write_atomic(&dir.join("comparison.csv"), &comparison_csv(&rows)?)?;
        write_atomic(
            &dir.join("fig6.svg"),
            &render_svg(
                "Mean error per variable",
                "iteration",
                "mean error",
                &error_series(&report),
            )?,
        )?;
        write_atomic(
            &dir.join("fig7.svg"),
            &render_svg(
                "Output sigmoid per district",
                "iteration",
                "output sigmoid",
                &zs_series(&report),
            )?,
        )?;
        say(out, format!("{:.2}% exact match", match_percentage(&rows)));
    }

    let mut manifest = RunManifest::new(if full_report { "report" } else { "train" }, dir)
        .with_input("input", &input);
    manifest.config = Some(cfg);
    write_atomic(&dir.join(MANIFEST_FILE), &manifest.render())?;

    say(out, format!("iterations: {}", report.iterations));
    say(out, format!("stop reason: {}", report.stop_reason));
    let unconverged = report
        .convergence_iteration
        .iter()
        .filter(|c| c.is_none())
        .count();
    say(out, format!("unconverged districts: {unconverged}"));
    Ok(if report.converged() {
        0
    } else {
        EXIT_UNCONVERGED
    })
}

fn cmd_predict(s: &Settings, weights: &Path, out: &mut dyn Write) -> Result<i32> {
    let (raw, input) = s.dataset()?;
    let d = raw.preprocess();
    let wtext = read_text(weights)?;
    let ws = parse_weights::<f64>(&wtext, weights.display().to_string())?;
    let rows = comparison_table(&d, &predict(&d, &ws)?)?;
    let dir = &s.output_dir;
    write_atomic(&dir.join("comparison.csv"), &comparison_csv(&rows)?)?;
    let winput = Input {
        path: weights.to_path_buf(),
        sha256: digest(&wtext),
    };
    write_atomic(
        &dir.join(MANIFEST_FILE),
        &RunManifest::new("predict", dir)
            .with_input("input", &input)
            .with_input("weights", &winput)
            .render(),
    )?;
    say(out, format!("{:.2}% exact match", match_percentage(&rows)));
    Ok(0)
}

/// Iteration count probed by the sweep summary.
pub const TARGET_ITERATIONS: usize = 18;

fn cmd_sweep(
    s: &Settings,
    a: &TrainArgs,
    (from, to, step): (f64, f64, f64),
    out: &mut dyn Write,
) -> Result<i32> {
    let cfg = s.train_config(a)?;
    let grid = weight_grid(from, to, step)?;
    let (raw, input) = s.dataset()?;
    let d = raw.preprocess();
    let points = sweep(&d, &grid, &cfg)?;
    let dir = &s.output_dir;
    write_atomic(&dir.join("sweep.csv"), &sweep_csv(&d.names(), &points)?)?;
    let mut manifest = RunManifest::new("sweep", dir).with_input("input", &input);
    manifest.config = Some(cfg);
    manifest.grid = Some((from, to, step));
    write_atomic(&dir.join(MANIFEST_FILE), &manifest.render())?;

    say(out, format!("grid points: {}", points.len()));
    let hits: Vec<String> = points
        .iter()
        .filter(|p| p.stop_reason.converged() && p.iterations == TARGET_ITERATIONS)
        .map(|p| p.initial_weight.to_string())
        .collect();
    if hits.is_empty() {
        say(
            out,
            format!("{TARGET_ITERATIONS}-iteration convergence: none"),
        );
    } else {
        say(
            out,
            format!(
                "{TARGET_ITERATIONS}-iteration convergence: w0 = {}",
                hits.join(", ")
            ),
        );
    }
    Ok(0)
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use kdetrack::bench::{
    emit_results, run_tracking, seed_range, sweep_bandwidth, sweep_window, OutputFormat,
    SweepBase, BANDWIDTH_SWEEP_WINDOW, DEFAULT_BANDWIDTHS, DEFAULT_SEEDS, DEFAULT_WINDOWS,
    WINDOW_SWEEP_BANDWIDTH,
};
use kdetrack::{
    generate, load_dataset, save_dataset, GeneratorConfig, ParamMode, Scheme, TrackerConfig,
};

#[derive(Parser)]
#[command(name = "kdetrack", version, about = "Sliding-window Gaussian KDE tracking benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic evolving-Gaussian dataset.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one tracker over a dataset and write per-step errors.
    Track {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = SchemeArg::Dynamic)]
        scheme: SchemeArg,
        #[arg(long, default_value_t = BANDWIDTH_SWEEP_WINDOW)]
        window: usize,
        #[arg(long, default_value_t = WINDOW_SWEEP_BANDWIDTH)]
        bandwidth: f64,
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Plugin)]
        mode: ModeArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
    /// Monte-Carlo sweep over window sizes at fixed bandwidth.
    SweepWindow {
        #[command(flatten)]
        common: SweepArgs,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_WINDOWS)]
        windows: Vec<usize>,
        #[arg(long, default_value_t = WINDOW_SWEEP_BANDWIDTH)]
        bandwidth: f64,
    },
    /// Monte-Carlo sweep over kernel bandwidths at fixed window size.
    SweepBandwidth {
        #[command(flatten)]
        common: SweepArgs,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_BANDWIDTHS)]
        bandwidths: Vec<f64>,
        #[arg(long, default_value_t = BANDWIDTH_SWEEP_WINDOW)]
        window: usize,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 100)]
    batches: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    mu0: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma0: f64,
    #[arg(long, default_value_t = 1.0)]
    mu_step: f64,
    #[arg(long, default_value_t = 0.2)]
    gamma_step: f64,
    #[arg(long, default_value_t = 3)]
    n_min: usize,
    #[arg(long, default_value_t = 20)]
    n_max: usize,
    /// Sample the first batch at (mu0, gamma0) rather than one step in.
    #[arg(long)]
    start_at_origin: bool,
}

impl GenArgs {
    fn config(&self, seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            seed,
            num_batches: self.batches,
            mu0: self.mu0,
            gamma0: self.gamma0,
            mu_step: self.mu_step,
            gamma_step: self.gamma_step,
            n_min: self.n_min,
            n_max: self.n_max,
            start_at_origin: self.start_at_origin,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// Number of Monte-Carlo runs; each gets a fresh dataset.
    #[arg(long, default_value_t = DEFAULT_SEEDS)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Plugin)]
    mode: ModeArg,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [SchemeArg::Current, SchemeArg::Average, SchemeArg::Exponential, SchemeArg::Dynamic])]
    schemes: Vec<SchemeArg>,
    #[command(flatten)]
    gen: GenArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

/// One sweep to run: base settings, seeds, output path and format.
type SweepJob = (SweepBase, Vec<u64>, PathBuf, OutputFormat);

impl SweepArgs {
    /// One sweep per requested parameter mode.
    fn expand(
        &self,
        fix: impl Fn(&mut TrackerConfig),
    ) -> Result<Vec<SweepJob>> {
        if self.seeds == 0 {
            bail!("--seeds must be at least 1");
        }
        let seeds = seed_range(self.seed_base, self.seeds);
        let modes = self.mode.modes();
        Ok(modes
            .iter()
            .map(|&param_mode| {
                let mut tracker = TrackerConfig {
                    beta: self.beta,
                    param_mode,
                    ..TrackerConfig::default()
                };
                fix(&mut tracker);
                let base = SweepBase {
                    generator: self.gen.config(self.seed_base),
                    tracker,
                    schemes: self.schemes.iter().map(|&s| s.into()).collect(),
                };
                let path = output_path(&self.out, param_mode, modes.len() > 1);
                (base, seeds.clone(), path, self.format.into())
            })
            .collect())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Current,
    Average,
    Exponential,
    Dynamic,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Current => Scheme::Current,
            SchemeArg::Average => Scheme::Average,
            SchemeArg::Exponential => Scheme::Exponential,
            SchemeArg::Dynamic => Scheme::Dynamic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Oracle,
    Plugin,
    Both,
}

impl ModeArg {
    fn modes(self) -> Vec<ParamMode> {
        match self {
            ModeArg::Oracle => vec![ParamMode::Oracle],
            ModeArg::Plugin => vec![ParamMode::Plugin],
            ModeArg::Both => vec![ParamMode::Oracle, ParamMode::Plugin],
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

/// With `--mode both` each mode gets its own file: `steps.csv` becomes
/// `steps.oracle.csv` and `steps.plugin.csv`.
fn output_path(out: &Path, mode: ParamMode, split: bool) -> PathBuf {
    if !split {
        return out.to_path_buf();
    }
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}.{mode}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{mode}"),
    };
    out.with_file_name(name)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { seed, gen, out } => {
            let d = generate(&gen.config(seed))?;
            save_dataset(&d, &out)?;
        }
        Command::Track {
            data,
            scheme,
            window,
            bandwidth,
            beta,
            mode,
            out,
            format,
        } => {
            let d = load_dataset(&data)?;
            let modes = mode.modes();
            for &param_mode in &modes {
                let cfg = TrackerConfig {
                    window,
                    bandwidth,
                    scheme: scheme.into(),
                    beta,
                    param_mode,
                };
                let records = run_tracking(&d, &cfg)?;
                let path = output_path(&out, param_mode, modes.len() > 1);
                emit_results(&records, format.into(), path)?;
            }
        }
        Command::SweepWindow {
            common,
            windows,
            bandwidth,
        } => {
            for (base, seeds, path, format) in common.expand(|t| t.bandwidth = bandwidth)? {
                let rows = sweep_window(&seeds, &windows, &base)?;
                emit_results(&rows, format, path)?;
            }
        }
        Command::SweepBandwidth {
            common,
            bandwidths,
            window,
        } => {
            for (base, seeds, path, format) in common.expand(|t| t.window = window)? {
                let rows = sweep_bandwidth(&seeds, &bandwidths, &base)?;
                emit_results(&rows, format, path)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

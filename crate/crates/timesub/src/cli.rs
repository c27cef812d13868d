//! Argument parsing and command dispatch.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use timesub_core::convergence::{self, presets, ExperimentConfig};
use timesub_core::counterexamples;
use timesub_core::metric::{rho_infinity, EXACT_TOL};
use timesub_core::processes::ProcessSampler;
use timesub_core::{compose, skorokhod_distance, PiecewisePath, Seed, TimeChange};

use crate::error::CliError;
use crate::formats::{self, DistanceJson, ExperimentFile, PathJson, SimulateFile, SimulateOutput};

#[derive(Debug, Parser)]
#[command(name = "timesub", version, about = "Skorokhod distances, random time changes and convergence experiments")]
pub struct Cli {
    /// Master seed; required by every stochastic command.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Distance tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    /// Skorokhod J1 distance on `[0, k]`.
    J1,
    /// The metric on `[0, inf)`; both paths must reach the truncation depth.
    RhoInf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Corollary1,
    Corollary2,
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Example {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    Lemma1,
    Lemma2,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distance between two path files.
    Distance {
        x: PathBuf,
        y: PathBuf,
        /// Horizon of the comparison; the shorter horizon by default.
        #[arg(long)]
        k: Option<f64>,
        #[arg(long, value_enum, default_value_t = Metric::J1)]
        metric: Metric,
        #[arg(long)]
        no_witness: bool,
    },
    /// `outer o inner` for path files; `inner` must be non-decreasing.
    Compose {
        outer: PathBuf,
        inner: PathBuf,
        /// Extra uniform points in CSV output.
        #[arg(long)]
        mesh: Option<usize>,
    },
    /// Draws from a simulation config.
    Simulate { config: PathBuf },
    /// Convergence experiment from a preset or a config file.
    Converge {
        #[arg(long, value_enum, conflicts_with = "config")]
        preset: Option<Preset>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Clock slope for the `corollary2` preset.
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// Override the sample count.
        #[arg(long)]
        samples: Option<usize>,
        /// Override the portfolio sizes.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<u64>>,
        /// Plot-data CSV; defaults to `<out>.plot.csv` when `--out` is set.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Reports for the deterministic examples and the random families.
    Counterexample {
        #[arg(value_enum)]
        which: Example,
        #[arg(long, default_value_t = 12)]
        n_max: u32,
        /// Contraction ratio in `[0, 1)` of the random families; member `n`
        /// sits within `rate^n` of the limit.
        #[arg(long, default_value_t = 0.5)]
        rate: f64,
    },
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("timesub: {e}");
            e.exit_code()
        }
    }
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| CliError::Input(format!("{what} is stochastic; pass --seed")))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Internal(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Internal(e.to_string())),
    }
}

fn plot_sibling(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".plot.csv");
    out.with_file_name(name)
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let tol = cli.tol.unwrap_or(EXACT_TOL);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Input("--tol must be positive and finite".into()));
    }
    let out = cli.out.as_deref();
    let text = match &cli.command {
        Command::Distance {
            x,
            y,
            k,
            metric,
            no_witness,
        } => {
            let x = formats::read_path(x)?;
            let y = formats::read_path(y)?;
            distance(&x, &y, *k, *metric, !no_witness, tol, cli.format)?
        }
        Command::Compose { outer, inner, mesh } => {
            let outer = formats::read_path(outer)?;
            let inner = TimeChange::classify(formats::read_path(inner)?)?;
            let z = compose(&outer, &inner)?;
            match cli.format {
                Format::Json => formats::to_json(&PathJson::from(&z))?,
                Format::Csv => formats::path_csv(&z, *mesh)?,
            }
        }
        Command::Simulate { config } => {
            let file: SimulateFile = formats::read_json(config)?;
            simulate(file, cli.seed, cli.format)?
        }
        Command::Converge {
            preset,
            config,
            a,
            samples,
            n,
            plot,
        } => {
            let mut cfg = match (preset, config) {
                (Some(p), None) => {
                    let seed = require_seed(cli.seed, "converge")?;
                    match p {
                        Preset::Corollary1 => presets::corollary1(seed),
                        Preset::Corollary2 => presets::corollary2(seed, *a),
                        Preset::Identity => presets::identity(seed),
                    }
                }
                (None, Some(path)) => formats::read_json::<ExperimentFile>(path)?.into_config(cli.seed)?,
                _ => return Err(CliError::Input("converge needs exactly one of --preset or --config".into())),
            };
            if let Some(m) = samples {
                cfg.samples = *m;
            }
            if let Some(ns) = n {
                cfg.n = ns.clone();
            }
            let (report_text, plot_text) = converge(&cfg, cli.format)?;
            if let Some(p) = plot.clone().or_else(|| out.map(plot_sibling)) {
                emit(Some(&p), &plot_text)?;
            }
            report_text
        }
        Command::Counterexample { which, n_max, rate } => {
            let report = match which {
                Example::One => counterexamples::example1_report(*n_max, tol)?,
                Example::Two => counterexamples::example2_report(*n_max, tol)?,
                Example::Lemma1 => {
                    let seed = Seed::new(require_seed(cli.seed, "lemma1")?);
                    counterexamples::lemma1_report(seed, *rate, *n_max, tol)?
                }
                Example::Lemma2 => {
                    let seed = Seed::new(require_seed(cli.seed, "lemma2")?);
                    counterexamples::lemma2_report(seed, *rate, *n_max, tol)?
                }
            };
            match cli.format {
                Format::Json => formats::to_json(&report)?,
                Format::Csv => formats::example_csv(&report)?,
            }
        }
    };
    emit(out, &text)
}

fn distance(
    x: &PiecewisePath,
    y: &PiecewisePath,
    k: Option<f64>,
    metric: Metric,
    witness: bool,
    tol: f64,
    format: Format,
) -> Result<String, CliError> {
    let d = match metric {
        Metric::J1 => {
            let k = k.unwrap_or_else(|| x.horizon().min(y.horizon()));
            DistanceJson::new(&skorokhod_distance(x, y, k, tol)?, witness)
        }
        Metric::RhoInf => {
            if k.is_some() {
                return Err(CliError::Input("--k does not apply to rho-inf".into()));
            }
            DistanceJson {
                value: rho_infinity(x, y, tol)?,
                gap: 2.0 * tol,
                witness: None,
            }
        }
    };
    match format {
        Format::Json => formats::to_json(&d),
        Format::Csv => formats::distance_csv(&d),
    }
}

fn simulate(file: SimulateFile, seed: Option<u64>, format: Format) -> Result<String, CliError> {
    let seed = seed
        .or(file.seed)
        .ok_or_else(|| CliError::Input("simulate is stochastic; pass --seed or set \"seed\"".into()))?;
    if file.n == 0 {
        return Err(CliError::Input("n must be positive".into()));
    }
    file.inner.validate()?;
    let sampler = ProcessSampler::substitute(
        ProcessSampler::outer(file.outer, file.n, 1.0),
        ProcessSampler::inner(file.inner, file.n),
    )?;
    let base = Seed::new(seed).with_experiment(file.experiment);
    match file.output {
        SimulateOutput::Functionals => {
            let labels: Vec<String> = file.functionals.iter().map(|f| f.label()).collect();
            let cols = convergence::sample_functionals(&sampler, &file.functionals, file.samples, base)?;
            match format {
                Format::Csv => formats::functionals_csv(&labels, &cols),
                Format::Json => {
                    let map: serde_json::Map<String, serde_json::Value> =
                        labels.into_iter().zip(cols).map(|(l, c)| (l, c.into())).collect();
                    formats::to_json(&map)
                }
            }
        }
        SimulateOutput::Paths => {
            let paths = (0..file.samples)
                .map(|i| sampler.sample(base.with_index(i as u64)))
                .collect::<Result<Vec<_>, _>>()?;
            match format {
                Format::Csv => formats::paths_csv(&paths, file.mesh),
                Format::Json => formats::to_json(&paths.iter().map(PathJson::from).collect::<Vec<_>>()),
            }
        }
    }
}

/// Report text in `format` and the plot-data CSV.
fn converge(cfg: &ExperimentConfig, format: Format) -> Result<(String, String), CliError> {
    let report = convergence::convergence_experiment(cfg)?;
    let text = match format {
        Format::Json => formats::to_json(&report)?,
        Format::Csv => formats::report_csv(&report)?,
    };
    Ok((text, formats::plot_csv(&report)?))
}

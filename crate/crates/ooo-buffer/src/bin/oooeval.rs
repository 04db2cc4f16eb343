//! Command-line front end: generate, analyze, replay, grid, sweep, suggest.

use std::fs;
use std::io;
use std::path::PathBuf;

use anyhow::{Context, bail};
use clap::{Args, Parser, Subcommand};

use ooo_buffer::buffer::EngineConfig;
use ooo_buffer::dataset::{
    ColumnMapping, read_dataset_with_mapping, summary_to_writer, write_buffer_series,
    write_dataset, write_emission_log, write_metrics, write_summary,
};
use ooo_buffer::eval::{default_grid, evaluate_run_with_log, run_grid, sweep};
use ooo_buffer::event::Event;
use ooo_buffer::strategy::{Algorithm, suggest_params};
use ooo_buffer::synth::{WorkloadSpec, generate, preset, preset_labels};

#[derive(Parser)]
#[command(
    name = "oooeval",
    about = "Replay out-of-order event streams through dynamically sized time-out buffers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DatasetArgs {
    /// Dataset CSV to read.
    #[arg(long)]
    dataset: PathBuf,
    /// Column-name overrides, e.g. "seq_id=sid,dt=detection_time".
    #[arg(long, default_value = "")]
    map: String,
}

impl DatasetArgs {
    fn read(&self) -> anyhow::Result<(String, Vec<Event>)> {
        let mapping = ColumnMapping::parse(&self.map)?;
        let events = read_dataset_with_mapping(&self.dataset, &mapping)?;
        Ok((dataset_id(&self.dataset), events))
    }
}

#[derive(Args)]
struct EngineArgs {
    /// Lower clamp for strategy answers, ms.
    #[arg(long, default_value_t = 0)]
    min_buffer_ms: i64,
    /// Upper clamp for strategy answers, ms.
    #[arg(long, default_value_t = 60_000)]
    max_buffer_ms: i64,
}

impl EngineArgs {
    fn config(&self) -> EngineConfig {
        EngineConfig {
            min_buffer_ms: self.min_buffer_ms,
            max_buffer_ms: self.max_buffer_ms,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset from a preset or a spec file.
    Gen {
        /// Preset label, G-1 through G-12.
        #[arg(long, conflicts_with = "spec")]
        preset: Option<String>,
        /// Workload spec file (key=value lines).
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Override the seed from the preset or spec.
        #[arg(long)]
        seed: Option<u64>,
        /// Output dataset CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a dataset: counts, disorder, processing-time statistics.
    Analyze {
        #[command(flatten)]
        dataset: DatasetArgs,
        /// Summary CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay one dataset through one algorithm.
    Replay {
        #[command(flatten)]
        dataset: DatasetArgs,
        /// Algorithm: sba, bstt, bsttwa, bsttd, bsttda, bskf, kslack.
        #[arg(long)]
        algo: Algorithm,
        /// Parameter override, key=value; repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
        #[command(flatten)]
        engine: EngineArgs,
        /// Output directory for emissions.csv, metrics.csv, buffer_series.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay every algorithm (stock settings) over one or more datasets.
    Grid {
        /// Dataset CSV; repeatable.
        #[arg(long = "dataset", required = true)]
        datasets: Vec<PathBuf>,
        /// Column-name overrides applied to every dataset.
        #[arg(long, default_value = "")]
        map: String,
        #[command(flatten)]
        engine: EngineArgs,
        /// Metrics CSV output.
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay one algorithm once per value of one parameter.
    Sweep {
        #[command(flatten)]
        dataset: DatasetArgs,
        #[arg(long)]
        algo: Algorithm,
        /// Parameter to vary.
        #[arg(long)]
        param: String,
        /// Comma-separated parameter values.
        #[arg(long)]
        values: String,
        #[command(flatten)]
        engine: EngineArgs,
        /// Metrics CSV output.
        #[arg(long)]
        out: PathBuf,
    },
    /// Derive starting parameters for every algorithm from a sample.
    Suggest {
        #[command(flatten)]
        dataset: DatasetArgs,
        /// Suggestions CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dataset_id(path: &std::path::Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn suggestions_csv<W: io::Write>(
    params: &ooo_buffer::strategy::SuggestedParams,
    writer: W,
) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["algorithm", "p98_fpt_ms", "params"])?;
    for algo in Algorithm::ALL {
        out.write_record([
            algo.name(),
            &params.p98_fpt_ms.to_string(),
            &algo.params_string(params.config(algo)),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn run() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Gen {
            preset: preset_label,
            spec,
            seed,
            out,
        } => {
            let mut workload = match (&preset_label, &spec) {
                (Some(label), None) => preset(label)?,
                (None, Some(path)) => {
                    let text = fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    WorkloadSpec::from_config_str(&text)?
                }
                _ => bail!(
                    "exactly one of --preset or --spec is required (presets: {})",
                    preset_labels().join(", ")
                ),
            };
            if let Some(seed) = seed {
                workload.seed = seed;
            }
            let events = generate(&workload)?;
            write_dataset(&events, &out)?;
            println!("wrote {} events to {}", events.len(), out.display());
        }
        Command::Analyze { dataset, out } => {
            let (_, events) = dataset.read()?;
            let summary = ooo_buffer::dataset::summarize(&events)?;
            match out {
                Some(path) => write_summary(&summary, path)?,
                None => summary_to_writer(&summary, io::stdout().lock())?,
            }
        }
        Command::Replay {
            dataset,
            algo,
            params,
            engine,
            out,
        } => {
            let (id, events) = dataset.read()?;
            let mut config = algo.default_config();
            for param in &params {
                config.apply_params(param)?;
            }
            let (result, emissions) =
                evaluate_run_with_log(&id, &events, algo, &config, &engine.config(), None)?;

            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            write_emission_log(&emissions, out.join("emissions.csv"))?;
            write_buffer_series(&result.buffer_series, out.join("buffer_series.csv"))?;
            write_metrics(std::slice::from_ref(&result), out.join("metrics.csv"))?;
            println!(
                "{id} x {algo}: {} events, {} ooo, {} not compensated ({:.2}%), mean buffer {:.1} ms",
                result.events,
                result.ooo_events,
                result.not_compensated,
                result.not_compensated_pct,
                result.mean_buffer_ms
            );
        }
        Command::Grid {
            datasets,
            map,
            engine,
            out,
        } => {
            let mapping = ColumnMapping::parse(&map)?;
            let mut loaded = Vec::new();
            for path in &datasets {
                let events = read_dataset_with_mapping(path, &mapping)?;
                loaded.push((dataset_id(path), events));
            }
            let outcomes = run_grid(&loaded, &default_grid(), &engine.config());
            let mut results = Vec::new();
            let mut failures = 0usize;
            for outcome in outcomes {
                match outcome.result {
                    Ok(result) => results.push(result),
                    Err(e) => {
                        failures += 1;
                        eprintln!(
                            "run {} x {} failed: {e}",
                            outcome.dataset, outcome.algorithm
                        );
                    }
                }
            }
            write_metrics(&results, &out)?;
            println!("wrote {} runs to {}", results.len(), out.display());
            if failures > 0 {
                bail!("{failures} runs failed");
            }
        }
        Command::Sweep {
            dataset,
            algo,
            param,
            values,
            engine,
            out,
        } => {
            let (id, events) = dataset.read()?;
            let values: Vec<String> = values
                .split(',')
                .map(|v| v.trim().to_owned())
                .filter(|v| !v.is_empty())
                .collect();
            if values.is_empty() {
                bail!("--values is empty");
            }
            let results = sweep(
                &id,
                &events,
                algo,
                &algo.default_config(),
                &param,
                &values,
                &engine.config(),
            )?;
            write_metrics(&results, &out)?;
            println!("wrote {} runs to {}", results.len(), out.display());
        }
        Command::Suggest { dataset, out } => {
            let (_, events) = dataset.read()?;
            let params = suggest_params(&events)?;
            match out {
                Some(path) => {
                    let file = fs::File::create(&path)
                        .with_context(|| format!("creating {}", path.display()))?;
                    suggestions_csv(&params, file)?;
                }
                None => suggestions_csv(&params, io::stdout().lock())?,
            }
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

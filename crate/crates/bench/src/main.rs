use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uqd_bench::config::ExperimentConfig;
use uqd_bench::csv_io::fmt_real;
use uqd_bench::harness::{correct_archive, run_experiment, summarize_dir, CorrectRequest};
use uqd_bench::BenchError;
use uqd_core::archive::DEFAULT_RESOLUTION;
use uqd_core::metrics::DEFAULT_SIGMA2_REF;
use uqd_core::{MetricsConfig, TaskId, TaskOverrides, TaskSpec};

#[derive(Parser)]
#[command(name = "uqd", version, about = "Uncertain quality-diversity benchmark on the redundant arm")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the task catalogue with parameter defaults and constraints.
    ListTasks,
    /// Run a replicated experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `master_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `workers`.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Build the corrected and reproducibility archives of an archive CSV.
    Correct {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        task: TaskId,
        #[arg(long)]
        reevals: usize,
        /// Task parameter override, `name=value`; repeatable.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory; defaults to the archive's directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION.0)]
        rows: usize,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION.1)]
        cols: usize,
        #[arg(long, default_value_t = DEFAULT_SIGMA2_REF)]
        sigma2_ref: f64,
    },
    /// Recompute summary.csv from metrics.csv in a run directory.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v: f64 = v.parse().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.to_string(), v))
}

fn list_tasks() {
    for id in TaskId::ALL {
        println!(
            "{:<28} {} [{:?}, fitness {:?}]",
            id.as_str(),
            id.title(),
            id.category(),
            id.fitness_mode()
        );
        for p in id.params() {
            println!("    {:<10} default {:<8} {}", p.name, p.default, p.constraint);
        }
    }
}

fn execute(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::ListTasks => list_tasks(),
        Command::Run {
            config,
            out,
            seed,
            workers,
        } => {
            let text = std::fs::read_to_string(&config).map_err(|e| BenchError::io(&config, e))?;
            let mut cfg = ExperimentConfig::parse(&text)?;
            cfg.progress = true;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            if let Some(w) = workers {
                if w == 0 {
                    return Err(BenchError::Config("workers must be >= 1".into()));
                }
                cfg.workers = Some(w);
            }
            let report = run_experiment(&cfg)?;
            println!(
                "{} runs, {} files written to {}",
                report.runs.len(),
                report.files.len() + 1,
                report.output_dir.display()
            );
        }
        Command::Correct {
            archive,
            task,
            reevals,
            params,
            seed,
            out,
            rows,
            cols,
            sigma2_ref,
        } => {
            let overrides: TaskOverrides = params.into_iter().collect();
            let spec = TaskSpec::new(task, &overrides)?;
            let out_dir = out.unwrap_or_else(|| {
                archive
                    .parent()
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from("."))
            });
            let record = correct_archive(&CorrectRequest {
                archive: &archive,
                task: &spec,
                metrics: MetricsConfig {
                    n_reeval: reevals,
                    sigma2_ref,
                },
                resolution: (rows, cols),
                seed,
                out_dir: &out_dir,
            })?;
            println!("illusory_qd_score,{}", fmt_real(record.illusory_qd_score));
            println!("corrected_qd_score,{}", fmt_real(record.corrected_qd_score));
            println!("illusory_coverage,{}", fmt_real(record.illusory_coverage));
            println!("corrected_coverage,{}", fmt_real(record.corrected_coverage));
            println!("loss_qd_score,{}", fmt_real(record.loss_qd_score));
            println!("loss_coverage,{}", fmt_real(record.loss_coverage));
            println!("reproducibility_score,{}", fmt_real(record.reproducibility_score));
        }
        Command::Summarize { input } => {
            let path = summarize_dir(&input)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("uqd: {e}");
            ExitCode::FAILURE
        }
    }
}

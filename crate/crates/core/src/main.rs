use std::error::Error as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tune::pipeline::{self, ExperimentConfig, SamplerName};

#[derive(Parser)]
#[command(name = "tune", version, about = "Offline auto-tuning of kernel design parameters")]
struct Cli {
    /// Master seed, overriding the configuration (run, bench-samplers).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Parallel workers; 1 gives bit-reproducible artifacts.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the whole pipeline for a configuration file.
    Run { config: PathBuf },
    /// Finish an interrupted run.
    Resume { dir: PathBuf },
    /// Re-validate a finished run, optionally on another grid (e.g. 46x46).
    Validate {
        dir: PathBuf,
        #[arg(long)]
        grid: Option<String>,
    },
    /// Regenerate trees.c with another symbol prefix.
    EmitC {
        dir: PathBuf,
        #[arg(long, default_value = "tune")]
        prefix: String,
    },
    /// Merge the run's trees with a per-input reference table (CSV).
    Merge {
        dir: PathBuf,
        #[arg(long)]
        reference: PathBuf,
    },
    /// Compare samplers on global and local surrogate accuracy.
    BenchSamplers { config: PathBuf },
}

fn parse_grid(text: &str) -> Result<Vec<usize>, String> {
    text.split(['x', 'X', ','])
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad grid `{text}`, expected e.g. 46x46")))
        .collect()
}

fn load(path: &PathBuf, cli: &Cli) -> tune::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> tune::Result<()> {
    match &cli.command {
        Cmd::Run { config } => {
            let cfg = load(config, cli)?;
            let summary = pipeline::run_pipeline(&cfg)?;
            println!("{}: {} samples, stages: {}", summary.dir.display(), summary.samples, summary.ran.join(", "));
            if let Some(r) = summary.report {
                print!("{}", r.summary());
            }
        }
        Cmd::Resume { dir } => {
            let summary = pipeline::resume(dir, cli.jobs)?;
            if summary.ran.is_empty() {
                println!("{}: run already complete", dir.display());
            } else {
                println!("{}: {} samples, stages: {}", dir.display(), summary.samples, summary.ran.join(", "));
            }
            if let Some(r) = summary.report {
                print!("{}", r.summary());
            }
        }
        Cmd::Validate { dir, grid } => {
            let grid = grid.as_deref().map(parse_grid).transpose().map_err(tune::Error::InvalidArgument)?;
            let report = pipeline::validate_dir(dir, grid, cli.jobs)?;
            print!("{}", report.summary());
        }
        Cmd::EmitC { dir, prefix } => {
            pipeline::emit_c_dir(dir, prefix)?;
            println!("{}", dir.join(pipeline::C_SOURCE).display());
        }
        Cmd::Merge { dir, reference } => {
            let m = pipeline::merge_dir(dir, reference, cli.jobs)?;
            let taken = m.rows.iter().filter(|r| r.choice == tune::codegen::Choice::Candidate).count();
            println!(
                "{} inputs: candidate kept on {taken}, reference on {}, dropped {}",
                m.rows.len(),
                m.rows.len() - taken - m.dropped,
                m.dropped
            );
            println!("{}", dir.join(pipeline::MERGED_TREES).display());
        }
        Cmd::BenchSamplers { config } => {
            let cfg = load(config, cli)?;
            let rows = pipeline::bench_samplers(&cfg, cfg.jobs)?;
            std::fs::create_dir_all(&cfg.output_dir)?;
            let path = cfg.output_dir.join("bench.csv");
            std::fs::write(&path, pipeline::bench_csv(&rows))?;
            println!("{:<12} {:>14} {:>14}", "sampler", "global MAE", "local MAE");
            for s in &cfg.bench.samplers {
                let g = pipeline::median_by(&rows, *s, |r| r.global_mae);
                let l = pipeline::median_by(&rows, *s, |r| r.local_mae);
                println!("{:<12} {g:>14.6} {l:>14.6}", SamplerName::as_str(*s));
            }
            println!("medians over {} seeds; per-seed rows in {}", cfg.bench.seeds, path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = e.source();
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}

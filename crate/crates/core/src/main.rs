use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use la_nav::artifacts::{emit_artifacts, write_batch_summary};
use la_nav::config::{config_from_overrides, parse_config, Overrides};
use la_nav::runner::{preset_info, run_batch, run_episode, ExperimentConfig, PRESET_IDS};

const SEED_ENV: &str = "LA_NAV_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "la-nav",
    version,
    about = "Learning-automaton goal seeking for a differential-drive robot"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a single episode and write its artifacts.
    Run {
        #[command(flatten)]
        common: CommonArgs,

        /// Seed (falls back to the config file, then $LA_NAV_SEED).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one episode per seed and write per-seed artifacts plus a summary.
    Batch {
        #[command(flatten)]
        common: CommonArgs,

        /// Inclusive seed range `A..B`, or a comma-separated list.
        #[arg(long)]
        seeds: String,

        /// Worker threads.
        #[arg(long, short = 'j')]
        jobs: Option<usize>,
    },
    /// List the built-in experiment presets.
    Presets {
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Base preset (1-4); overrides the config file's `preset`.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    preset: Option<u8>,

    /// Output directory.
    #[arg(long, default_value = "la-nav-out")]
    out: PathBuf,

    #[arg(long)]
    max_steps: Option<u32>,

    /// Reward a step when the distance did not decrease.
    #[arg(long)]
    literal_eq10: bool,
}

impl CommonArgs {
    fn load(&self, seed: Option<u64>) -> anyhow::Result<ExperimentConfig> {
        let seed_fallback = match std::env::var(SEED_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse()
                    .with_context(|| format!("${SEED_ENV} is not an unsigned integer: {v:?}"))?,
            ),
            Err(_) => None,
        };
        let overrides = Overrides {
            preset: self.preset,
            seed,
            seed_fallback,
            max_steps: self.max_steps,
            literal_eq10: self.literal_eq10,
        };
        let cfg = match &self.config {
            Some(path) => parse_config(path, &overrides)?,
            None => config_from_overrides(&overrides)?,
        };
        Ok(cfg)
    }
}

fn parse_seeds(spec: &str) -> anyhow::Result<Vec<u64>> {
    let spec = spec.trim();
    if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a
            .trim()
            .parse()
            .with_context(|| format!("bad seed range start in {spec:?}"))?;
        let b: u64 = b
            .trim()
            .trim_start_matches('=')
            .parse()
            .with_context(|| format!("bad seed range end in {spec:?}"))?;
        if a > b {
            bail!("empty seed range {spec:?}");
        }
        return Ok((a..=b).collect());
    }
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().with_context(|| format!("bad seed {s:?}")))
        .collect()
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Run { common, seed } => {
            let cfg = common.load(seed)?;
            let record = run_episode(&cfg)?;
            let arts = emit_artifacts(&record, &cfg, &common.out)
                .with_context(|| format!("writing artifacts to {}", common.out.display()))?;
            println!(
                "seed {}: {:?} after {} steps; goal ({}, {}); wrote {}",
                record.seed,
                record.terminated,
                record.total_steps,
                record.world.goal.x,
                record.world.goal.y,
                arts.summary_json.parent().unwrap_or(&common.out).display()
            );
            Ok(true)
        }
        Command::Batch {
            common,
            seeds,
            jobs,
        } => {
            let cfg = common.load(None)?;
            let seeds = parse_seeds(&seeds)?;
            let jobs =
                jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let batch = run_batch(&cfg, &seeds, jobs)?;
            for record in batch.records() {
                let dir = common.out.join(format!("seed_{}", record.seed));
                emit_artifacts(record, &cfg.with_seed(record.seed), &dir)
                    .with_context(|| format!("writing artifacts to {}", dir.display()))?;
            }
            let path = write_batch_summary(&batch, &cfg, &common.out)?;
            let s = &batch.summary;
            for entry in &batch.entries {
                if let la_nav::runner::BatchEntry::ConfigFailure { seed, error } = entry {
                    eprintln!("seed {seed}: configuration failure: {error}");
                }
            }
            println!(
                "{} runs, {} reached the goal ({:.1}%), median steps {}; wrote {}",
                s.runs,
                s.goal_reached,
                100.0 * s.success_rate,
                s.steps
                    .as_ref()
                    .map_or("-".to_string(), |st| st.median.to_string()),
                path.display()
            );
            Ok(s.config_failures == 0)
        }
        Command::Presets { json } => {
            let infos = PRESET_IDS
                .iter()
                .map(|&id| preset_info(id))
                .collect::<Result<Vec<_>, _>>()?;
            if json {
                println!("{}", serde_json::to_string_pretty(&infos)?);
            } else {
                println!(
                    "{:<3} {:<31} {:>4} {:>4}  {:<13} obstacles",
                    "id", "name", "a", "b", "kind"
                );
                for p in infos {
                    println!(
                        "{:<3} {:<31} {:>4} {:>4}  {:<13} {}",
                        p.id, p.name, p.a, p.b, p.kind, p.obstacles
                    );
                }
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

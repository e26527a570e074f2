use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use trp_cli::commands::{cmd_evaluate, cmd_experiment, cmd_generate, cmd_play, Method};
use trp_cli::{render, CliError, ConfigFile, Depth};
use trp_core::MetricsReport;

#[derive(Parser)]
#[command(name = "trp", version, about = "Search-driven tile level generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play the source level with the search agent and write a trace.
    Play(Common),
    /// Generate a population of levels.
    Generate {
        #[command(flatten)]
        common: Common,
        /// fixed, variety or markov.
        #[arg(long, default_value = "fixed")]
        method: Method,
    },
    /// Report playability, plagiarism and self-similarity of populations.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Directory of .lvl files; repeat to compare populations.
        #[arg(long = "dir", required = true)]
        populations: Vec<PathBuf>,
    },
    /// Print a level with a legend, or write it as a PPM image.
    Render {
        level: PathBuf,
        #[arg(long)]
        domain: String,
        #[arg(long)]
        ppm: Option<PathBuf>,
        /// Pixels per tile in the PPM output.
        #[arg(long, default_value_t = 8)]
        scale: usize,
    },
    /// Generate and evaluate TRP-Fixed, TRP-Variety and Markov populations.
    Experiment(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// dungeon, platformer, or a domain file.
    #[arg(long)]
    domain: Option<String>,
    /// Source level; repeat for several.
    #[arg(long = "source")]
    sources: Vec<PathBuf>,
    /// Playthroughs merged per generated level.
    #[arg(short = 't', long)]
    t: Option<u32>,
    /// Largest segment side.
    #[arg(short = 's', long)]
    s: Option<usize>,
    /// Threat dial in [0, 1].
    #[arg(short = 'e', long)]
    e: Option<f64>,
    /// UCT exploration constant.
    #[arg(short = 'c', long)]
    c: Option<f64>,
    /// Steps per rollout, or "unbounded".
    #[arg(long)]
    rollout_depth: Option<Depth>,
    /// Search iterations per committed move.
    #[arg(long = "iterations")]
    iterations_per_move: Option<u32>,
    /// Move cap per playthrough.
    #[arg(long)]
    max_moves: Option<u32>,
    /// Levels to generate.
    #[arg(short = 'n', long)]
    population: Option<usize>,
    /// Base seed; level i uses seed + i. Defaults to 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory. Defaults to ./out.
    #[arg(short = 'o', long = "out")]
    output: Option<PathBuf>,
    /// Worker threads. Results do not depend on it.
    #[arg(short = 'j', long)]
    jobs: Option<usize>,
    /// Also write sketches and ranked threats.
    #[arg(long)]
    debug: bool,
}

impl Common {
    fn config(self) -> Result<ConfigFile, CliError> {
        let base = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let flags = ConfigFile {
            domain: self.domain,
            sources: self.sources,
            t: self.t,
            s: self.s,
            e: self.e,
            c: self.c,
            rollout_depth: self.rollout_depth,
            ranges: None,
            iterations_per_move: self.iterations_per_move,
            max_moves: self.max_moves,
            population: self.population,
            seed: self.seed,
            output: self.output,
            jobs: self.jobs,
            debug: self.debug.then_some(true),
        };
        Ok(base.overlay(flags))
    }
}

fn print_table(rows: &[(String, MetricsReport)]) {
    print!("{}", MetricsReport::table(rows));
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Play(common) => {
            let cfg = common.config()?.resolve()?;
            let runs = cmd_play(&cfg)?;
            for r in &runs {
                println!(
                    "seed {}: {} after {} moves, {} deaths recorded",
                    r.seed,
                    if r.success { "success" } else { "failure" },
                    r.moves,
                    r.deaths
                );
            }
            let wins = runs.iter().filter(|r| r.success).count();
            println!("{wins}/{} playthroughs reached the goal", runs.len());
            println!(
                "trace written to {}",
                cfg.output.join("trace.json").display()
            );
        }
        Command::Generate { common, method } => {
            let cfg = common.config()?.resolve()?;
            let summary = cmd_generate(&cfg, method)?;
            println!(
                "{} levels written to {} ({} failed)",
                summary.ok,
                cfg.output.display(),
                summary.failed
            );
        }
        Command::Evaluate {
            common,
            populations,
        } => {
            let cfg = common.config()?.resolve()?;
            let rows = cmd_evaluate(&cfg, &populations)?;
            print_table(&rows);
        }
        Command::Render {
            level,
            domain,
            ppm,
            scale,
        } => {
            let d = ConfigFile {
                domain: Some(domain),
                ..Default::default()
            }
            .domain()?;
            let text = std::fs::read_to_string(&level).map_err(|e| CliError::io(&level, e))?;
            let parsed = trp_core::parse_level(&text, d.alphabet.clone())
                .map_err(|e| CliError::Config(format!("{}: {e}", level.display())))?;
            match ppm {
                Some(path) => write_file(&path, &render::ppm(&parsed, scale))?,
                None => print!("{}", render::ascii(&parsed)),
            }
        }
        Command::Experiment(common) => {
            let cfg = common.config()?.resolve()?;
            let rows = cmd_experiment(&cfg)?;
            print_table(&rows);
            println!(
                "results written to {}",
                cfg.output.join("results.csv").display()
            );
        }
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

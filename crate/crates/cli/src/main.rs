use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use activemap::episode::read_episode_log;
use activemap::mapping::GLOBAL_MAP_SIZE;
use activemap::metrics::{aggregate, load_logs};
use activemap::runner::{self, bench, bench_fixture, cmd_run, gen_scenes, render_log, RunConfig};
use activemap::scene::{generate_floorplan, load_scene, FloorplanConfig, SceneGrid};

/// Grid-world active mapping simulator.
#[derive(Parser)]
#[command(name = "activemap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate procedural floorplan scenes.
    GenScenes {
        #[arg(long, default_value_t = 6)]
        rooms: usize,
        /// Cells per side.
        #[arg(long, default_value_t = 100)]
        extent: usize,
        #[arg(long, default_value_t = 0.1)]
        clutter: f64,
        #[arg(long, default_value_t = 2)]
        door_width: usize,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a batch evaluation described by a TOML config.
    Run { config: PathBuf },
    /// Time the stages of one environment step.
    Bench {
        /// Scene file; defaults to a generated 6-room floorplan.
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long, default_value_t = GLOBAL_MAP_SIZE)]
        map_size: usize,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        #[arg(long)]
        json: bool,
    },
    /// Aggregate episode logs into report.csv and report.json.
    Report {
        logs: PathBuf,
        /// Output directory; defaults to the logs directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render an episode log as PGM frames plus a composite.
    Render {
        log: PathBuf,
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::GenScenes { rooms, extent, clutter, door_width, count, seed, out } => {
            let base = FloorplanConfig {
                room_count: rooms,
                target_extent: extent,
                clutter_density: clutter,
                door_width,
                seed,
                ..FloorplanConfig::default()
            };
            for path in gen_scenes(&base, count, &out)? {
                println!("{}", path.display());
            }
            Ok(0)
        }
        Command::Run { config } => {
            let config = RunConfig::load(&config).map_err(anyhow::Error::msg)?;
            let summary = cmd_run(&config)?;
            print!("{}", summary.report.to_csv());
            for failure in &summary.failures {
                eprintln!("failed: {failure}");
            }
            Ok(summary.exit_code() as u8)
        }
        Command::Bench { scene, map_size, iterations, json } => {
            let scene = match scene {
                Some(path) => load_scene(&path)?,
                None => default_bench_scene(map_size)?,
            };
            let fixture = bench_fixture(scene, map_size, 5)?;
            let report = bench(&fixture, iterations);
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.to_table());
            }
            Ok(0)
        }
        Command::Report { logs, out } => {
            let (episodes, issues) = load_logs(&logs).with_context(|| format!("reading {}", logs.display()))?;
            for issue in &issues {
                eprintln!("skipped {issue}");
            }
            if episodes.is_empty() {
                bail!("no usable episode logs under {}", logs.display());
            }
            let report = aggregate(&episodes);
            runner::write_report(&report, out.as_ref().unwrap_or(&logs))?;
            print!("{}", report.to_csv());
            Ok(0)
        }
        Command::Render { log, scene, out } => {
            let parsed = read_episode_log(&log)
                .with_context(|| format!("reading {}", log.display()))?
                .map_err(|(line, msg)| anyhow::anyhow!("{}:{line}: {msg}", log.display()))?;
            let scene = load_scene(&scene)?;
            for path in render_log(&parsed, &scene, &out)? {
                println!("{}", path.display());
            }
            Ok(0)
        }
    }
}

fn default_bench_scene(map_size: usize) -> Result<SceneGrid> {
    if map_size < 100 {
        return Ok(SceneGrid::empty_room(map_size, map_size, 0.1));
    }
    Ok(generate_floorplan(&FloorplanConfig { room_count: 6, target_extent: 100, seed: 1, ..FloorplanConfig::default() })?)
}

//! Batch evaluation, scene generation, benchmarking and rendering; the
//! library side of the command-line tool.

mod bench;
mod config;
mod render;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::episode::{run_episode, EpisodeConfig, EpisodeHeader, EpisodeLog, TerminationCause};
use crate::metrics::{aggregate, Report};
use crate::policy::PolicyKind;
use crate::rng::{derive_seed, rng_from};
use crate::scene::{
    generate_floorplan, ground_truth_surface, load_scene, sample_start_pose, save_scene, FloorplanConfig,
    GroundTruthSurface, SceneError, SceneGrid, StartRegion,
};
use crate::sensor::NoiseModel;
use crate::Pose;

pub use bench::{bench, bench_fixture, BenchReport, StageTiming, BENCH_STAGES};
pub use config::{parse_noise, RunConfig, SceneSource, SCENE_EXTENSION, THREADS_ENV};
pub use render::{render_log, RenderError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Writes `count` generated floorplans to `out_dir`; scene `i` uses a seed
/// split from `base.seed`.
pub fn gen_scenes(base: &FloorplanConfig, count: usize, out_dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    std::fs::create_dir_all(out_dir)?;
    generate_scenes(base, count)?
        .into_iter()
        .map(|scene| {
            let path = out_dir.join(format!("{}.{SCENE_EXTENSION}", scene.name()));
            save_scene(&scene, &path)?;
            Ok(path)
        })
        .collect()
}

pub fn generate_scenes(base: &FloorplanConfig, count: usize) -> Result<Vec<SceneGrid>, SceneError> {
    (0..count)
        .map(|i| {
            let config = FloorplanConfig {
                seed: derive_seed(base.seed, &["scene".into(), i.into()]),
                ..base.clone()
            };
            generate_floorplan(&config)
        })
        .collect()
}

/// Loads every scene file of a directory in file-name order.
pub fn load_scene_dir(dir: &Path) -> Result<Vec<SceneGrid>, RunError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| RunError::Config(format!("scene directory {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == SCENE_EXTENSION))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(RunError::Config(format!("no .{SCENE_EXTENSION} files in {}", dir.display())));
    }
    Ok(paths.iter().map(load_scene).collect::<Result<_, _>>()?)
}

/// Start pose of episode `episode` in `scene`: a function of the master seed,
/// scene name and episode index only, so every policy starts identically.
pub fn start_pose(master_seed: u64, scene: &SceneGrid, episode: usize) -> Result<Pose, SceneError> {
    let mut rng = rng_from(master_seed, &["start".into(), scene.name().into(), episode.into()]);
    sample_start_pose(scene, &mut rng)
}

pub fn noise_seed(master_seed: u64, scene: &str, episode: usize, noise: &NoiseModel) -> u64 {
    derive_seed(master_seed, &["noise".into(), scene.into(), episode.into(), noise.label().as_str().into()])
}

pub fn policy_seed(master_seed: u64, policy: &str, scene: &str, episode: usize) -> u64 {
    derive_seed(master_seed, &["policy".into(), policy.into(), scene.into(), episode.into()])
}

/// One unit of work.
#[derive(Clone, Debug)]
pub struct Job {
    pub policy: PolicyKind,
    pub noise: NoiseModel,
    pub scene: usize,
    pub episode: usize,
}

/// A prepared scene: grid, surface and validated start region.
pub struct PreparedScene {
    pub scene: SceneGrid,
    pub surface: GroundTruthSurface,
}

pub fn prepare_scenes(scenes: Vec<SceneGrid>, map_size: usize) -> Result<Vec<PreparedScene>, RunError> {
    let mut names: Vec<&str> = scenes.iter().map(|s| s.name()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(RunError::Config(format!("duplicate scene name {:?}", w[0])));
    }
    scenes
        .into_iter()
        .map(|scene| {
            if scene.width() > map_size || scene.height() > map_size {
                return Err(RunError::Config(format!(
                    "scene {} is {}x{}, larger than the {map_size}x{map_size} map",
                    scene.name(),
                    scene.width(),
                    scene.height()
                )));
            }
            if StartRegion::new(&scene, StartRegion::DEFAULT_KERNEL).is_empty() {
                return Err(SceneError::EmptyStartRegion.into());
            }
            let surface = ground_truth_surface(&scene);
            Ok(PreparedScene { scene, surface })
        })
        .collect()
}

/// Runs one episode and wraps it as a log. Errors are episode failures.
pub fn run_job(
    job: &Job,
    scene: &PreparedScene,
    base: &EpisodeConfig,
    master_seed: u64,
    tag: &str,
) -> Result<EpisodeLog, String> {
    let name = scene.scene.name();
    let start = start_pose(master_seed, &scene.scene, job.episode).map_err(|e| e.to_string())?;
    let config = EpisodeConfig {
        noise: job.noise,
        seed: noise_seed(master_seed, name, job.episode, &job.noise),
        ..base.clone()
    };
    let label = job.policy.label();
    let mut policy = job
        .policy
        .build(policy_seed(master_seed, label, name, job.episode), config.action_radius)
        .map_err(|e| e.to_string())?;
    let header = EpisodeHeader {
        scene: name.to_string(),
        policy: label.to_string(),
        tag: tag.to_string(),
        noise: job.noise.label(),
        episode: job.episode,
        master_seed,
        start,
        config: config.clone(),
    };
    let run = run_episode(&scene.scene, &scene.surface, policy.as_mut(), config, start).map_err(|e| e.to_string())?;
    Ok(EpisodeLog::new(header, run))
}

/// Relative log path of an episode.
pub fn log_path(log: &EpisodeHeader) -> PathBuf {
    PathBuf::from("logs")
        .join(&log.policy)
        .join(&log.noise)
        .join(&log.scene)
        .join(format!("ep{:03}.jsonl", log.episode))
}

#[derive(Debug)]
pub struct RunSummary {
    pub logs: Vec<EpisodeLog>,
    pub report: Report,
    /// Episodes that could not run or ended in a bridge fault.
    pub failures: Vec<String>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            2
        }
    }
}

/// Runs every (policy, noise, scene, episode) combination, writes the logs
/// and the report under `config.out`.
pub fn cmd_run(config: &RunConfig) -> Result<RunSummary, RunError> {
    config.validate().map_err(RunError::Config)?;
    let policies = config.policy_kinds().map_err(RunError::Config)?;
    let noises = config.noise_models().map_err(RunError::Config)?;
    let base = config.episode_config(&NoiseModel::noiseless());
    let scenes = match config.scene_source() {
        SceneSource::Directory(dir) => load_scene_dir(&dir)?,
        SceneSource::Generated { count, base } => generate_scenes(&base, count)?,
    };
    let scenes = prepare_scenes(scenes, base.map_size)?;
    let threads = config.thread_count().map_err(RunError::Config)?;
    let tag = config.tag();

    let mut jobs = Vec::new();
    for policy in &policies {
        for noise in &noises {
            for scene in 0..scenes.len() {
                for episode in 0..config.episodes {
                    jobs.push(Job { policy: policy.clone(), noise: *noise, scene, episode });
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| RunError::Config(e.to_string()))?;
    let outcomes: Vec<Result<EpisodeLog, String>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| run_job(job, &scenes[job.scene], &base, config.seed, &tag))
            .collect()
    });

    let mut logs = Vec::new();
    let mut failures = Vec::new();
    for (job, outcome) in jobs.iter().zip(outcomes) {
        let what = format!("{} {} {} ep{}", job.policy, job.noise.label(), scenes[job.scene].scene.name(), job.episode);
        match outcome {
            Ok(log) => {
                if log.result.termination_cause == TerminationCause::BridgeFault {
                    failures.push(format!("{what}: {}", log.result.fault.as_deref().unwrap_or("bridge fault")));
                }
                logs.push(log);
            }
            Err(e) => failures.push(format!("{what}: {e}")),
        }
    }
    for failure in &failures {
        ::log::error!("episode failed: {failure}");
    }
    for log in &logs {
        crate::episode::write_episode_log(config.out.join(log_path(&log.header)), log)?;
    }
    let report = aggregate(&logs);
    write_report(&report, &config.out)?;
    Ok(RunSummary { logs, report, failures })
}

pub fn write_report(report: &Report, out_dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("report.csv"), report.to_csv())?;
    std::fs::write(out_dir.join("report.json"), report.to_json())
}

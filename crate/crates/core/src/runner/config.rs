//! Strict flat TOML run configuration.
//!
//! ```toml
//! scenes = "scenes"          # directory of .grid files, or the gen_* keys
//! policies = ["fbe", "vacuum", "random"]
//! episodes = 10
//! seed = 7
//! threads = 0                # 0: one per core; GLEAM_SIM_THREADS overrides
//! out = "out"
//! noise = ["0/0", "0/0.05", "0.1/0", "0.1*/0"]   # pose/depth variance, * = per-step pose noise
//! budget = 50
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::episode::EpisodeConfig;
use crate::policy::PolicyKind;
use crate::scene::FloorplanConfig;
use crate::sensor::NoiseModel;

pub const THREADS_ENV: &str = "GLEAM_SIM_THREADS";
pub const SCENE_EXTENSION: &str = "grid";

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Directory of scene files, relative to the config file.
    pub scenes: Option<PathBuf>,
    pub gen_count: Option<usize>,
    #[serde(default = "defaults::gen_rooms")]
    pub gen_rooms: usize,
    #[serde(default = "defaults::gen_extent")]
    pub gen_extent: usize,
    #[serde(default = "defaults::gen_clutter")]
    pub gen_clutter: f64,
    #[serde(default)]
    pub gen_seed: u64,
    /// Dataset tag used in report groups; defaults to the scene directory
    /// name or `generated`.
    pub tag: Option<String>,
    pub policies: Vec<String>,
    #[serde(default = "defaults::episodes")]
    pub episodes: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threads: usize,
    #[serde(default = "defaults::out")]
    pub out: PathBuf,
    #[serde(default = "defaults::noise")]
    pub noise: Vec<String>,
    #[serde(default = "defaults::drift_horizon")]
    pub drift_horizon: u32,
    pub budget: Option<usize>,
    pub max_path_length: Option<f64>,
    pub action_radius: Option<f64>,
    pub success_coverage: Option<f64>,
    pub termination_reward_coverage: Option<f64>,
    pub stagnation_window: Option<usize>,
    pub stagnation_threshold: Option<f64>,
    pub truncation_limit: Option<usize>,
    pub n_rays: Option<usize>,
    pub max_range: Option<f64>,
}

mod defaults {
    use std::path::PathBuf;

    pub fn gen_rooms() -> usize {
        6
    }
    pub fn gen_extent() -> usize {
        100
    }
    pub fn gen_clutter() -> f64 {
        0.1
    }
    pub fn episodes() -> usize {
        10
    }
    pub fn out() -> PathBuf {
        PathBuf::from("out")
    }
    pub fn noise() -> Vec<String> {
        vec!["0/0".into()]
    }
    pub fn drift_horizon() -> u32 {
        50
    }
}

/// Where scenes come from.
#[derive(Clone, Debug, PartialEq)]
pub enum SceneSource {
    Directory(PathBuf),
    Generated { count: usize, base: FloorplanConfig },
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        let config: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, String> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut config = Self::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(dir) = config.scenes.take() {
            config.scenes = Some(base.join(dir));
        }
        config.out = base.join(&config.out);
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        match (&self.scenes, self.gen_count) {
            (Some(_), Some(_)) => return Err("set either scenes or gen_count, not both".into()),
            (None, None) => return Err("missing scene source: set scenes or gen_count".into()),
            (None, Some(0)) => return Err("gen_count must be at least 1".into()),
            _ => {}
        }
        if self.episodes == 0 {
            return Err("episodes must be at least 1".into());
        }
        let kinds = self.policy_kinds()?;
        let mut labels: Vec<&str> = kinds.iter().map(|k| k.label()).collect();
        labels.sort_unstable();
        if labels.is_empty() || labels.windows(2).any(|w| w[0] == w[1]) {
            return Err("policies must be a non-empty list without duplicates".into());
        }
        let models = self.noise_models()?;
        if models.is_empty() {
            return Err("noise list must not be empty".into());
        }
        for model in &models {
            self.episode_config(model).validate()?;
        }
        Ok(())
    }

    pub fn policy_kinds(&self) -> Result<Vec<PolicyKind>, String> {
        self.policies.iter().map(|p| p.parse()).collect()
    }

    pub fn noise_models(&self) -> Result<Vec<NoiseModel>, String> {
        self.noise.iter().map(|s| parse_noise(s, self.drift_horizon)).collect()
    }

    pub fn scene_source(&self) -> SceneSource {
        match (&self.scenes, self.gen_count) {
            (Some(dir), _) => SceneSource::Directory(dir.clone()),
            (None, count) => SceneSource::Generated {
                count: count.unwrap_or(1),
                base: FloorplanConfig {
                    room_count: self.gen_rooms,
                    target_extent: self.gen_extent,
                    clutter_density: self.gen_clutter,
                    seed: self.gen_seed,
                    ..FloorplanConfig::default()
                },
            },
        }
    }

    pub fn tag(&self) -> String {
        if let Some(tag) = &self.tag {
            return tag.clone();
        }
        match &self.scenes {
            Some(dir) => dir
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "scenes".into()),
            None => "generated".into(),
        }
    }

    /// Worker count: `GLEAM_SIM_THREADS` wins over the config; 0 means one
    /// per core.
    pub fn thread_count(&self) -> Result<usize, String> {
        match std::env::var(THREADS_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| format!("{THREADS_ENV}={v:?} is not a thread count")),
            Err(_) => Ok(self.threads),
        }
    }

    /// Episode config for one noise setting; the seed is filled in per
    /// episode.
    pub fn episode_config(&self, noise: &NoiseModel) -> EpisodeConfig {
        let mut c = EpisodeConfig {
            noise: *noise,
            ..EpisodeConfig::default()
        };
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field { $target = v; })*
            };
        }
        set! {
            budget => c.keyframe_budget,
            max_path_length => c.max_path_length,
            action_radius => c.action_radius,
            success_coverage => c.success_coverage,
            termination_reward_coverage => c.termination_reward_coverage,
            stagnation_window => c.stagnation_window,
            stagnation_threshold => c.stagnation_threshold,
            truncation_limit => c.truncation_limit,
            n_rays => c.sensor.n_rays,
            max_range => c.sensor.max_range,
        }
        c
    }
}

/// Parses `<pose>/<depth>` variances; a `*` after the pose variance selects
/// per-step (non-cumulative) pose noise.
pub fn parse_noise(s: &str, drift_horizon: u32) -> Result<NoiseModel, String> {
    let bad = || format!("bad noise setting {s:?} (expected <pose>[*]/<depth>, e.g. 0.1/0 or 0.1*/0.05)");
    let (pose, depth) = s.split_once('/').ok_or_else(bad)?;
    let (pose, cumulative) = match pose.trim().strip_suffix('*') {
        Some(p) => (p, false),
        None => (pose.trim(), true),
    };
    let model = NoiseModel {
        pose_variance: pose.trim().parse().map_err(|_| bad())?,
        pose_cumulative: cumulative,
        depth_variance: depth.trim().parse().map_err(|_| bad())?,
        drift_horizon,
    };
    model.validate()?;
    Ok(model)
}

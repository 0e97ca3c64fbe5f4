//! Per-stage latency of one environment step.

use std::hint::black_box;
use std::time::Instant;

use serde::Serialize;

use crate::episode::{Episode, EpisodeConfig, EpisodeError};
use crate::geometry::Cell;
use crate::mapping::SemanticView;
use crate::planning::{astar, distance_field};
use crate::policy::{FrontierPolicy, Policy};
use crate::scene::{ground_truth_surface, sample_start_pose, SceneGrid};
use crate::sensor::capture_panorama;
use crate::{GlobalProbMap, Pose};

pub const BENCH_STAGES: [&str; 5] = ["integrate", "frontier", "egocentric", "astar", "full_step"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub iterations: usize,
    pub median_us: f64,
    pub p95_us: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub map_size: usize,
    pub n_rays: usize,
    pub stages: Vec<StageTiming>,
}

impl BenchReport {
    pub fn stage(&self, name: &str) -> Option<&StageTiming> {
        self.stages.iter().find(|s| s.stage == name)
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("stage        median_us      p95_us   ({}x{} map, {} rays)\n", self.map_size, self.map_size, self.n_rays);
        for s in &self.stages {
            out.push_str(&format!("{:<12} {:>9.1} {:>11.1}\n", s.stage, s.median_us, s.p95_us));
        }
        out
    }
}

/// A mid-episode state to measure against: a few FBE keyframes into an
/// episode, so the map holds a realistic mix of known and unknown cells.
pub struct BenchFixture {
    map: GlobalProbMap,
    pose: Pose,
    scene: SceneGrid,
    config: EpisodeConfig,
    goal: Cell,
}

pub fn bench_fixture(scene: SceneGrid, map_size: usize, warmup_steps: usize) -> Result<BenchFixture, EpisodeError> {
    let config = EpisodeConfig { map_size, ego_size: map_size, ..EpisodeConfig::default() };
    let gt = ground_truth_surface(&scene);
    let mut rng = crate::rng::rng_from(0, &["bench".into()]);
    let start = sample_start_pose(&scene, &mut rng).map_err(|e| EpisodeError::Config(e.to_string()))?;
    let (map, pose) = {
        let mut ep = Episode::new(&scene, &gt, config.clone(), start)?;
        let mut fbe = FrontierPolicy::new();
        for _ in 0..warmup_steps {
            if ep.is_done() {
                break;
            }
            let obs = ep.observation();
            let action = fbe.act(&ep.context(&obs)).expect("in-process policy");
            ep.step(action)?;
        }
        (ep.map().clone(), ep.reported_pose())
    };
    // A* target: the reachable cell with the longest path within the limit
    let view = SemanticView::from_map(&map);
    let agent = map.world_to_map(pose.x, pose.y);
    let field = distance_field(&view.tri, agent);
    let goal = field
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.filter(|c| c.meters(map.cell_size()) <= config.max_path_length).map(|c| (c, i)))
        .max()
        .map(|(_, i)| view.tri.cell_at(i))
        .unwrap_or(agent);
    Ok(BenchFixture { map, pose, scene, config, goal })
}

fn time<F: FnMut()>(name: &str, iterations: usize, mut f: F) -> StageTiming {
    let mut samples: Vec<f64> = (0..iterations)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64() * 1e6
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    let at = |q: f64| samples[((samples.len() - 1) as f64 * q).round() as usize];
    StageTiming {
        stage: name.to_string(),
        iterations,
        median_us: at(0.5),
        p95_us: at(0.95),
    }
}

/// Times each stage and the full step over `iterations` runs.
pub fn bench(fixture: &BenchFixture, iterations: usize) -> BenchReport {
    let iterations = iterations.max(1);
    let s = fixture.config.sensor;
    let cs = fixture.map.cell_size();
    let ego = fixture.config.ego_size;
    let max_len = fixture.config.max_path_length;
    let mut map = fixture.map.clone();
    let pose = fixture.pose;
    let agent = map.world_to_map(pose.x, pose.y);
    let view = SemanticView::from_map(&map);

    let integrate = |map: &mut GlobalProbMap| {
        let scans = capture_panorama(&fixture.scene, &pose, s.fov, s.n_rays, s.max_range).expect("free pose");
        for scan in &scans {
            map.integrate_scan(&scan.origin, scan);
        }
    };
    let mut stages = Vec::new();
    stages.push(time("integrate", iterations, || integrate(&mut map)));
    stages.push(time("frontier", iterations, || {
        black_box(SemanticView::from_map(black_box(&map)));
    }));
    stages.push(time("egocentric", iterations, || {
        black_box(view.crop(agent, ego));
    }));
    stages.push(time("astar", iterations, || {
        let _ = black_box(astar(&view.tri, agent, fixture.goal, cs, max_len));
    }));
    stages.push(time("full_step", iterations, || {
        integrate(&mut map);
        let v = SemanticView::from_map(&map);
        black_box(v.crop(agent, ego));
        let _ = black_box(astar(&v.tri, agent, fixture.goal, cs, max_len));
    }));
    BenchReport {
        map_size: fixture.map.width(),
        n_rays: s.n_rays,
        stages,
    }
}

//! Acceptance suite. Runs as a plain binary (no libtest harness) so that the
//! one-line verdict per criterion is always printed; exits non-zero if any
//! criterion fails.

mod common;

use std::collections::BTreeSet;
use std::io::{BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Instant;

use activemap::episode::{run_episode, EpisodeLog};
use activemap::geometry::{Cell, Pose2, RayWalk};
use activemap::mapping::{bresenham, detect_frontiers, update_coverage, MapParams, ProbMap, TriState};
use activemap::metrics::{auc, chamfer};
use activemap::planning::{astar, PathCost, Unnavigable};
use activemap::policy::{serve_agent, AgentReply, BridgeConnection, BridgeEndpoint, BridgePolicy, DEFAULT_BRIDGE_TIMEOUT};
use activemap::rng::rng_from;
use activemap::runner::{bench, bench_fixture, cmd_run, generate_scenes, prepare_scenes, RunConfig, RunSummary, SceneSource, THREADS_ENV};
use activemap::scene::{generate_floorplan, ground_truth_surface, FloorplanConfig, SceneGrid, StartRegion};
use activemap::sensor::capture_panorama;
use activemap::{Exact, ExactProbMap, GlobalProbMap};
use num_rational::Ratio;
use rand::Rng;

type Verdict = Result<String, String>;

fn main() {
    // the parallelism checks below pin thread counts through the config
    std::env::remove_var(THREADS_ENV);
    let scratch = tempfile::tempdir().expect("temp dir");
    let started = Instant::now();
    let baseline = run_config(&baseline_toml(), &scratch.path().join("baseline"));
    let baseline_secs = started.elapsed().as_secs_f64();

    let verdicts: Vec<(&str, Verdict)> = vec![
        ("baseline ordering FBE > Vacuum > Random", baseline_ordering(&baseline, baseline_secs)),
        ("noise degradation monotonicity", noise_monotonicity(scratch.path())),
        ("oracle equivalences", oracle_equivalences()),
        ("arithmetic identities", arithmetic_identities(&baseline)),
        ("monotonicity suite", monotonicity_suite(&baseline)),
        ("determinism and bridge replay", determinism(scratch.path())),
        ("full-step performance", performance()),
    ];
    let mut failed = 0;
    for (i, (name, verdict)) in verdicts.iter().enumerate() {
        match verdict {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn baseline_toml() -> String {
    "gen_count = 20\ngen_rooms = 6\ngen_extent = 100\ngen_clutter = 0.1\n\
     policies = [\"fbe\", \"vacuum\", \"random\"]\nepisodes = 10\nseed = 1\n"
        .to_string()
}

fn run_config(toml_text: &str, out: &Path) -> RunSummary {
    let mut config = RunConfig::from_toml(toml_text).expect("valid config");
    config.out = out.to_path_buf();
    let summary = cmd_run(&config).expect("run succeeds");
    assert!(summary.failures.is_empty(), "episode failures: {:?}", summary.failures);
    summary
}

fn overall(summary: &RunSummary, policy: &str, noise: &str) -> Result<(f64, f64), String> {
    summary
        .report
        .overall(policy, "generated", noise)
        .map(|r| (r.cov_pct, r.auc_pct))
        .ok_or_else(|| format!("no overall row for {policy} {noise}"))
}

fn baseline_ordering(summary: &RunSummary, secs: f64) -> Verdict {
    let (fbe, vac, rnd) = (overall(summary, "fbe", "p0_d0")?, overall(summary, "vacuum", "p0_d0")?, overall(summary, "random", "p0_d0")?);
    let detail = format!(
        "coverage {:.2} / {:.2} / {:.2}, AUC {:.2} / {:.2} / {:.2} over 20 scenes x 10 episodes in {secs:.1} s",
        fbe.0, vac.0, rnd.0, fbe.1, vac.1, rnd.1
    );
    let coverage_ok = fbe.0 - vac.0 >= 5.0 && vac.0 - rnd.0 >= 5.0;
    let auc_ok = fbe.1 > vac.1 && vac.1 > rnd.1;
    if coverage_ok && auc_ok && secs < 600.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn noise_monotonicity(scratch: &Path) -> Verdict {
    let toml_text = "gen_count = 20\ngen_rooms = 6\ngen_extent = 100\ngen_clutter = 0.1\npolicies = [\"fbe\"]\n\
                     episodes = 10\nseed = 1\nnoise = [\"0/0\", \"0/0.05\", \"0/0.1\", \"0/0.2\", \"0.1/0\", \"0.3/0\", \"0.5/0\"]\n";
    let summary = run_config(toml_text, &scratch.join("noise"));
    let sweep = |labels: &[&str]| -> Result<Vec<f64>, String> { labels.iter().map(|l| overall(&summary, "fbe", l).map(|r| r.0)).collect() };
    let depth = sweep(&["p0_d0", "p0_d0.05", "p0_d0.1", "p0_d0.2"])?;
    let pose = sweep(&["p0_d0", "p0.1_d0", "p0.3_d0", "p0.5_d0"])?;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(" >= ");
    let detail = format!("depth {}; pose {}", fmt(&depth), fmt(&pose));
    let non_increasing = |v: &[f64]| v.windows(2).all(|w| w[1] <= w[0]);
    if non_increasing(&depth) && non_increasing(&pose) && depth[0] - depth[3] >= 5.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_equivalences() -> Verdict {
    // (a) lines
    let mut lines = 0;
    for origin in [Cell::new(0, 0), Cell::new(3, -2)] {
        for dy in -8..=8 {
            for dx in -8..=8 {
                let end = origin.offset(dx, dy);
                if bresenham(origin, end) != common::line_oracle(origin, end) {
                    return Err(format!("line {origin:?} -> {end:?} differs from the oracle"));
                }
                lines += 1;
            }
        }
    }

    // (b) shortest paths
    let mut rng = rng_from(2024, &["mazes".into()]);
    let mut queries = 0usize;
    let check = |tri: &activemap::mapping::TriGrid, start: Cell, goal: Cell, oracle: &[Option<(u32, u32)>]| -> Result<(), String> {
        let expected = tri.index(goal).and_then(|i| oracle[i]);
        let got = astar(tri, start, goal, 0.1, f64::INFINITY);
        match (expected, got) {
            (Some((o, d)), Ok(plan)) if plan.cost == PathCost { orthogonal: o, diagonal: d } => Ok(()),
            (None, Err(Unnavigable::NoPath)) => Ok(()),
            (e, g) => Err(format!("A* {start:?} -> {goal:?}: oracle {e:?}, got {:?}", g.map(|p| p.cost))),
        }
    };
    for _ in 0..50 {
        let tri = common::maze(&mut rng, 64);
        let free: Vec<Cell> = (0..64 * 64).map(|i| tri.cell_at(i)).filter(|c| tri.get(*c) == TriState::Free).collect();
        for _ in 0..2 {
            let start = free[rng.random_range(0..free.len())];
            let oracle = common::dijkstra_oracle(&tri, start);
            for _ in 0..100 {
                check(&tri, start, free[rng.random_range(0..free.len())], &oracle)?;
                queries += 1;
            }
        }
    }
    for _ in 0..12 {
        let (w, h) = (rng.random_range(1..=12), rng.random_range(1..=12));
        let tri = common::random_tri(&mut rng, w, h, 0.7, 0.2);
        for a in 0..w * h {
            let start = tri.cell_at(a);
            if tri.get(start) != TriState::Free {
                continue;
            }
            let oracle = common::dijkstra_oracle(&tri, start);
            for b in 0..w * h {
                if tri.get(tri.cell_at(b)) == TriState::Free {
                    check(&tri, start, tri.cell_at(b), &oracle)?;
                    queries += 1;
                }
            }
        }
    }

    // (c) frontiers
    for i in 0..100 {
        let (w, h) = (rng.random_range(1..48), rng.random_range(1..48));
        let p_free = rng.random_range(0.1..0.8);
        let tri = common::random_tri(&mut rng, w, h, p_free, (1.0 - p_free) * 0.5);
        let got: BTreeSet<Cell> = detect_frontiers(&tri).cells().iter().copied().collect();
        if got != common::frontier_oracle(&tri) {
            return Err(format!("frontier grid {i} ({w}x{h}) differs from the naive scan"));
        }
    }

    // (d) coverage after one panorama in convex rooms
    let mut fixtures = 0;
    for (w, h, cut) in [(10, 10, 0), (20, 14, 0), (30, 30, 0), (41, 23, 0), (30, 30, 6), (36, 24, 4)] {
        let scene = convex_room(w, h, cut);
        let gt = ground_truth_surface(&scene);
        // poses near the middle: from a wall-hugging pose, faces seen at grazing
        // angles are narrower than the ray spacing and get skipped
        let mut rng_pose = rng_from(7, &["los".into(), scene.name().into()]);
        for _ in 0..4 {
            let (cx, cy) = ((w / 2) as i32 + rng_pose.random_range(-2..=2), (h / 2) as i32 + rng_pose.random_range(-2..=2));
            let (x, y) = Cell::new(cx, cy).center(0.1);
            let pose = Pose2::new(x, y, rng_pose.random_range(0.0..std::f64::consts::TAU));
            let mut map: GlobalProbMap = ProbMap::for_scene(&scene, 64, 64, MapParams::default()).map_err(|e| e.to_string())?;
            for scan in capture_panorama(&scene, &pose, std::f64::consts::FRAC_PI_2, 256, 5.0).map_err(|e| e.to_string())? {
                map.integrate_scan(&scan.origin, &scan);
            }
            let covered: BTreeSet<Cell> = update_coverage(&map, &gt).map_err(|e| e.to_string())?.covered.into_iter().collect();
            let visible = common::line_of_sight_oracle(&scene, pose.x, pose.y, 5.0);
            if covered != visible {
                let diff: Vec<_> = covered.symmetric_difference(&visible).take(5).collect();
                return Err(format!("coverage in {} from {pose:?} differs from line of sight at {diff:?}", scene.name()));
            }
            fixtures += 1;
        }
    }
    Ok(format!("{lines} lines, {queries} A* queries, 100 frontier grids, {fixtures} line-of-sight fixtures"))
}

/// Rectangle of `w × h` cells with its corners cut by `cut`-step diagonals.
fn convex_room(w: usize, h: usize, cut: i32) -> SceneGrid {
    let mut mask = vec![false; w * h];
    for y in 0..h as i32 {
        for x in 0..w as i32 {
            let (ex, ey) = (x.min(w as i32 - 1 - x), y.min(h as i32 - 1 - y));
            mask[y as usize * w + x as usize] = ex == 0 || ey == 0 || ex + ey < cut;
        }
    }
    SceneGrid::from_mask(w, h, 0.1, mask, format!("convex_{w}x{h}_{cut}"), 0).expect("valid room")
}

fn arithmetic_identities(baseline: &RunSummary) -> Verdict {
    // log-odds additivity with exact rationals, counted by walking each ray
    let scene = generate_floorplan(&FloorplanConfig { room_count: 4, target_extent: 48, seed: 3, ..FloorplanConfig::default() }).map_err(|e| e.to_string())?;
    let params = MapParams { clamp_min: -1e6, clamp_max: 1e6, ..MapParams::default() };
    let mut exact: ExactProbMap = ProbMap::for_scene(&scene, 64, 64, params).map_err(|e| e.to_string())?;
    let mut float: GlobalProbMap = ProbMap::for_scene(&scene, 64, 64, params).map_err(|e| e.to_string())?;
    let mut counts: std::collections::BTreeMap<Cell, (i64, i64)> = Default::default();
    let region = StartRegion::new(&scene, 3);
    for k in 0..6u64 {
        let pose = region.sample(0.1, &mut rng_from(k, &["additivity".into()])).map_err(|e| e.to_string())?;
        for scan in capture_panorama(&scene, &pose, std::f64::consts::FRAC_PI_2, 256, 5.0).map_err(|e| e.to_string())? {
            exact.integrate_scan(&scan.origin, &scan);
            float.integrate_scan(&scan.origin, &scan);
            for ray in &scan.rays {
                let walk: Vec<(Cell, f64)> = RayWalk::new(scan.origin.x, scan.origin.y, scan.world_angle(ray), 0.1)
                    .take_while(|(_, t)| *t <= ray.range)
                    .collect();
                for (i, (cell, _)) in walk.iter().enumerate() {
                    let entry = counts.entry(*cell).or_default();
                    if ray.hit && i + 1 == walk.len() {
                        entry.1 += 1;
                    } else {
                        entry.0 += 1;
                    }
                }
            }
        }
    }
    let (c_free, c_occ) = (Ratio::new(-2, 5), Ratio::new(11, 5));
    for y in 0..64 {
        for x in 0..64 {
            let m = Cell::new(x, y);
            let (k, h) = counts.get(&exact.map_to_scene(m)).copied().unwrap_or((0, 0));
            let expected: Exact = c_free * k + c_occ * h;
            if exact.logodds(m) != expected {
                return Err(format!("cell {m:?}: {} != {k}*c_free + {h}*c_occ", exact.logodds(m)));
            }
            let (num, den) = (*expected.numer() as f64, *expected.denom() as f64);
            if (float.logodds(m) - num / den).abs() > 1e-9 {
                return Err(format!("cell {m:?}: f64 map drifted to {}", float.logodds(m)));
            }
        }
    }

    // reward telescoping over every baseline episode
    for log in &baseline.logs {
        let sum: f64 = log.result.rewards.iter().map(|r| r.cr).sum();
        let gain = log.result.final_coverage - log.result.initial_coverage;
        let last = log.steps.last().map_or(log.result.initial_covered, |s| s.covered);
        let count_gain = last as i64 - log.result.initial_covered as i64;
        if (sum - gain).abs() > 1e-9 || count_gain != log.result.final_covered as i64 - log.result.initial_covered as i64 {
            return Err(format!("rewards do not telescope in {}", describe(log)));
        }
    }

    let ramp: Vec<f64> = (1..=50).map(|t| 2.0 * t as f64).collect();
    if auc(&ramp, 50) != 51.0 {
        return Err(format!("ramp AUC {}", auc(&ramp, 50)));
    }
    let gt = [Cell::new(0, 0), Cell::new(0, 2)];
    let cd: f64 = chamfer(&gt, &[Cell::new(0, 0)], 0.1, 99.0);
    if (cd - 0.1).abs() > 1e-9 || chamfer(&gt, &gt, 0.1, 99.0) != 0.0 {
        return Err(format!("chamfer fixture gave {cd}"));
    }
    Ok(format!("{} cells exact after 24 scans, {} episodes telescope, ramp AUC 51.0, chamfer 0.1 m", counts.len(), baseline.logs.len()))
}

fn describe(log: &EpisodeLog) -> String {
    format!("{}/{}/{}/ep{}", log.header.policy, log.header.noise, log.header.scene, log.header.episode)
}

fn monotonicity_suite(baseline: &RunSummary) -> Verdict {
    for log in &baseline.logs {
        let r = &log.result;
        if r.coverage_curve.windows(2).any(|w| w[1] < w[0]) {
            return Err(format!("coverage decreased in {}", describe(log)));
        }
        if log.steps.windows(2).any(|w| w[1].chamfer > w[0].chamfer) {
            return Err(format!("Chamfer increased in {}", describe(log)));
        }
        // exact in cell counts: sum over the padded budget <= budget * final
        let budget = log.header.config.keyframe_budget;
        let counts: Vec<usize> = log.steps.iter().map(|s| s.covered).collect();
        let padded: usize = (0..budget).map(|t| counts.get(t).copied().unwrap_or(r.final_covered)).sum();
        if padded > budget * r.final_covered || auc(&r.coverage_curve, budget) > r.final_coverage + 1e-9 {
            return Err(format!("AUC above final coverage in {}", describe(log)));
        }
    }
    Ok(format!("{} noiseless episodes", baseline.logs.len()))
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).expect("readable dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(dir).expect("under dir").to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism(scratch: &Path) -> Verdict {
    let base = "gen_count = 3\ngen_rooms = 6\ngen_extent = 100\npolicies = [\"fbe\", \"vacuum\", \"random\"]\n\
                episodes = 3\nseed = 11\nnoise = [\"0/0\", \"0.1*/0.05\", \"0.2/0\"]\n";
    let runs: Vec<(PathBuf, RunSummary)> = [1, 4, 0]
        .iter()
        .map(|threads| {
            let out = scratch.join(format!("det_{threads}"));
            let summary = run_config(&format!("{base}threads = {threads}\n"), &out);
            (out, summary)
        })
        .collect();
    let reference = files_under(&runs[0].0);
    for (out, _) in &runs[1..] {
        if files_under(out) != reference {
            return Err("runs wrote different file sets".into());
        }
        for rel in &reference {
            if std::fs::read(runs[0].0.join(rel)).ok() != std::fs::read(out.join(rel)).ok() {
                return Err(format!("{} differs between thread counts", rel.display()));
            }
        }
    }

    // replay recorded FBE actions through a TCP agent
    let config = RunConfig::from_toml(base).expect("valid");
    let SceneSource::Generated { count, base: floorplan } = config.scene_source() else {
        unreachable!("generated scenes")
    };
    let scenes = prepare_scenes(generate_scenes(&floorplan, count).map_err(|e| e.to_string())?, 128).map_err(|e| e.to_string())?;
    let recorded: Vec<&EpisodeLog> = runs[0].1.logs.iter().filter(|l| l.header.policy == "fbe").collect();
    for log in &recorded {
        let scene = scenes.iter().find(|s| s.scene.name() == log.header.scene).ok_or("scene missing")?;
        let actions: Vec<AgentReply> = log.steps.iter().map(|s| AgentReply::from(s.action)).collect();
        let listener = TcpListener::bind("127.0.0.1:0").map_err(|e| e.to_string())?;
        let addr = listener.local_addr().map_err(|e| e.to_string())?.to_string();
        let agent = thread::spawn(move || {
            let (stream, _) = listener.accept().expect("connection");
            let reader = BufReader::new(stream.try_clone().expect("clone"));
            let mut next = actions.into_iter();
            let _ = serve_agent(reader, stream, |_| next.next().unwrap_or(AgentReply { dx: 0.0, dy: 0.0, dtheta: 0.0 }));
        });
        let conn = BridgeConnection::connect(&BridgeEndpoint::Tcp(addr), DEFAULT_BRIDGE_TIMEOUT).map_err(|e| e.to_string())?;
        let mut policy = BridgePolicy::new(conn);
        let run = run_episode(&scene.scene, &scene.surface, &mut policy, log.header.config.clone(), log.header.start).map_err(|e| e.to_string())?;
        drop(policy);
        let _ = agent.join();
        if run.result != log.result || run.steps != log.steps {
            return Err(format!("bridge replay of {} diverged", describe(log)));
        }
    }
    let _ = std::io::stdout().flush();
    Ok(format!("{} files identical across 1, 4 and all threads; {} FBE episodes replayed over TCP", reference.len(), recorded.len()))
}

fn performance() -> Verdict {
    let scene = generate_floorplan(&FloorplanConfig { room_count: 6, target_extent: 100, seed: 1, ..FloorplanConfig::default() }).map_err(|e| e.to_string())?;
    let fixture = bench_fixture(scene, 128, 10).map_err(|e| e.to_string())?;
    let report = bench(&fixture, 300);
    let full = report.stage("full_step").ok_or("no full_step stage")?;
    let detail = format!("full step median {:.0} us, p95 {:.0} us on a 128x128 map with 4x256 rays", full.median_us, full.p95_us);
    if full.median_us <= 10_000.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

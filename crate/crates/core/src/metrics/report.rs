//! Grouped means over episode logs, emitted as CSV and JSON.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::auc;
use crate::episode::EpisodeLog;

pub const CSV_HEADER: &str = "group,policy,scenes,episodes,cov_pct,auc_pct,cd_m,keyframes,traj_m";

/// A log that could not be used.
#[derive(Clone, Debug, PartialEq)]
pub struct LogIssue {
    pub path: PathBuf,
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for LogIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}: {}", self.path.display(), self.line, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// `<tag>/<noise>/<scene>` for per-scene rows, `<tag>/<noise>/overall`
    /// for the episode-weighted summary.
    pub group: String,
    pub policy: String,
    pub scenes: usize,
    pub episodes: usize,
    pub cov_pct: f64,
    pub auc_pct: f64,
    pub cd_m: f64,
    pub keyframes: f64,
    pub traj_m: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4}",
                r.group, r.policy, r.scenes, r.episodes, r.cov_pct, r.auc_pct, r.cd_m, r.keyframes, r.traj_m
            )
            .expect("writing to a string");
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Overall row of a (policy, tag, noise) group.
    pub fn overall(&self, policy: &str, tag: &str, noise: &str) -> Option<&ReportRow> {
        let group = format!("{tag}/{noise}/overall");
        self.rows.iter().find(|r| r.policy == policy && r.group == group)
    }
}

/// Per-episode metric values.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EpisodeMetrics {
    pub coverage: f64,
    pub auc: f64,
    pub chamfer: f64,
    pub keyframes: f64,
    pub trajectory: f64,
}

impl EpisodeMetrics {
    pub fn of(log: &EpisodeLog) -> Self {
        let r = &log.result;
        Self {
            coverage: r.final_coverage,
            auc: auc(&r.coverage_curve, log.header.config.keyframe_budget),
            chamfer: r.final_chamfer,
            keyframes: r.keyframes as f64,
            trajectory: r.trajectory_length,
        }
    }
}

fn mean_row(group: String, policy: &str, scenes: usize, items: &[EpisodeMetrics]) -> ReportRow {
    let n = items.len() as f64;
    let mean = |f: fn(&EpisodeMetrics) -> f64| items.iter().map(f).sum::<f64>() / n;
    ReportRow {
        group,
        policy: policy.to_string(),
        scenes,
        episodes: items.len(),
        cov_pct: mean(|m| m.coverage),
        auc_pct: mean(|m| m.auc),
        cd_m: mean(|m| m.chamfer),
        keyframes: mean(|m| m.keyframes),
        traj_m: mean(|m| m.trajectory),
    }
}

/// Groups episodes by (policy, tag, noise) and emits one row per scene plus
/// an overall row per group. Input order does not matter: logs are sorted
/// canonically first.
pub fn aggregate(logs: &[EpisodeLog]) -> Report {
    let mut sorted: Vec<&EpisodeLog> = logs.iter().collect();
    sorted.sort_by(|a, b| {
        let key = |l: &EpisodeLog| {
            (l.header.policy.clone(), l.header.tag.clone(), l.header.noise.clone(), l.header.scene.clone(), l.header.episode)
        };
        key(a).cmp(&key(b))
    });
    type GroupKey = (String, String, String);
    let mut groups: BTreeMap<GroupKey, BTreeMap<String, Vec<EpisodeMetrics>>> = BTreeMap::new();
    for log in sorted {
        let h = &log.header;
        groups
            .entry((h.policy.clone(), h.tag.clone(), h.noise.clone()))
            .or_default()
            .entry(h.scene.clone())
            .or_default()
            .push(EpisodeMetrics::of(log));
    }
    let mut rows = Vec::new();
    for ((policy, tag, noise), scenes) in groups {
        for (scene, items) in &scenes {
            rows.push(mean_row(format!("{tag}/{noise}/{scene}"), &policy, 1, items));
        }
        let all: Vec<EpisodeMetrics> = scenes.values().flatten().copied().collect();
        rows.push(mean_row(format!("{tag}/{noise}/overall"), &policy, scenes.len(), &all));
    }
    Report { rows }
}

/// Reads every `*.jsonl` file below `dir` in sorted path order. Unreadable or
/// malformed logs are returned as issues and left out.
pub fn load_logs(dir: impl AsRef<Path>) -> std::io::Result<(Vec<EpisodeLog>, Vec<LogIssue>)> {
    let mut files = Vec::new();
    collect_jsonl(dir.as_ref(), &mut files)?;
    files.sort();
    let mut logs = Vec::new();
    let mut issues = Vec::new();
    for path in files {
        match std::fs::read_to_string(&path) {
            Ok(text) => match EpisodeLog::parse(&text) {
                Ok(log) => logs.push(log),
                Err((line, message)) => issues.push(LogIssue { path, line, message }),
            },
            Err(e) => issues.push(LogIssue { path, line: 0, message: e.to_string() }),
        }
    }
    Ok((logs, issues))
}

fn collect_jsonl(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_jsonl(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "jsonl") {
            out.push(path);
        }
    }
    Ok(())
}

//! JSON-lines episode logs: a header, one record per keyframe, the result.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EpisodeConfig, EpisodeResult, EpisodeRun, StepRecord};
use crate::Pose;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeHeader {
    pub scene: String,
    pub policy: String,
    /// Dataset tag, e.g. the scene directory name.
    pub tag: String,
    pub noise: String,
    pub episode: usize,
    pub master_seed: u64,
    pub start: Pose,
    pub config: EpisodeConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogRecord {
    Header(EpisodeHeader),
    Step(StepRecord),
    Result(EpisodeResult),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeLog {
    pub header: EpisodeHeader,
    pub steps: Vec<StepRecord>,
    pub result: EpisodeResult,
}

impl EpisodeLog {
    pub fn new(header: EpisodeHeader, run: EpisodeRun) -> Self {
        Self {
            header,
            steps: run.steps,
            result: run.result,
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |r: LogRecord| {
            out.push_str(&serde_json::to_string(&r).expect("log records serialize"));
            out.push('\n');
        };
        push(LogRecord::Header(self.header.clone()));
        for s in &self.steps {
            push(LogRecord::Step(s.clone()));
        }
        push(LogRecord::Result(self.result.clone()));
        out
    }

    /// Parses a log; errors carry the 1-based line number.
    pub fn parse(text: &str) -> Result<Self, (usize, String)> {
        let mut header = None;
        let mut steps = Vec::new();
        let mut result = None;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            if result.is_some() {
                return Err((n, "content after the result record".into()));
            }
            let record: LogRecord = serde_json::from_str(line).map_err(|e| (n, e.to_string()))?;
            match record {
                LogRecord::Header(h) if header.is_none() => header = Some(h),
                LogRecord::Header(_) => return Err((n, "duplicate header".into())),
                _ if header.is_none() => return Err((n, "missing header".into())),
                LogRecord::Step(s) => {
                    if s.step != steps.len() + 1 {
                        return Err((n, format!("step {} out of order", s.step)));
                    }
                    steps.push(s);
                }
                LogRecord::Result(r) => result = Some(r),
            }
        }
        let last = text.lines().count();
        let header = header.ok_or((last.max(1), "missing header".to_string()))?;
        let result = result.ok_or((last.max(1), "missing result record".to_string()))?;
        Ok(Self { header, steps, result })
    }
}

pub fn write_episode_log(path: impl AsRef<Path>, log: &EpisodeLog) -> io::Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, log.to_jsonl())
}

pub fn read_episode_log(path: impl AsRef<Path>) -> io::Result<Result<EpisodeLog, (usize, String)>> {
    Ok(EpisodeLog::parse(&fs::read_to_string(path)?))
}

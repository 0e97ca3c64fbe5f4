//! Offline rendering of an episode log: one PGM per keyframe plus a
//! composite with the whole trajectory.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::episode::{Episode, EpisodeLog};
use crate::geometry::Cell;
use crate::mapping::{GrayImage, SemanticView, TRAJECTORY_GRAY};
use crate::scene::{ground_truth_surface, SceneGrid};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("log is for scene {log:?} but scene {given:?} was given")]
    SceneMismatch { log: String, given: String },
    #[error("replay diverged from the log at keyframe {0}")]
    Diverged(usize),
    #[error("replay failed: {0}")]
    Replay(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn draw(image: &mut GrayImage, cells: &[Cell]) {
    for c in cells {
        image.set(c.x, c.y, TRAJECTORY_GRAY);
    }
}

/// Replays the logged actions and writes `frame_NNN.pgm` for every keyframe
/// and `composite.pgm`. Returns the written paths in order.
pub fn render_log(log: &EpisodeLog, scene: &SceneGrid, out_dir: &Path) -> Result<Vec<PathBuf>, RenderError> {
    if log.header.scene != scene.name() {
        return Err(RenderError::SceneMismatch {
            log: log.header.scene.clone(),
            given: scene.name().to_string(),
        });
    }
    std::fs::create_dir_all(out_dir)?;
    let gt = ground_truth_surface(scene);
    let mut ep = Episode::new(scene, &gt, log.header.config.clone(), log.header.start)
        .map_err(|e| RenderError::Replay(e.to_string()))?;
    let mut trail = vec![ep.map().world_to_map(log.header.start.x, log.header.start.y)];
    let mut written = Vec::new();
    for step in &log.steps {
        if ep.is_done() {
            return Err(RenderError::Diverged(step.step));
        }
        let replayed = ep.step(step.action).map_err(|e| RenderError::Replay(e.to_string()))?;
        if replayed != step {
            return Err(RenderError::Diverged(step.step));
        }
        trail.extend(replayed.path.iter().skip(1).copied());
        let mut image = GrayImage::from_view(ep.view());
        draw(&mut image, &trail);
        let path = out_dir.join(format!("frame_{:03}.pgm", step.step));
        std::fs::write(&path, image.to_pgm())?;
        written.push(path);
    }
    let mut image = GrayImage::from_view(&SemanticView::from_map(ep.map()));
    draw(&mut image, &trail);
    let path = out_dir.join("composite.pgm");
    std::fs::write(&path, image.to_pgm())?;
    written.push(path);
    Ok(written)
}

//! Deterministic stand-in for the robot and its environment: a floor with
//! textured pillars, a pinhole camera, an ultrasonic range ray, scripted
//! dataset capture and closed-loop autonomous runs.

mod closed_loop;
mod record;
mod render;
mod scene;
mod texture;

pub use closed_loop::{
    perturbed_start, run_closed_loop, ClosedLoopConfig, ClosedLoopOutcome, ConstantClassifier, EvadeEpisode, Side, EPISODE_GAP, ObstacleClassifier, Termination,
    TrajectoryRecord,
};
pub use record::{
    record_dataset, record_dataset_in, record_with_pilot, CircuitPilot, Pilot, RecordingScript, StraightPilot, COLLISION_RADIUS,
};
pub use render::{range_sensor, render, CameraModel, RANGE_MAX_CM, RANGE_MIN_CM};
pub use scene::{Arena, Obstacle, Scene};
pub use texture::Texture;

pub use crate::nav::RobotPose;

use thiserror::Error;

use crate::imgcore::ImageError;
use crate::pipeline::PipelineError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("pose ({x:.3}, {y:.3}) is outside the arena")]
    OutOfBounds { x: f64, y: f64 },
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("invalid recording script: {0}")]
    InvalidScript(String),
    #[error("robot collided with an obstacle")]
    Collision,
    #[error("frame {frame}: {source}")]
    Frame { frame: usize, source: Box<SimError> },
    #[error("recording {recording}: {source}")]
    Recording { recording: usize, source: Box<SimError> },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("scene file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SimError {
    pub(crate) fn at(frame: usize, source: SimError) -> Self {
        SimError::Frame {
            frame,
            source: Box::new(source),
        }
    }
}

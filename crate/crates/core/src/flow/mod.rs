//! Sample-point layout and sparse pyramidal Lucas-Kanade tracking.

mod distribution;
mod lk;

pub use distribution::{make_ring_distribution, project_distribution, PointDistribution, RingSpec};
pub use lk::{lk_track, lk_track_pyramids, FlowField, LkParams, Pyramid, TrackStatus};

use thiserror::Error;

use crate::imgcore::ImageError;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("invalid ring distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid LK parameters: {0}")]
    InvalidParams(String),
    #[error("frame sizes differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("distribution table line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

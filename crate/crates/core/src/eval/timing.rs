use std::time::Instant;

use serde::{Deserialize, Serialize};

/// Mean wall-clock milliseconds of `op` over `reps` calls, after one
/// untimed warmup call. `reps` below 1 is treated as 1.
pub fn time_stage<R>(reps: usize, mut op: impl FnMut() -> R) -> f64 {
    std::hint::black_box(op());
    let reps = reps.max(1);
    let start = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(op());
    }
    start.elapsed().as_secs_f64() * 1000.0 / reps as f64
}

/// Mean per-frame stage costs in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    /// Flow estimation; absent when evaluating stored features.
    pub t_op: Option<f64>,
    pub t_pca: f64,
    pub t_svm: f64,
}

impl StageTimings {
    pub fn total_ms(&self) -> f64 {
        self.t_op.unwrap_or(0.0) + self.t_pca + self.t_svm
    }

    pub fn fps(&self) -> f64 {
        fps(&[self.t_op.unwrap_or(0.0), self.t_pca, self.t_svm])
    }
}

/// Frames per second sustainable by stages costing `stage_ms` each.
pub fn fps(stage_ms: &[f64]) -> f64 {
    1000.0 / stage_ms.iter().sum::<f64>()
}

/// Rate when capture and processing run back to back.
pub fn capture_adjusted_fps(processing_fps: f64, capture_fps: f64) -> f64 {
    1.0 / (1.0 / processing_fps + 1.0 / capture_fps)
}

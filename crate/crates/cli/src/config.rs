use std::path::Path;

use flownav::pipeline::PipelineConfig;
use flownav::sim::{CameraModel, ClosedLoopConfig, RecordingScript};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Optional `--config` file. Every section may be omitted; flags given on the
/// command line win over values read here.
///
/// `camera` is used when recording and benchmarking, `closed_loop` (which has
/// its own camera) when simulating.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CliConfig {
    pub pipeline: PipelineConfig,
    pub script: RecordingScript,
    pub camera: CameraModel,
    pub closed_loop: ClosedLoopConfig,
}

impl CliConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::from(e).context(path.display()))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| CliError::data(e.to_string()).context(path.display()))?;
        // re-check the nested invariants that serde alone cannot see
        PipelineConfig::from_json(&serde_json::to_string(&cfg.pipeline)?)
            .map_err(|e| CliError::from(e).context(path.display()))?;
        cfg.script.validate().map_err(|e| CliError::from(e).context(path.display()))?;
        cfg.camera.validate().map_err(|e| CliError::from(e).context(path.display()))?;
        Ok(cfg)
    }
}

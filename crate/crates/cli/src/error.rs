use std::fmt;

use flownav::eval::EvalError;
use flownav::features::FeatureError;
use flownav::flow::FlowError;
use flownav::imgcore::ImageError;
use flownav::learn::LearnError;
use flownav::pipeline::PipelineError;
use flownav::reduce::PcaError;
use flownav::sim::SimError;

/// What went wrong, as far as the exit status is concerned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Usage,
    Data,
    Numeric,
    Runtime,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Usage => 2,
            Kind::Data => 3,
            Kind::Numeric => 4,
            Kind::Runtime => 1,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Usage,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Data,
            message: message.into(),
        }
    }

    /// Prefixes the message with the file or step it concerns.
    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn make(kind: Kind, e: impl fmt::Display) -> CliError {
    CliError {
        kind,
        message: e.to_string(),
    }
}

fn learn_kind(e: &LearnError) -> Kind {
    match e {
        LearnError::NotConverged(_) | LearnError::NonFinite | LearnError::NoSupportVectors => Kind::Numeric,
        LearnError::InvalidParam(_) => Kind::Usage,
        _ => Kind::Data,
    }
}

fn pca_kind(e: &PcaError) -> Kind {
    match e {
        PcaError::NonFinite => Kind::Numeric,
        PcaError::InvalidRatio(_) => Kind::Usage,
        _ => Kind::Data,
    }
}

fn flow_kind(e: &FlowError) -> Kind {
    match e {
        FlowError::InvalidDistribution(_) | FlowError::InvalidParams(_) => Kind::Usage,
        _ => Kind::Data,
    }
}

fn pipeline_kind(e: &PipelineError) -> Kind {
    match e {
        PipelineError::Flow(f) => flow_kind(f),
        PipelineError::Pca(p) => pca_kind(p),
        PipelineError::Learn(l) => learn_kind(l),
        _ => Kind::Data,
    }
}

fn eval_kind(e: &EvalError) -> Kind {
    match e {
        EvalError::InvalidK { .. } => Kind::Usage,
        EvalError::Undefined(_) => Kind::Numeric,
        EvalError::Fold { source, .. } => pipeline_kind(source),
        _ => Kind::Data,
    }
}

fn sim_kind(e: &SimError) -> Kind {
    match e {
        SimError::InvalidCamera(_) | SimError::InvalidScript(_) => Kind::Usage,
        SimError::OutOfBounds { .. } | SimError::Collision => Kind::Runtime,
        SimError::Frame { source, .. } | SimError::Recording { source, .. } => sim_kind(source),
        SimError::Pipeline(p) => pipeline_kind(p),
        _ => Kind::Data,
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        make(pipeline_kind(&e), e)
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        make(eval_kind(&e), e)
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        make(sim_kind(&e), e)
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        make(flow_kind(&e), e)
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        make(Kind::Data, e)
    }
}

impl From<ImageError> for CliError {
    fn from(e: ImageError) -> Self {
        make(Kind::Data, e)
    }
}

impl From<LearnError> for CliError {
    fn from(e: LearnError) -> Self {
        make(learn_kind(&e), e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        make(Kind::Data, e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        make(Kind::Data, e)
    }
}

//! Frame-pair feature extraction and the trained classify path
//! (normalize, project, predict) stored as a single JSON model file.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{
    flow_to_feature, label_from_range, Dataset, normalize_magnitudes, FeatureError, FeatureVector, Label,
    L_INF_CM, L_SUP_CM,
};
use crate::flow::{lk_track_pyramids, project_distribution, FlowError, FlowField, LkParams, Pyramid, RingSpec};
use crate::imgcore::{gaussian3x3, laplacian, GrayImage};
use crate::learn::{
    balanced_weights, perceptron_train, svm_train, svr_train, ClassWeights, LearnError, LinearModel,
    SvmModel, SvmParams, SvrModel, SvrParams,
};
use crate::reduce::{pca_fit, PcaError, PcaModel};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Pca(#[from] PcaError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error("regression targets need a distance for every sample")]
    MissingDistance,
    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How frames become flow fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtractionConfig {
    pub distribution: RingSpec,
    /// Fraction of `min(width, height)` covered by the outer ring.
    pub occupancy: f64,
    pub lk: LkParams<f64>,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            distribution: RingSpec::default(),
            occupancy: 0.8,
            lk: LkParams::default(),
        }
    }
}

/// Learner choice plus its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LearnerConfig {
    Svm {
        #[serde(default)]
        params: SvmParams<f64>,
        #[serde(default = "yes")]
        balanced: bool,
    },
    Perceptron {
        #[serde(default = "hundred")]
        max_epochs: usize,
        #[serde(default = "yes")]
        balanced: bool,
    },
    Svr {
        #[serde(default)]
        params: SvrParams<f64>,
    },
}

fn yes() -> bool {
    true
}

fn hundred() -> usize {
    100
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig::Svm {
            params: SvmParams::default(),
            balanced: true,
        }
    }
}

impl LearnerConfig {
    pub fn perceptron() -> Self {
        LearnerConfig::Perceptron {
            max_epochs: 100,
            balanced: true,
        }
    }

    pub fn svr() -> Self {
        LearnerConfig::Svr {
            params: SvrParams::default(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LearnerConfig::Svm { .. } => "svm",
            LearnerConfig::Perceptron { .. } => "perceptron",
            LearnerConfig::Svr { .. } => "svr",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoldStrategy {
    Contiguous,
    /// One fold per recording id.
    Grouped,
    Shuffled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrossvalConfig {
    pub k: usize,
    pub strategy: FoldStrategy,
}

impl Default for CrossvalConfig {
    fn default() -> Self {
        Self {
            k: 8,
            strategy: FoldStrategy::Grouped,
        }
    }
}

/// Everything needed to go from frames to a trained model and its evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub extraction: ExtractionConfig,
    /// Min-max rescale flow norms per vector before projection.
    pub normalize: bool,
    pub pca_retained: f64,
    pub learner: LearnerConfig,
    pub l_inf: f64,
    pub l_sup: f64,
    pub crossval: CrossvalConfig,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            extraction: ExtractionConfig::default(),
            normalize: true,
            pca_retained: 0.9,
            learner: LearnerConfig::default(),
            l_inf: L_INF_CM,
            l_sup: L_SUP_CM,
            crossval: CrossvalConfig::default(),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.extraction.lk.validate()?;
        cfg.extraction.distribution.build()?;
        Ok(cfg)
    }
}

/// Preprocesses frames and tracks the sample points between them.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    points: Vec<[f64; 2]>,
    lk: LkParams<f64>,
    dims: (usize, usize),
}

impl FeatureExtractor {
    pub fn new(cfg: &ExtractionConfig, width: usize, height: usize) -> Result<Self, PipelineError> {
        cfg.lk.validate()?;
        let dist = cfg.distribution.build()?;
        let points = project_distribution(&dist, width, height, cfg.occupancy)?;
        Ok(Self {
            points,
            lk: cfg.lk,
            dims: (width, height),
        })
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    /// Gaussian smoothing, Laplacian edge enhancement, then the LK pyramid.
    pub fn prepare(&self, frame: &GrayImage<f64>) -> Pyramid<f64> {
        Pyramid::new(&laplacian(&gaussian3x3(frame)), self.lk.levels)
    }

    pub fn flow(&self, prev: &Pyramid<f64>, next: &Pyramid<f64>) -> Result<FlowField<f64>, PipelineError> {
        Ok(lk_track_pyramids(prev, next, &self.points, &self.lk)?)
    }

    pub fn flow_frames(
        &self,
        prev: &GrayImage<f64>,
        next: &GrayImage<f64>,
    ) -> Result<FlowField<f64>, PipelineError> {
        self.flow(&self.prepare(prev), &self.prepare(next))
    }
}

/// The learner at the end of the classify path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Classifier {
    Svm {
        model: SvmModel<f64>,
    },
    Perceptron {
        model: LinearModel<f64>,
    },
    /// Regressed distance converted to a label with the band `[l_inf, l_sup]`.
    Svr {
        model: SvrModel<f64>,
        l_inf: f64,
        l_sup: f64,
    },
}

impl Classifier {
    pub fn predict(&self, z: &[f64]) -> Result<Label, LearnError> {
        match self {
            Classifier::Svm { model } => model.predict(z),
            Classifier::Perceptron { model } => model.predict(z),
            Classifier::Svr { model, l_inf, l_sup } => {
                Ok(label_from_range(model.predict(z)?, *l_inf, *l_sup))
            }
        }
    }
}

/// A model file: the configuration it was trained with, PCA and learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub config: PipelineConfig,
    pub pca: PcaModel<f64>,
    #[serde(flatten)]
    pub classifier: Classifier,
}

impl TrainedModel {
    /// Fits PCA on `features` and trains the configured learner on the
    /// projections. `distances` is only read by the regressor.
    pub fn fit(
        features: &[&FeatureVector<f64>],
        labels: &[Label],
        distances: &[Option<f64>],
        cfg: &PipelineConfig,
    ) -> Result<Self, PipelineError> {
        let prepared: Vec<Vec<f64>> = features
            .iter()
            .map(|f| prepare_vector(f, cfg.normalize))
            .collect();
        let pca = pca_fit(&prepared, cfg.pca_retained)?;
        let z = prepared
            .iter()
            .map(|x| pca.project(x))
            .collect::<Result<Vec<_>, _>>()?;
        let weights = |balanced: bool| -> Result<ClassWeights<f64>, LearnError> {
            if balanced {
                balanced_weights(labels)
            } else {
                Ok(ClassWeights::uniform())
            }
        };
        let classifier = match cfg.learner {
            LearnerConfig::Svm { params, balanced } => Classifier::Svm {
                model: svm_train(&z, labels, &params, &weights(balanced)?)?,
            },
            LearnerConfig::Perceptron {
                max_epochs,
                balanced,
            } => Classifier::Perceptron {
                model: perceptron_train(&z, labels, max_epochs, &weights(balanced)?)?,
            },
            LearnerConfig::Svr { params } => {
                let targets = distances
                    .iter()
                    .map(|d| d.ok_or(PipelineError::MissingDistance))
                    .collect::<Result<Vec<_>, _>>()?;
                if targets.len() != z.len() {
                    return Err(PipelineError::MissingDistance);
                }
                Classifier::Svr {
                    model: svr_train(&z, &targets, &params)?,
                    l_inf: cfg.l_inf,
                    l_sup: cfg.l_sup,
                }
            }
        };
        Ok(Self {
            config: *cfg,
            pca,
            classifier,
        })
    }

    pub fn kind(&self) -> &'static str {
        match self.classifier {
            Classifier::Svm { .. } => "svm",
            Classifier::Perceptron { .. } => "perceptron",
            Classifier::Svr { .. } => "svr",
        }
    }

    /// Normalization (if enabled) followed by the PCA projection.
    pub fn transform(&self, fv: &FeatureVector<f64>) -> Result<Vec<f64>, PipelineError> {
        Ok(self.pca.project(&prepare_vector(fv, self.config.normalize))?)
    }

    pub fn classify_projected(&self, z: &[f64]) -> Result<Label, PipelineError> {
        Ok(self.classifier.predict(z)?)
    }

    pub fn classify(&self, fv: &FeatureVector<f64>) -> Result<Label, PipelineError> {
        self.classify_projected(&self.transform(fv)?)
    }

    pub fn classify_flow(&self, flow: &FlowField<f64>) -> Result<Label, PipelineError> {
        self.classify(&flow_to_feature(flow))
    }

    pub fn to_json(&self) -> Result<String, PipelineError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        Ok(serde_json::from_str(text)?)
    }

    /// [`TrainedModel::fit`] on every sample of `data`.
    pub fn fit_dataset(data: &Dataset, cfg: &PipelineConfig) -> Result<Self, PipelineError> {
        let features: Vec<&FeatureVector<f64>> = data.samples.iter().map(|s| &s.features).collect();
        let distances: Vec<Option<f64>> = data.samples.iter().map(|s| s.distance_cm).collect();
        Self::fit(&features, &data.labels(), &distances, cfg)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PipelineError> {
        Ok(std::fs::write(path, self.to_json()?)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn prepare_vector(fv: &FeatureVector<f64>, normalize: bool) -> Vec<f64> {
    if normalize {
        normalize_magnitudes(fv).into_values()
    } else {
        fv.values().to_vec()
    }
}

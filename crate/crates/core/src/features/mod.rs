//! Flow-to-feature conversion, magnitude normalization and range labels.

mod dataset;

pub use dataset::{Dataset, RecordingSpan};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{FlowField, TrackStatus};
use crate::scalar::Scalar;

/// Default ultrasonic label band (cm).
pub const L_INF_CM: f64 = 10.0;
pub const L_SUP_CM: f64 = 70.0;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("label must be -1 or +1, got {0}")]
    InvalidLabel(i64),
    #[error("feature vector length {0} is odd")]
    OddLength(usize),
    #[error("dataset row {row}: {msg}")]
    Row { row: usize, msg: String },
    #[error("dataset is empty")]
    Empty,
    #[error("manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Binary class: obstacle present (+1) or absent (-1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn from_sign<T: Scalar>(v: T) -> Self {
        // sign(0) -> +1
        if v >= T::zero() {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }

    pub fn value<T: Scalar>(self) -> T {
        match self {
            Label::Negative => -T::one(),
            Label::Positive => T::one(),
        }
    }
}

impl TryFrom<i8> for Label {
    type Error = FeatureError;

    fn try_from(v: i8) -> Result<Self, Self::Error> {
        match v {
            -1 => Ok(Label::Negative),
            1 => Ok(Label::Positive),
            other => Err(FeatureError::InvalidLabel(i64::from(other))),
        }
    }
}

impl From<Label> for i8 {
    fn from(l: Label) -> i8 {
        l.as_i8()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

/// `(norm_1, phase_1, ..., norm_P, phase_P)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector<T = f64> {
    values: Vec<T>,
}

impl<T: Scalar> FeatureVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self, FeatureError> {
        if values.len() % 2 != 0 {
            return Err(FeatureError::OddLength(values.len()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point_count(&self) -> usize {
        self.values.len() / 2
    }

    pub fn norms(&self) -> impl Iterator<Item = T> + '_ {
        self.values.iter().step_by(2).copied()
    }

    pub fn phases(&self) -> impl Iterator<Item = T> + '_ {
        self.values.iter().skip(1).step_by(2).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample<T = f64> {
    pub features: FeatureVector<T>,
    pub distance_cm: Option<f64>,
    pub label: Label,
}

impl<T: Scalar> LabeledSample<T> {
    /// Label derived from the range reading with the default band.
    pub fn from_range(features: FeatureVector<T>, distance_cm: f64) -> Self {
        Self {
            features,
            distance_cm: Some(distance_cm),
            label: label_from_range(distance_cm, L_INF_CM, L_SUP_CM),
        }
    }
}

/// Phase wrapped into `[-pi, pi)`.
fn phase<T: Scalar>(du: T, dv: T) -> T {
    let a = dv.atan2(du);
    let pi = T::lit(std::f64::consts::PI);
    if a >= pi {
        a - pi - pi
    } else {
        a
    }
}

pub fn flow_to_feature<T: Scalar>(flow: &FlowField<T>) -> FeatureVector<T> {
    let mut values = Vec::with_capacity(2 * flow.len());
    for (d, s) in flow.displacements.iter().zip(&flow.status) {
        match s {
            TrackStatus::Tracked => {
                values.push(d[0].hypot(d[1]));
                values.push(phase(d[0], d[1]));
            }
            TrackStatus::Lost => {
                values.push(T::zero());
                values.push(T::zero());
            }
        }
    }
    FeatureVector { values }
}

/// Min-max rescales the norm entries of one vector into `[0, 1]`; phases pass
/// through. A vector whose norms are all equal maps every norm to 0.
pub fn normalize_magnitudes<T: Scalar>(fv: &FeatureVector<T>) -> FeatureVector<T> {
    let (lo, hi) = fv
        .norms()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    let range = hi - lo;
    let values = fv
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if i % 2 == 1 {
                v
            } else if range > T::zero() {
                ((v - lo) / range).min(T::one()).max(T::zero())
            } else {
                T::zero()
            }
        })
        .collect();
    FeatureVector { values }
}

/// +1 iff `l_inf <= m <= l_sup`.
pub fn label_from_range(m: f64, l_inf: f64, l_sup: f64) -> Label {
    if l_inf <= m && m <= l_sup {
        Label::Positive
    } else {
        Label::Negative
    }
}

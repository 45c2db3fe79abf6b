use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureVector, Label, LabeledSample};

/// Contiguous block of dataset rows captured in one recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordingSpan {
    pub id: u32,
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    rows: usize,
    recordings: Vec<RecordingSpan>,
}

/// Labeled samples plus the recording each one came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub samples: Vec<LabeledSample<f64>>,
    /// Parallel to `samples`.
    pub recording: Vec<u32>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn push(&mut self, sample: LabeledSample<f64>, recording: u32) {
        self.samples.push(sample);
        self.recording.push(recording);
    }

    pub fn extend(&mut self, other: Dataset) {
        self.samples.extend(other.samples);
        self.recording.extend(other.recording);
    }

    pub fn labels(&self) -> Vec<Label> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self
            .samples
            .iter()
            .filter(|s| s.label == Label::Positive)
            .count();
        (pos, self.samples.len() - pos)
    }

    pub fn feature_len(&self) -> Option<usize> {
        self.samples.first().map(|s| s.features.len())
    }

    /// Maximal runs of equal recording ids, in row order.
    pub fn spans(&self) -> Vec<RecordingSpan> {
        let mut spans: Vec<RecordingSpan> = Vec::new();
        for (i, &id) in self.recording.iter().enumerate() {
            match spans.last_mut() {
                Some(s) if s.id == id => s.len += 1,
                _ => spans.push(RecordingSpan {
                    id,
                    start: i,
                    len: 1,
                }),
            }
        }
        spans
    }

    pub fn column_names(points: usize) -> Vec<String> {
        let mut cols: Vec<String> = (0..points)
            .flat_map(|i| [format!("norm_{i}"), format!("phase_{i}")])
            .collect();
        cols.push("distance_cm".into());
        cols.push("label".into());
        cols
    }

    /// Header row, feature columns, `distance_cm` (empty when absent), `label`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), FeatureError> {
        let width = self.feature_len().ok_or(FeatureError::Empty)?;
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(Self::column_names(width / 2))?;
        for (row, s) in self.samples.iter().enumerate() {
            if s.features.len() != width {
                return Err(FeatureError::Row {
                    row,
                    msg: format!("expected {width} features, got {}", s.features.len()),
                });
            }
            let mut rec: Vec<String> = s.features.values().iter().map(|v| v.to_string()).collect();
            rec.push(s.distance_cm.map(|d| d.to_string()).unwrap_or_default());
            rec.push(s.label.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads rows written by [`Dataset::write_csv`]; every row gets recording 0
    /// until a manifest is applied.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, FeatureError> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        let ncols = header.len();
        if ncols < 4 || ncols % 2 != 0 {
            return Err(FeatureError::Row {
                row: 0,
                msg: format!("unexpected column count {ncols}"),
            });
        }
        let expected = Self::column_names((ncols - 2) / 2);
        if header.iter().ne(expected.iter().map(String::as_str)) {
            return Err(FeatureError::Row {
                row: 0,
                msg: "header does not match norm_i,phase_i,...,distance_cm,label".into(),
            });
        }
        let mut out = Dataset::default();
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let err = |msg: String| FeatureError::Row { row: row + 1, msg };
            let mut values = Vec::with_capacity(ncols - 2);
            for field in rec.iter().take(ncols - 2) {
                let v: f64 = field
                    .parse()
                    .map_err(|_| err(format!("bad number {field:?}")))?;
                if !v.is_finite() {
                    return Err(err(format!("non-finite feature {field:?}")));
                }
                values.push(v);
            }
            let dist = &rec[ncols - 2];
            let distance_cm = if dist.is_empty() {
                None
            } else {
                Some(
                    dist.parse::<f64>()
                        .map_err(|_| err(format!("bad distance {dist:?}")))?,
                )
            };
            let label_field = &rec[ncols - 1];
            let label = label_field
                .parse::<i8>()
                .map_err(|_| err(format!("bad label {label_field:?}")))
                .and_then(|v| Label::try_from(v).map_err(|e| err(e.to_string())))?;
            out.push(
                LabeledSample {
                    features: FeatureVector::new(values).map_err(|e| err(e.to_string()))?,
                    distance_cm,
                    label,
                },
                0,
            );
        }
        Ok(out)
    }

    pub fn manifest_json(&self) -> Result<String, FeatureError> {
        Ok(serde_json::to_string_pretty(&Manifest {
            rows: self.len(),
            recordings: self.spans(),
        })?)
    }

    /// Assigns recording ids from a manifest covering every row exactly once.
    pub fn apply_manifest(&mut self, json: &str) -> Result<(), FeatureError> {
        let m: Manifest = serde_json::from_str(json)?;
        if m.rows != self.len() {
            return Err(FeatureError::Manifest(format!(
                "manifest lists {} rows, dataset has {}",
                m.rows,
                self.len()
            )));
        }
        let mut ids = vec![None; self.len()];
        for span in &m.recordings {
            let end = span.start.checked_add(span.len).filter(|&e| e <= self.len());
            let Some(end) = end else {
                return Err(FeatureError::Manifest(format!(
                    "span {:?} exceeds {} rows",
                    span,
                    self.len()
                )));
            };
            for slot in &mut ids[span.start..end] {
                if slot.replace(span.id).is_some() {
                    return Err(FeatureError::Manifest("overlapping spans".into()));
                }
            }
        }
        self.recording = ids
            .into_iter()
            .enumerate()
            .map(|(i, id)| id.ok_or_else(|| FeatureError::Manifest(format!("row {i} not covered"))))
            .collect::<Result<_, _>>()?;
        Ok(())
    }
}

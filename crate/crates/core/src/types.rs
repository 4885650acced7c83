use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// One stream element `z = (x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub features: Vec<f64>,
    pub label: f64,
}

impl LabeledPoint {
    pub fn new(features: Vec<f64>, label: f64) -> Result<Self> {
        if !label.is_finite() {
            return Err(Error::NonFinite("label"));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("features"));
        }
        Ok(Self { features, label })
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }

    pub fn is_positive(&self) -> bool {
        self.label > 0.0
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::norm(&self.features)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskKind {
    /// Linear scorer `x -> w.x`, weights of length `d`.
    AucLinear,
    /// Mahalanobis matrix `W`, stored row-major with `d * d` weights.
    MetricMahalanobis,
}

impl TaskKind {
    pub fn weight_len(self, dim: usize) -> usize {
        match self {
            TaskKind::AucLinear => dim,
            TaskKind::MetricMahalanobis => dim * dim,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub weights: Vec<f64>,
    pub task: TaskKind,
}

impl Hypothesis {
    pub fn new(weights: Vec<f64>, task: TaskKind) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("weights"));
        }
        Ok(Self { weights, task })
    }

    pub fn zeros(task: TaskKind, dim: usize) -> Self {
        Self {
            weights: vec![0.0; task.weight_len(dim)],
            task,
        }
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::norm(&self.weights)
    }

    /// Input dimension implied by the weight length.
    pub fn input_dim(&self) -> usize {
        match self.task {
            TaskKind::AucLinear => self.weights.len(),
            TaskKind::MetricMahalanobis => (self.weights.len() as f64).sqrt().round() as usize,
        }
    }

    /// Linear score `w.x`; only meaningful for the AUC task.
    pub fn score(&self, x: &[f64]) -> f64 {
        crate::linalg::dot(&self.weights, x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub points: Vec<LabeledPoint>,
    pub dimension: usize,
    pub name: String,
}

impl Dataset {
    pub fn new(name: impl Into<String>, dimension: usize, points: Vec<LabeledPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if dimension == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        for p in &points {
            if p.dim() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    actual: p.dim(),
                });
            }
        }
        Ok(Self {
            points,
            dimension,
            name: name.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Rejects any label outside `{-1, +1}`.
    pub fn ensure_binary_labels(&self) -> Result<()> {
        match self.points.iter().find(|p| p.label != 1.0 && p.label != -1.0) {
            Some(p) => Err(Error::InvalidLabel(p.label)),
            None => Ok(()),
        }
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.points.iter().filter(|p| p.is_positive()).count();
        (pos, self.points.len() - pos)
    }

    /// Largest Euclidean feature norm.
    pub fn max_norm(&self) -> f64 {
        self.points.iter().map(LabeledPoint::norm).fold(0.0, f64::max)
    }
}

/// Shuffles the dataset into stream order with [`RandomSource::shuffle`].
pub fn make_stream(dataset: &Dataset, rng: &mut RandomSource) -> Result<Vec<LabeledPoint>> {
    if dataset.points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut stream = dataset.points.clone();
    rng.shuffle(&mut stream);
    Ok(stream)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> LabeledPoint {
        LabeledPoint::new(vec![x], y).unwrap()
    }

    #[test]
    fn rejects_non_finite() {
        assert!(LabeledPoint::new(vec![f64::NAN], 1.0).is_err());
        assert!(LabeledPoint::new(vec![1.0], f64::INFINITY).is_err());
        assert!(Hypothesis::new(vec![f64::NAN], TaskKind::AucLinear).is_err());
    }

    #[test]
    fn dataset_checks_dimension() {
        let err = Dataset::new("d", 2, vec![pt(1.0, 1.0)]).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, actual: 1 });
        assert_eq!(Dataset::new("d", 1, vec![]).unwrap_err(), Error::EmptyDataset);
    }

    #[test]
    fn binary_labels() {
        let ok = Dataset::new("d", 1, vec![pt(0.0, 1.0), pt(0.0, -1.0)]).unwrap();
        assert!(ok.ensure_binary_labels().is_ok());
        let bad = Dataset::new("d", 1, vec![pt(0.0, 2.0)]).unwrap();
        assert_eq!(bad.ensure_binary_labels(), Err(Error::InvalidLabel(2.0)));
    }

    #[test]
    fn single_point_stream() {
        let ds = Dataset::new("d", 1, vec![pt(3.0, 1.0)]).unwrap();
        let s = make_stream(&ds, &mut RandomSource::new(99)).unwrap();
        assert_eq!(s, ds.points);
    }

    #[test]
    fn stream_is_deterministic() {
        let ds = Dataset::new("d", 1, (0..20).map(|i| pt(i as f64, 1.0)).collect()).unwrap();
        let a = make_stream(&ds, &mut RandomSource::new(5)).unwrap();
        let b = make_stream(&ds, &mut RandomSource::new(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn three_point_stream_replays_fisher_yates() {
        let ds = Dataset::new("d", 1, (0..3).map(|i| pt(i as f64, 1.0)).collect()).unwrap();
        let stream = make_stream(&ds, &mut RandomSource::new(7)).unwrap();

        // Replay by hand: two draws, below(3) then below(2), against the raw words.
        let mut raw = RandomSource::new(7);
        let j2 = ((raw.next_word() as u128 * 3) >> 64) as usize;
        let j1 = ((raw.next_word() as u128 * 2) >> 64) as usize;
        let mut order = [0.0, 1.0, 2.0];
        order.swap(2, j2);
        order.swap(1, j1);
        let got: Vec<f64> = stream.iter().map(|p| p.features[0]).collect();
        assert_eq!(got, order.to_vec());
    }
}

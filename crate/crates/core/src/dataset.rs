use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    /// `+1.0` or `-1.0`.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }

    /// Accepts any finite value equal to ±1 (`1`, `+1`, `-1.0`, ...).
    pub fn from_value(v: f64) -> Option<Label> {
        if v == 1.0 {
            Some(Label::Positive)
        } else if v == -1.0 {
            Some(Label::Negative)
        } else {
            None
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Positive => "+1",
            Label::Negative => "-1",
        })
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .parse::<f64>()
            .ok()
            .and_then(Label::from_value)
            .ok_or_else(|| Error::invalid(format!("label must be +1 or -1, got `{s}`")))
    }
}

/// One labelled observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: Label,
}

impl Sample {
    pub fn new(x: Vec<f64>, y: Label) -> Self {
        Sample { x, y }
    }
}

impl AsRef<[f64]> for Sample {
    fn as_ref(&self) -> &[f64] {
        &self.x
    }
}

/// Labelled samples sharing one feature dimension. May hold a single class.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    dim: usize,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        let dim = samples.first().ok_or(Error::Empty("dataset"))?.x.len();
        Self::with_dim(samples, dim)
    }

    /// Like [`Dataset::new`] but allows an empty sample list of known dimension.
    pub fn with_dim(samples: Vec<Sample>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty("feature vector"));
        }
        for s in &samples {
            if s.x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.x.len(),
                });
            }
            if !s.x.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite("sample features"));
            }
        }
        Ok(Dataset { samples, dim })
    }

    pub fn from_parts(xs: Vec<Vec<f64>>, ys: Vec<Label>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch {
                expected: xs.len(),
                found: ys.len(),
            });
        }
        Self::new(xs.into_iter().zip(ys).map(|(x, y)| Sample { x, y }).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Sample> {
        self.samples
    }

    pub fn labels(&self) -> Vec<Label> {
        self.samples.iter().map(|s| s.y).collect()
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.iter().map(|s| s.x.as_slice())
    }

    /// `(positives, negatives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.samples.iter().filter(|s| s.y == Label::Positive).count();
        (pos, self.samples.len() - pos)
    }

    pub fn has_both_classes(&self) -> bool {
        let (pos, neg) = self.class_counts();
        pos > 0 && neg > 0
    }

    /// Samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            dim: self.dim,
        }
    }

    /// Per-feature `(min, max)` over all samples.
    pub fn feature_ranges(&self) -> Vec<(f64, f64)> {
        let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for s in &self.samples {
            for (r, &v) in ranges.iter_mut().zip(&s.x) {
                r.0 = r.0.min(v);
                r.1 = r.1.max(v);
            }
        }
        ranges
    }
}

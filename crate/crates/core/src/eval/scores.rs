use std::fmt;
use std::str::FromStr;

use super::confusion::ConfusionMatrix;
use crate::error::{Error, Result};

/// Per-class IoU, `None` where the class appears in neither prediction nor
/// ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassScores {
    values: Vec<Option<f64>>,
}

impl ClassScores {
    pub fn new(values: Vec<Option<f64>>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, class: usize) -> Option<f64> {
        self.values.get(class).copied().flatten()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn mean(&self, include_background: bool) -> Result<f64> {
        mean_iou(self, include_background)
    }

    /// Same scores with every defined value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.values.iter().map(|v| v.map(|x| x * factor)).collect())
    }
}

pub fn iou_per_class(matrix: &ConfusionMatrix) -> ClassScores {
    let values = (0..matrix.class_count())
        .map(|c| {
            let (inter, union) = matrix.intersection_union(c);
            (union > 0).then(|| inter as f64 / union as f64)
        })
        .collect();
    ClassScores::new(values)
}

/// Arithmetic mean of the defined scores, class 0 included only when
/// `include_background` is set.
pub fn mean_iou(scores: &ClassScores, include_background: bool) -> Result<f64> {
    let skip = usize::from(!include_background);
    let defined: Vec<f64> = scores.values.iter().skip(skip).flatten().copied().collect();
    if defined.is_empty() {
        return Err(Error::NoDefinedScores);
    }
    Ok(defined.iter().sum::<f64>() / defined.len() as f64)
}

/// How per-class scores are aggregated over a corpus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ScoringMode {
    /// One confusion matrix over every pixel of the corpus.
    #[default]
    Accumulated,
    /// Mean of per-image IoU over the images where the class is defined.
    PerImageMean,
}

impl ScoringMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoringMode::Accumulated => "accumulated",
            ScoringMode::PerImageMean => "per-image-mean",
        }
    }
}

impl fmt::Display for ScoringMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScoringMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "accumulated" => Ok(ScoringMode::Accumulated),
            "per-image-mean" => Ok(ScoringMode::PerImageMean),
            other => Err(format!(
                "unknown scoring mode `{other}` (expected accumulated or per-image-mean)"
            )),
        }
    }
}

//! Classification and error metrics over AQI categories, plus the ontology
//! quality scores.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::it2::Category;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("actual and predicted series differ in length ({actual} vs {predicted})")]
    LengthMismatch { actual: usize, predicted: usize },
    #[error("series must contain at least one pair")]
    EmptySeries,
    #[error("confusion counts are all zero")]
    EmptyConfusion,
    #[error("{0} must be at least one")]
    ZeroDenominator(&'static str),
}

/// Binary confusion counts; positive means unhealthy air.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

/// Metric values; a `None` marks an undefined ratio (zero denominator),
/// which is reported as such rather than coerced to a number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassificationMetrics {
    pub precision: Option<f64>,
    pub accuracy: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

/// Precision, accuracy, recall and F1 from confusion counts. Each metric is
/// a single division of exact integer tallies; F1 uses the integer identity
/// `2tp / (2tp + fp + fn)`.
pub fn classification_metrics(c: &ConfusionCounts) -> Result<ClassificationMetrics, EvalError> {
    if c.total() == 0 {
        return Err(EvalError::EmptyConfusion);
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            None
        } else {
            Some(num as f64 / den as f64)
        }
    };
    let precision = ratio(c.true_pos, c.true_pos + c.false_pos);
    let recall = ratio(c.true_pos, c.true_pos + c.false_neg);
    let accuracy = ratio(c.true_pos + c.true_neg, c.total());
    let f1 = match (precision, recall) {
        (Some(_), Some(_)) => ratio(2 * c.true_pos, 2 * c.true_pos + c.false_pos + c.false_neg),
        _ => None,
    };
    Ok(ClassificationMetrics { precision, accuracy, recall, f1 })
}

/// Paired actual/predicted category series encoded as ordinal codes 0..=5.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdinalSeries {
    actual: Vec<u8>,
    predicted: Vec<u8>,
}

impl OrdinalSeries {
    pub fn new(actual: &[Category], predicted: &[Category]) -> Result<OrdinalSeries, EvalError> {
        if actual.len() != predicted.len() {
            return Err(EvalError::LengthMismatch {
                actual: actual.len(),
                predicted: predicted.len(),
            });
        }
        Ok(OrdinalSeries {
            actual: actual.iter().map(|c| c.code() as u8).collect(),
            predicted: predicted.iter().map(|c| c.code() as u8).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.actual.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actual.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u8, u8)> + '_ {
        self.actual.iter().copied().zip(self.predicted.iter().copied())
    }

    /// Fraction of exact category matches.
    pub fn category_accuracy(&self) -> Result<f64, EvalError> {
        if self.is_empty() {
            return Err(EvalError::EmptySeries);
        }
        let hits = self.pairs().filter(|(a, p)| a == p).count();
        Ok(hits as f64 / self.len() as f64)
    }
}

/// Mean absolute error and root mean square error over ordinal codes.
pub fn error_metrics(series: &OrdinalSeries) -> Result<(f64, f64), EvalError> {
    if series.is_empty() {
        return Err(EvalError::EmptySeries);
    }
    let n = series.len() as f64;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    for (a, p) in series.pairs() {
        let e = (a as f64 - p as f64).abs();
        abs_sum += e;
        sq_sum += e * e;
    }
    Ok((abs_sum / n, (sq_sum / n).sqrt()))
}

/// Reduce a category series to binary confusion counts. Categories above
/// `healthy_max` count as unhealthy (the positive class).
pub fn confusion_from_series(series: &OrdinalSeries, healthy_max: Category) -> ConfusionCounts {
    let boundary = healthy_max.code() as u8;
    let mut c = ConfusionCounts { true_pos: 0, false_pos: 0, true_neg: 0, false_neg: 0 };
    for (a, p) in series.pairs() {
        match (a > boundary, p > boundary) {
            (true, true) => c.true_pos += 1,
            (false, true) => c.false_pos += 1,
            (false, false) => c.true_neg += 1,
            (true, false) => c.false_neg += 1,
        }
    }
    c
}

/// Structural quality score of an ontology model.
pub fn score_om(
    classes: usize,
    subclass_axioms: usize,
    relations: usize,
    properties: usize,
) -> Result<f64, EvalError> {
    if classes == 0 {
        return Err(EvalError::ZeroDenominator("classes"));
    }
    if subclass_axioms + relations == 0 {
        return Err(EvalError::ZeroDenominator("subclass + relations"));
    }
    let rel = relations as f64;
    let cls = classes as f64;
    let sub_rel = (subclass_axioms + relations) as f64;
    let prop = properties as f64;
    Ok((rel * cls * 100.0 + sub_rel * prop) / (sub_rel * cls))
}

/// Instance population score of a knowledge base.
pub fn score_kb(classes: usize, individuals: usize) -> Result<f64, EvalError> {
    if classes == 0 {
        return Err(EvalError::ZeroDenominator("classes"));
    }
    Ok((classes as f64 * 100.0 + individuals as f64) / classes as f64)
}

/// Round to the reporting precision of two decimals.
pub fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Deterministic sample of `n` indices into `0..len` for the given seed;
/// without replacement when the population suffices, with replacement
/// otherwise.
pub fn sample_indices(len: usize, n: usize, seed: u64) -> Vec<usize> {
    assert!(len > 0, "cannot sample from an empty population");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if n <= len {
        let mut pool: Vec<usize> = (0..len).collect();
        for i in 0..n {
            let j = rng.gen_range(i..len);
            pool.swap(i, j);
        }
        pool.truncate(n);
        pool
    } else {
        (0..n).map(|_| rng.gen_range(0..len)).collect()
    }
}

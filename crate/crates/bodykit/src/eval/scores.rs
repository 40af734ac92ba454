//! Detection scores and F1-normalized errors.

use crate::{Error, Result};

use super::matching::MatchOutcome;

/// Precision, recall and their harmonic mean over matched scenes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Aggregates TP/FP/FN over scenes into precision/recall/F1.
/// Requires at least one ground-truth person across all scenes.
pub fn detection_scores(outcomes: &[MatchOutcome]) -> Result<DetectionScores> {
    let tp: usize = outcomes.iter().map(|o| o.pairs.len()).sum();
    let fp: usize = outcomes.iter().map(|o| o.false_positives.len()).sum();
    let fn_: usize = outcomes.iter().map(|o| o.false_negatives.len()).sum();
    if tp + fn_ == 0 {
        return Err(Error::contract(
            "detection scores need at least one ground-truth person",
        ));
    }
    let precision = if tp + fp > 0 {
        tp as f64 / (tp + fp) as f64
    } else {
        0.0
    };
    let recall = tp as f64 / (tp + fn_) as f64;
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(DetectionScores {
        precision,
        recall,
        f1,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
    })
}

/// `(error / F1)` normalization; absent when F1 is zero (unbounded).
pub fn normalized_error(error_mm: f64, f1: f64) -> Option<f64> {
    (f1 > 0.0).then(|| error_mm / f1)
}

/// Joint and vertex error normalized together.
pub fn normalized_errors(mpjpe_mm: f64, mve_mm: f64, f1: f64) -> (Option<f64>, Option<f64>) {
    (normalized_error(mpjpe_mm, f1), normalized_error(mve_mm, f1))
}

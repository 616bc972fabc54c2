use serde::Serialize;

use super::{ClassifyError, Label};

/// Three-class classification metrics.
///
/// `confusion[g][p]` counts items with gold label `g` predicted as `p`.
/// A precision or recall whose denominator is zero is reported as 0 and
/// flagged in `undefined_precision` / `undefined_recall`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalMetrics {
    pub accuracy: f64,
    pub precision: [f64; 3],
    pub recall: [f64; 3],
    pub f1: [f64; 3],
    pub support: [usize; 3],
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub confusion: [[usize; 3]; 3],
    pub undefined_precision: [bool; 3],
    pub undefined_recall: [bool; 3],
}

pub fn evaluate(predicted: &[Label], gold: &[Label]) -> Result<EvalMetrics, ClassifyError> {
    if predicted.len() != gold.len() {
        return Err(ClassifyError::LengthMismatch {
            predicted: predicted.len(),
            gold: gold.len(),
        });
    }
    if gold.is_empty() {
        return Err(ClassifyError::Empty);
    }
    let mut confusion = [[0usize; 3]; 3];
    for (p, g) in predicted.iter().zip(gold) {
        confusion[g.index()][p.index()] += 1;
    }
    let total = gold.len();
    let correct: usize = (0..3).map(|c| confusion[c][c]).sum();

    let mut precision = [0.0; 3];
    let mut recall = [0.0; 3];
    let mut f1 = [0.0; 3];
    let mut support = [0usize; 3];
    let mut undefined_precision = [false; 3];
    let mut undefined_recall = [false; 3];
    for c in 0..3 {
        let predicted_c: usize = (0..3).map(|g| confusion[g][c]).sum();
        let gold_c: usize = confusion[c].iter().sum();
        support[c] = gold_c;
        let tp = confusion[c][c] as f64;
        if predicted_c == 0 {
            undefined_precision[c] = true;
        } else {
            precision[c] = tp / predicted_c as f64;
        }
        if gold_c == 0 {
            undefined_recall[c] = true;
        } else {
            recall[c] = tp / gold_c as f64;
        }
        let denom = precision[c] + recall[c];
        if denom > 0.0 {
            f1[c] = 2.0 * precision[c] * recall[c] / denom;
        }
    }
    let mean = |v: &[f64; 3]| v.iter().sum::<f64>() / 3.0;
    Ok(EvalMetrics {
        accuracy: correct as f64 / total as f64,
        macro_precision: mean(&precision),
        macro_recall: mean(&recall),
        macro_f1: mean(&f1),
        precision,
        recall,
        f1,
        support,
        confusion,
        undefined_precision,
        undefined_recall,
    })
}

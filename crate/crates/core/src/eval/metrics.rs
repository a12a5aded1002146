use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

/// Counts with label 1 as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fn_: u64, fp: u64, tn: u64) -> Self {
        ConfusionMatrix { tp, fn_, fp, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub precision_pos: f64,
    pub recall_pos: f64,
    pub f1_pos: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
}

pub fn confusion_matrix(y_true: &[Label], y_pred: &[Label]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Shape(format!(
            "{} true labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::Shape("no labels to compare".into()));
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t == 1, p == 1) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fn_ += 1,
            (false, true) => cm.fp += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

/// `a / b`, or 0 when `b` is 0.
fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

pub fn summarize_metrics(cm: &ConfusionMatrix) -> EvalReport {
    let (tp, fn_, fp, tn) = (cm.tp as f64, cm.fn_ as f64, cm.fp as f64, cm.tn as f64);
    let precision_pos = ratio(tp, tp + fp);
    let recall_pos = ratio(tp, tp + fn_);
    let precision_neg = ratio(tn, tn + fn_);
    let recall_neg = ratio(tn, tn + fp);
    EvalReport {
        accuracy: ratio(tp + tn, tp + fn_ + fp + tn),
        precision_pos,
        recall_pos,
        f1_pos: ratio(2.0 * precision_pos * recall_pos, precision_pos + recall_pos),
        macro_precision: 0.5 * (precision_pos + precision_neg),
        macro_recall: 0.5 * (recall_pos + recall_neg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(confusion_matrix(&[1, 0], &[1, 0]).unwrap(), ConfusionMatrix::new(1, 0, 0, 1));
        assert_eq!(
            confusion_matrix(&[1, 1, 0, 0], &[1, 0, 1, 0]).unwrap(),
            ConfusionMatrix::new(1, 1, 1, 1)
        );
        assert!(matches!(confusion_matrix(&[], &[]), Err(Error::Shape(_))));
    }

    #[test]
    fn lgbm_row() {
        let r = summarize_metrics(&ConfusionMatrix::new(417, 32, 51, 401));
        assert!((r.accuracy - 0.90788).abs() < 5e-6);
        assert!((r.f1_pos - 0.90949).abs() < 5e-6);
        assert!((r.macro_precision - 0.90856).abs() < 5e-6);
        assert!((r.macro_recall - 0.90795).abs() < 5e-6);
    }

    #[test]
    fn knn_row() {
        let r = summarize_metrics(&ConfusionMatrix::new(430, 19, 269, 183));
        assert!((r.accuracy - 0.68036).abs() < 5e-6);
        assert!((r.f1_pos - 0.74913).abs() < 5e-6);
        assert!((r.macro_precision - 0.76055).abs() < 5e-6);
        assert!((r.macro_recall - 0.68128).abs() < 5e-6);
    }

    #[test]
    fn perfect_and_degenerate() {
        let r = summarize_metrics(&ConfusionMatrix::new(3, 0, 0, 2));
        assert_eq!([r.accuracy, r.f1_pos, r.macro_precision, r.macro_recall], [1.0; 4]);
        let z = summarize_metrics(&ConfusionMatrix::new(0, 0, 0, 4));
        assert_eq!(z.f1_pos, 0.0);
        assert_eq!(z.precision_pos, 0.0);
    }
}

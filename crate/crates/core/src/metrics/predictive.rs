use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Area under the ROC curve as the Mann–Whitney statistic; tied scores
/// count one half. Labels must be 0/1 with both classes present.
pub fn auroc(scores: &[f64], labels: &[usize]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::UndefinedMetric(format!(
            "auroc: {} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::UndefinedMetric("auroc needs binary labels".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::UndefinedMetric("auroc: non-finite score".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric("auroc needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Sum of 1-based mid-ranks of the positives.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j + 2) as f64 / 2.0;
        let pos_in_block = order[i..=j].iter().filter(|&&k| labels[k] == 1).count();
        rank_sum += mid * pos_in_block as f64;
        i = j + 1;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum F1Average {
    /// F1 of class 1.
    #[default]
    Positive,
    /// Unweighted mean of per-class F1.
    Macro,
}

/// F1 of class `positive`: `2PR / (P + R)`, 0 when undefined.
pub fn f1_for_class(predictions: &[usize], labels: &[usize], positive: usize) -> f64 {
    let (mut tp, mut fp, mut fnn) = (0usize, 0usize, 0usize);
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p == positive, l == positive) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fnn += 1,
            (false, false) => {}
        }
    }
    let denom = 2 * tp + fp + fnn;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

/// Positive-class F1 with class 1 as the positive class.
pub fn f1(predictions: &[usize], labels: &[usize]) -> f64 {
    f1_for_class(predictions, labels, 1)
}

pub fn f1_macro(predictions: &[usize], labels: &[usize], num_classes: usize) -> f64 {
    if num_classes == 0 {
        return 0.0;
    }
    (0..num_classes).map(|c| f1_for_class(predictions, labels, c)).sum::<f64>() / num_classes as f64
}

pub fn f1_score(predictions: &[usize], labels: &[usize], average: F1Average, num_classes: usize) -> f64 {
    match average {
        F1Average::Positive => f1(predictions, labels),
        F1Average::Macro => f1_macro(predictions, labels, num_classes),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auroc_examples() {
        assert_eq!(auroc(&[0.1, 0.2, 0.8, 0.9], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(auroc(&[0.5; 4], &[0, 1, 0, 1]).unwrap(), 0.5);
        assert_eq!(auroc(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]).unwrap(), 0.75);
        assert!(matches!(auroc(&[0.1, 0.2], &[1, 1]), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn f1_examples() {
        assert_eq!(f1(&[1, 0, 1], &[1, 0, 1]), 1.0);
        assert_eq!(f1(&[0, 0, 0], &[1, 0, 1]), 0.0);
        // TP=2, FP=1, FN=1.
        let f = f1(&[1, 1, 1, 0, 0], &[1, 1, 0, 1, 0]);
        assert!((f - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f1_macro(&[0, 1], &[0, 1], 2), 1.0);
    }
}

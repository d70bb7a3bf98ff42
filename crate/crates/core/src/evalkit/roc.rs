use std::fmt::Write as _;

use crate::error::{Error, Result};

/// One threshold point of the ROC curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: f64,
}

/// ROC curve with its area. The AUC is computed by the rank (Mann-
/// Whitney) statistic — the probability that a random positive outscores
/// a random negative, ties credited one half — which is exact; the curve
/// points exist for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

impl RocCurve {
    /// CSV with header `fpr,tpr,threshold`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fpr,tpr,threshold\n");
        for p in &self.points {
            writeln!(out, "{},{},{}", p.fpr, p.tpr, p.threshold).unwrap();
        }
        out
    }
}

/// Rank-based AUC plus the threshold-sweep curve.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::Shape {
            op: "roc_auc",
            left: format!("{} scores", scores.len()),
            right: format!("{} labels", labels.len()),
        });
    }
    if scores.len() < 2 {
        return Err(Error::Eval(format!(
            "need at least 2 scored samples, got {}",
            scores.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Eval("non-finite score".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Eval(
            "both classes must be present to compute AUC".into(),
        ));
    }

    // Average ranks over ties, ascending by score.
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1..=j+1 share the average.
        let avg_rank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if labels[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let auc =
        (rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0) / (n_pos as f64 * n_neg as f64);

    // Threshold sweep from high to low for the curve.
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut k = order.len();
    while k > 0 {
        let mut j = k;
        while j > 0 && scores[order[j - 1]] == scores[order[k - 1]] {
            j -= 1;
            if labels[order[j]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        points.push(RocPoint {
            fpr: fp as f64 / n_neg as f64,
            tpr: tp as f64 / n_pos as f64,
            threshold: scores[order[k - 1]],
        });
        k = j;
    }
    Ok(RocCurve { points, auc })
}

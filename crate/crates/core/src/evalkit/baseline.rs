use crate::dataforge::{SAMPLE_HZ, ShotSequence};
use crate::error::{Error, Result};
use crate::numcore::sigmoid;

use super::roc::roc_auc;

/// Physics features per sequence: rim distance at the last frame, a
/// vertical-speed estimate, and an entry-angle estimate from the last
/// two frames. Expects rim-relative, unstandardized sequences.
pub fn physics_features(seq: &ShotSequence) -> [f64; 3] {
    let last = &seq.features[seq.features.len() - 1];
    let prev = &seq.features[seq.features.len() - 2];
    let rim_dist = ShotSequence::frame_rim_distance(last);
    let vz = (last[2] - prev[2]) * SAMPLE_HZ;
    let horiz = ((last[0] - prev[0]).powi(2) + (last[1] - prev[1]).powi(2)).sqrt();
    let entry_angle = (-(last[2] - prev[2])).atan2(horiz.max(1e-9));
    [rim_dist, vz, entry_angle]
}

/// Logistic-regression baseline on the physics features.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub auc: f64,
    pub weights: [f64; 3],
    pub bias: f64,
    pub n_train: usize,
    pub n_test: usize,
}

/// Fit logistic regression by full-batch gradient descent on the train
/// split (features z-scored with train statistics) and report test AUC.
pub fn baseline_logistic(train: &[ShotSequence], test: &[ShotSequence]) -> Result<BaselineResult> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::Domain("baseline needs non-empty splits".into()));
    }
    let feats: Vec<[f64; 3]> = train.iter().map(physics_features).collect();
    let labels: Vec<f64> = train.iter().map(|s| f64::from(s.label)).collect();

    // Standardize features with train statistics; zero variance guarded.
    let n = feats.len() as f64;
    let mut mean = [0.0; 3];
    for f in &feats {
        for (m, v) in mean.iter_mut().zip(f) {
            *m += v / n;
        }
    }
    let mut std = [0.0; 3];
    for f in &feats {
        for k in 0..3 {
            std[k] += (f[k] - mean[k]).powi(2) / n;
        }
    }
    for s in &mut std {
        *s = s.sqrt();
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    let zscore = |f: &[f64; 3]| {
        let mut z = [0.0; 3];
        for k in 0..3 {
            z[k] = (f[k] - mean[k]) / std[k];
        }
        z
    };

    let xs: Vec<[f64; 3]> = feats.iter().map(zscore).collect();
    let mut w = [0.0; 3];
    let mut b = 0.0;
    let lr = 0.5;
    for _ in 0..500 {
        let mut gw = [0.0; 3];
        let mut gb = 0.0;
        for (x, &y) in xs.iter().zip(&labels) {
            let p = sigmoid(w[0] * x[0] + w[1] * x[1] + w[2] * x[2] + b);
            let d = (p - y) / n;
            for k in 0..3 {
                gw[k] += d * x[k];
            }
            gb += d;
        }
        for k in 0..3 {
            w[k] -= lr * gw[k];
        }
        b -= lr * gb;
    }

    let scores: Vec<f64> = test
        .iter()
        .map(|s| {
            let x = zscore(&physics_features(s));
            sigmoid(w[0] * x[0] + w[1] * x[1] + w[2] * x[2] + b)
        })
        .collect();
    let test_labels: Vec<u8> = test.iter().map(|s| s.label).collect();
    let auc = roc_auc(&scores, &test_labels)?.auc;
    Ok(BaselineResult {
        auc,
        weights: w,
        bias: b,
        n_train: train.len(),
        n_test: test.len(),
    })
}

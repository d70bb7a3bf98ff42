use crate::error::{Error, Result};
use crate::numcore::{SeededRng, StreamPurpose};

use super::{CourtSpec, RawShot, SEQ_LEN, ShotSequence};

/// Translate a shot into rim-relative coordinates: the attacked rim
/// center becomes the origin, height measured from the rim plane. The
/// attacked rim is the one nearer to the shot's final frame.
pub fn rim_relative(shot: &RawShot, court: &CourtSpec) -> RawShot {
    let rims = court.rim_centers();
    let last = shot.frames.last().expect("shots have frames");
    let d2 = |rim: &[f64; 2]| {
        let dx = last.x_ft - rim[0];
        let dy = last.y_ft - rim[1];
        dx * dx + dy * dy
    };
    let rim = if d2(&rims[0]) <= d2(&rims[1]) {
        rims[0]
    } else {
        rims[1]
    };
    RawShot {
        id: shot.id,
        frames: shot
            .frames
            .iter()
            .map(|f| super::RawFrame {
                x_ft: f.x_ft - rim[0],
                y_ft: f.y_ft - rim[1],
                z_ft: f.z_ft - court.rim_height_ft,
                clock_s: f.clock_s,
            })
            .collect(),
        hit: shot.hit,
    }
}

/// Keep the last 12 frames of a rim-relative shot; shorter shots are
/// dropped (`None`). The near-rim tail is the informative part.
pub fn truncate(shot: &RawShot) -> Option<ShotSequence> {
    if shot.frames.len() < SEQ_LEN {
        return None;
    }
    let start = shot.frames.len() - SEQ_LEN;
    Some(ShotSequence {
        id: shot.id,
        features: shot.frames[start..]
            .iter()
            .map(|f| [f.x_ft, f.y_ft, f.z_ft, f.clock_s])
            .collect(),
        label: shot.hit as u8,
        cutoff_ft: None,
    })
}

/// Remove the trailing run of frames closer than `d_ft` (3-D distance)
/// to the rim, then apply the truncation rule. Emulates scoring the shot
/// before the ball arrives within `d_ft` of the basket.
pub fn cutoff_at_distance(shot: &RawShot, d_ft: f64) -> Option<ShotSequence> {
    let dist = |f: &super::RawFrame| (f.x_ft * f.x_ft + f.y_ft * f.y_ft + f.z_ft * f.z_ft).sqrt();
    let last_far = shot.frames.iter().rposition(|f| dist(f) >= d_ft)?;
    let kept = RawShot {
        id: shot.id,
        frames: shot.frames[..=last_far].to_vec(),
        hit: shot.hit,
    };
    let mut seq = truncate(&kept)?;
    seq.cutoff_ft = Some(d_ft);
    Some(seq)
}

/// Disjoint train/test shot ids.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitIndex {
    pub train_ids: Vec<u64>,
    pub test_ids: Vec<u64>,
}

/// 80/20 split: uniform seeded shuffle, first 80% train.
pub fn pareto_split(ids: &[u64], seed: u64) -> Result<SplitIndex> {
    if ids.len() < 2 {
        return Err(Error::Domain(format!(
            "pareto_split needs at least 2 ids, got {}",
            ids.len()
        )));
    }
    let mut shuffled = ids.to_vec();
    let mut rng = SeededRng::new(seed).substream(StreamPurpose::Split, 0);
    rng.shuffle(&mut shuffled);
    let n_train = shuffled.len() * 4 / 5;
    let test_ids = shuffled.split_off(n_train);
    Ok(SplitIndex {
        train_ids: shuffled,
        test_ids,
    })
}

/// Per-feature mean and standard deviation over the training split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureStats {
    pub mean: [f64; 4],
    pub std: [f64; 4],
}

/// Statistics over every frame of the given sequences. Zero-variance
/// features record a std of 1 so standardization leaves them unchanged.
pub fn compute_stats(train: &[ShotSequence]) -> Result<FeatureStats> {
    if train.is_empty() {
        return Err(Error::Domain("cannot standardize an empty train set".into()));
    }
    let n = (train.len() * SEQ_LEN) as f64;
    let mut mean = [0.0; 4];
    for seq in train {
        for frame in &seq.features {
            for (m, v) in mean.iter_mut().zip(frame) {
                *m += v;
            }
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = [0.0; 4];
    for seq in train {
        for frame in &seq.features {
            for (s, (v, m)) in var.iter_mut().zip(frame.iter().zip(&mean)) {
                *s += (v - m) * (v - m);
            }
        }
    }
    let mut std = [0.0; 4];
    for (s, v) in std.iter_mut().zip(&var) {
        let sd = (v / n).sqrt();
        *s = if sd == 0.0 { 1.0 } else { sd };
    }
    Ok(FeatureStats { mean, std })
}

/// z-score sequences with the given (train-derived) statistics.
pub fn apply_stats(seqs: &[ShotSequence], stats: &FeatureStats) -> Vec<ShotSequence> {
    seqs.iter()
        .map(|seq| ShotSequence {
            id: seq.id,
            features: seq
                .features
                .iter()
                .map(|frame| {
                    let mut out = [0.0; 4];
                    for k in 0..4 {
                        out[k] = (frame[k] - stats.mean[k]) / stats.std[k];
                    }
                    out
                })
                .collect(),
            label: seq.label,
            cutoff_ft: seq.cutoff_ft,
        })
        .collect()
}

/// Standardize `apply_to` using statistics computed from `train` only.
pub fn standardize(
    train: &[ShotSequence],
    apply_to: &[ShotSequence],
) -> Result<(Vec<ShotSequence>, FeatureStats)> {
    let stats = compute_stats(train)?;
    Ok((apply_stats(apply_to, &stats), stats))
}

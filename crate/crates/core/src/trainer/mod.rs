//! Optimization loop: Adam updates, the trailing-mean early stop, epoch
//! orchestration, and grid/random hyperparameter search.

mod adam;
mod fit;
mod search;

pub use adam::{AdamHyper, AdamState, clip_global_norm};
pub use fit::{
    EarlyStopMode, TaskKind, TrainConfig, TrainReport, early_stop_check, fit, score_samples,
};
pub use search::{
    SearchSpace, SearchStrategy, Trial, TrialConfig, plan_trials, search, trials_to_csv,
};

use crate::dataforge::ShotSequence;
use crate::seqnet::Sample;

/// Convert preprocessed (standardized) sequences into training samples.
pub fn sequences_to_samples(seqs: &[ShotSequence]) -> Vec<Sample> {
    seqs.iter()
        .map(|s| Sample {
            features: s.features.clone(),
            label: f64::from(s.label),
        })
        .collect()
}

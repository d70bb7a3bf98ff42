//! Evaluation: ROC/AUC by rank statistic, the logistic baseline on
//! physics features, and the AUC-by-distance sweep.

mod baseline;
mod roc;
mod sweep;

pub use baseline::{BaselineResult, baseline_logistic, physics_features};
pub use roc::{RocCurve, RocPoint, roc_auc};
pub use sweep::{
    BASELINE_MODEL_NAME, DistanceReport, DistanceRow, NETWORK_MODEL_NAME, SweepConfig,
    distance_sweep,
};

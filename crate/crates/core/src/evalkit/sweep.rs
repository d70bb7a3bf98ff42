use std::fmt::Write as _;

use crate::dataforge::{
    CourtSpec, RawShot, ShotSequence, apply_stats, cutoff_at_distance, pareto_split, rim_relative,
    standardize,
};
use crate::error::{Error, Result};
use crate::numcore::{SeededRng, StreamPurpose};
use crate::seqnet::{ModelConfig, ModelParams};
use crate::trainer::{TaskKind, TrainConfig, fit, score_samples, sequences_to_samples};

use super::baseline::baseline_logistic;
use super::roc::roc_auc;

/// One row of the AUC-by-distance report.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceRow {
    pub cutoff_ft: f64,
    pub model: String,
    pub auc: f64,
    pub best_epoch: usize,
    pub param_count: usize,
    pub wall_seconds: f64,
    pub n_train: usize,
    pub n_test: usize,
    /// Set when the cutoff left fewer sequences than required; such a
    /// row carries no metrics but is never silently omitted.
    pub insufficient_data: bool,
}

/// AUC at each distance cutoff for the trained network and the logistic
/// baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport {
    pub rows: Vec<DistanceRow>,
}

impl DistanceReport {
    /// CSV mirroring the per-distance table. Wall seconds are per-fit
    /// wall-clock seconds, stated in the header comment.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "# wall_seconds = wall-clock seconds for that row's single fit\n\
             cutoff_ft,model,auc,best_epoch,param_count,wall_seconds,n_train,n_test,status\n",
        );
        for r in &self.rows {
            let status = if r.insufficient_data {
                "insufficient-data"
            } else {
                "ok"
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.cutoff_ft,
                r.model,
                r.auc,
                r.best_epoch,
                r.param_count,
                r.wall_seconds,
                r.n_train,
                r.n_test,
                status
            )
            .unwrap();
        }
        out
    }

    pub fn auc_for(&self, model: &str, cutoff_ft: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.model == model && r.cutoff_ft == cutoff_ft && !r.insufficient_data)
            .map(|r| r.auc)
    }
}

/// Sweep parameters. Each cutoff retrains a fresh model on the
/// cutoff-filtered dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub cutoffs_ft: Vec<f64>,
    /// Cutoffs that leave fewer sequences than this produce an
    /// insufficient-data row.
    pub min_sequences: usize,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub split_seed: u64,
    pub include_baseline: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            cutoffs_ft: (2..=8).map(f64::from).collect(),
            min_sequences: 100,
            model: ModelConfig::default(),
            train: TrainConfig {
                task: TaskKind::Classify,
                epochs: 30,
                ..TrainConfig::default()
            },
            split_seed: 0,
            include_baseline: true,
        }
    }
}

pub const NETWORK_MODEL_NAME: &str = "blstm-mdn";
pub const BASELINE_MODEL_NAME: &str = "logistic";

/// Train and evaluate at every distance cutoff, ascending. Rows for the
/// network come first at each cutoff, then the baseline.
pub fn distance_sweep(
    shots: &[RawShot],
    court: &CourtSpec,
    cfg: &SweepConfig,
) -> Result<DistanceReport> {
    if cfg.cutoffs_ft.is_empty() {
        return Err(Error::Domain("no cutoffs requested".into()));
    }
    let mut cutoffs = cfg.cutoffs_ft.clone();
    cutoffs.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let relative: Vec<RawShot> = shots.iter().map(|s| rim_relative(s, court)).collect();
    let mut rows = Vec::new();

    for (ci, &cutoff) in cutoffs.iter().enumerate() {
        let seqs: Vec<ShotSequence> = relative
            .iter()
            .filter_map(|s| cutoff_at_distance(s, cutoff))
            .collect();
        if seqs.len() < cfg.min_sequences {
            rows.push(DistanceRow {
                cutoff_ft: cutoff,
                model: NETWORK_MODEL_NAME.into(),
                auc: f64::NAN,
                best_epoch: 0,
                param_count: 0,
                wall_seconds: 0.0,
                n_train: 0,
                n_test: seqs.len(),
                insufficient_data: true,
            });
            continue;
        }

        let ids: Vec<u64> = seqs.iter().map(|s| s.id).collect();
        let split = pareto_split(&ids, cfg.split_seed)?;
        let in_train = |id: u64| split.train_ids.contains(&id);
        let train_seqs: Vec<ShotSequence> =
            seqs.iter().filter(|s| in_train(s.id)).cloned().collect();
        let test_seqs: Vec<ShotSequence> =
            seqs.iter().filter(|s| !in_train(s.id)).cloned().collect();

        let (std_train, stats) = standardize(&train_seqs, &train_seqs)?;
        let std_test = apply_stats(&test_seqs, &stats);
        let train_samples = sequences_to_samples(&std_train);
        let test_samples = sequences_to_samples(&std_test);

        let mut init_rng = SeededRng::new(cfg.train.seed).substream(StreamPurpose::Init, ci as u64);
        let model = ModelParams::init(cfg.model, &mut init_rng)?;
        let param_count = model.num_params();
        let (best, report) = fit(model, &train_samples, &test_samples, &cfg.train)?;
        let (scores, labels) = score_samples(&best, &test_samples)?;
        let auc = roc_auc(&scores, &labels)?.auc;
        rows.push(DistanceRow {
            cutoff_ft: cutoff,
            model: NETWORK_MODEL_NAME.into(),
            auc,
            best_epoch: report.best_epoch,
            param_count,
            wall_seconds: report.wall_seconds,
            n_train: train_samples.len(),
            n_test: test_samples.len(),
            insufficient_data: false,
        });

        if cfg.include_baseline {
            let start = std::time::Instant::now();
            let baseline = baseline_logistic(&train_seqs, &test_seqs)?;
            rows.push(DistanceRow {
                cutoff_ft: cutoff,
                model: BASELINE_MODEL_NAME.into(),
                auc: baseline.auc,
                best_epoch: 0,
                param_count: 4,
                wall_seconds: start.elapsed().as_secs_f64(),
                n_train: baseline.n_train,
                n_test: baseline.n_test,
                insufficient_data: false,
            });
        }
    }
    Ok(DistanceReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataforge::{SynthConfig, synth_generate};

    #[test]
    fn sweep_reports_one_network_row_per_cutoff() {
        let court = CourtSpec::default();
        let shots = synth_generate(
            &SynthConfig {
                n_shots: 260,
                seed: 2,
                ..SynthConfig::default()
            },
            &court,
        )
        .unwrap();
        let cfg = SweepConfig {
            cutoffs_ft: vec![8.0, 2.0],
            min_sequences: 100,
            model: ModelConfig {
                num_layers: 1,
                units_per_layer: 8,
                ..ModelConfig::default()
            },
            train: TrainConfig {
                task: TaskKind::Classify,
                epochs: 2,
                ..TrainConfig::default()
            },
            split_seed: 1,
            include_baseline: true,
        };
        let report = distance_sweep(&shots, &court, &cfg).unwrap();
        let network_rows: Vec<_> = report
            .rows
            .iter()
            .filter(|r| r.model == NETWORK_MODEL_NAME)
            .collect();
        assert_eq!(network_rows.len(), 2);
        assert_eq!(network_rows[0].cutoff_ft, 2.0, "cutoffs sorted ascending");
        assert_eq!(network_rows[1].cutoff_ft, 8.0);
        assert!(report.rows.iter().any(|r| r.model == BASELINE_MODEL_NAME));
        let csv = report.to_csv();
        assert!(csv.contains("wall-clock seconds"));
    }

    #[test]
    fn impossible_cutoff_yields_insufficient_row() {
        let court = CourtSpec::default();
        let shots = synth_generate(
            &SynthConfig {
                n_shots: 150,
                seed: 3,
                ..SynthConfig::default()
            },
            &court,
        )
        .unwrap();
        let cfg = SweepConfig {
            cutoffs_ft: vec![40.0],
            ..SweepConfig::default()
        };
        let report = distance_sweep(&shots, &court, &cfg).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert!(report.rows[0].insufficient_data);
        assert!(report.to_csv().contains("insufficient-data"));
    }
}

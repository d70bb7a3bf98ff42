use crate::error::{Error, Result};
use crate::numcore::{SeededRng, StreamPurpose};
use crate::seqnet::{ModelConfig, ModelParams, Sample};

use super::fit::{TaskKind, TrainConfig, fit};

/// Candidate values per hyperparameter. Grid search takes the Cartesian
/// product; random search draws each field independently.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub learning_rates: Vec<f64>,
    pub units: Vec<usize>,
    pub num_layers: Vec<usize>,
    pub batch_sizes: Vec<usize>,
    pub mdn_loss_weights: Vec<f64>,
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rates.is_empty()
            || self.units.is_empty()
            || self.num_layers.is_empty()
            || self.batch_sizes.is_empty()
            || self.mdn_loss_weights.is_empty()
        {
            return Err(Error::Domain("search space has an empty dimension".into()));
        }
        Ok(())
    }

    pub fn grid_size(&self) -> usize {
        self.learning_rates.len()
            * self.units.len()
            * self.num_layers.len()
            * self.batch_sizes.len()
            * self.mdn_loss_weights.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStrategy {
    Grid,
    Random,
}

/// One hyperparameter assignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    pub learning_rate: f64,
    pub units: usize,
    pub num_layers: usize,
    pub batch_size: usize,
    pub mdn_loss_weight: f64,
}

/// One completed trial. `metric` is validation AUC for the classify task
/// (higher is better) or validation NLL for the generate task (lower is
/// better).
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub config: TrialConfig,
    pub metric: f64,
    pub best_epoch: usize,
    pub wall_seconds: f64,
}

fn enumerate_grid(space: &SearchSpace, budget: usize) -> Vec<TrialConfig> {
    let mut out = Vec::new();
    'outer: for &lr in &space.learning_rates {
        for &u in &space.units {
            for &l in &space.num_layers {
                for &b in &space.batch_sizes {
                    for &w in &space.mdn_loss_weights {
                        out.push(TrialConfig {
                            learning_rate: lr,
                            units: u,
                            num_layers: l,
                            batch_size: b,
                            mdn_loss_weight: w,
                        });
                        if out.len() == budget {
                            break 'outer;
                        }
                    }
                }
            }
        }
    }
    out
}

fn draw_random(space: &SearchSpace, budget: usize, rng: &mut SeededRng) -> Vec<TrialConfig> {
    (0..budget)
        .map(|_| TrialConfig {
            learning_rate: space.learning_rates[rng.index_below(space.learning_rates.len())],
            units: space.units[rng.index_below(space.units.len())],
            num_layers: space.num_layers[rng.index_below(space.num_layers.len())],
            batch_size: space.batch_sizes[rng.index_below(space.batch_sizes.len())],
            mdn_loss_weight: space.mdn_loss_weights[rng.index_below(space.mdn_loss_weights.len())],
        })
        .collect()
}

/// Enumerate the trial configurations a search run would evaluate,
/// without running them. Deterministic under `seed`.
pub fn plan_trials(
    space: &SearchSpace,
    budget: usize,
    strategy: SearchStrategy,
    seed: u64,
) -> Result<Vec<TrialConfig>> {
    space.validate()?;
    if budget == 0 {
        return Err(Error::Domain("search budget must be >= 1".into()));
    }
    Ok(match strategy {
        SearchStrategy::Grid => enumerate_grid(space, budget.max(space.grid_size())),
        SearchStrategy::Random => {
            let mut rng = SeededRng::new(seed).substream(StreamPurpose::Search, 0);
            draw_random(space, budget, &mut rng)
        }
    })
}

/// Run every planned trial: a full fit per configuration, scored on the
/// validation split. The returned list is ranked best-first (highest AUC
/// for classify, lowest NLL for generate).
pub fn search(
    space: &SearchSpace,
    budget: usize,
    strategy: SearchStrategy,
    base_model: &ModelConfig,
    base_train: &TrainConfig,
    train: &[Sample],
    val: &[Sample],
) -> Result<Vec<Trial>> {
    let configs = plan_trials(space, budget, strategy, base_train.seed)?;
    let root = SeededRng::new(base_train.seed);

    let mut trials = Vec::with_capacity(configs.len());
    for (i, tc) in configs.iter().enumerate() {
        let model_cfg = ModelConfig {
            num_layers: tc.num_layers,
            units_per_layer: tc.units,
            ..*base_model
        };
        model_cfg.validate()?;
        let train_cfg = TrainConfig {
            learning_rate: tc.learning_rate,
            batch_size: tc.batch_size,
            mdn_loss_weight: tc.mdn_loss_weight,
            seed: base_train.seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
            ..base_train.clone()
        };
        let mut init_rng = root.substream(StreamPurpose::Search, 1 + i as u64);
        let model = ModelParams::init(model_cfg, &mut init_rng)?;
        let (_, report) = fit(model, train, val, &train_cfg)?;
        let metric = match base_train.task {
            TaskKind::Classify => report
                .val_auc
                .get(report.best_epoch - 1)
                .copied()
                .unwrap_or(f64::NAN),
            TaskKind::Generate => report.val_loss[report.best_epoch - 1],
        };
        trials.push(Trial {
            config: *tc,
            metric,
            best_epoch: report.best_epoch,
            wall_seconds: report.wall_seconds,
        });
    }

    match base_train.task {
        TaskKind::Classify => {
            trials.sort_by(|a, b| b.metric.partial_cmp(&a.metric).unwrap_or(std::cmp::Ordering::Equal))
        }
        TaskKind::Generate => {
            trials.sort_by(|a, b| a.metric.partial_cmp(&b.metric).unwrap_or(std::cmp::Ordering::Equal))
        }
    }
    Ok(trials)
}

/// Ranked trials as CSV.
pub fn trials_to_csv(trials: &[Trial], task: TaskKind) -> String {
    let metric_name = match task {
        TaskKind::Classify => "val_auc",
        TaskKind::Generate => "val_nll",
    };
    let mut out = format!(
        "rank,learning_rate,units,num_layers,batch_size,mdn_loss_weight,{metric_name},best_epoch,wall_seconds\n"
    );
    for (rank, t) in trials.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            rank + 1,
            t.config.learning_rate,
            t.config.units,
            t.config.num_layers,
            t.config.batch_size,
            t.config.mdn_loss_weight,
            t.metric,
            t.best_epoch,
            t.wall_seconds
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> SearchSpace {
        SearchSpace {
            learning_rates: vec![1e-3, 3e-3],
            units: vec![8, 16, 32],
            num_layers: vec![1],
            batch_sizes: vec![32],
            mdn_loss_weights: vec![1.0],
        }
    }

    #[test]
    fn grid_enumerates_cartesian_product() {
        let plan = plan_trials(&space(), 50, SearchStrategy::Grid, 0).unwrap();
        assert_eq!(plan.len(), 6);
        assert_eq!(space().grid_size(), 6);
        // Every combination appears exactly once.
        for &lr in &[1e-3, 3e-3] {
            for &u in &[8usize, 16, 32] {
                assert_eq!(
                    plan.iter()
                        .filter(|t| t.learning_rate == lr && t.units == u)
                        .count(),
                    1
                );
            }
        }
    }

    #[test]
    fn random_plan_is_deterministic_under_seed() {
        let a = plan_trials(&space(), 10, SearchStrategy::Random, 9).unwrap();
        let b = plan_trials(&space(), 10, SearchStrategy::Random, 9).unwrap();
        let c = plan_trials(&space(), 10, SearchStrategy::Random, 10).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        assert_ne!(a, c);
    }

    #[test]
    fn empty_space_rejected() {
        let mut s = space();
        s.units.clear();
        assert!(plan_trials(&s, 5, SearchStrategy::Grid, 0).is_err());
        assert!(plan_trials(&space(), 0, SearchStrategy::Grid, 0).is_err());
    }
}

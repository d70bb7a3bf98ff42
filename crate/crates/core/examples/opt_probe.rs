//! Optimization variants probe at one cutoff.
//! Run: opt_probe [cutoff] [lambda] [lr] [epochs] [batch] [units]

use shotarc::dataforge::{
    CourtSpec, SynthConfig, apply_stats, cutoff_at_distance, pareto_split, rim_relative,
    standardize, synth_generate,
};
use shotarc::numcore::{SeededRng, StreamPurpose};
use shotarc::seqnet::{ModelConfig, ModelParams};
use shotarc::trainer::{TaskKind, TrainConfig, fit, sequences_to_samples};

fn main() {
    let a: Vec<String> = std::env::args().collect();
    let cutoff: f64 = a.get(1).map_or(2.0, |s| s.parse().unwrap());
    let lambda: f64 = a.get(2).map_or(0.0, |s| s.parse().unwrap());
    let lr: f64 = a.get(3).map_or(1e-3, |s| s.parse().unwrap());
    let epochs: usize = a.get(4).map_or(60, |s| s.parse().unwrap());
    let batch: usize = a.get(5).map_or(64, |s| s.parse().unwrap());
    let units: usize = a.get(6).map_or(64, |s| s.parse().unwrap());
    let n_shots: usize = a.get(7).map_or(2000, |s| s.parse().unwrap());
    let noise: f64 = a.get(8).map_or(0.1, |s| s.parse().unwrap());

    let court = CourtSpec::default();
    let shots = synth_generate(
        &SynthConfig { n_shots, seed: 7, noise_std_ft: noise, ..SynthConfig::default() },
        &court,
    )
    .unwrap();
    let seqs: Vec<_> = shots
        .iter()
        .map(|s| rim_relative(s, &court))
        .filter_map(|s| cutoff_at_distance(&s, cutoff))
        .collect();
    let ids: Vec<u64> = seqs.iter().map(|s| s.id).collect();
    let split = pareto_split(&ids, 1).unwrap();
    let train_seqs: Vec<_> = seqs.iter().filter(|s| split.train_ids.contains(&s.id)).cloned().collect();
    let test_seqs: Vec<_> = seqs.iter().filter(|s| split.test_ids.contains(&s.id)).cloned().collect();
    let (std_train, stats) = standardize(&train_seqs, &train_seqs).unwrap();
    let std_test = apply_stats(&test_seqs, &stats);
    let train = sequences_to_samples(&std_train);
    let test = sequences_to_samples(&std_test);

    let mut rng = SeededRng::new(3).substream(StreamPurpose::Init, 0);
    let model = ModelParams::init(
        ModelConfig { units_per_layer: units, ..ModelConfig::default() },
        &mut rng,
    )
    .unwrap();
    let cfg = TrainConfig {
        task: TaskKind::Classify,
        epochs,
        batch_size: batch,
        learning_rate: lr,
        mdn_loss_weight: lambda,
        early_stop_window: 100000,
        seed: 11,
        ..TrainConfig::default()
    };
    let t0 = std::time::Instant::now();
    let (_, report) = fit(model, &train, &test, &cfg).unwrap();
    let best_auc = report.val_auc.iter().cloned().fold(f64::NAN, f64::max);
    let last5: Vec<String> = report.val_auc.iter().rev().take(5).map(|v| format!("{v:.3}")).collect();
    println!(
        "cutoff={cutoff} lambda={lambda} lr={lr} epochs={epochs} batch={batch} units={units} n={n_shots} noise={noise}: best_auc={best_auc:.3} last5={last5:?} t={:.0?}",
        t0.elapsed()
    );
}

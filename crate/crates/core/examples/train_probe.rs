//! Scratch probe for classify-task training dynamics at one cutoff.
//! Run: cargo run --release -p shotarc --example train_probe [lambda] [epochs]

use shotarc::dataforge::{
    CourtSpec, SynthConfig, apply_stats, cutoff_at_distance, pareto_split, rim_relative,
    standardize, synth_generate,
};
use shotarc::evalkit::{baseline_logistic, physics_features, roc_auc};
use shotarc::numcore::{SeededRng, StreamPurpose};
use shotarc::seqnet::{ModelConfig, ModelParams};
use shotarc::trainer::{EarlyStopMode, TaskKind, TrainConfig, fit, sequences_to_samples};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let lambda: f64 = args.get(1).map_or(0.0, |s| s.parse().unwrap());
    let epochs: usize = args.get(2).map_or(40, |s| s.parse().unwrap());

    let court = CourtSpec::default();
    let shots = synth_generate(
        &SynthConfig {
            n_shots: 2000,
            seed: 7,
            ..SynthConfig::default()
        },
        &court,
    )
    .unwrap();
    let seqs: Vec<_> = shots
        .iter()
        .map(|s| rim_relative(s, &court))
        .filter_map(|s| cutoff_at_distance(&s, 5.0))
        .collect();
    println!("{} sequences at 5 ft cutoff", seqs.len());

    let ids: Vec<u64> = seqs.iter().map(|s| s.id).collect();
    let split = pareto_split(&ids, 1).unwrap();
    let train_seqs: Vec<_> = seqs
        .iter()
        .filter(|s| split.train_ids.contains(&s.id))
        .cloned()
        .collect();
    let test_seqs: Vec<_> = seqs
        .iter()
        .filter(|s| split.test_ids.contains(&s.id))
        .cloned()
        .collect();

    // Individual physics-feature AUCs on the raw (unstandardized) test split.
    let labels: Vec<u8> = test_seqs.iter().map(|s| s.label).collect();
    for (k, name) in ["rim_dist", "v_z", "entry_angle"].iter().enumerate() {
        let scores: Vec<f64> = test_seqs.iter().map(|s| physics_features(s)[k]).collect();
        let auc = roc_auc(&scores, &labels).unwrap().auc;
        println!("feature {name}: auc {auc:.3} (or flipped {:.3})", 1.0 - auc);
    }
    let b = baseline_logistic(&train_seqs, &test_seqs).unwrap();
    println!("logistic baseline auc {:.3}", b.auc);

    let (std_train, stats) = standardize(&train_seqs, &train_seqs).unwrap();
    let std_test = apply_stats(&test_seqs, &stats);
    println!("stats mean {:?} std {:?}", stats.mean, stats.std);
    let train = sequences_to_samples(&std_train);
    let test = sequences_to_samples(&std_test);

    let mut rng = SeededRng::new(3).substream(StreamPurpose::Init, 0);
    let model = ModelParams::init(ModelConfig::default(), &mut rng).unwrap();
    let cfg = TrainConfig {
        task: TaskKind::Classify,
        epochs,
        mdn_loss_weight: lambda,
        early_stop_window: 10,
        early_stop_factor: 0.9,
        // Disable stopping for the probe by using the rise rule with a
        // huge window.
        early_stop_mode: EarlyStopMode::RiseAboveInverse,
        seed: 11,
        ..TrainConfig::default()
    };
    let t0 = std::time::Instant::now();
    let (_, report) = fit(model, &train, &test, &cfg).unwrap();
    println!("fit {:?}, stop epoch {}", t0.elapsed(), report.stop_epoch);
    for e in 0..report.val_auc.len() {
        println!(
            "epoch {:>3}: train {:>9.4} val {:>9.4} auc {:.3}",
            e + 1,
            report.train_loss[e],
            report.val_loss[e],
            report.val_auc[e]
        );
    }
}

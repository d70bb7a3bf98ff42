//! Scratch probe for sweep timing and AUC quality at realistic scale.
//! Run: cargo run --release -p shotarc --example sweep_probe [n_shots] [epochs] [units]

use shotarc::dataforge::{CourtSpec, SynthConfig, synth_generate};
use shotarc::evalkit::{SweepConfig, distance_sweep};
use shotarc::seqnet::ModelConfig;
use shotarc::trainer::{TaskKind, TrainConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n_shots: usize = args.get(1).map_or(2000, |s| s.parse().unwrap());
    let epochs: usize = args.get(2).map_or(20, |s| s.parse().unwrap());
    let units: usize = args.get(3).map_or(64, |s| s.parse().unwrap());

    let court = CourtSpec::default();
    let t0 = std::time::Instant::now();
    let shots = synth_generate(
        &SynthConfig {
            n_shots,
            seed: 7,
            ..SynthConfig::default()
        },
        &court,
    )
    .unwrap();
    let rate = shots.iter().filter(|s| s.hit).count() as f64 / shots.len() as f64;
    println!("synth: {} shots, hit rate {rate:.3}, {:?}", shots.len(), t0.elapsed());

    let cfg = SweepConfig {
        cutoffs_ft: vec![2.0, 5.0, 8.0],
        model: ModelConfig {
            units_per_layer: units,
            ..ModelConfig::default()
        },
        train: TrainConfig {
            task: TaskKind::Classify,
            epochs,
            seed: 11,
            ..TrainConfig::default()
        },
        ..SweepConfig::default()
    };
    let t1 = std::time::Instant::now();
    let report = distance_sweep(&shots, &court, &cfg).unwrap();
    println!("sweep total: {:?}", t1.elapsed());
    print!("{}", report.to_csv());
}

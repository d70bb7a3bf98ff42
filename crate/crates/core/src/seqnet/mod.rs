//! The deep bidirectional LSTM network: cell equations, layer stacking,
//! the classification and mixture heads, and exact analytic gradients
//! for all of it via backpropagation through time.

mod checkpoint;
mod layer;
mod lstm;
mod model;

pub use checkpoint::{Checkpoint, load_checkpoint, save_checkpoint};
pub use layer::{BlstmLayerParams, ProjActivation, blstm_layer_forward};
pub use lstm::{LstmParams, LstmState, lstm_step};
pub use model::{
    GradCheckReport, LossSpec, ModelConfig, ModelParams, Sample, StackOutput, backward, batch_loss,
    grad_check, predict_next_mixture, stack_forward,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::{SeededRng, StreamPurpose, finite_diff_grad, sigmoid};

    fn small_config() -> ModelConfig {
        ModelConfig {
            num_layers: 2,
            units_per_layer: 8,
            components: 3,
            seq_len: 12,
            input_dim: 4,
            bidirectional: true,
        }
    }

    fn random_batch(rng: &mut SeededRng, config: &ModelConfig, n: usize) -> Vec<Sample> {
        (0..n)
            .map(|_| Sample {
                features: (0..config.seq_len)
                    .map(|_| {
                        [
                            rng.gaussian(),
                            rng.gaussian(),
                            rng.gaussian(),
                            rng.gaussian(),
                        ]
                    })
                    .collect(),
                label: if rng.uniform() < 0.5 { 0.0 } else { 1.0 },
            })
            .collect()
    }

    #[test]
    fn zero_model_gives_uninformative_logit() {
        let model = ModelParams::zeros(small_config()).unwrap();
        let xs = vec![[0.5, -1.0, 0.25, 2.0]; 12];
        let out = stack_forward(&model, &xs).unwrap();
        assert_eq!(out.logit, 0.0);
        assert_eq!(sigmoid(out.logit), 0.5);
    }

    #[test]
    fn mdn_head_width_is_eight_per_component() {
        let config = ModelConfig {
            units_per_layer: 64,
            ..small_config()
        };
        let mut rng = SeededRng::new(1).substream(StreamPurpose::Init, 0);
        let model = ModelParams::init(config, &mut rng).unwrap();
        let xs = vec![[0.1, 0.2, 0.3, 0.4]; 12];
        let out = stack_forward(&model, &xs).unwrap();
        assert_eq!(out.raw_mdn.len(), 12);
        assert_eq!(out.raw_mdn[0].num_components(), 3);
        assert_eq!(model.mdn_w.rows(), 24);
    }

    #[test]
    fn wrong_sequence_length_is_shape_error() {
        let model = ModelParams::zeros(small_config()).unwrap();
        let xs = vec![[0.0; 4]; 10];
        assert!(stack_forward(&model, &xs).is_err());
    }

    #[test]
    fn blstm_split_has_fewer_params_than_full_width_lstm() {
        let blstm = ModelParams::zeros(ModelConfig {
            units_per_layer: 64,
            bidirectional: true,
            ..small_config()
        })
        .unwrap();
        let lstm = ModelParams::zeros(ModelConfig {
            units_per_layer: 64,
            bidirectional: false,
            ..small_config()
        })
        .unwrap();
        assert!(
            blstm.num_params() < lstm.num_params(),
            "blstm {} vs lstm {}",
            blstm.num_params(),
            lstm.num_params()
        );
    }

    #[test]
    fn doubled_seq_len_keeps_zero_logit_at_zero() {
        let config = ModelConfig {
            seq_len: 24,
            ..small_config()
        };
        let model = ModelParams::zeros(config).unwrap();
        let mut xs = Vec::new();
        for t in 0..12 {
            let frame = [t as f64, -(t as f64), 0.5, 1.0];
            xs.push(frame);
            xs.push(frame);
        }
        let out = stack_forward(&model, &xs).unwrap();
        assert_eq!(out.logit, 0.0);
    }

    #[test]
    fn every_gradient_coordinate_matches_finite_differences() {
        let (model, batch) = model::gradcheck_problem(31, small_config()).unwrap();
        let spec = LossSpec {
            bce_weight: 1.0,
            nll_weight: 1.0,
        };

        let (_, grads) = backward(&model, &batch, &spec).unwrap();
        let analytic = grads.to_flat();
        let theta = model.to_flat();
        let probe = model.clone();
        let batch_for_f = batch.clone();
        let numeric = finite_diff_grad(
            move |flat: &[f64]| {
                let mut m = probe.clone();
                m.set_from_flat(flat).unwrap();
                batch_loss(&m, &batch_for_f, &spec).unwrap_or(f64::NAN)
            },
            &theta,
            1e-5,
        )
        .unwrap();

        let mut max_rel: f64 = 0.0;
        for (i, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
            let rel = (a - n).abs() / a.abs().max(n.abs()).max(1e-3);
            assert!(
                rel < 1e-4,
                "coordinate {} ({}) rel err {rel}",
                i,
                model.describe_coord(i)
            );
            max_rel = max_rel.max(rel);
        }
        assert!(max_rel < 1e-4, "max rel err {max_rel}");
    }

    #[test]
    fn zero_weighted_loss_terms_contribute_no_gradient() {
        let root = SeededRng::new(7);
        let mut init_rng = root.substream(StreamPurpose::Init, 0);
        let model = ModelParams::init(small_config(), &mut init_rng).unwrap();
        let mut data_rng = root.substream(StreamPurpose::GradCheck, 0);
        let batch = random_batch(&mut data_rng, &model.config, 2);

        let (_, g) = backward(&model, &batch, &LossSpec::generate()).unwrap();
        assert!(g.cls_w.as_slice().iter().all(|&v| v == 0.0));
        assert_eq!(g.cls_b[0], 0.0);

        let (_, g) = backward(&model, &batch, &LossSpec::classify(0.0)).unwrap();
        assert!(g.mdn_w.as_slice().iter().all(|&v| v == 0.0));
        assert!(g.mdn_b.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cls_bias_gradient_is_sigmoid_minus_label() {
        let root = SeededRng::new(13);
        let mut init_rng = root.substream(StreamPurpose::Init, 0);
        let model = ModelParams::init(small_config(), &mut init_rng).unwrap();
        let mut data_rng = root.substream(StreamPurpose::GradCheck, 0);
        let mut batch = random_batch(&mut data_rng, &model.config, 1);
        batch[0].label = 1.0;

        let xs = batch[0].features.clone();
        let out = stack_forward(&model, &xs).unwrap();
        let (_, g) = backward(&model, &batch, &LossSpec::classify(0.0)).unwrap();
        let expect = sigmoid(out.logit) - 1.0;
        assert!((g.cls_b[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn grad_check_passes_and_fault_injection_fails() {
        let report = grad_check(42, 100, None).unwrap();
        assert!(report.passed, "max rel err {}", report.max_rel_err);
        assert_eq!(report.coords_checked, 100);

        let corrupted = grad_check(42, 2000, Some(123)).unwrap();
        assert!(!corrupted.passed);
        assert!(!corrupted.worst_coord.is_empty());
    }

    #[test]
    fn grad_check_is_seed_independent() {
        for seed in [1, 999] {
            let report = grad_check(seed, 50, None).unwrap();
            assert!(report.passed, "seed {seed}: {}", report.max_rel_err);
        }
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact() {
        let mut rng = SeededRng::new(77).substream(StreamPurpose::Init, 0);
        let model = ModelParams::init(small_config(), &mut rng).unwrap();
        let ckpt = Checkpoint {
            model,
            feature_mean: [0.123456789012345, -3.5, 1e-12, 700.25],
            feature_std: [1.0, 2.5, 0.3333333333333333, 12.0],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&ckpt, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(ckpt, loaded);

        // Saving the loaded copy reproduces the file byte for byte.
        let path2 = dir.path().join("model2.ckpt");
        save_checkpoint(&loaded, &path2).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }

    #[test]
    fn checkpoint_rejects_corrupted_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ckpt");
        std::fs::write(&path, "not a checkpoint\n").unwrap();
        assert!(load_checkpoint(&path).is_err());
    }
}

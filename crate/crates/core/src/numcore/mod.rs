//! Dense numeric primitives: matrices, activations, seeded randomness,
//! and the finite-difference gradient oracle.

mod fdiff;
mod matrix;
mod rng;

pub use fdiff::{finite_diff_grad, finite_diff_grad_at};
pub use matrix::{Activation, Matrix, activate, matmul, relu, sigmoid, softplus};
pub use rng::{SeededRng, StreamPurpose};

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn small_matrix() -> impl Strategy<Value = Matrix> {
        proptest::collection::vec(-10.0..10.0f64, 16)
            .prop_map(|data| Matrix::from_vec(4, 4, data).unwrap())
    }

    proptest! {
        #[test]
        fn matmul_is_associative(a in small_matrix(), b in small_matrix(), c in small_matrix()) {
            let left = matmul(&matmul(&a, &b).unwrap(), &c).unwrap();
            let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
            for (l, r) in left.as_slice().iter().zip(right.as_slice()) {
                prop_assert!((l - r).abs() < 1e-10);
            }
        }

        #[test]
        fn sigmoid_symmetry(v in -10.0..10.0f64) {
            prop_assert!((sigmoid(v) + sigmoid(-v) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn relu_idempotent(v in proptest::num::f64::NORMAL) {
            prop_assert_eq!(relu(relu(v)), relu(v));
        }
    }
}

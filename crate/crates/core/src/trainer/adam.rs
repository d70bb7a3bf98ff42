use crate::error::{Error, Result};
use crate::seqnet::ModelParams;

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamHyper {
    pub fn with_lr(lr: f64) -> Self {
        AdamHyper {
            lr,
            ..AdamHyper::default()
        }
    }
}

/// First/second moment accumulators, one buffer per parameter tensor in
/// declaration order.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub hyper: AdamHyper,
    pub step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(params: &ModelParams, hyper: AdamHyper) -> Self {
        let mut m = Vec::new();
        params.for_each_tensor(&mut |_, t| m.push(vec![0.0; t.len()]));
        let v = m.clone();
        AdamState {
            hyper,
            step: 0,
            m,
            v,
        }
    }

    /// One Adam update with bias correction:
    /// m ← β₁m + (1−β₁)g; v ← β₂v + (1−β₂)g²;
    /// θ ← θ − lr·m̂/(√v̂ + ε).
    pub fn step(&mut self, params: &mut ModelParams, grads: &ModelParams) -> Result<()> {
        let mut finite = true;
        grads.for_each_tensor(&mut |_, t| {
            finite &= t.iter().all(|g| g.is_finite());
        });
        if !finite {
            return Err(Error::Train {
                context: format!("adam step {}", self.step + 1),
                message: "non-finite gradient".into(),
            });
        }

        self.step += 1;
        let h = self.hyper;
        let bc1 = 1.0 - h.beta1.powi(self.step as i32);
        let bc2 = 1.0 - h.beta2.powi(self.step as i32);

        let mut idx = 0;
        let m = &mut self.m;
        let v = &mut self.v;
        let mut grad_slices: Vec<&[f64]> = Vec::new();
        grads.for_each_tensor(&mut |_, t| grad_slices.push(t));
        params.for_each_tensor_mut(&mut |_, theta| {
            let g = grad_slices[idx];
            let m_t = &mut m[idx];
            let v_t = &mut v[idx];
            debug_assert_eq!(theta.len(), g.len());
            for k in 0..theta.len() {
                m_t[k] = h.beta1 * m_t[k] + (1.0 - h.beta1) * g[k];
                v_t[k] = h.beta2 * v_t[k] + (1.0 - h.beta2) * g[k] * g[k];
                let m_hat = m_t[k] / bc1;
                let v_hat = v_t[k] / bc2;
                theta[k] -= h.lr * m_hat / (v_hat.sqrt() + h.eps);
            }
            idx += 1;
        });
        Ok(())
    }
}

/// Scale gradients so their global L2 norm does not exceed `max_norm`.
pub fn clip_global_norm(grads: &mut ModelParams, max_norm: f64) {
    if !max_norm.is_finite() || max_norm <= 0.0 {
        return;
    }
    let mut sq = 0.0;
    grads.for_each_tensor(&mut |_, t| {
        for g in t {
            sq += g * g;
        }
    });
    let norm = sq.sqrt();
    if norm > max_norm {
        let scale = max_norm / norm;
        grads.for_each_tensor_mut(&mut |_, t| {
            for g in t {
                *g *= scale;
            }
        });
    }
}

use crate::error::{Error, Result};
use crate::numcore::{Matrix, SeededRng, relu};

use super::lstm::{LstmParams, ScanCache, scan, scan_backward};

/// Projection nonlinearity applied to a layer's per-timestep output:
/// ReLU between stacked layers, identity in front of the heads so raw
/// mixture values and the logit stay unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjActivation {
    Relu,
    Identity,
}

/// One recurrent layer: a forward LSTM, an optional backward LSTM, and
/// the output projection combining both directions per timestep.
///
/// Bidirectional layers split their units evenly across directions; a
/// unidirectional layer (`backward = None`) gives the forward LSTM the
/// full width.
#[derive(Debug, Clone, PartialEq)]
pub struct BlstmLayerParams {
    pub forward: LstmParams,
    pub backward: Option<LstmParams>,
    pub w_fy: Matrix,
    pub w_by: Option<Matrix>,
    pub b_y: Vec<f64>,
}

impl BlstmLayerParams {
    pub fn zeros(input_dim: usize, units: usize, bidirectional: bool) -> Self {
        let hidden = if bidirectional { units / 2 } else { units };
        BlstmLayerParams {
            forward: LstmParams::zeros(input_dim, hidden),
            backward: bidirectional.then(|| LstmParams::zeros(input_dim, hidden)),
            w_fy: Matrix::zeros(units, hidden),
            w_by: bidirectional.then(|| Matrix::zeros(units, hidden)),
            b_y: vec![0.0; units],
        }
    }

    pub fn init(input_dim: usize, units: usize, bidirectional: bool, rng: &mut SeededRng) -> Self {
        let hidden = if bidirectional { units / 2 } else { units };
        let proj_scale = 1.0 / (hidden as f64).sqrt();
        let mut init_proj = |rows: usize, cols: usize| {
            let mut m = Matrix::zeros(rows, cols);
            for v in m.as_mut_slice() {
                *v = rng.uniform_range(-proj_scale, proj_scale);
            }
            m
        };
        let w_fy = init_proj(units, hidden);
        let w_by = bidirectional.then(|| init_proj(units, hidden));
        BlstmLayerParams {
            forward: LstmParams::init(input_dim, hidden, rng),
            backward: bidirectional.then(|| LstmParams::init(input_dim, hidden, rng)),
            w_fy,
            w_by,
            b_y: vec![0.0; units],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.forward.input_dim()
    }

    pub fn hidden_dim(&self) -> usize {
        self.forward.hidden_dim()
    }

    pub fn units(&self) -> usize {
        self.b_y.len()
    }

    pub fn is_bidirectional(&self) -> bool {
        self.backward.is_some()
    }

    pub fn for_each_tensor<'a>(&'a self, prefix: &str, f: &mut impl FnMut(&str, &'a [f64])) {
        self.forward.for_each_tensor(&format!("{prefix}.fwd"), f);
        if let Some(bwd) = &self.backward {
            bwd.for_each_tensor(&format!("{prefix}.bwd"), f);
        }
        f(&format!("{prefix}.w_fy"), self.w_fy.as_slice());
        if let Some(w_by) = &self.w_by {
            f(&format!("{prefix}.w_by"), w_by.as_slice());
        }
        f(&format!("{prefix}.b_y"), &self.b_y);
    }

    pub fn for_each_tensor_mut(&mut self, prefix: &str, f: &mut impl FnMut(&str, &mut [f64])) {
        self.forward
            .for_each_tensor_mut(&format!("{prefix}.fwd"), f);
        if let Some(bwd) = &mut self.backward {
            bwd.for_each_tensor_mut(&format!("{prefix}.bwd"), f);
        }
        f(&format!("{prefix}.w_fy"), self.w_fy.as_mut_slice());
        if let Some(w_by) = &mut self.w_by {
            f(&format!("{prefix}.w_by"), w_by.as_mut_slice());
        }
        f(&format!("{prefix}.b_y"), &mut self.b_y);
    }
}

/// Forward activations of one layer over a full sequence.
#[derive(Debug, Clone)]
pub(crate) struct LayerCache {
    pub fwd: ScanCache,
    pub bwd: Option<ScanCache>,
    /// Projection pre-activation per timestep.
    pub preact: Vec<Vec<f64>>,
    /// Layer output per timestep, after the projection nonlinearity.
    pub outputs: Vec<Vec<f64>>,
}

pub(crate) fn layer_forward_cached(
    p: &BlstmLayerParams,
    xs: &[Vec<f64>],
    activation: ProjActivation,
) -> LayerCache {
    let t_len = xs.len();
    let units = p.units();
    let fwd = scan(&p.forward, xs, false);
    let bwd = p.backward.as_ref().map(|bp| scan(bp, xs, true));

    let mut preact = Vec::with_capacity(t_len);
    let mut outputs = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let mut u = p.b_y.clone();
        p.w_fy.matvec_add(&fwd.steps[t].h, &mut u);
        if let (Some(w_by), Some(bwd)) = (&p.w_by, &bwd) {
            // Backward scan step T-1-t saw timestep t.
            w_by.matvec_add(&bwd.steps[t_len - 1 - t].h, &mut u);
        }
        let y: Vec<f64> = match activation {
            ProjActivation::Relu => u.iter().map(|&v| relu(v)).collect(),
            ProjActivation::Identity => u.clone(),
        };
        debug_assert_eq!(y.len(), units);
        preact.push(u);
        outputs.push(y);
    }
    LayerCache {
        fwd,
        bwd,
        preact,
        outputs,
    }
}

/// Run one bidirectional layer over a sequence: both directions scan
/// from zero initial state and the projection combines them per step.
pub fn blstm_layer_forward(
    p: &BlstmLayerParams,
    xs: &[Vec<f64>],
    activation: ProjActivation,
) -> Result<Vec<Vec<f64>>> {
    if xs.is_empty() {
        return Err(Error::Domain("blstm_layer_forward: empty sequence".into()));
    }
    for (t, x) in xs.iter().enumerate() {
        if x.len() != p.input_dim() {
            return Err(Error::Shape {
                op: "blstm_layer_forward",
                left: format!("input dim {}", p.input_dim()),
                right: format!("x[{t}] len {}", x.len()),
            });
        }
    }
    Ok(layer_forward_cached(p, xs, activation).outputs)
}

/// Reverse-mode pass through one layer.
///
/// `d_outputs` is the gradient on the layer outputs y_t; `d_h_extra_fwd`
/// and `d_h_extra_bwd` are classifier-head injections at the final scan
/// step of each direction (the top layer only). Returns the gradient on
/// the layer inputs, time-indexed.
#[allow(clippy::too_many_arguments)]
pub(crate) fn layer_backward(
    p: &BlstmLayerParams,
    xs: &[Vec<f64>],
    cache: &LayerCache,
    activation: ProjActivation,
    d_outputs: &[Vec<f64>],
    d_h_extra_fwd: Option<&[f64]>,
    d_h_extra_bwd: Option<&[f64]>,
    grads: &mut BlstmLayerParams,
) -> Vec<Vec<f64>> {
    let t_len = xs.len();
    let hidden = p.hidden_dim();

    // Gradient arriving at each direction's h, indexed by scan step.
    let mut d_h_fwd = vec![vec![0.0; hidden]; t_len];
    let mut d_h_bwd = vec![vec![0.0; hidden]; t_len];

    for t in 0..t_len {
        // Through the projection nonlinearity.
        let du: Vec<f64> = match activation {
            ProjActivation::Relu => cache.preact[t]
                .iter()
                .zip(&d_outputs[t])
                .map(|(&u, &d)| if u > 0.0 { d } else { 0.0 })
                .collect(),
            ProjActivation::Identity => d_outputs[t].clone(),
        };
        grads.w_fy.outer_add(&du, &cache.fwd.steps[t].h);
        for (g, d) in grads.b_y.iter_mut().zip(&du) {
            *g += d;
        }
        p.w_fy.matvec_t_add(&du, &mut d_h_fwd[t]);
        if let (Some(w_by), Some(bwd_cache)) = (&p.w_by, &cache.bwd) {
            let s = t_len - 1 - t;
            grads
                .w_by
                .as_mut()
                .expect("grads shape matches params")
                .outer_add(&du, &bwd_cache.steps[s].h);
            w_by.matvec_t_add(&du, &mut d_h_bwd[s]);
        }
    }

    if let Some(extra) = d_h_extra_fwd {
        for (slot, e) in d_h_fwd[t_len - 1].iter_mut().zip(extra) {
            *slot += e;
        }
    }
    if let Some(extra) = d_h_extra_bwd {
        for (slot, e) in d_h_bwd[t_len - 1].iter_mut().zip(extra) {
            *slot += e;
        }
    }

    let mut dx = vec![vec![0.0; p.input_dim()]; t_len];
    scan_backward(
        &p.forward,
        xs,
        false,
        &cache.fwd,
        &d_h_fwd,
        &mut grads.forward,
        &mut dx,
    );
    if let (Some(bp), Some(bwd_cache)) = (&p.backward, &cache.bwd) {
        scan_backward(
            bp,
            xs,
            true,
            bwd_cache,
            &d_h_bwd,
            grads.backward.as_mut().expect("grads shape matches params"),
            &mut dx,
        );
    }
    dx
}

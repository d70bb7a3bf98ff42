use crate::error::{Error, Result};
use crate::numcore::{Matrix, SeededRng, sigmoid};

/// All weights and biases of one LSTM direction.
///
/// Gate order follows the cell equations: forget, input, output, candidate.
/// `w_x*` maps the step input, `w_h*` the previous hidden state.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub w_xf: Matrix,
    pub w_hf: Matrix,
    pub b_f: Vec<f64>,
    pub w_xi: Matrix,
    pub w_hi: Matrix,
    pub b_i: Vec<f64>,
    pub w_xo: Matrix,
    pub w_ho: Matrix,
    pub b_o: Vec<f64>,
    pub w_xc: Matrix,
    pub w_hc: Matrix,
    pub b_c: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        LstmParams {
            w_xf: Matrix::zeros(hidden_dim, input_dim),
            w_hf: Matrix::zeros(hidden_dim, hidden_dim),
            b_f: vec![0.0; hidden_dim],
            w_xi: Matrix::zeros(hidden_dim, input_dim),
            w_hi: Matrix::zeros(hidden_dim, hidden_dim),
            b_i: vec![0.0; hidden_dim],
            w_xo: Matrix::zeros(hidden_dim, input_dim),
            w_ho: Matrix::zeros(hidden_dim, hidden_dim),
            b_o: vec![0.0; hidden_dim],
            w_xc: Matrix::zeros(hidden_dim, input_dim),
            w_hc: Matrix::zeros(hidden_dim, hidden_dim),
            b_c: vec![0.0; hidden_dim],
        }
    }

    /// Uniform init in [-1/√fan_in, 1/√fan_in]; biases start at zero.
    pub fn init(input_dim: usize, hidden_dim: usize, rng: &mut SeededRng) -> Self {
        let mut p = LstmParams::zeros(input_dim, hidden_dim);
        p.for_each_matrix_mut(&mut |m: &mut Matrix| {
            let scale = 1.0 / (m.cols() as f64).sqrt();
            for v in m.as_mut_slice() {
                *v = rng.uniform_range(-scale, scale);
            }
        });
        p
    }

    pub fn input_dim(&self) -> usize {
        self.w_xf.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_xf.rows()
    }

    fn for_each_matrix_mut(&mut self, f: &mut impl FnMut(&mut Matrix)) {
        f(&mut self.w_xf);
        f(&mut self.w_hf);
        f(&mut self.w_xi);
        f(&mut self.w_hi);
        f(&mut self.w_xo);
        f(&mut self.w_ho);
        f(&mut self.w_xc);
        f(&mut self.w_hc);
    }

    /// Visit every tensor in declaration order (weights and biases).
    pub fn for_each_tensor<'a>(&'a self, prefix: &str, f: &mut impl FnMut(&str, &'a [f64])) {
        f(&format!("{prefix}.w_xf"), self.w_xf.as_slice());
        f(&format!("{prefix}.w_hf"), self.w_hf.as_slice());
        f(&format!("{prefix}.b_f"), &self.b_f);
        f(&format!("{prefix}.w_xi"), self.w_xi.as_slice());
        f(&format!("{prefix}.w_hi"), self.w_hi.as_slice());
        f(&format!("{prefix}.b_i"), &self.b_i);
        f(&format!("{prefix}.w_xo"), self.w_xo.as_slice());
        f(&format!("{prefix}.w_ho"), self.w_ho.as_slice());
        f(&format!("{prefix}.b_o"), &self.b_o);
        f(&format!("{prefix}.w_xc"), self.w_xc.as_slice());
        f(&format!("{prefix}.w_hc"), self.w_hc.as_slice());
        f(&format!("{prefix}.b_c"), &self.b_c);
    }

    pub fn for_each_tensor_mut(&mut self, prefix: &str, f: &mut impl FnMut(&str, &mut [f64])) {
        f(&format!("{prefix}.w_xf"), self.w_xf.as_mut_slice());
        f(&format!("{prefix}.w_hf"), self.w_hf.as_mut_slice());
        f(&format!("{prefix}.b_f"), &mut self.b_f);
        f(&format!("{prefix}.w_xi"), self.w_xi.as_mut_slice());
        f(&format!("{prefix}.w_hi"), self.w_hi.as_mut_slice());
        f(&format!("{prefix}.b_i"), &mut self.b_i);
        f(&format!("{prefix}.w_xo"), self.w_xo.as_mut_slice());
        f(&format!("{prefix}.w_ho"), self.w_ho.as_mut_slice());
        f(&format!("{prefix}.b_o"), &mut self.b_o);
        f(&format!("{prefix}.w_xc"), self.w_xc.as_mut_slice());
        f(&format!("{prefix}.w_hc"), self.w_hc.as_mut_slice());
        f(&format!("{prefix}.b_c"), &mut self.b_c);
    }
}

/// Hidden and cell state of one LSTM direction at one timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden_dim: usize) -> Self {
        LstmState {
            h: vec![0.0; hidden_dim],
            c: vec![0.0; hidden_dim],
        }
    }
}

/// Post-activation cell internals for one step, kept for backprop.
#[derive(Debug, Clone)]
pub(crate) struct StepCache {
    pub f: Vec<f64>,
    pub i: Vec<f64>,
    pub o: Vec<f64>,
    pub g: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

fn step_cached(p: &LstmParams, x: &[f64], prev: &LstmState) -> StepCache {
    let hd = p.hidden_dim();
    let mut pre_f = p.b_f.clone();
    let mut pre_i = p.b_i.clone();
    let mut pre_o = p.b_o.clone();
    let mut pre_g = p.b_c.clone();
    p.w_xf.matvec_add(x, &mut pre_f);
    p.w_hf.matvec_add(&prev.h, &mut pre_f);
    p.w_xi.matvec_add(x, &mut pre_i);
    p.w_hi.matvec_add(&prev.h, &mut pre_i);
    p.w_xo.matvec_add(x, &mut pre_o);
    p.w_ho.matvec_add(&prev.h, &mut pre_o);
    p.w_xc.matvec_add(x, &mut pre_g);
    p.w_hc.matvec_add(&prev.h, &mut pre_g);

    let mut cache = StepCache {
        f: pre_f,
        i: pre_i,
        o: pre_o,
        g: pre_g,
        c: vec![0.0; hd],
        tanh_c: vec![0.0; hd],
        h: vec![0.0; hd],
    };
    for k in 0..hd {
        cache.f[k] = sigmoid(cache.f[k]);
        cache.i[k] = sigmoid(cache.i[k]);
        cache.o[k] = sigmoid(cache.o[k]);
        cache.g[k] = cache.g[k].tanh();
        cache.c[k] = cache.f[k] * prev.c[k] + cache.i[k] * cache.g[k];
        cache.tanh_c[k] = cache.c[k].tanh();
        cache.h[k] = cache.o[k] * cache.tanh_c[k];
    }
    cache
}

/// One LSTM cell update:
///
/// ```text
/// f,i,o = σ(W_x·x + W_h·h₋ + b)
/// c     = f⊙c₋ + i⊙tanh(W_hc·h₋ + W_xc·x + b_c)
/// h     = o⊙tanh(c)
/// ```
pub fn lstm_step(p: &LstmParams, x: &[f64], prev: &LstmState) -> Result<LstmState> {
    if x.len() != p.input_dim() {
        return Err(Error::Shape {
            op: "lstm_step",
            left: format!("input dim {}", p.input_dim()),
            right: format!("x len {}", x.len()),
        });
    }
    if prev.h.len() != p.hidden_dim() || prev.c.len() != p.hidden_dim() {
        return Err(Error::Shape {
            op: "lstm_step",
            left: format!("hidden dim {}", p.hidden_dim()),
            right: format!("state dims {}/{}", prev.h.len(), prev.c.len()),
        });
    }
    let cache = step_cached(p, x, prev);
    Ok(LstmState {
        h: cache.h,
        c: cache.c,
    })
}

/// Cached activations of one directional scan, indexed by scan step.
#[derive(Debug, Clone)]
pub(crate) struct ScanCache {
    pub steps: Vec<StepCache>,
}

impl ScanCache {
    pub fn final_h(&self) -> &[f64] {
        &self.steps.last().expect("non-empty scan").h
    }
}

/// Scan a sequence from zero initial state. With `reverse`, the scan
/// consumes inputs from the last timestep backwards; step s of the cache
/// then corresponds to timestep T-1-s.
pub(crate) fn scan(p: &LstmParams, xs_time: &[Vec<f64>], reverse: bool) -> ScanCache {
    let t_len = xs_time.len();
    let mut steps = Vec::with_capacity(t_len);
    let mut state = LstmState::zeros(p.hidden_dim());
    for s in 0..t_len {
        let t = if reverse { t_len - 1 - s } else { s };
        let cache = step_cached(p, &xs_time[t], &state);
        state.h.clone_from(&cache.h);
        state.c.clone_from(&cache.c);
        steps.push(cache);
    }
    ScanCache { steps }
}

/// Reverse-mode pass through one directional scan.
///
/// `d_h_scan[s]` carries the external gradient arriving at h of scan step
/// s (projection contributions, plus the classifier injection at the
/// final scan step). Parameter gradients accumulate into `grads`; input
/// gradients accumulate into `dx_time` (time-indexed).
pub(crate) fn scan_backward(
    p: &LstmParams,
    xs_time: &[Vec<f64>],
    reverse: bool,
    cache: &ScanCache,
    d_h_scan: &[Vec<f64>],
    grads: &mut LstmParams,
    dx_time: &mut [Vec<f64>],
) {
    let t_len = xs_time.len();
    let hd = p.hidden_dim();
    let mut dh_carry = vec![0.0; hd];
    let mut dc_carry = vec![0.0; hd];
    let mut df = vec![0.0; hd];
    let mut di = vec![0.0; hd];
    let mut do_ = vec![0.0; hd];
    let mut dg = vec![0.0; hd];

    for s in (0..t_len).rev() {
        let t = if reverse { t_len - 1 - s } else { s };
        let step = &cache.steps[s];
        let (h_prev, c_prev) = if s == 0 {
            (None, None)
        } else {
            let prev = &cache.steps[s - 1];
            (Some(&prev.h), Some(&prev.c))
        };

        for k in 0..hd {
            let dh = d_h_scan[s][k] + dh_carry[k];
            let dc = dc_carry[k] + dh * step.o[k] * (1.0 - step.tanh_c[k] * step.tanh_c[k]);
            let cp = c_prev.map_or(0.0, |c| c[k]);
            do_[k] = dh * step.tanh_c[k] * step.o[k] * (1.0 - step.o[k]);
            df[k] = dc * cp * step.f[k] * (1.0 - step.f[k]);
            di[k] = dc * step.g[k] * step.i[k] * (1.0 - step.i[k]);
            dg[k] = dc * step.i[k] * (1.0 - step.g[k] * step.g[k]);
            dc_carry[k] = dc * step.f[k];
        }

        let x = &xs_time[t];
        grads.w_xf.outer_add(&df, x);
        grads.w_xi.outer_add(&di, x);
        grads.w_xo.outer_add(&do_, x);
        grads.w_xc.outer_add(&dg, x);
        for k in 0..hd {
            grads.b_f[k] += df[k];
            grads.b_i[k] += di[k];
            grads.b_o[k] += do_[k];
            grads.b_c[k] += dg[k];
        }
        if let Some(hp) = h_prev {
            grads.w_hf.outer_add(&df, hp);
            grads.w_hi.outer_add(&di, hp);
            grads.w_ho.outer_add(&do_, hp);
            grads.w_hc.outer_add(&dg, hp);
        }

        // Carry to the previous scan step.
        dh_carry.fill(0.0);
        p.w_hf.matvec_t_add(&df, &mut dh_carry);
        p.w_hi.matvec_t_add(&di, &mut dh_carry);
        p.w_ho.matvec_t_add(&do_, &mut dh_carry);
        p.w_hc.matvec_t_add(&dg, &mut dh_carry);

        p.w_xf.matvec_t_add(&df, &mut dx_time[t]);
        p.w_xi.matvec_t_add(&di, &mut dx_time[t]);
        p.w_xo.matvec_t_add(&do_, &mut dx_time[t]);
        p.w_xc.matvec_t_add(&dg, &mut dx_time[t]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::StreamPurpose;

    #[test]
    fn zero_everything_gives_zero_state() {
        let p = LstmParams::zeros(3, 2);
        let prev = LstmState::zeros(2);
        let next = lstm_step(&p, &[0.0, 0.0, 0.0], &prev).unwrap();
        assert_eq!(next.h, vec![0.0, 0.0]);
        assert_eq!(next.c, vec![0.0, 0.0]);
    }

    #[test]
    fn scalar_unit_hand_evaluation() {
        // Zero weights and input, c₋ = 2: gates all 0.5, candidate 0,
        // so c = 1.0 and h = 0.5·tanh(1).
        let p = LstmParams::zeros(1, 1);
        let prev = LstmState {
            h: vec![0.0],
            c: vec![2.0],
        };
        let next = lstm_step(&p, &[0.0], &prev).unwrap();
        assert!((next.c[0] - 1.0).abs() < 1e-15);
        assert!((next.h[0] - 0.5 * 1.0_f64.tanh()).abs() < 1e-12);
        assert!((next.h[0] - 0.380797).abs() < 1e-6);
    }

    #[test]
    fn saturating_preactivations_drive_gates_to_one() {
        let mut p = LstmParams::zeros(1, 1);
        p.b_f[0] = 100.0;
        p.b_i[0] = 100.0;
        p.b_o[0] = 100.0;
        let prev = LstmState {
            h: vec![0.0],
            c: vec![1.0],
        };
        let next = lstm_step(&p, &[0.0], &prev).unwrap();
        // f,i,o ≈ 1: c = c₋ + tanh(0) = 1, h = tanh(1).
        assert!((next.c[0] - 1.0).abs() < 1e-12);
        assert!((next.h[0] - 1.0_f64.tanh()).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let p = LstmParams::zeros(3, 2);
        let prev = LstmState::zeros(2);
        assert!(lstm_step(&p, &[1.0], &prev).is_err());
        let bad_state = LstmState::zeros(5);
        assert!(lstm_step(&p, &[0.0; 3], &bad_state).is_err());
    }

    #[test]
    fn hidden_state_strictly_inside_unit_interval() {
        let mut rng = SeededRng::new(99).substream(StreamPurpose::Init, 0);
        let p = LstmParams::init(4, 8, &mut rng);
        let mut state = LstmState::zeros(8);
        for step in 0..50 {
            let x: Vec<f64> = (0..4).map(|_| 10.0 * rng.gaussian()).collect();
            state = lstm_step(&p, &x, &state).unwrap();
            for &h in &state.h {
                assert!(h.abs() < 1.0, "|h|={h} at step {step}");
            }
            for &c in &state.c {
                assert!(c.is_finite());
            }
        }
    }

    #[test]
    fn reverse_scan_visits_inputs_backwards() {
        let mut rng = SeededRng::new(5).substream(StreamPurpose::Init, 1);
        let p = LstmParams::init(2, 3, &mut rng);
        let xs: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..2).map(|_| rng.gaussian()).collect())
            .collect();
        let fwd_on_reversed = {
            let mut rev = xs.clone();
            rev.reverse();
            scan(&p, &rev, false)
        };
        let bwd = scan(&p, &xs, true);
        for s in 0..4 {
            for k in 0..3 {
                assert!((fwd_on_reversed.steps[s].h[k] - bwd.steps[s].h[k]).abs() < 1e-15);
            }
        }
    }
}
